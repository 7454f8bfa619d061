#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pggp {

/// A scored candidate. Score is a probability in [0, 1].
struct ScoredItem {
  std::string group_id;
  double score = 0.0;
  int label = 0;
};

/// Candidates of one query, in input order.
struct ScoredGroup {
  std::string id;
  std::vector<double> scores;
  std::vector<int> labels;
};

/// Groups items by group_id, groups ordered by first appearance.
std::vector<ScoredGroup> group_items(std::span<const ScoredItem> items);

/// Positions of a group's candidates sorted by descending score; ties keep
/// input order.
std::vector<std::size_t> rank_order(const ScoredGroup& group);

/// Input to the calibration error: how confident the prediction was and
/// whether it was right.
struct ConfidenceItem {
  double confidence = 0.0;
  bool correct = false;
};

/// Binary-classification view of a probability: the prediction is
/// (score >= 0.5), its confidence max(score, 1 - score).
std::vector<ConfidenceItem> binary_confidence(std::span<const ScoredItem> items);

struct CalibrationBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;
  double mean_confidence = 0.0;  // 0 when the bin is empty
  double accuracy = 0.0;         // 0 when the bin is empty
};

struct CalibrationReport {
  std::vector<CalibrationBin> bins;
  double ece = 0.0;

  std::size_t n_bins() const { return bins.size(); }
  std::size_t n_items() const;
};

/// Index of the equal-width bin holding `score`: [i/C, (i+1)/C), the last
/// bin closed at 1.
std::size_t bin_index(double score, std::size_t n_bins);

/// Expected calibration error with equal-width bins. Empty bins contribute
/// nothing. Throws InvalidArgument on empty input, n_bins == 0 or a
/// confidence outside [0, 1].
CalibrationReport ece(std::span<const ConfidenceItem> items, std::size_t n_bins = 10);

/// Fraction of groups with a positive among their top-k candidates.
/// Throws InvalidArgument naming the first group without a positive.
double recall_at_k(std::span<const ScoredGroup> groups, std::size_t k);

/// Mean over groups of the average precision at the positive positions.
double mean_average_precision(std::span<const ScoredGroup> groups);

/// CSV: header bin_low,bin_high,count,mean_confidence,accuracy, one row per
/// bin (empty bins leave the last two fields blank), then "# ece=<value>".
void reliability_export(const CalibrationReport& report, const std::filesystem::path& path);
CalibrationReport reliability_import(const std::filesystem::path& path);

}  // namespace pggp
