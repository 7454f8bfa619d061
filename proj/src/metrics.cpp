#include "pggp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "pggp/errors.hpp"
#include "pggp/numfmt.hpp"

namespace pggp {

std::vector<ScoredGroup> group_items(std::span<const ScoredItem> items) {
  std::vector<ScoredGroup> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& item : items) {
    auto [it, inserted] = index.try_emplace(item.group_id, groups.size());
    if (inserted) groups.push_back(ScoredGroup{item.group_id, {}, {}});
    groups[it->second].scores.push_back(item.score);
    groups[it->second].labels.push_back(item.label);
  }
  return groups;
}

std::vector<std::size_t> rank_order(const ScoredGroup& group) {
  std::vector<std::size_t> order(group.scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return group.scores[a] > group.scores[b];
  });
  return order;
}

std::vector<ConfidenceItem> binary_confidence(std::span<const ScoredItem> items) {
  std::vector<ConfidenceItem> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    const bool predicted = item.score >= 0.5;
    out.push_back({std::max(item.score, 1.0 - item.score), predicted == (item.label == 1)});
  }
  return out;
}

std::size_t CalibrationReport::n_items() const {
  std::size_t n = 0;
  for (const auto& b : bins) n += b.count;
  return n;
}

std::size_t bin_index(double score, std::size_t n_bins) {
  const double c = static_cast<double>(n_bins);
  auto idx = static_cast<std::size_t>(std::floor(score * c));
  // Settle floating-point disagreements against the edges as printed.
  if (idx > 0 && score < static_cast<double>(idx) / c) --idx;
  if (idx + 1 < n_bins && score >= static_cast<double>(idx + 1) / c) ++idx;
  return std::min(idx, n_bins - 1);
}

CalibrationReport ece(std::span<const ConfidenceItem> items, std::size_t n_bins) {
  if (items.empty()) throw InvalidArgument("ece: empty input");
  if (n_bins < 1) throw InvalidArgument("ece: n_bins must be >= 1");

  std::vector<double> conf_sum(n_bins, 0.0);
  std::vector<std::size_t> correct(n_bins, 0);
  CalibrationReport report;
  report.bins.resize(n_bins);
  for (const auto& item : items) {
    if (!(item.confidence >= 0.0 && item.confidence <= 1.0)) {
      throw InvalidArgument("ece: confidence outside [0, 1]");
    }
    const std::size_t b = bin_index(item.confidence, n_bins);
    ++report.bins[b].count;
    conf_sum[b] += item.confidence;
    if (item.correct) ++correct[b];
  }

  const double total = static_cast<double>(items.size());
  for (std::size_t b = 0; b < n_bins; ++b) {
    auto& bin = report.bins[b];
    bin.low = static_cast<double>(b) / static_cast<double>(n_bins);
    bin.high = static_cast<double>(b + 1) / static_cast<double>(n_bins);
    if (bin.count == 0) continue;
    const double count = static_cast<double>(bin.count);
    bin.mean_confidence = conf_sum[b] / count;
    bin.accuracy = static_cast<double>(correct[b]) / count;
    report.ece += count / total * std::fabs(bin.accuracy - bin.mean_confidence);
  }
  return report;
}

namespace {

void require_positive(const ScoredGroup& g) {
  if (std::find(g.labels.begin(), g.labels.end(), 1) == g.labels.end()) {
    throw InvalidArgument("group '" + g.id + "' has no positive candidate");
  }
}

double average_precision(const ScoredGroup& g) {
  const auto order = rank_order(g);
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (g.labels[order[r]] != 1) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  return sum / static_cast<double>(hits);
}

}  // namespace

double recall_at_k(std::span<const ScoredGroup> groups, std::size_t k) {
  if (groups.empty()) throw InvalidArgument("recall_at_k: no groups");
  std::size_t found = 0;
  for (const auto& g : groups) {
    require_positive(g);
    const auto order = rank_order(g);
    const std::size_t top = std::min(k, order.size());
    for (std::size_t r = 0; r < top; ++r) {
      if (g.labels[order[r]] == 1) {
        ++found;
        break;
      }
    }
  }
  return static_cast<double>(found) / static_cast<double>(groups.size());
}

double mean_average_precision(std::span<const ScoredGroup> groups) {
  if (groups.empty()) throw InvalidArgument("mean_average_precision: no groups");
  double sum = 0.0;
  for (const auto& g : groups) {
    require_positive(g);
    sum += average_precision(g);
  }
  return sum / static_cast<double>(groups.size());
}

void reliability_export(const CalibrationReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "bin_low,bin_high,count,mean_confidence,accuracy\n";
  for (const auto& b : report.bins) {
    out << format_double(b.low) << ',' << format_double(b.high) << ',' << b.count << ',';
    if (b.count > 0) out << format_double(b.mean_confidence) << ',' << format_double(b.accuracy);
    else out << ',';
    out << '\n';
  }
  out << "# ece=" << format_double(report.ece) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

CalibrationReport reliability_import(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  long line_no = 1;
  if (!std::getline(in, line) || line != "bin_low,bin_high,count,mean_confidence,accuracy") {
    throw ParseError("missing reliability header", line_no);
  }
  CalibrationReport report;
  bool have_ece = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("# ece=", 0) == 0) {
      if (!parse_double(std::string_view(line).substr(6), report.ece)) {
        throw ParseError("bad ece footer", line_no);
      }
      have_ece = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 5) throw ParseError("expected 5 fields", line_no);

    CalibrationBin b;
    double count = 0.0;
    if (!parse_double(fields[0], b.low) || !parse_double(fields[1], b.high) ||
        !parse_double(fields[2], count)) {
      throw ParseError("bad numeric field", line_no);
    }
    b.count = static_cast<std::size_t>(count);
    if (b.count > 0 && (!parse_double(fields[3], b.mean_confidence) ||
                        !parse_double(fields[4], b.accuracy))) {
      throw ParseError("bad numeric field", line_no);
    }
    report.bins.push_back(b);
  }
  if (!have_ece) throw ParseError("missing ece footer", line_no);
  return report;
}

}  // namespace pggp
