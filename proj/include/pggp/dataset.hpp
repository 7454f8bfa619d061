#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pggp/kernel.hpp"

namespace pggp {

/// One labelled embedding. `group_id` ties candidates of the same query.
struct Record {
  std::string id;
  std::string group_id;
  int label = 0;
  Vector embedding;

  bool operator==(const Record& o) const {
    return id == o.id && group_id == o.group_id && label == o.label &&
           embedding.size() == o.embedding.size() && embedding == o.embedding;
  }
};

/// Labelled, group-structured feature vectors standing in for encoder outputs.
class EmbeddingDataset {
 public:
  EmbeddingDataset() = default;
  /// Validates: uniform dimension, unique ids, binary labels, non-empty.
  explicit EmbeddingDataset(std::vector<Record> records);

  const std::vector<Record>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  Eigen::Index dim() const { return dim_; }

  /// Row i is records()[i].embedding.
  Matrix features() const;
  std::vector<int> labels() const;
  std::size_t count_positive() const;

  EmbeddingDataset subset(const std::vector<std::size_t>& indices) const;

  bool operator==(const EmbeddingDataset& o) const { return records_ == o.records_; }

 private:
  std::vector<Record> records_;
  Eigen::Index dim_ = 0;
};

/// JSON-lines, one {id, group_id, label, embedding} object per line.
EmbeddingDataset load_dataset(const std::filesystem::path& path);
void save_dataset(const EmbeddingDataset& dataset, const std::filesystem::path& path);

enum class Generator { Blobs, TwoMoons, RankingGroups };

std::string to_string(Generator g);
Generator parse_generator(const std::string& name);

/// Parameters of a synthetic dataset. For ranking_groups `n` counts groups
/// of 10 candidates; otherwise it counts points. `noise` is the blob
/// standard deviation, the moon jitter, or the positive spread around the
/// group anchor.
struct SynthSpec {
  Generator generator = Generator::Blobs;
  std::size_t n = 200;
  std::size_t d = 2;
  double noise = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Noise used by the CLI when --noise is omitted.
double default_noise(Generator g);

EmbeddingDataset generate_synthetic(const SynthSpec& spec);

}  // namespace pggp
