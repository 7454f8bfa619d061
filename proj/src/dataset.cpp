#include "pggp/dataset.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <unordered_set>

#include <json.hpp>

#include "pggp/errors.hpp"
#include "pggp/rng.hpp"

namespace pggp {

EmbeddingDataset::EmbeddingDataset(std::vector<Record> records) : records_(std::move(records)) {
  if (records_.empty()) throw InvalidArgument("empty dataset");
  dim_ = records_.front().embedding.size();
  if (dim_ < 1) throw SchemaError("record '" + records_.front().id + "' has an empty embedding");
  std::unordered_set<std::string> ids;
  for (const auto& r : records_) {
    if (r.embedding.size() != dim_) {
      throw SchemaError("record '" + r.id + "' has dimension " +
                        std::to_string(r.embedding.size()) + ", expected " + std::to_string(dim_));
    }
    if (r.label != 0 && r.label != 1) throw SchemaError("record '" + r.id + "' label not 0/1");
    if (!ids.insert(r.id).second) throw SchemaError("duplicate id '" + r.id + "'");
  }
}

Matrix EmbeddingDataset::features() const {
  Matrix x(static_cast<Eigen::Index>(records_.size()), dim_);
  for (std::size_t i = 0; i < records_.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = records_[i].embedding.transpose();
  }
  return x;
}

std::vector<int> EmbeddingDataset::labels() const {
  std::vector<int> y;
  y.reserve(records_.size());
  for (const auto& r : records_) y.push_back(r.label);
  return y;
}

std::size_t EmbeddingDataset::count_positive() const {
  std::size_t n = 0;
  for (const auto& r : records_) n += r.label == 1 ? 1 : 0;
  return n;
}

EmbeddingDataset EmbeddingDataset::subset(const std::vector<std::size_t>& indices) const {
  std::vector<Record> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(records_.at(i));
  return EmbeddingDataset(std::move(out));
}

EmbeddingDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());

  std::vector<Record> records;
  std::unordered_set<std::string> ids;
  Eigen::Index dim = -1;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    const auto where = " (line " + std::to_string(line_no) + ")";
    if (!j.is_object()) throw ParseError("record is not a JSON object", line_no);
    for (const char* key : {"id", "group_id", "label", "embedding"}) {
      if (!j.contains(key)) throw SchemaError(std::string("missing key '") + key + "'" + where);
    }
    const auto& id = j.at("id");
    const auto& group = j.at("group_id");
    const auto& label = j.at("label");
    const auto& emb = j.at("embedding");
    if (!id.is_string() || !group.is_string()) {
      throw SchemaError("id and group_id must be strings" + where);
    }
    if (!label.is_number_integer() || (label.get<long>() != 0 && label.get<long>() != 1)) {
      throw SchemaError("label must be 0 or 1" + where);
    }
    if (!emb.is_array() || emb.empty()) throw SchemaError("embedding must be a non-empty array" + where);

    Record r;
    r.id = id.get<std::string>();
    r.group_id = group.get<std::string>();
    r.label = label.get<int>();
    r.embedding.resize(static_cast<Eigen::Index>(emb.size()));
    for (std::size_t k = 0; k < emb.size(); ++k) {
      if (!emb[k].is_number()) throw SchemaError("embedding entries must be numbers" + where);
      r.embedding(static_cast<Eigen::Index>(k)) = emb[k].get<double>();
    }
    if (!r.embedding.allFinite()) throw SchemaError("embedding has non-finite entries" + where);
    if (dim < 0) dim = r.embedding.size();
    if (r.embedding.size() != dim) {
      throw SchemaError("embedding has dimension " + std::to_string(r.embedding.size()) +
                        ", expected " + std::to_string(dim) + where);
    }
    if (!ids.insert(r.id).second) throw SchemaError("duplicate id '" + r.id + "'" + where);
    records.push_back(std::move(r));
  }
  if (records.empty()) throw InvalidArgument("empty dataset");
  return EmbeddingDataset(std::move(records));
}

void save_dataset(const EmbeddingDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : dataset.records()) {
    nlohmann::ordered_json j{{"id", r.id},
                             {"group_id", r.group_id},
                             {"label", r.label},
                             {"embedding", std::vector<double>(r.embedding.begin(), r.embedding.end())}};
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::string to_string(Generator g) {
  switch (g) {
    case Generator::Blobs:
      return "blobs";
    case Generator::TwoMoons:
      return "two_moons";
    case Generator::RankingGroups:
      return "ranking_groups";
  }
  return "unknown";
}

Generator parse_generator(const std::string& name) {
  if (name == "blobs") return Generator::Blobs;
  if (name == "two_moons" || name == "moons") return Generator::TwoMoons;
  if (name == "ranking_groups") return Generator::RankingGroups;
  throw InvalidArgument("unknown generator '" + name + "'");
}

double default_noise(Generator g) {
  switch (g) {
    case Generator::Blobs:
      return 1.0;
    case Generator::TwoMoons:
      return 0.2;
    case Generator::RankingGroups:
      return 0.3;
  }
  return 1.0;
}

void SynthSpec::validate() const {
  if (n < 2) throw InvalidArgument("synth: n must be >= 2");
  if (d < 1) throw InvalidArgument("synth: dimension must be >= 1");
  if (!(std::isfinite(noise) && noise >= 0.0)) throw InvalidArgument("synth: noise must be >= 0");
  if (generator == Generator::TwoMoons && d < 2) {
    throw InvalidArgument("synth: two_moons needs dimension >= 2");
  }
  if (generator == Generator::Blobs && noise <= 0.0) {
    throw InvalidArgument("synth: blobs needs a positive cluster spread");
  }
}

namespace {

Vector gaussian(Eigen::Index d, double sd, RngStream& rng) {
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = sd * rng.normal();
  return v;
}

std::vector<Record> blobs(const SynthSpec& s, RngStream& rng) {
  const auto d = static_cast<Eigen::Index>(s.d);
  // Class means +-2 sd along the first axis: 4 sd apart.
  std::vector<Record> out;
  for (std::size_t i = 0; i < s.n; ++i) {
    const int label = static_cast<int>(i % 2);
    Vector x = gaussian(d, s.noise, rng);
    x(0) += (label == 1 ? 2.0 : -2.0) * s.noise;
    out.push_back({"blobs-" + std::to_string(i), "blobs", label, std::move(x)});
  }
  return out;
}

std::vector<Record> two_moons(const SynthSpec& s, RngStream& rng) {
  const auto d = static_cast<Eigen::Index>(s.d);
  const std::size_t n_outer = s.n / 2;
  const std::size_t n_inner = s.n - n_outer;
  std::vector<Record> pts;
  auto emit = [&](std::size_t count, int label) {
    for (std::size_t k = 0; k < count; ++k) {
      const double t =
          count > 1 ? std::numbers::pi * static_cast<double>(k) / static_cast<double>(count - 1) : 0.0;
      Vector x = gaussian(d, s.noise, rng);
      if (label == 0) {
        x(0) += std::cos(t);
        x(1) += std::sin(t);
      } else {
        x(0) += 1.0 - std::cos(t);
        x(1) += 0.5 - std::sin(t);
      }
      pts.push_back({"", "moons", label, std::move(x)});
    }
  };
  emit(n_outer, 0);
  emit(n_inner, 1);
  for (std::size_t i = pts.size(); i > 1; --i) std::swap(pts[i - 1], pts[rng.below(i)]);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i].id = "moons-" + std::to_string(i);
  return pts;
}

std::vector<Record> ranking_groups(const SynthSpec& s, RngStream& rng) {
  constexpr std::size_t kCandidates = 10;
  const auto d = static_cast<Eigen::Index>(s.d);
  // Anchors scatter around a common "relevant" region; the positive stays
  // within `noise` of its anchor while negatives spread much wider.
  const Vector relevant = Vector::Constant(d, 1.5 / std::sqrt(static_cast<double>(d)));
  std::vector<Record> out;
  for (std::size_t g = 0; g < s.n; ++g) {
    const std::string group = "q" + std::to_string(g);
    const Vector anchor = relevant + gaussian(d, 0.5, rng);
    const std::size_t positive = rng.below(kCandidates);
    for (std::size_t c = 0; c < kCandidates; ++c) {
      const bool pos = c == positive;
      Vector x = anchor + gaussian(d, pos ? s.noise : 1.5, rng);
      out.push_back({group + "-c" + std::to_string(c), group, pos ? 1 : 0, std::move(x)});
    }
  }
  return out;
}

}  // namespace

EmbeddingDataset generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  RngStream rng(spec.seed, stream_id_for("synth/" + to_string(spec.generator)));
  switch (spec.generator) {
    case Generator::Blobs:
      return EmbeddingDataset(blobs(spec, rng));
    case Generator::TwoMoons:
      return EmbeddingDataset(two_moons(spec, rng));
    case Generator::RankingGroups:
      return EmbeddingDataset(ranking_groups(spec, rng));
  }
  throw InvalidArgument("synth: unknown generator");
}

}  // namespace pggp
