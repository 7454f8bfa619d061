#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pggp {

/// A seeded pseudo-random stream. Streams with the same (seed, stream_id)
/// replay the same sequence; different stream ids are decorrelated through
/// the seed_seq mixing of both words.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Exponential with rate 1.
  double exponential();
  /// Gamma(shape, 1).
  double gamma(double shape);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Stream id for a named purpose ("synth", "train/chains", ...) and an index
/// within it. Stable across platforms and builds.
std::uint64_t stream_id_for(std::string_view name, std::uint64_t index = 0);

}  // namespace pggp
