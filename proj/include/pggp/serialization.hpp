#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "pggp/gibbs.hpp"
#include "pggp/kernel.hpp"
#include "pggp/training.hpp"

namespace pggp {

using Json = nlohmann::ordered_json;

inline constexpr int kModelFormatVersion = 1;

/// {family, length_scale, output_scale, jitter}. A missing jitter defaults to
/// 1e-6 * output_scale^2; missing hyperparameters default to l = 1, sigma = 8.
Json kernel_to_json(const KernelSpec& spec);
KernelSpec kernel_from_json(const Json& j);

/// {n_chains, n_steps, seed}; missing keys keep the values in `base`.
Json gibbs_to_json(const GibbsConfig& cfg);
GibbsConfig gibbs_from_json(const Json& j, GibbsConfig base = {});

/// {learning_rate, epochs, batch_size, trainable, reference_size, threads}.
Json train_to_json(const TrainConfig& cfg);
TrainConfig train_from_json(const Json& j, TrainConfig base = {});

Json model_to_json(const FittedModel& model);
/// Throws UnsupportedVersion unless format_version == 1, SchemaError on
/// missing or inconsistent fields.
FittedModel model_from_json(const Json& j);

void save_model(const FittedModel& model, const std::filesystem::path& path);
/// Throws ParseError for unparsable (e.g. truncated) files.
FittedModel load_model(const std::filesystem::path& path);

/// Training configuration file merged with defaults. The seed is mandatory
/// (either here or supplied by the caller before validate()).
struct RunConfig {
  KernelSpec kernel = KernelSpec::with_default_jitter(KernelFamily::Rbf, 1.0, 8.0);
  TrainConfig train;
  std::optional<std::uint64_t> seed;
  std::filesystem::path train_data;
  std::filesystem::path model_out;
  std::filesystem::path log_out;

  /// Requires a seed, an existing training file and existing output
  /// directories. Copies the seed into train.gibbs.seed.
  void validate();
};

/// Keys: seed, kernel{...}, gibbs{...}, train{...}, data, model_out, log_out.
RunConfig run_config_from_json(const Json& j);
Json run_config_to_json(const RunConfig& cfg);

}  // namespace pggp
