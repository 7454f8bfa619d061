#include "pggp/serialization.hpp"

#include <fstream>
#include <sstream>

#include "pggp/errors.hpp"

namespace pggp {

namespace {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("config key '") + key + "': " + e.what());
  }
}

void require_object(const Json& j, const char* what) {
  if (!j.is_object()) throw SchemaError(std::string(what) + " must be a JSON object");
}

}  // namespace

Json kernel_to_json(const KernelSpec& spec) {
  return Json{{"family", to_string(spec.family)},
              {"length_scale", spec.length_scale},
              {"output_scale", spec.output_scale},
              {"jitter", spec.jitter}};
}

KernelSpec kernel_from_json(const Json& j) {
  require_object(j, "kernel");
  KernelSpec spec;
  spec.family = parse_kernel_family(get_or<std::string>(j, "family", "rbf"));
  spec.length_scale = get_or<double>(j, "length_scale", 1.0);
  spec.output_scale = get_or<double>(j, "output_scale", 8.0);
  spec.jitter = get_or<double>(j, "jitter", 1e-6 * spec.output_scale * spec.output_scale);
  spec.validate();
  return spec;
}

Json gibbs_to_json(const GibbsConfig& cfg) {
  return Json{{"n_chains", cfg.n_chains}, {"n_steps", cfg.n_steps}, {"seed", cfg.seed}};
}

GibbsConfig gibbs_from_json(const Json& j, GibbsConfig base) {
  require_object(j, "gibbs");
  base.n_chains = get_or<std::size_t>(j, "n_chains", base.n_chains);
  base.n_steps = get_or<std::size_t>(j, "n_steps", base.n_steps);
  base.seed = get_or<std::uint64_t>(j, "seed", base.seed);
  base.validate();
  return base;
}

Json train_to_json(const TrainConfig& cfg) {
  return Json{{"learning_rate", cfg.learning_rate},   {"epochs", cfg.epochs},
              {"batch_size", cfg.batch_size},         {"trainable", to_string(cfg.trainable)},
              {"reference_size", cfg.reference_size}, {"gibbs", gibbs_to_json(cfg.gibbs)}};
}

TrainConfig train_from_json(const Json& j, TrainConfig base) {
  require_object(j, "train");
  base.learning_rate = get_or<double>(j, "learning_rate", base.learning_rate);
  base.epochs = get_or<std::size_t>(j, "epochs", base.epochs);
  base.batch_size = get_or<std::size_t>(j, "batch_size", base.batch_size);
  if (j.contains("trainable")) base.trainable = parse_trainable(get_or<std::string>(j, "trainable", ""));
  base.reference_size = get_or<std::size_t>(j, "reference_size", base.reference_size);
  base.threads = get_or<unsigned>(j, "threads", base.threads);
  if (j.contains("gibbs")) base.gibbs = gibbs_from_json(j.at("gibbs"), base.gibbs);
  base.validate();
  return base;
}

Json model_to_json(const FittedModel& model) {
  Json features = Json::array();
  for (Eigen::Index i = 0; i < model.reference_features.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < model.reference_features.cols(); ++c) {
      row.push_back(model.reference_features(i, c));
    }
    features.push_back(std::move(row));
  }
  Json ws = Json::array();
  for (const Vector& w : model.reference_w) ws.push_back(std::vector<double>(w.begin(), w.end()));

  return Json{{"format_version", kModelFormatVersion},
              {"kernel", kernel_to_json(model.spec)},
              {"seed", model.seed()},
              {"config", train_to_json(model.config)},
              {"reference_features", std::move(features)},
              {"reference_labels", model.reference_labels},
              {"reference_w", std::move(ws)}};
}

FittedModel model_from_json(const Json& j) {
  require_object(j, "model");
  if (!j.contains("format_version") || !j.at("format_version").is_number_integer()) {
    throw SchemaError("model: missing format_version");
  }
  const int version = j.at("format_version").get<int>();
  if (version != kModelFormatVersion) {
    throw UnsupportedVersion("model: unsupported format_version " + std::to_string(version) +
                             " (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  for (const char* key : {"kernel", "config", "reference_features", "reference_labels",
                          "reference_w", "seed"}) {
    if (!j.contains(key)) throw SchemaError(std::string("model: missing key '") + key + "'");
  }

  FittedModel model;
  try {
    model.spec = kernel_from_json(j.at("kernel"));
    model.config = train_from_json(j.at("config"));
    model.config.gibbs.seed = j.at("seed").get<std::uint64_t>();

    const auto& rows = j.at("reference_features");
    const auto m = static_cast<Eigen::Index>(rows.size());
    const auto d = m > 0 ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
    model.reference_features.resize(m, d);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& row = rows.at(static_cast<std::size_t>(i));
      if (static_cast<Eigen::Index>(row.size()) != d) {
        throw SchemaError("model: ragged reference_features");
      }
      for (Eigen::Index c = 0; c < d; ++c) {
        model.reference_features(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
      }
    }
    model.reference_labels = j.at("reference_labels").get<std::vector<int>>();
    for (const auto& w : j.at("reference_w")) {
      const auto values = w.get<std::vector<double>>();
      model.reference_w.push_back(Eigen::Map<const Vector>(values.data(),
                                                           static_cast<Eigen::Index>(values.size())));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("model: ") + e.what());
  }
  try {
    model.validate();
  } catch (const InvalidArgument& e) {
    throw SchemaError(e.what());
  }
  return model;
}

void save_model(const FittedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << model_to_json(model).dump() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

FittedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

void RunConfig::validate() {
  if (!seed) throw InvalidArgument("config: a seed is required");
  train.gibbs.seed = *seed;
  kernel.validate();
  train.validate();
  if (train_data.empty() || !std::filesystem::is_regular_file(train_data)) {
    throw InvalidArgument("config: training data '" + train_data.string() + "' not found");
  }
  for (const auto* p : {&model_out, &log_out}) {
    if (p->empty()) continue;
    const auto parent = std::filesystem::absolute(*p).parent_path();
    if (!std::filesystem::is_directory(parent)) {
      throw InvalidArgument("config: output directory '" + parent.string() + "' does not exist");
    }
  }
}

RunConfig run_config_from_json(const Json& j) {
  require_object(j, "config");
  RunConfig cfg;
  if (j.contains("kernel")) cfg.kernel = kernel_from_json(j.at("kernel"));
  if (j.contains("train")) cfg.train = train_from_json(j.at("train"), cfg.train);
  if (j.contains("gibbs")) cfg.train.gibbs = gibbs_from_json(j.at("gibbs"), cfg.train.gibbs);
  if (j.contains("seed")) {
    cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
  } else if (j.contains("gibbs") && j.at("gibbs").contains("seed")) {
    cfg.seed = cfg.train.gibbs.seed;
  }
  cfg.train_data = get_or<std::string>(j, "data", "");
  cfg.model_out = get_or<std::string>(j, "model_out", "");
  cfg.log_out = get_or<std::string>(j, "log_out", "");
  return cfg;
}

Json run_config_to_json(const RunConfig& cfg) {
  Json j{{"kernel", kernel_to_json(cfg.kernel)}, {"train", train_to_json(cfg.train)}};
  if (cfg.seed) j["seed"] = *cfg.seed;
  j["data"] = cfg.train_data.string();
  j["model_out"] = cfg.model_out.string();
  j["log_out"] = cfg.log_out.string();
  return j;
}

}  // namespace pggp
