// pggp: command-line front end for Polya-Gamma Gaussian-process
// classification over precomputed embeddings.
//
// Exit codes: 0 success, 1 runtime/data failure, 2 usage error.
// stdout carries machine-readable JSON, stderr human-readable progress.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pggp/dataset.hpp"
#include "pggp/errors.hpp"
#include "pggp/metrics.hpp"
#include "pggp/prediction.hpp"
#include "pggp/selftest.hpp"
#include "pggp/serialization.hpp"
#include "pggp/training.hpp"

namespace {

// Turns a throwing name parser into a CLI11 check so bad enum values are usage errors.
template <class Parse>
CLI::Validator parses_as(Parse parse) {
  return CLI::Validator(
      [parse](std::string& value) -> std::string {
        try {
          parse(value);
          return {};
        } catch (const pggp::InvalidArgument& e) {
          return e.what();
        }
      },
      "");
}

using pggp::Json;

struct SynthArgs {
  std::string generator = "blobs";
  std::size_t n = 200;
  std::size_t dim = 2;
  std::optional<double> noise;
  std::uint64_t seed = 0;
  std::string out;
};

struct TrainArgs {
  std::string config;
  std::string data;
  std::string model_out;
  std::string log_out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs, batch_size, n_chains, n_steps, reference_size;
  std::optional<double> learning_rate, length_scale, output_scale, jitter;
  std::optional<std::string> trainable, kernel;
  std::optional<unsigned> threads;
};

struct EvalArgs {
  std::string model;
  std::string data;
  std::string reliability;
  std::string predictions;
  std::string metrics_out;
  std::size_t bins = 10;
  bool restrict_rank1 = false;
};

int cmd_synth(const SynthArgs& a) {
  pggp::SynthSpec spec;
  spec.generator = pggp::parse_generator(a.generator);
  spec.n = a.n;
  spec.d = a.dim;
  spec.noise = a.noise.value_or(pggp::default_noise(spec.generator));
  spec.seed = a.seed;
  const auto ds = pggp::generate_synthetic(spec);
  pggp::save_dataset(ds, a.out);
  std::cout << Json{{"out", a.out},
                    {"generator", pggp::to_string(spec.generator)},
                    {"n_records", ds.size()},
                    {"dim", ds.dim()},
                    {"n_positive", ds.count_positive()}}
                   .dump()
            << '\n';
  return 0;
}

int cmd_train(const TrainArgs& a) {
  pggp::RunConfig cfg;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw pggp::IoError("cannot read config " + a.config);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw pggp::ParseError(a.config + ": " + e.what());
    }
    cfg = pggp::run_config_from_json(j);
  }
  // Flags win over the config file.
  if (!a.data.empty()) cfg.train_data = a.data;
  if (!a.model_out.empty()) cfg.model_out = a.model_out;
  if (!a.log_out.empty()) cfg.log_out = a.log_out;
  if (a.seed) cfg.seed = a.seed;
  if (a.epochs) cfg.train.epochs = *a.epochs;
  if (a.batch_size) cfg.train.batch_size = *a.batch_size;
  if (a.n_chains) cfg.train.gibbs.n_chains = *a.n_chains;
  if (a.n_steps) cfg.train.gibbs.n_steps = *a.n_steps;
  if (a.reference_size) cfg.train.reference_size = *a.reference_size;
  if (a.learning_rate) cfg.train.learning_rate = *a.learning_rate;
  if (a.trainable) cfg.train.trainable = pggp::parse_trainable(*a.trainable);
  if (a.threads) cfg.train.threads = *a.threads;
  if (a.kernel) cfg.kernel.family = pggp::parse_kernel_family(*a.kernel);
  if (a.length_scale) cfg.kernel.length_scale = *a.length_scale;
  if (a.output_scale) {
    cfg.kernel.output_scale = *a.output_scale;
    if (!a.jitter) cfg.kernel.jitter = 1e-6 * *a.output_scale * *a.output_scale;
  }
  if (a.jitter) cfg.kernel.jitter = *a.jitter;
  if (cfg.model_out.empty()) throw pggp::InvalidArgument("train: no model output path");
  cfg.validate();

  const auto ds = pggp::load_dataset(cfg.train_data);
  std::cerr << "train: " << ds.size() << " records, dim " << ds.dim() << ", "
            << cfg.train.gibbs.n_chains << " chains x " << cfg.train.gibbs.n_steps << " steps\n";

  std::ofstream log;
  if (!cfg.log_out.empty()) {
    log.open(cfg.log_out);
    if (!log) throw pggp::IoError("cannot write " + cfg.log_out.string());
  }
  std::size_t n_batches = 0;
  double last = 0.0;
  const auto model = pggp::fit(ds, cfg.kernel, cfg.train, [&](const pggp::BatchLog& b) {
    ++n_batches;
    last = b.log_marginal;
    if (log) {
      log << Json{{"epoch", b.epoch},
                  {"batch", b.batch},
                  {"log_marginal", b.log_marginal},
                  {"length_scale", b.length_scale},
                  {"output_scale", b.output_scale}}
                 .dump()
          << '\n';
    }
  });
  pggp::save_model(model, cfg.model_out);
  std::cerr << "train: wrote " << cfg.model_out.string() << '\n';
  std::cout << Json{{"model", cfg.model_out.string()},
                    {"n_batches", n_batches},
                    {"last_log_marginal", last},
                    {"kernel", pggp::kernel_to_json(model.spec)},
                    {"reference_size", model.reference_features.rows()}}
                   .dump()
            << '\n';
  return 0;
}

int cmd_eval(const EvalArgs& a) {
  const auto model = pggp::load_model(a.model);
  const auto ds = pggp::load_dataset(a.data);
  if (ds.dim() != model.reference_features.cols()) {
    throw pggp::SchemaError("eval: dataset dimension " + std::to_string(ds.dim()) +
                            " does not match model dimension " +
                            std::to_string(model.reference_features.cols()));
  }
  const pggp::Predictor predictor(model);

  std::ofstream pred_out;
  if (!a.predictions.empty()) {
    pred_out.open(a.predictions);
    if (!pred_out) throw pggp::IoError("cannot write " + a.predictions);
  }
  std::vector<pggp::ScoredItem> items;
  items.reserve(ds.size());
  for (const auto& r : ds.records()) {
    const auto res = predictor.predict(r.embedding);
    items.push_back({r.group_id, res.probability, r.label});
    if (pred_out) {
      pred_out << Json{{"id", r.id},
                       {"group_id", r.group_id},
                       {"label", r.label},
                       {"mu_star", res.mu_star},
                       {"sigma_star", res.sigma_star},
                       {"probability", res.probability}}
                      .dump()
               << '\n';
    }
  }

  const auto groups = pggp::group_items(items);
  std::vector<pggp::ScoredItem> calib_items;
  if (a.restrict_rank1) {
    for (const auto& g : groups) {
      const std::size_t top = pggp::rank_order(g).front();
      calib_items.push_back({g.id, g.scores[top], g.labels[top]});
    }
  } else {
    calib_items = items;
  }
  const auto report = pggp::ece(pggp::binary_confidence(calib_items), a.bins);
  const double r1 = pggp::recall_at_k(groups, 1);
  const double map = pggp::mean_average_precision(groups);
  if (!a.reliability.empty()) pggp::reliability_export(report, a.reliability);

  const Json metrics{{"r_at_1", r1},
                     {"map", map},
                     {"ece", report.ece},
                     {"n_groups", groups.size()},
                     {"n_items", items.size()}};
  if (!a.metrics_out.empty()) {
    std::ofstream out(a.metrics_out);
    if (!out) throw pggp::IoError("cannot write " + a.metrics_out);
    out << metrics.dump() << '\n';
  }
  std::cout << metrics.dump() << '\n';
  return 0;
}

int cmd_selftest(bool quick, std::uint64_t seed) {
  const Json report = pggp::run_selftest({quick, seed});
  std::cout << report.dump(2) << '\n';
  const bool pass = report["pass"].get<bool>();
  std::cerr << "selftest: " << (pass ? "all checks passed" : "FAILED") << '\n';
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polya-Gamma Gaussian-process classification for calibrated ranking"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic embedding dataset (JSONL)");
  s->add_option("--generator", synth.generator, "blobs | two_moons | ranking_groups")
      ->check(parses_as(pggp::parse_generator))
      ->capture_default_str();
  s->add_option("--n", synth.n, "Points (groups for ranking_groups)")->capture_default_str();
  s->add_option("--dim", synth.dim, "Embedding dimension")->capture_default_str();
  s->add_option("--noise", synth.noise, "Noise level (generator-specific default)");
  s->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  s->add_option("--out", synth.out, "Output JSONL path")->required();

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Fit kernel hyperparameters and store a model");
  t->add_option("--config", train.config, "JSON run configuration");
  t->add_option("--data", train.data, "Training dataset (JSONL)");
  t->add_option("--model-out", train.model_out, "Model JSON output path");
  t->add_option("--log", train.log_out, "Per-batch training log (JSONL)");
  t->add_option("--seed", train.seed, "Root seed (mandatory here or in the config)");
  t->add_option("--epochs", train.epochs);
  t->add_option("--batch-size", train.batch_size);
  t->add_option("--lr", train.learning_rate, "Learning rate for (log l, log sigma)");
  t->add_option("--n-chains", train.n_chains);
  t->add_option("--n-steps", train.n_steps);
  t->add_option("--reference-size", train.reference_size);
  t->add_option("--trainable", train.trainable, "kernel_params | none")
      ->check(parses_as(pggp::parse_trainable));
  t->add_option("--kernel", train.kernel, "rbf | linear | matern52")
      ->check(parses_as([](const std::string& v) { return pggp::parse_kernel_family(v); }));
  t->add_option("--length-scale", train.length_scale);
  t->add_option("--output-scale", train.output_scale);
  t->add_option("--jitter", train.jitter);
  t->add_option("--threads", train.threads, "Worker threads for chains (0 = all cores)");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Predict a dataset and report R@1, MAP and ECE");
  e->add_option("--model", eval.model, "Model JSON")->required();
  e->add_option("--data", eval.data, "Evaluation dataset (JSONL)")->required();
  e->add_option("--reliability", eval.reliability, "Reliability-diagram CSV output");
  e->add_option("--predictions", eval.predictions, "Per-record predictions (JSONL)");
  e->add_option("--metrics-out", eval.metrics_out, "Also write the metrics JSON here");
  e->add_option("--bins", eval.bins, "Calibration bins")->capture_default_str();
  e->add_flag("--restrict-rank1", eval.restrict_rank1,
              "Compute ECE over the top-ranked candidate of each group only");

  bool quick = false;
  std::uint64_t selftest_seed = 0;
  auto* st = app.add_subcommand("selftest", "Sampler, identity, gradient and Gibbs checks");
  st->alias("pg-selftest");
  st->add_flag("--quick", quick, "Skip the long-run Gibbs check");
  st->add_option("--seed", selftest_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*t) return cmd_train(train);
    if (*e) return cmd_eval(eval);
    if (*st) return cmd_selftest(quick, selftest_seed);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 2;
}
