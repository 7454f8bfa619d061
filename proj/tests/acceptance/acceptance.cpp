// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pggp/dataset.hpp"
#include "pggp/gibbs.hpp"
#include "pggp/metrics.hpp"
#include "pggp/pg_random.hpp"
#include "pggp/prediction.hpp"
#include "pggp/training.hpp"

using namespace pggp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAILED]");
  }
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

// 1. PG moments
Outcome pg_moments() {
  Outcome out;
  RngStream rng(1, stream_id_for("acceptance/pg_moments"));
  const int n = 100000;
  for (double c : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = sample_pg1(c, rng).value;
      sum += v;
      sq += v * v;
    }
    const double mean = sum / n;
    const double var = (sq - n * mean * mean) / (n - 1);
    const double z = (mean - pg1_mean(c)) / std::sqrt(var / n);
    out.require(std::fabs(z) < 3.0, "c=" + fmt(c) + " z=" + fmt(z, 3));
    if (c == 0.0) {
      const double rel = std::fabs(var * 24.0 - 1.0);
      out.require(rel < 0.10, "var(c=0) rel err " + fmt(rel, 3));
    }
  }
  return out;
}

// 2. Augmentation identity
Outcome augmentation_identity() {
  Outcome out;
  RngStream rng(2, stream_id_for("acceptance/identity"));
  double worst = 0.0;
  for (double psi : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
    for (int y : {0, 1}) {
      worst = std::max(worst, verify_augmentation_identity(psi, y, 100000, rng).rel_error);
    }
  }
  out.require(worst < 0.01, "max rel error " + fmt(worst, 3) + " over 10 cases");
  return out;
}

// 3. Long-run Gibbs vs dense grid on n = 2
Outcome gibbs_correctness() {
  Outcome out;
  Matrix x(2, 1);
  x << 0.0, 0.8;
  const std::vector<int> y{1, 0};
  const int labels[2] = {1, 0};
  const KernelSpec spec = KernelSpec::with_default_jitter(KernelFamily::Rbf, 1.0, 1.0);
  Eigen::Matrix2d k = kernel_matrix(x, x, spec);
  const auto ref = oracle::grid_posterior_2d(k, labels);

  LongRunOptions opts;
  opts.seed = 3;
  const auto run = run_long_chain(x, y, spec, opts);
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    worst = std::max({worst, std::fabs(run.mean(i) - ref.mean[i]),
                      std::fabs(run.variance(i) - ref.var[i])});
  }
  out.require(worst < 0.05, "max abs moment error " + fmt(worst, 3) + " (" +
                                std::to_string(run.n_kept) + " kept draws)");
  return out;
}

// 4. Gradient vs central differences
Outcome gradient_fidelity() {
  Outcome out;
  RngStream rng(4, stream_id_for("acceptance/gradients"));
  const double h = 1e-5;
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const auto n = static_cast<Eigen::Index>(2 + rng.below(15));
    const auto d = static_cast<Eigen::Index>(1 + rng.below(5));
    const KernelSpec spec = KernelSpec::with_default_jitter(
        static_cast<KernelFamily>(inst % 3), 0.5 + 2.0 * rng.uniform(), 0.5 + 3.0 * rng.uniform());
    Matrix x(n, d);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    std::vector<int> y(static_cast<std::size_t>(n));
    Vector w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(2));
      w(i) = sample_pg1(2.0 * rng.normal(), rng).value;
    }
    const std::vector<Vector> ws{w};
    const auto g = grad_log_marginal(x, y, ws, spec);
    auto at = [&](double dl, double ds) {
      KernelSpec s = spec;
      s.length_scale *= std::exp(dl);
      s.output_scale *= std::exp(ds);
      return conditional_log_marginal(x, y, w, s);
    };
    const double fl = (at(h, 0) - at(-h, 0)) / (2 * h);
    const double fs_ = (at(0, h) - at(0, -h)) / (2 * h);
    worst = std::max(worst, std::hypot(g.d_log_length - fl, g.d_log_scale - fs_) /
                                std::max(std::hypot(fl, fs_), 1e-8));
  }
  out.require(worst < 1e-4, "max rel error " + fmt(worst, 3) + " over 20 instances");
  return out;
}

// 5. Prediction
Outcome prediction() {
  Outcome out;
  FittedModel one;
  one.spec = KernelSpec{KernelFamily::Rbf, 1.0, 1.0, 0.0};
  one.reference_features = Matrix::Zero(1, 1);
  one.reference_labels = {1};
  one.reference_w = {Vector::Ones(1)};
  const auto lm = latent_predictive(one, one.reference_w[0], Vector::Zero(1));
  const double hand = std::max(std::fabs(lm.mu_star - 0.25), std::fabs(lm.sigma_star - 0.5));
  out.require(hand < 1e-10, "hand case error " + fmt(hand, 3));

  const auto rule = QuadratureRule::gauss_hermite();
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double mu = -4.0 + 2.0 * i, var = 0.01 + (16.0 - 0.01) * j / 4.0;
      worst = std::max(worst, std::fabs(predictive_prob(mu, var, rule) -
                                        oracle::expected_sigmoid(mu, var)));
    }
  }
  out.require(worst < 1e-4, "quadrature max error " + fmt(worst, 3) + " (" +
                                std::to_string(rule.nodes.size()) + " nodes)");

  const auto ds = generate_synthetic(SynthSpec{Generator::TwoMoons, 200, 2, 0.2, 5});
  TrainConfig cfg;
  cfg.gibbs.seed = 5;
  const FittedModel model = fit(ds, KernelSpec::with_default_jitter(KernelFamily::Rbf, 1.0, 8.0), cfg);
  const Predictor pred(model);
  Vector far(2);
  far << 30.0, -25.0;
  const double min_dist = (model.reference_features.rowwise() - far.transpose()).rowwise().norm().minCoeff();
  const double p = pred.predict(far).probability;
  out.require(min_dist > 20.0 * model.spec.length_scale && std::fabs(p - 0.5) < 0.05,
              "far-from-data p=" + fmt(p, 6) + " at distance " + fmt(min_dist, 3));
  return out;
}

// 6. Metrics vs brute force
Outcome metrics() {
  Outcome out;
  RngStream rng(6, stream_id_for("acceptance/metrics"));
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ScoredGroup> groups;
    std::vector<double> conf;
    std::vector<bool> correct;
    std::vector<ConfidenceItem> items;
    const std::size_t n_groups = 1 + rng.below(4);
    for (std::size_t gi = 0; gi < n_groups; ++gi) {
      const std::size_t size = 1 + rng.below(6);
      ScoredGroup g{"g" + std::to_string(gi), {}, {}};
      for (std::size_t i = 0; i < size; ++i) {
        g.scores.push_back(static_cast<double>(rng.below(4)) / 3.0);
        g.labels.push_back(static_cast<int>(rng.below(2)));
        const double c = static_cast<double>(rng.below(21)) / 20.0;
        conf.push_back(c);
        correct.push_back(rng.below(2) == 1);
        items.push_back({c, correct.back()});
      }
      g.labels[rng.below(size)] = 1;
      groups.push_back(std::move(g));
    }
    for (std::size_t k = 1; k <= 6; ++k) {
      double hits = 0.0;
      for (const auto& g : groups) hits += oracle::brute_hit_at_k(g.scores, g.labels, k);
      mismatches += recall_at_k(groups, k) != hits / static_cast<double>(groups.size());
    }
    double ap = 0.0;
    for (const auto& g : groups) ap += oracle::brute_average_precision(g.scores, g.labels);
    mismatches += mean_average_precision(groups) != ap / static_cast<double>(groups.size());
    mismatches += ece(items).ece != oracle::brute_ece(conf, correct, 10);
  }
  out.require(mismatches == 0, std::to_string(mismatches) + " mismatches vs brute force in 1000 trials");

  std::vector<ConfidenceItem> calibrated;
  for (int i = 0; i < 100000; ++i) {
    const double s = rng.uniform();
    calibrated.push_back({s, rng.uniform() < s});
  }
  const double e = ece(calibrated).ece;
  out.require(e < 0.01, "calibrated-set ECE " + fmt(e, 3));
  return out;
}

// 7. Two-moons calibration against logistic regression
Outcome end_to_end() {
  Outcome out;
  const auto ds = generate_synthetic(SynthSpec{Generator::TwoMoons, 500, 2, 0.2, 7});
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  RngStream rng(7, stream_id_for("acceptance/split"));
  for (std::size_t i = idx.size() - 1; i > 0; --i) std::swap(idx[i], idx[rng.below(i + 1)]);
  const std::size_t n_train = 350;
  const std::vector<std::size_t> tr(idx.begin(), idx.begin() + n_train);
  const std::vector<std::size_t> te(idx.begin() + n_train, idx.end());
  const EmbeddingDataset train = ds.subset(tr);
  const EmbeddingDataset test = ds.subset(te);

  // Full pipeline: kernel hyperparameters learned over a few epochs.
  TrainConfig cfg;
  cfg.gibbs.seed = 7;
  cfg.trainable = Trainable::KernelParams;
  cfg.epochs = 5;
  const FittedModel model = fit(train, KernelSpec::with_default_jitter(KernelFamily::Rbf, 1.0, 8.0), cfg);
  const Predictor pred(model);

  oracle::LogisticBaseline lr;
  lr.fit(train.features(), train.labels());

  std::vector<ScoredItem> gp_items, lr_items;
  for (const auto& r : test.records()) {
    gp_items.push_back({r.group_id, pred.predict(r.embedding).probability, r.label});
    lr_items.push_back({r.group_id, lr.predict(r.embedding), r.label});
  }
  auto accuracy = [](const std::vector<ScoredItem>& items) {
    double right = 0.0;
    for (const auto& c : binary_confidence(items)) right += c.correct;
    return right / static_cast<double>(items.size());
  };
  const double gp_ece = ece(binary_confidence(gp_items)).ece;
  const double lr_ece = ece(binary_confidence(lr_items)).ece;
  const double gp_acc = accuracy(gp_items);
  out.require(gp_ece <= lr_ece, "held-out ECE " + fmt(gp_ece, 3) + " vs logistic " + fmt(lr_ece, 3));
  out.require(gp_acc >= 0.85, "held-out accuracy " + fmt(gp_acc, 3) + " (logistic " +
                                  fmt(accuracy(lr_items), 3) + ")");
  return out;
}

// 8. CLI determinism
int shell(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome out;
  const fs::path dir = fs::temp_directory_path() / "pggp_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = std::string("'") + PGGP_CLI_PATH + "'";
  const std::string d = "'" + dir.string() + "/";
  int rc = shell(cli + " synth --generator ranking_groups --n 40 --dim 6 --seed 8 --out " + d + "data.jsonl'");
  for (const char* tag : {"a", "b"}) {
    rc |= shell(cli + " train --data " + d + "data.jsonl' --seed 8 --trainable kernel_params --epochs 2 --model-out " +
                d + "model_" + tag + ".json'");
    rc |= shell(cli + " eval --model " + d + "model_a.json' --data " + d + "data.jsonl' --metrics-out " + d +
                "metrics_" + tag + ".json' --reliability " + d + "rel_" + tag + ".csv'");
  }
  out.require(rc == 0, "commands exited 0");
  const std::string ma = slurp(dir / "model_a.json");
  out.require(!ma.empty() && ma == slurp(dir / "model_b.json"), "model files byte-identical");
  const std::string ja = slurp(dir / "metrics_a.json");
  out.require(!ja.empty() && ja == slurp(dir / "metrics_b.json"), "metrics JSON byte-identical");
  out.require(slurp(dir / "rel_a.csv") == slurp(dir / "rel_b.csv"), "reliability CSV byte-identical");
  fs::remove_all(dir);
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"PG sampler moments", pg_moments},
      {"augmentation identity", augmentation_identity},
      {"Gibbs correctness (n=2 long run vs grid)", gibbs_correctness},
      {"gradient fidelity", gradient_fidelity},
      {"prediction", prediction},
      {"metrics vs brute force", metrics},
      {"two-moons calibration vs logistic regression", end_to_end},
      {"CLI determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("%s [%zu] %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
