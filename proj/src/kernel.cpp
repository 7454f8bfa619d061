#include "pggp/kernel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "pggp/errors.hpp"

namespace pggp {

namespace {

constexpr double kMaxJitter = 1e-2;
const double kSqrt5 = std::sqrt(5.0);

void check_dims(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw InvalidArgument("kernel: dimension mismatch (" + std::to_string(a.cols()) + " vs " +
                          std::to_string(b.cols()) + ")");
  }
}

double stationary_value(double sq_dist, const KernelSpec& spec) {
  const double s2 = spec.output_scale * spec.output_scale;
  const double l = spec.length_scale;
  switch (spec.family) {
    case KernelFamily::Rbf:
      return s2 * std::exp(-sq_dist / (2.0 * l * l));
    case KernelFamily::Matern52: {
      const double r = std::sqrt(sq_dist) * kSqrt5 / l;
      return s2 * (1.0 + r + r * r / 3.0) * std::exp(-r);
    }
    case KernelFamily::Linear:
      break;
  }
  return 0.0;
}

}  // namespace

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Rbf:
      return "rbf";
    case KernelFamily::Linear:
      return "linear";
    case KernelFamily::Matern52:
      return "matern52";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "rbf") return KernelFamily::Rbf;
  if (lower == "linear") return KernelFamily::Linear;
  if (lower == "matern52" || lower == "matern") return KernelFamily::Matern52;
  throw InvalidArgument("unknown kernel family '" + std::string(name) + "'");
}

KernelSpec KernelSpec::with_default_jitter(KernelFamily family, double length_scale,
                                           double output_scale) {
  return KernelSpec{family, length_scale, output_scale, 1e-6 * output_scale * output_scale};
}

void KernelSpec::validate() const {
  if (!(std::isfinite(length_scale) && length_scale > 0.0)) {
    throw InvalidArgument("kernel: length_scale must be positive");
  }
  if (!(std::isfinite(output_scale) && output_scale > 0.0)) {
    throw InvalidArgument("kernel: output_scale must be positive");
  }
  if (!(std::isfinite(jitter) && jitter >= 0.0)) {
    throw InvalidArgument("kernel: jitter must be non-negative");
  }
}

double kernel_value(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b,
                    const KernelSpec& spec) {
  if (a.size() != b.size()) throw InvalidArgument("kernel: dimension mismatch");
  if (spec.family == KernelFamily::Linear) {
    return spec.output_scale * spec.output_scale * a.dot(b);
  }
  return stationary_value((a - b).squaredNorm(), spec);
}

Matrix cross_kernel(const Matrix& a, const Matrix& b, const KernelSpec& spec) {
  spec.validate();
  check_dims(a, b);
  Matrix k(a.rows(), b.rows());
  if (spec.family == KernelFamily::Linear) {
    k.noalias() = spec.output_scale * spec.output_scale * (a * b.transpose());
    return k;
  }
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      k(i, j) = stationary_value((a.row(i) - b.row(j)).squaredNorm(), spec);
    }
  }
  return k;
}

Matrix gram_matrix(const Matrix& x, const KernelSpec& spec) {
  spec.validate();
  const Eigen::Index n = x.rows();
  Matrix k(n, n);
  if (spec.family == KernelFamily::Linear) {
    k.noalias() = spec.output_scale * spec.output_scale * (x * x.transpose());
  } else {
    for (Eigen::Index j = 0; j < n; ++j) {
      k(j, j) = stationary_value(0.0, spec);
      for (Eigen::Index i = j + 1; i < n; ++i) {
        k(i, j) = stationary_value((x.row(i) - x.row(j)).squaredNorm(), spec);
        k(j, i) = k(i, j);
      }
    }
  }
  k.diagonal().array() += spec.jitter;
  return k;
}

Matrix kernel_matrix(const Matrix& a, const Matrix& b, const KernelSpec& spec) {
  if (&a == &b) return gram_matrix(a, spec);
  return cross_kernel(a, b, spec);
}

Vector kernel_column(const Matrix& x, const Eigen::Ref<const Vector>& point,
                     const KernelSpec& spec) {
  if (x.cols() != point.size()) {
    throw InvalidArgument("kernel: dimension mismatch (" + std::to_string(x.cols()) + " vs " +
                          std::to_string(point.size()) + ")");
  }
  Vector k(x.rows());
  if (spec.family == KernelFamily::Linear) {
    k.noalias() = spec.output_scale * spec.output_scale * (x * point);
    return k;
  }
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    k(i) = stationary_value((x.row(i).transpose() - point).squaredNorm(), spec);
  }
  return k;
}

GramGradients gram_gradients(const Matrix& x, const KernelSpec& spec) {
  spec.validate();
  const Eigen::Index n = x.rows();
  const double s2 = spec.output_scale * spec.output_scale;
  const double l = spec.length_scale;
  GramGradients g{Matrix::Zero(n, n), Matrix::Zero(n, n)};

  if (spec.family == KernelFamily::Linear) {
    g.d_log_scale = 2.0 * s2 * (x * x.transpose());
    return g;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double d2 = (x.row(i) - x.row(j)).squaredNorm();
      double k = 0.0;
      double dl = 0.0;
      if (spec.family == KernelFamily::Rbf) {
        k = s2 * std::exp(-d2 / (2.0 * l * l));
        dl = k * d2 / (l * l);
      } else {
        const double r = std::sqrt(d2) * kSqrt5 / l;
        const double e = std::exp(-r);
        k = s2 * (1.0 + r + r * r / 3.0) * e;
        dl = s2 * e * r * r * (1.0 + r) / 3.0;
      }
      g.d_log_length(i, j) = g.d_log_length(j, i) = dl;
      g.d_log_scale(i, j) = g.d_log_scale(j, i) = 2.0 * k;
    }
  }
  return g;
}

PsdMatrix PsdMatrix::from_factor(Matrix lower) {
  PsdMatrix p;
  p.matrix_ = lower * lower.transpose();
  p.lower_ = std::move(lower);
  return p;
}

Matrix PsdMatrix::solve_lower(const Matrix& b) const {
  return lower_.triangularView<Eigen::Lower>().solve(b);
}

Vector PsdMatrix::solve_lower(const Vector& b) const {
  return lower_.triangularView<Eigen::Lower>().solve(b);
}

Matrix PsdMatrix::solve(const Matrix& b) const {
  Matrix y = solve_lower(b);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Vector PsdMatrix::solve(const Vector& b) const {
  Vector y = solve_lower(b);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
}

double PsdMatrix::log_determinant() const {
  return 2.0 * lower_.diagonal().array().log().sum();
}

PsdMatrix factorize(const Matrix& k, double jitter) {
  if (k.rows() != k.cols()) throw InvalidArgument("factorize: matrix is not square");
  if (!(std::isfinite(jitter) && jitter >= 0.0)) {
    throw InvalidArgument("factorize: jitter must be non-negative");
  }
  if (!k.allFinite()) throw NumericalError("factorize: matrix has non-finite entries");
  const double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
  if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidArgument("factorize: matrix is not symmetric");
  }

  std::ostringstream ladder;
  double j = jitter;
  while (true) {
    Matrix shifted = k;
    shifted.diagonal().array() += j;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().allFinite()) {
      PsdMatrix p;
      p.matrix_ = std::move(shifted);
      p.lower_ = llt.matrixL();
      p.jitter_ = j;
      return p;
    }
    ladder << (ladder.tellp() > 0 ? ", " : "") << j;
    j = j > 0.0 ? j * 10.0 : 1e-10;
    if (j > kMaxJitter * (1.0 + 1e-9)) break;
  }
  throw NumericalError("factorize: not positive definite after jitter ladder [" + ladder.str() +
                       "]");
}

Vector mvn_sample(const Vector& mean, const PsdMatrix& factor, RngStream& rng) {
  if (mean.size() != factor.size()) throw InvalidArgument("mvn_sample: dimension mismatch");
  Vector z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return mean + factor.lower().triangularView<Eigen::Lower>() * z;
}

}  // namespace pggp
