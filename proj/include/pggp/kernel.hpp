#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pggp/rng.hpp"

namespace pggp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class KernelFamily { Rbf, Linear, Matern52 };

std::string to_string(KernelFamily family);
/// Accepts "rbf", "linear", "matern52" (case-insensitive).
KernelFamily parse_kernel_family(std::string_view name);

/// Kernel family plus hyperparameters. The output scale is the amplitude:
/// k(a, a) = output_scale^2 for the stationary families. The jitter is an
/// absolute value added to the diagonal of self-kernel matrices.
struct KernelSpec {
  KernelFamily family = KernelFamily::Rbf;
  double length_scale = 1.0;
  double output_scale = 8.0;
  double jitter = 1e-6 * 64.0;

  /// Spec with the default jitter of 1e-6 * output_scale^2.
  static KernelSpec with_default_jitter(KernelFamily family, double length_scale,
                                        double output_scale);

  /// Throws InvalidArgument unless l > 0, sigma > 0, jitter >= 0 (all finite).
  void validate() const;

  bool operator==(const KernelSpec&) const = default;
};

/// k(a, b) for two points of equal dimension.
double kernel_value(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b,
                    const KernelSpec& spec);

/// Kernel matrix between the rows of `a` and the rows of `b`. When `a` and
/// `b` are the same object the diagonal receives spec.jitter.
Matrix kernel_matrix(const Matrix& a, const Matrix& b, const KernelSpec& spec);

/// Cross-kernel matrix with no jitter.
Matrix cross_kernel(const Matrix& a, const Matrix& b, const KernelSpec& spec);

/// Self-kernel of the rows of `x`, jitter on the diagonal.
Matrix gram_matrix(const Matrix& x, const KernelSpec& spec);

/// Kernel vector k(x_i, point) over the rows of `x`.
Vector kernel_column(const Matrix& x, const Eigen::Ref<const Vector>& point,
                     const KernelSpec& spec);

/// Derivatives of the (jitter-free) gram matrix with respect to
/// log(length_scale) and log(output_scale).
struct GramGradients {
  Matrix d_log_length;
  Matrix d_log_scale;
};
GramGradients gram_gradients(const Matrix& x, const KernelSpec& spec);

/// A symmetric positive-definite matrix together with its lower Cholesky
/// factor. `matrix()` already includes whatever jitter was needed.
class PsdMatrix {
 public:
  PsdMatrix() = default;

  /// Wraps an existing lower-triangular factor L; matrix() becomes L L^T.
  static PsdMatrix from_factor(Matrix lower);

  const Matrix& matrix() const { return matrix_; }
  const Matrix& lower() const { return lower_; }
  double jitter() const { return jitter_; }
  Eigen::Index size() const { return lower_.rows(); }

  /// Solves (L L^T) x = b.
  Matrix solve(const Matrix& b) const;
  Vector solve(const Vector& b) const;
  /// Solves L x = b.
  Matrix solve_lower(const Matrix& b) const;
  Vector solve_lower(const Vector& b) const;
  /// log det(L L^T).
  double log_determinant() const;

 private:
  friend PsdMatrix factorize(const Matrix& k, double jitter);
  Matrix matrix_;
  Matrix lower_;
  double jitter_ = 0.0;
};

/// Cholesky factor of K + jitter I. On failure the jitter is escalated by
/// x10 (starting from 1e-10 if zero) up to 1e-2; then NumericalError listing
/// the attempted ladder. K must be symmetric to 1e-12 relative.
PsdMatrix factorize(const Matrix& k, double jitter);

/// mean + L z with z i.i.d. standard normal.
Vector mvn_sample(const Vector& mean, const PsdMatrix& factor, RngStream& rng);

}  // namespace pggp
