#pragma once

#include "slr/corpus.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <string_view>

namespace slr {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class AttenuationMode { none, stepwise, polynomial };

// Breakpoints of the step-wise attenuation, in seconds.
inline constexpr double kStepBreakpoints[] = {8.0, 4.0, 2.0, 1.0};

struct AttenuationConfig {
  AttenuationMode mode = AttenuationMode::none;
  double alpha = 1.0;  // stepwise
  double beta = 0.0;   // polynomial
  double knee = 8.0;   // polynomial, seconds

  static AttenuationConfig none() { return {}; }
  static AttenuationConfig stepwise(double alpha) { return {AttenuationMode::stepwise, alpha, 0.0, 8.0}; }
  static AttenuationConfig polynomial(double beta, double knee = 8.0) {
    return {AttenuationMode::polynomial, 1.0, beta, knee};
  }

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("attenuation alpha must lie in [0, 1]");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("attenuation beta must be >= 0");
    if (!(knee > 0.0) || !std::isfinite(knee)) throw ValidationError("attenuation knee must be > 0");
  }
};

/// Parses "none", "step:ALPHA" or "poly:BETA".
AttenuationConfig parse_attenuation(std::string_view text);
std::string to_string(const AttenuationConfig& cfg);

/// Multiplier for the similarity of two segments, driven by the longer one.
inline double attenuation_factor(double t_i, double t_j, const AttenuationConfig& cfg) {
  const double t = std::max(t_i, t_j);
  switch (cfg.mode) {
    case AttenuationMode::none:
      return 1.0;
    case AttenuationMode::stepwise: {
      double c = 1.0;
      for (double breakpoint : kStepBreakpoints) {
        if (t >= breakpoint) return c;
        c *= cfg.alpha;
      }
      return c;
    }
    case AttenuationMode::polynomial:
      return t <= cfg.knee ? std::pow(t / cfg.knee, cfg.beta) : 1.0;
  }
  return 1.0;
}

/// Absolute cosine similarity between rows of `embeddings` (S x d), zero diagonal.
/// Only the upper triangle is computed; the lower is mirrored so the result is exactly symmetric.
template <typename Derived>
Matrix<typename Derived::Scalar> cosine_affinity(const Eigen::MatrixBase<Derived>& embeddings) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = embeddings.rows();
  const Vector<Scalar> norms = embeddings.rowwise().norm();
  eigen_assert((norms.array() > Scalar(0)).all() && "zero-norm embedding");
  Matrix<Scalar> a = Matrix<Scalar>::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Scalar c = std::abs(embeddings.row(i).dot(embeddings.row(j))) / (norms[i] * norms[j]);
      a(i, j) = a(j, i) = std::min(c, Scalar(1));
    }
  }
  return a;
}

/// Entry-wise attenuation of an affinity matrix by segment durations.
template <typename Derived, typename DurDerived>
Matrix<typename Derived::Scalar> attenuate(const Eigen::MatrixBase<Derived>& affinity,
                                           const Eigen::MatrixBase<DurDerived>& durations,
                                           const AttenuationConfig& cfg) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = affinity.rows();
  if (affinity.cols() != n || durations.size() != n)
    throw ValidationError("attenuate: " + std::to_string(durations.size()) + " durations for a " +
                          std::to_string(affinity.rows()) + "x" + std::to_string(affinity.cols()) + " matrix");
  Matrix<Scalar> out = affinity;
  if (cfg.mode == AttenuationMode::none) return out;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto c = static_cast<Scalar>(
          attenuation_factor(static_cast<double>(durations[i]), static_cast<double>(durations[j]), cfg));
      out(i, j) = out(j, i) = affinity(i, j) * c;
    }
  }
  return out;
}

/// Dumps a matrix as whitespace-separated decimal rows, one row per line.
template <typename Derived>
void write_matrix_rows(const Eigen::MatrixBase<Derived>& m, std::ostream& out) {
  const auto old_precision = out.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << m(i, j);
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace slr
