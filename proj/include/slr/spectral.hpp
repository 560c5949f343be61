#pragma once

#include "slr/affinity.hpp"
#include "slr/corpus.hpp"

#include <Eigen/Dense>
#include <Eigen/Jacobi>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace slr {

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row sums of the affinity matrix.
template <typename Derived>
Vector<typename Derived::Scalar> degree(const Eigen::MatrixBase<Derived>& affinity) {
  return affinity.rowwise().sum();
}

/// Symmetric normalized Laplacian I - D^-1/2 A D^-1/2.
/// A node with zero degree gets an identity row and column, which isolates it.
template <typename Derived>
Matrix<typename Derived::Scalar> normalized_laplacian(const Eigen::MatrixBase<Derived>& affinity) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = affinity.rows();
  const Vector<Scalar> d = degree(affinity);
  Matrix<Scalar> l = Matrix<Scalar>::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d[i] == Scalar(0)) continue;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (d[j] == Scalar(0)) continue;
      l(i, j) = l(j, i) = -affinity(i, j) / (std::sqrt(d[i]) * std::sqrt(d[j]));
    }
  }
  return l;
}

template <typename Scalar>
struct SymmetricEigen {
  Vector<Scalar> values;   // ascending
  Matrix<Scalar> vectors;  // orthonormal columns, matching values
  int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps over all (p, q) pairs in row order until the off-diagonal Frobenius norm drops
/// below `tolerance * ||m||_F`; throws ConvergenceError after `max_sweeps`. Eigenvalues are
/// stably sorted ascending, so ties keep the rotation column order. Each eigenvector is
/// signed so that its largest-magnitude entry (first one on ties) is positive.
template <typename Derived>
SymmetricEigen<typename Derived::Scalar> symmetric_eig(const Eigen::MatrixBase<Derived>& m, int max_sweeps = 100,
                                                       typename Derived::Scalar tolerance = 1e-12) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = m.rows();
  if (m.cols() != n) throw std::invalid_argument("symmetric_eig: matrix is not square");

  Matrix<Scalar> a = m;
  Matrix<Scalar> v = Matrix<Scalar>::Identity(n, n);
  const Scalar threshold = tolerance * a.norm();

  auto off_diagonal = [&] {
    Scalar sum = 0;
    for (Eigen::Index q = 1; q < n; ++q)
      for (Eigen::Index p = 0; p < q; ++p) sum += a(p, q) * a(p, q);
    return std::sqrt(Scalar(2) * sum);
  };

  int sweeps = 0;
  while (off_diagonal() > threshold) {
    if (sweeps == max_sweeps)
      throw ConvergenceError("symmetric_eig: no convergence after " + std::to_string(max_sweeps) + " sweeps");
    ++sweeps;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == Scalar(0)) continue;
        Eigen::JacobiRotation<Scalar> rot;
        rot.makeJacobi(a, p, q);
        a.applyOnTheLeft(p, q, rot.adjoint());
        a.applyOnTheRight(p, q, rot);
        a(p, q) = a(q, p) = Scalar(0);
        v.applyOnTheRight(p, q, rot);
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });

  SymmetricEigen<Scalar> out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  out.sweeps = sweeps;
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto src = order[static_cast<std::size_t>(k)];
    out.values[k] = a(src, src);
    out.vectors.col(k) = v.col(src);
    Eigen::Index big = 0;
    out.vectors.col(k).cwiseAbs().maxCoeff(&big);
    if (out.vectors(big, k) < Scalar(0)) out.vectors.col(k) *= Scalar(-1);
  }
  return out;
}

/// Row i holds entry i of each of the first `h` eigenvectors.
template <typename Derived>
Matrix<typename Derived::Scalar> spectral_features(const Eigen::MatrixBase<Derived>& eigenvectors, Eigen::Index h) {
  if (h < 1 || h > eigenvectors.cols())
    throw ValidationError("spectral_features: H=" + std::to_string(h) + " outside [1, " +
                          std::to_string(eigenvectors.cols()) + "]");
  return eigenvectors.leftCols(h);
}

struct DiscretizeResult {
  std::vector<int> labels;
  int iterations = 0;
  double objective = 0.0;  // 2 * (S - sum of singular values) at the last iteration
};

/// Turns spectral features (S x K) into K hard clusters by alternating per-row argmax
/// and an orthogonal Procrustes fit of the rotation.
DiscretizeResult discretize(const Eigen::MatrixXd& features, int k, std::uint64_t seed, int max_iterations = 100,
                            double tolerance = 1e-10);

/// cosine affinity -> attenuation -> normalized Laplacian -> eigenvectors (H = K) -> discretize.
LabelAssignment spectral_cluster(const SessionHypothesis& session, const AttenuationConfig& attenuation,
                                 std::uint64_t seed);

}  // namespace slr
