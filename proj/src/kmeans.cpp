#include "slr/kmeans.hpp"

#include "slr/random.hpp"

#include <limits>
#include <numeric>

namespace slr {

namespace {

double cluster_cost(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers, const std::vector<int>& labels) {
  double cost = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    cost += (points.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  return cost;
}

Eigen::MatrixXd seed_centers(const Eigen::MatrixXd& points, int k, Rng& rng) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centers(k, points.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  auto take = [&](Eigen::Index i, int slot) {
    centers.row(slot) = points.row(i);
    chosen[static_cast<std::size_t>(i)] = true;
  };

  take(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(n))), 0);
  Eigen::VectorXd nearest = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    Eigen::Index pick = 0;
    const double total = nearest.sum();
    if (total > 0.0) {
      const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      pick = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (nearest[i] <= 0.0) continue;
        acc += nearest[i];
        pick = i;
        if (acc > target) break;
      }
    } else {
      // Every point coincides with a center: draw uniformly among the unchosen ones.
      std::vector<Eigen::Index> free;
      for (Eigen::Index i = 0; i < n; ++i)
        if (!chosen[static_cast<std::size_t>(i)]) free.push_back(i);
      pick = free[uniform_index(rng, free.size())];
    }
    take(pick, c);
    nearest = nearest.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

KMeansResult lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd centers, int max_iterations) {
  const Eigen::Index n = points.rows();
  const auto k = static_cast<int>(centers.rows());
  KMeansResult r;
  r.labels.assign(static_cast<std::size_t>(n), -1);

  for (int it = 1; it <= max_iterations; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& label = r.labels[static_cast<std::size_t>(i)];
      const Eigen::VectorXd d = (centers.rowwise() - points.row(i)).rowwise().squaredNorm();
      Eigen::Index best = 0;
      d.minCoeff(&best);
      if (label >= 0 && d[label] <= d[best]) continue;
      label = static_cast<int>(best);
      changed = true;
    }

    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int l : r.labels) ++sizes[static_cast<std::size_t>(l)];
    for (int c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int l = r.labels[static_cast<std::size_t>(i)];
        if (sizes[static_cast<std::size_t>(l)] < 2) continue;
        const double d = (points.row(i) - centers.row(l)).squaredNorm();
        if (d > far_d) far_d = d, far = i;
      }
      --sizes[static_cast<std::size_t>(r.labels[static_cast<std::size_t>(far)])];
      r.labels[static_cast<std::size_t>(far)] = c;
      sizes[static_cast<std::size_t>(c)] = 1;
      changed = true;
    }

    centers.setZero();
    for (Eigen::Index i = 0; i < n; ++i) centers.row(r.labels[static_cast<std::size_t>(i)]) += points.row(i);
    for (int c = 0; c < k; ++c) centers.row(c) /= sizes[static_cast<std::size_t>(c)];

    r.iterations = it;
    r.cost_history.push_back(cluster_cost(points, centers, r.labels));
    if (!changed) break;
  }
  r.centers = std::move(centers);
  r.cost = r.cost_history.back();
  return r;
}

}  // namespace

Eigen::MatrixXd unit_normalize(const Eigen::MatrixXd& vectors) {
  Eigen::MatrixXd out = vectors;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (!(norm > 0.0)) throw ValidationError("unit_normalize: zero-norm vector at row " + std::to_string(i));
    out.row(i) /= norm;
  }
  return out;
}

KMeansResult kmeans_pp(const Eigen::MatrixXd& points, int k, std::uint64_t seed, const KMeansOptions& options) {
  if (k < 1 || k > points.rows())
    throw ValidationError("kmeans: K=" + std::to_string(k) + " outside [1, " + std::to_string(points.rows()) + "]");
  if (options.max_iterations < 1 || options.restarts < 1)
    throw ValidationError("kmeans: max_iterations and restarts must be >= 1");
  Rng rng(seed);
  KMeansResult best;
  for (int run = 0; run < options.restarts; ++run) {
    auto r = lloyd(points, seed_centers(points, k, rng), options.max_iterations);
    if (run == 0 || r.cost < best.cost) best = std::move(r);
  }
  return best;
}

LabelAssignment kmeans_cluster(const SessionHypothesis& session, std::uint64_t seed, const KMeansOptions& options) {
  validate_session(session);
  auto r = kmeans_pp(unit_normalize(embedding_matrix(session)), session.num_speakers, seed, options);
  return {session.session_id, std::move(r.labels)};
}

}  // namespace slr
