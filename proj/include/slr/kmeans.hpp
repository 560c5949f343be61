#pragma once

#include "slr/corpus.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace slr {

/// Scales each row to unit Euclidean norm. Throws ValidationError on a zero row.
Eigen::MatrixXd unit_normalize(const Eigen::MatrixXd& vectors);

struct KMeansOptions {
  int max_iterations = 300;
  int restarts = 1;
};

struct KMeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centers;  // K x d
  double cost = 0.0;        // within-cluster sum of squared distances
  int iterations = 0;
  // Cost after each Lloyd iteration of the returned run.
  std::vector<double> cost_history;
};

/// k-means++ seeding followed by Lloyd iterations on the rows of `points`.
/// Points keep their current cluster when it ties for nearest; an empty cluster is
/// re-seeded with the point farthest from its center. Restarts draw from the same
/// generator and the lowest-cost run wins (earliest on ties).
KMeansResult kmeans_pp(const Eigen::MatrixXd& points, int k, std::uint64_t seed, const KMeansOptions& options = {});

/// k-means++ on unit-normalized session embeddings with K = num_speakers.
LabelAssignment kmeans_cluster(const SessionHypothesis& session, std::uint64_t seed, const KMeansOptions& options = {});

}  // namespace slr
