#include "slr/spectral.hpp"

#include "slr/random.hpp"

#include <Eigen/SVD>

#include <charconv>
#include <limits>
#include <sstream>

namespace slr {

AttenuationConfig parse_attenuation(std::string_view text) {
  auto number = [&](std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
      throw ValidationError("bad attenuation value \"" + std::string(text) + "\"");
    return v;
  };
  AttenuationConfig cfg;
  if (text == "none") return cfg;
  if (text.starts_with("step:")) {
    cfg = AttenuationConfig::stepwise(number(text.substr(5)));
  } else if (text.starts_with("poly:")) {
    cfg = AttenuationConfig::polynomial(number(text.substr(5)));
  } else {
    throw ValidationError("attenuation must be none, step:ALPHA or poly:BETA, got \"" + std::string(text) + "\"");
  }
  cfg.validate();
  return cfg;
}

std::string to_string(const AttenuationConfig& cfg) {
  std::ostringstream s;
  switch (cfg.mode) {
    case AttenuationMode::none:
      return "none";
    case AttenuationMode::stepwise:
      s << "step:" << cfg.alpha;
      break;
    case AttenuationMode::polynomial:
      s << "poly:" << cfg.beta;
      break;
  }
  return s.str();
}

DiscretizeResult discretize(const Eigen::MatrixXd& features, int k, std::uint64_t seed, int max_iterations,
                            double tolerance) {
  const Eigen::Index n = features.rows();
  if (k < 1 || features.cols() != k)
    throw ValidationError("discretize: K=" + std::to_string(k) + " but features have " +
                          std::to_string(features.cols()) + " columns");
  if (k > n) throw ValidationError("discretize: K=" + std::to_string(k) + " exceeds " + std::to_string(n) + " rows");

  Eigen::MatrixXd x = features;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = x.row(i).norm();
    if (norm > 0.0) x.row(i) /= norm;
  }

  // Initial rotation: a seeded row, then rows least aligned with those already chosen.
  Rng rng(seed);
  Eigen::MatrixXd rotation(k, k);
  rotation.col(0) = x.row(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(n)))).transpose();
  Eigen::VectorXd overlap = Eigen::VectorXd::Zero(n);
  for (int j = 1; j < k; ++j) {
    overlap += (x * rotation.col(j - 1)).cwiseAbs();
    Eigen::Index next = 0;
    overlap.minCoeff(&next);
    rotation.col(j) = x.row(next).transpose();
  }

  DiscretizeResult result;
  result.labels.assign(static_cast<std::size_t>(n), 0);
  double last = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iterations; ++it) {
    const Eigen::MatrixXd projected = x * rotation;
    Eigen::MatrixXd indicator = Eigen::MatrixXd::Zero(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      for (Eigen::Index j = 1; j < k; ++j)
        if (projected(i, j) > projected(i, best)) best = j;
      result.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
      indicator(i, best) = 1.0;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(indicator.transpose() * x, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double objective = 2.0 * (static_cast<double>(n) - svd.singularValues().sum());
    result.iterations = it;
    result.objective = objective;
    if (std::abs(objective - last) < tolerance || objective < tolerance) break;
    last = objective;
    rotation = svd.matrixV() * svd.matrixU().transpose();
  }
  return result;
}

LabelAssignment spectral_cluster(const SessionHypothesis& session, const AttenuationConfig& attenuation,
                                 std::uint64_t seed) {
  validate_session(session);
  attenuation.validate();
  const int k = session.num_speakers;
  const Eigen::MatrixXd affinity = attenuate(cosine_affinity(embedding_matrix(session)), durations(session), attenuation);
  const auto eig = symmetric_eig(normalized_laplacian(affinity));
  const Eigen::MatrixXd features = spectral_features(eig.vectors, k);
  return {session.session_id, discretize(features, k, seed).labels};
}

}  // namespace slr
