#include "slr/synth.hpp"

#include "slr/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>

namespace slr {

namespace {

constexpr int kMaxCentroidTries = 10000;

std::vector<Eigen::VectorXd> draw_centroids(const SynthSpec& spec, Rng& rng) {
  std::normal_distribution<double> gauss;
  const double max_cos = std::cos(spec.min_angle_deg * std::numbers::pi / 180.0);
  std::vector<Eigen::VectorXd> centroids;
  int tries = 0;
  while (static_cast<int>(centroids.size()) < spec.num_speakers) {
    if (++tries > kMaxCentroidTries)
      throw ValidationError("synth: cannot place " + std::to_string(spec.num_speakers) + " centroids " +
                            std::to_string(spec.min_angle_deg) + " degrees apart in " + std::to_string(spec.dim) +
                            " dimensions");
    Eigen::VectorXd c(spec.dim);
    for (auto& v : c) v = gauss(rng);
    if (c.norm() == 0.0) continue;
    c.normalize();
    const bool separated = std::all_of(centroids.begin(), centroids.end(),
                                       [&](const Eigen::VectorXd& o) { return std::abs(o.dot(c)) <= max_cos; });
    if (separated) centroids.push_back(std::move(c));
  }
  return centroids;
}

}  // namespace

void SynthSpec::validate() const {
  if (num_speakers < 1 || dim < 1) throw ValidationError("synth: num_speakers and dim must be >= 1");
  if (buckets.empty()) throw ValidationError("synth: at least one duration bucket is required");
  std::size_t total = 0;
  for (const auto& b : buckets) {
    if (b.count < 1) throw ValidationError("synth: bucket count must be >= 1");
    if (!(b.min_duration > 0.0) || !(b.max_duration >= b.min_duration))
      throw ValidationError("synth: bucket durations must satisfy 0 < min <= max");
    if (!(b.noise_stddev >= 0.0)) throw ValidationError("synth: noise stddev must be >= 0");
    total += b.count;
  }
  if (total < static_cast<std::size_t>(num_speakers)) throw ValidationError("synth: fewer segments than speakers");
  if (!(min_angle_deg >= 0.0 && min_angle_deg <= 90.0)) throw ValidationError("synth: min_angle_deg must be in [0, 90]");
  if (!(words_per_second > 0.0) || vocabulary_size < 1) throw ValidationError("synth: bad vocabulary settings");
  for (double p : {corruption, confusion_rate})
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("synth: probabilities must be in [0, 1]");
}

SynthSpec parse_synth_spec(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("synth spec: ") + e.what());
  }
  SynthSpec s;
  try {
    s.session_id = j.value("session_id", s.session_id);
    s.num_speakers = j.value("num_speakers", s.num_speakers);
    s.dim = j.value("dim", s.dim);
    s.min_angle_deg = j.value("min_angle_deg", s.min_angle_deg);
    s.words_per_second = j.value("words_per_second", s.words_per_second);
    s.vocabulary_size = j.value("vocabulary_size", s.vocabulary_size);
    s.shared_vocabulary = j.value("shared_vocabulary", s.shared_vocabulary);
    s.corruption = j.value("corruption", s.corruption);
    s.confusion_rate = j.value("confusion_rate", s.confusion_rate);
    if (j.contains("buckets")) {
      s.buckets.clear();
      for (const auto& b : j.at("buckets"))
        s.buckets.push_back({b.at("count").get<std::size_t>(), b.at("min_duration").get<double>(),
                             b.at("max_duration").get<double>(), b.value("noise_stddev", 0.0)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("synth spec: ") + e.what());
  }
  s.validate();
  return s;
}

SynthSpec mixed_duration_spec(int num_speakers) {
  SynthSpec s;
  s.session_id = "mixed";
  s.num_speakers = num_speakers;
  s.dim = 32;
  s.min_angle_deg = 60.0;
  s.buckets = {{40, 8.0, 16.0, 0.05}, {60, 0.5, 2.0, 0.5}};
  s.corruption = 0.1;
  s.confusion_rate = 0.3;
  return s;
}

SynthSession generate_session(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  const auto centroids = draw_centroids(spec, rng);
  const int k = spec.num_speakers;

  struct Draft {
    int speaker;
    const DurationBucket* bucket;
  };
  std::vector<Draft> drafts;
  for (const auto& b : spec.buckets)
    for (std::size_t j = 0; j < b.count; ++j)
      drafts.push_back({static_cast<int>(drafts.size() % static_cast<std::size_t>(k)), &b});
  std::shuffle(drafts.begin(), drafts.end(), rng);

  std::uniform_real_distribution<double> unit;
  std::normal_distribution<double> gauss;
  SynthSession out;
  out.session.session_id = spec.session_id;
  out.session.num_speakers = k;
  out.reference.session_id = spec.session_id;
  for (int s = 0; s < k; ++s) out.reference.per_speaker["speaker" + std::to_string(s)];

  double t = 0.0;
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    const auto& [speaker, bucket] = drafts[i];
    Segment seg;
    seg.session_id = spec.session_id;
    char id[32];
    std::snprintf(id, sizeof id, "seg%04zu", i);
    seg.segment_id = id;
    const double duration = bucket->min_duration + (bucket->max_duration - bucket->min_duration) * unit(rng);
    seg.start = t;
    seg.end = t + duration;
    t = seg.end + 0.1 + 0.9 * unit(rng);

    const auto n_words = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(duration * spec.words_per_second)));
    auto& ref_stream = out.reference.per_speaker["speaker" + std::to_string(speaker)];
    const std::string prefix = spec.shared_vocabulary ? "w" : "s" + std::to_string(speaker) + "w";
    for (std::size_t w = 0; w < n_words; ++w) {
      std::string word = prefix + std::to_string(uniform_index(rng, spec.vocabulary_size));
      ref_stream.push_back(word);
      if (unit(rng) < spec.corruption) word = "oov" + std::to_string(uniform_index(rng, 1000));
      seg.words.push_back(std::move(word));
    }

    Eigen::VectorXd e = centroids[static_cast<std::size_t>(speaker)];
    for (auto& v : e) v += bucket->noise_stddev * gauss(rng);
    if (e.norm() == 0.0) e = centroids[static_cast<std::size_t>(speaker)];
    seg.embedding = e.normalized();

    int initial = speaker;
    if (k > 1 && unit(rng) < spec.confusion_rate) {
      initial = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(k - 1)));
      if (initial >= speaker) ++initial;
    }
    seg.initial_speaker = "spk" + std::to_string(initial);
    out.session.segments.push_back(std::move(seg));
    out.true_labels.push_back(speaker);
  }
  validate_session(out.session);
  return out;
}

}  // namespace slr
