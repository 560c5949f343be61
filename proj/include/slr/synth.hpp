#pragma once

#include "slr/corpus.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace slr {

/// `count` segments with durations uniform in [min_duration, max_duration). Segments of all
/// buckets are dealt to speakers round-robin in bucket order. Embedding noise is i.i.d.
/// gaussian per dimension.
struct DurationBucket {
  std::size_t count = 1;
  double min_duration = 1.0;
  double max_duration = 2.0;
  double noise_stddev = 0.0;
};

struct SynthSpec {
  std::string session_id = "synth";
  int num_speakers = 2;
  int dim = 32;
  // Minimum angle between centroid lines; |cos| similarity makes antipodes identical.
  double min_angle_deg = 60.0;
  std::vector<DurationBucket> buckets{{}};
  double words_per_second = 2.0;
  std::size_t vocabulary_size = 200;
  bool shared_vocabulary = false;
  // Probability that a hypothesis token is replaced by an out-of-vocabulary token.
  double corruption = 0.0;
  // Probability that a segment's initial label names a different speaker.
  double confusion_rate = 0.0;

  void validate() const;
};

SynthSpec parse_synth_spec(std::istream& in);

/// Segments of `spec.num_speakers` speakers: 40 long (>= 8 s, sigma 0.05) and 60 short
/// (< 2 s, sigma 0.5), initial confusion 0.3. Defaults to 8 speakers.
SynthSpec mixed_duration_spec(int num_speakers = 8);

struct SynthSession {
  SessionHypothesis session;
  ReferenceTranscript reference;
  std::vector<int> true_labels;  // speaker index per segment
};

SynthSession generate_session(const SynthSpec& spec, std::uint64_t seed);

}  // namespace slr
