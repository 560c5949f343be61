#pragma once

#include "slr/corpus.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace slr {

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_len = 0;

  std::size_t errors() const { return substitutions + deletions + insertions; }
  EditCounts& operator+=(const EditCounts& o) {
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    ref_len += o.ref_len;
    return *this;
  }
  bool operator==(const EditCounts&) const = default;
};

/// Word-level Levenshtein alignment with unit costs. Among minimal alignments the
/// backtrace prefers substitution/match, then insertion, then deletion.
EditCounts edit_distance(std::span<const std::string> ref, std::span<const std::string> hyp);

/// Total edit distance only, in O(min(|ref|, |hyp|)) memory.
std::size_t edit_cost(std::span<const std::string> ref, std::span<const std::string> hyp);

/// Edit cost of `query` against the best-matching contiguous window of `text`
/// (free leading and trailing gaps in `text`).
std::size_t window_edit_cost(std::span<const std::string> query, std::span<const std::string> text);

using SpeakerStreams = std::map<std::string, Tokens>;

inline const std::string kUnmatched = "unmatched";

struct SpeakerPair {
  std::string reference;   // empty for a padding speaker
  std::string hypothesis;  // empty for a padding speaker
  EditCounts counts;
};

struct CpWerReport {
  std::string session_id;
  std::vector<SpeakerPair> pairs;
  EditCounts totals;
  std::size_t errors = 0;
  std::size_t ref_words = 0;
  double cpwer = 0.0;
  // Hypothesis speaker -> reference speaker, or kUnmatched.
  std::map<std::string, std::string> mapping;
};

/// Concatenated minimum-permutation WER. The smaller side is padded with empty
/// speakers and the speaker pairing is an optimal linear assignment.
/// Throws ValidationError when the reference holds no words.
CpWerReport cpwer(const ReferenceTranscript& ref, const SpeakerStreams& hyp);

/// Exhaustive version of cpwer over all pairings; padded speaker count must be <= 8.
CpWerReport brute_force_cpwer(const ReferenceTranscript& ref, const SpeakerStreams& hyp);

/// Per-label word streams: segments ordered by (start, segment_id) and concatenated.
/// Label k is keyed names[k] when names is given, otherwise "spk<k>".
SpeakerStreams label_streams(const SessionHypothesis& session, const LabelAssignment& labels,
                             std::span<const std::string> names = {});

CpWerReport cpwer_from_segments(const ReferenceTranscript& ref, const SessionHypothesis& session,
                                const LabelAssignment& labels, std::span<const std::string> names = {});

/// Minimum-cost perfect matching on a square cost matrix; returns column per row.
std::vector<std::size_t> solve_assignment(const std::vector<std::vector<long long>>& cost);

/// errors / words pooled over sessions, plus the unweighted mean of per-session rates.
struct AggregateCpWer {
  std::size_t errors = 0;
  std::size_t ref_words = 0;
  double pooled = 0.0;
  double macro = 0.0;
};
AggregateCpWer aggregate(std::span<const CpWerReport> reports);

/// `{"session_id": .., "cpwer": .., "errors": .., "ref_words": .., "mapping": {..}, ...}`
std::string report_line(const CpWerReport& report);

}  // namespace slr
