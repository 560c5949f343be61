#pragma once

#include "slr/corpus.hpp"
#include "slr/metrics.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace slr {

enum class OracleMode { exact, greedy };

OracleMode parse_oracle_mode(std::string_view text);
std::string to_string(OracleMode mode);

// Largest (#reference speakers)^(#segments) that exact enumeration accepts.
inline constexpr double kExactOracleBudget = 1e6;

bool exact_oracle_fits(const SessionHypothesis& session, const ReferenceTranscript& ref);

struct OracleResult {
  // Labels index into `speakers` (reference speakers in sorted order).
  LabelAssignment labels;
  std::vector<std::string> speakers;
  CpWerReport report;
  OracleMode mode = OracleMode::exact;
};

/// Segment labels drawn from the reference speakers that minimize cpWER.
///
/// Exact mode enumerates every assignment (lexicographically smallest wins ties) and throws
/// ValidationError above kExactOracleBudget. Greedy mode starts each segment at the reference
/// speaker whose stream contains the best-matching window for its words, then repeatedly
/// applies the single-segment move with the largest cpWER decrease until none helps.
/// `warm_starts` (labels indexing the sorted reference speakers) seed extra greedy descents;
/// the best local optimum over all starts is returned.
OracleResult oracle_assignment(const SessionHypothesis& session, const ReferenceTranscript& ref, OracleMode mode,
                               std::span<const LabelAssignment> warm_starts = {});

/// Re-expresses a hypothesis labeling in reference-speaker indices using the cpWER mapping;
/// segments of unmatched hypothesis speakers go to their best-window reference speaker.
LabelAssignment to_reference_labels(const SessionHypothesis& session, const ReferenceTranscript& ref,
                                    const LabelAssignment& labels, std::span<const std::string> names = {});

/// (slr - oracle) / (none - oracle): 0 at the oracle, 1 when reassignment gained nothing,
/// above 1 when it made things worse. Throws ValidationError when the inputs are inconsistent
/// or the ratio is undefined (none == oracle != slr).
double relative_confusion_error(double cpwer_none, double cpwer_slr, double cpwer_oracle);

}  // namespace slr
