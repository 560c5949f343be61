#pragma once

#include "slr/affinity.hpp"
#include "slr/corpus.hpp"
#include "slr/kmeans.hpp"
#include "slr/metrics.hpp"
#include "slr/oracle.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace slr {

enum class Algorithm { sc, kmeans };

Algorithm parse_algorithm(std::string_view text);
std::string to_string(Algorithm algorithm);

struct PipelineConfig {
  Algorithm algorithm = Algorithm::sc;
  AttenuationConfig attenuation;
  std::uint64_t seed = 0;
  // Overrides the session's own speaker count when set.
  std::optional<int> num_speakers;
  KMeansOptions kmeans;
};

struct SessionReports {
  CpWerReport before;
  CpWerReport after;
  CpWerReport oracle;
  OracleMode oracle_mode = OracleMode::greedy;
  // Empty when the ratio is undefined (no confusion errors to remove).
  std::optional<double> relative_error;
};

struct ReassignResult {
  LabelAssignment labels;
  std::vector<std::string> warnings;
  std::optional<SessionReports> reports;
};

/// Applies the K resolution order: config flag, then the session's own count.
SessionHypothesis resolve_speakers(SessionHypothesis session, const PipelineConfig& cfg);

/// Clusters one session. `seed` is the per-session seed (see session_seed).
LabelAssignment cluster(const SessionHypothesis& session, const PipelineConfig& cfg, std::uint64_t seed,
                        std::vector<std::string>* warnings = nullptr);

/// Per-session seed derived from the run seed and the session's position in the input.
std::uint64_t session_seed(std::uint64_t run_seed, std::size_t session_index);

/// Oracle cpWER with the exact search when it fits the budget, otherwise greedy descent
/// warm-started from `candidates` (hypothesis labelings with their label names).
OracleResult best_oracle(const SessionHypothesis& session, const ReferenceTranscript& ref,
                         std::span<const std::pair<LabelAssignment, std::vector<std::string>>> candidates);

ReassignResult reassign(const SessionHypothesis& session, const ReferenceTranscript* ref, const PipelineConfig& cfg,
                        std::size_t session_index = 0);

/// Runs reassign over all sessions (in parallel), preserving input order. References are
/// matched by session_id; sessions without one get no reports.
std::vector<ReassignResult> reassign_all(const std::vector<SessionHypothesis>& sessions,
                                         const std::vector<ReferenceTranscript>& refs, const PipelineConfig& cfg);

/// Machine-readable per-session summary of the reports.
std::string reassign_report_line(const std::string& session_id, const SessionReports& reports);

const ReferenceTranscript* find_reference(const std::vector<ReferenceTranscript>& refs, const std::string& session_id);

}  // namespace slr
