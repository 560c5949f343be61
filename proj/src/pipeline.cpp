#include "slr/pipeline.hpp"

#include "slr/parallel.hpp"
#include "slr/random.hpp"
#include "slr/spectral.hpp"

#include <json.hpp>

namespace slr {

Algorithm parse_algorithm(std::string_view text) {
  if (text == "sc") return Algorithm::sc;
  if (text == "kmeans") return Algorithm::kmeans;
  throw ValidationError("algorithm must be sc or kmeans, got \"" + std::string(text) + "\"");
}

std::string to_string(Algorithm algorithm) { return algorithm == Algorithm::sc ? "sc" : "kmeans"; }

SessionHypothesis resolve_speakers(SessionHypothesis session, const PipelineConfig& cfg) {
  if (cfg.num_speakers) session.num_speakers = *cfg.num_speakers;
  validate_session(session);
  return session;
}

std::uint64_t session_seed(std::uint64_t run_seed, std::size_t session_index) {
  return mix_seed(run_seed, session_index);
}

LabelAssignment cluster(const SessionHypothesis& session, const PipelineConfig& cfg, std::uint64_t seed,
                        std::vector<std::string>* warnings) {
  switch (cfg.algorithm) {
    case Algorithm::sc:
      return spectral_cluster(session, cfg.attenuation, seed);
    case Algorithm::kmeans:
      if (cfg.attenuation.mode != AttenuationMode::none && warnings)
        warnings->push_back("session " + session.session_id + ": attenuation " + to_string(cfg.attenuation) +
                            " is ignored by kmeans");
      return kmeans_cluster(session, seed, cfg.kmeans);
  }
  throw std::logic_error("unknown algorithm");
}

OracleResult best_oracle(const SessionHypothesis& session, const ReferenceTranscript& ref,
                         std::span<const std::pair<LabelAssignment, std::vector<std::string>>> candidates) {
  if (exact_oracle_fits(session, ref)) return oracle_assignment(session, ref, OracleMode::exact);
  std::vector<LabelAssignment> starts;
  for (const auto& [labels, names] : candidates) starts.push_back(to_reference_labels(session, ref, labels, names));
  return oracle_assignment(session, ref, OracleMode::greedy, starts);
}

ReassignResult reassign(const SessionHypothesis& input, const ReferenceTranscript* ref, const PipelineConfig& cfg,
                        std::size_t session_index) {
  cfg.attenuation.validate();
  const auto session = resolve_speakers(input, cfg);
  ReassignResult result;
  result.labels = cluster(session, cfg, session_seed(cfg.seed, session_index), &result.warnings);
  if (!ref) return result;

  SessionReports reports;
  const auto initial = initial_assignment(session);
  const auto initial_names = initial_speakers(session);
  reports.before = cpwer_from_segments(*ref, session, initial, initial_names);
  reports.after = cpwer_from_segments(*ref, session, result.labels);
  const std::pair<LabelAssignment, std::vector<std::string>> candidates[] = {{initial, initial_names},
                                                                             {result.labels, {}}};
  const auto oracle = best_oracle(session, *ref, candidates);
  reports.oracle = oracle.report;
  reports.oracle_mode = oracle.mode;
  if (reports.before.cpwer > reports.oracle.cpwer || reports.after.cpwer == reports.oracle.cpwer)
    reports.relative_error = relative_confusion_error(reports.before.cpwer, reports.after.cpwer, reports.oracle.cpwer);
  result.reports = std::move(reports);
  return result;
}

const ReferenceTranscript* find_reference(const std::vector<ReferenceTranscript>& refs, const std::string& session_id) {
  for (const auto& r : refs)
    if (r.session_id == session_id) return &r;
  return nullptr;
}

std::vector<ReassignResult> reassign_all(const std::vector<SessionHypothesis>& sessions,
                                         const std::vector<ReferenceTranscript>& refs, const PipelineConfig& cfg) {
  std::vector<ReassignResult> results(sessions.size());
  parallel_for(sessions.size(), [&](std::size_t i) {
    results[i] = reassign(sessions[i], find_reference(refs, sessions[i].session_id), cfg, i);
  });
  return results;
}

std::string reassign_report_line(const std::string& session_id, const SessionReports& reports) {
  nlohmann::ordered_json j;
  j["session_id"] = session_id;
  j["ref_words"] = reports.before.ref_words;
  j["errors_before"] = reports.before.errors;
  j["errors_after"] = reports.after.errors;
  j["errors_oracle"] = reports.oracle.errors;
  j["cpwer_before"] = reports.before.cpwer;
  j["cpwer_after"] = reports.after.cpwer;
  j["cpwer_oracle"] = reports.oracle.cpwer;
  j["oracle_mode"] = to_string(reports.oracle_mode);
  j["relative_error"] = reports.relative_error ? nlohmann::ordered_json(*reports.relative_error) : nullptr;
  j["mapping"] = reports.after.mapping;
  return j.dump();
}

}  // namespace slr
