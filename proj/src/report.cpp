#include "slr/report.hpp"

#include "slr/parallel.hpp"

#include <json.hpp>

#include <ostream>

namespace slr {

namespace {

std::optional<double> try_relative(double none, double slr, double oracle) {
  if (none > oracle || slr == oracle) return relative_confusion_error(none, slr, oracle);
  return std::nullopt;
}

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

std::vector<AttenuationConfig> parse_sweep(std::string_view text) {
  std::vector<AttenuationConfig> out;
  while (!text.empty()) {
    const auto end = text.find(';');
    const auto group = text.substr(0, end);
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    if (group.empty()) continue;
    if (group == "none") {
      out.push_back(AttenuationConfig::none());
      continue;
    }
    const auto colon = group.find(':');
    if (colon == std::string_view::npos) throw ValidationError("sweep group needs MODE:values, got \"" + std::string(group) + "\"");
    const auto mode = group.substr(0, colon);
    auto values = group.substr(colon + 1);
    while (true) {
      const auto comma = values.find(',');
      out.push_back(parse_attenuation(std::string(mode) + ":" + std::string(values.substr(0, comma))));
      if (comma == std::string_view::npos) break;
      values = values.substr(comma + 1);
    }
  }
  if (out.empty()) throw ValidationError("empty sweep");
  return out;
}

std::vector<ReportRow> build_report(const std::vector<SessionHypothesis>& sessions,
                                    const std::vector<ReferenceTranscript>& refs, const ReportOptions& options) {
  for (const auto& a : options.sweep) a.validate();
  std::vector<ReportRow> rows;
  rows.push_back({"none", "none", std::nullopt, {}, {}, {}, {}});
  rows.push_back({"kmeans", "kmeans", std::nullopt, {}, {}, {}, {}});
  for (const auto& a : options.sweep) rows.push_back({"sc:" + to_string(a), "sc", a, {}, {}, {}, {}});
  rows.push_back({"oracle", "oracle", std::nullopt, {}, {}, {}, {}});
  const std::size_t n_rows = rows.size();

  std::vector<std::vector<CpWerReport>> per_session(sessions.size());
  parallel_for(sessions.size(), [&](std::size_t i) {
    PipelineConfig cfg;
    cfg.num_speakers = options.num_speakers;
    cfg.kmeans = options.kmeans;
    const auto session = resolve_speakers(sessions[i], cfg);
    const auto* ref = find_reference(refs, session.session_id);
    if (!ref) throw ValidationError("session " + session.session_id + " has no reference");
    const auto seed = session_seed(options.seed, i);

    std::vector<std::pair<LabelAssignment, std::vector<std::string>>> labelings;
    labelings.emplace_back(initial_assignment(session), initial_speakers(session));
    cfg.algorithm = Algorithm::kmeans;
    labelings.emplace_back(cluster(session, cfg, seed), std::vector<std::string>{});
    cfg.algorithm = Algorithm::sc;
    for (const auto& a : options.sweep) {
      cfg.attenuation = a;
      labelings.emplace_back(cluster(session, cfg, seed), std::vector<std::string>{});
    }

    auto& out = per_session[i];
    for (const auto& [labels, names] : labelings) out.push_back(cpwer_from_segments(*ref, session, labels, names));
    out.push_back(best_oracle(session, *ref, labelings).report);
  });

  for (std::size_t r = 0; r < n_rows; ++r) {
    for (const auto& s : per_session) rows[r].sessions.push_back(s[r]);
    rows[r].total = aggregate(rows[r].sessions);
  }
  const auto& none = rows.front();
  const auto& oracle = rows.back();
  for (auto& row : rows) {
    row.relative_error_pooled = try_relative(none.total.pooled, row.total.pooled, oracle.total.pooled);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < sessions.size(); ++i) {
      if (auto v = try_relative(none.sessions[i].cpwer, row.sessions[i].cpwer, oracle.sessions[i].cpwer)) {
        sum += *v;
        ++count;
      }
    }
    if (count) row.relative_error_macro = sum / static_cast<double>(count);
  }
  return rows;
}

void write_report(const std::vector<ReportRow>& rows, std::ostream& out) {
  const auto& none = rows.front();
  const auto& oracle = rows.back();
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.sessions.size(); ++i) {
      const auto& s = row.sessions[i];
      nlohmann::ordered_json j;
      j["type"] = "session";
      j["row"] = row.name;
      j["session_id"] = s.session_id;
      j["cpwer"] = s.cpwer;
      j["errors"] = s.errors;
      j["ref_words"] = s.ref_words;
      j["relative_error"] = optional_number(try_relative(none.sessions[i].cpwer, s.cpwer, oracle.sessions[i].cpwer));
      out << j.dump() << '\n';
    }
  }
  for (const auto& row : rows) {
    nlohmann::ordered_json j;
    j["type"] = "table";
    j["row"] = row.name;
    j["algorithm"] = row.algorithm;
    j["attenuation"] = row.attenuation ? to_string(*row.attenuation) : "";
    const bool step = row.attenuation && row.attenuation->mode == AttenuationMode::stepwise;
    const bool poly = row.attenuation && row.attenuation->mode == AttenuationMode::polynomial;
    j["alpha"] = step ? nlohmann::ordered_json(row.attenuation->alpha) : nlohmann::ordered_json(nullptr);
    j["beta"] = poly ? nlohmann::ordered_json(row.attenuation->beta) : nlohmann::ordered_json(nullptr);
    j["errors"] = row.total.errors;
    j["ref_words"] = row.total.ref_words;
    j["cpwer_pooled"] = row.total.pooled;
    j["cpwer_macro"] = row.total.macro;
    j["relative_error_pooled"] = optional_number(row.relative_error_pooled);
    j["relative_error_macro"] = optional_number(row.relative_error_macro);
    out << j.dump() << '\n';
  }
}

}  // namespace slr
