// Command-line front end: reassign, cpwer, oracle, report, synth.
// Exit codes: 0 success, 1 validation error, 2 runtime error.

#include "slr/corpus.hpp"
#include "slr/metrics.hpp"
#include "slr/oracle.hpp"
#include "slr/pipeline.hpp"
#include "slr/report.hpp"
#include "slr/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

std::optional<int> parse_num_speakers(const std::string& text) {
  if (text == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    const int k = std::stoi(text, &used);
    if (used == text.size() && k >= 1) return k;
  } catch (const std::exception&) {
  }
  throw slr::ValidationError("--num-speakers must be auto or a positive integer, got \"" + text + "\"");
}

void print_summary(const char* label, std::span<const slr::CpWerReport> reports) {
  const auto a = slr::aggregate(reports);
  nlohmann::ordered_json j;
  j["summary"] = label;
  j["errors"] = a.errors;
  j["ref_words"] = a.ref_words;
  j["cpwer_pooled"] = a.pooled;
  j["cpwer_macro"] = a.macro;
  std::cout << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Segment-level speaker reassignment toolkit"};
  app.require_subcommand(1);

  // reassign
  auto* reassign = app.add_subcommand("reassign", "Re-cluster segment embeddings and rewrite speaker labels");
  std::string segments_path, out_path, reference_path, report_path, algorithm = "sc", attenuation = "none",
                                                                       num_speakers = "auto";
  std::uint64_t seed = 0;
  reassign->add_option("--segments", segments_path, "Segment records (JSON lines)")->required();
  reassign->add_option("--algorithm", algorithm, "sc or kmeans")->capture_default_str();
  reassign->add_option("--attenuation", attenuation, "none, step:ALPHA or poly:BETA")->capture_default_str();
  reassign->add_option("--num-speakers", num_speakers, "auto or N")->capture_default_str();
  reassign->add_option("--seed", seed)->capture_default_str();
  reassign->add_option("--out", out_path, "Relabeled segment records")->required();
  reassign->add_option("--reference", reference_path, "Reference records; enables cpWER reports");
  reassign->add_option("--report", report_path, "Per-session report lines (default: stdout)");
  std::string dump_affinity;
  reassign->add_option("--dump-affinity", dump_affinity, "Write attenuated affinity rows of each session here");

  // cpwer
  auto* cpwer_cmd = app.add_subcommand("cpwer", "Score hypothesis segment labels against a reference");
  std::string hyp_path;
  bool per_session = false;
  cpwer_cmd->add_option("--reference", reference_path)->required();
  cpwer_cmd->add_option("--hyp", hyp_path, "Segment records whose speaker field is the hypothesis")->required();
  cpwer_cmd->add_flag("--per-session", per_session);

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "Best segment-level assignment in terms of cpWER");
  std::string mode = "greedy";
  oracle_cmd->add_option("--segments", segments_path)->required();
  oracle_cmd->add_option("--reference", reference_path)->required();
  oracle_cmd->add_option("--mode", mode, "exact or greedy")->capture_default_str();
  oracle_cmd->add_option("--out", out_path)->required();

  // report
  auto* report_cmd = app.add_subcommand("report", "cpWER grid over clustering settings plus relative errors");
  std::string sweep = "step:0,0.1,0.25,1;poly:1,2,4,8,16";
  report_cmd->add_option("--segments", segments_path)->required();
  report_cmd->add_option("--reference", reference_path)->required();
  report_cmd->add_option("--sweep", sweep)->capture_default_str();
  report_cmd->add_option("--num-speakers", num_speakers)->capture_default_str();
  report_cmd->add_option("--seed", seed)->capture_default_str();
  report_cmd->add_option("--out", out_path)->required();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic session from a JSON spec");
  std::string spec_path, prefix;
  synth_cmd->add_option("--spec", spec_path)->required();
  synth_cmd->add_option("--seed", seed)->capture_default_str();
  synth_cmd->add_option("--out-prefix", prefix, "Writes P.segments.jsonl, P.reference.jsonl, P.truth.jsonl")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*reassign) {
      slr::PipelineConfig cfg;
      cfg.algorithm = slr::parse_algorithm(algorithm);
      cfg.attenuation = slr::parse_attenuation(attenuation);
      cfg.seed = seed;
      cfg.num_speakers = parse_num_speakers(num_speakers);
      const auto sessions = slr::read_segments_file(segments_path);
      const auto refs = reference_path.empty() ? std::vector<slr::ReferenceTranscript>{}
                                               : slr::read_reference_file(reference_path);
      if (!reference_path.empty())
        for (const auto& s : sessions)
          if (!slr::find_reference(refs, s.session_id))
            throw slr::ValidationError("session " + s.session_id + " has no reference");
      const auto results = slr::reassign_all(sessions, refs, cfg);

      auto out = open_out(out_path);
      std::ofstream report_file;
      if (!report_path.empty()) report_file = open_out(report_path);
      std::ostream& report = report_path.empty() ? std::cout : report_file;
      std::ofstream dump;
      if (!dump_affinity.empty()) dump = open_out(dump_affinity);
      for (std::size_t i = 0; i < sessions.size(); ++i) {
        const auto session = slr::resolve_speakers(sessions[i], cfg);
        slr::write_assignment(session, results[i].labels, out);
        for (const auto& w : results[i].warnings) std::cerr << "warning: " << w << '\n';
        if (results[i].reports) report << slr::reassign_report_line(session.session_id, *results[i].reports) << '\n';
        if (dump) {
          dump << "# " << session.session_id << '\n';
          slr::write_matrix_rows(slr::attenuate(slr::cosine_affinity(slr::embedding_matrix(session)),
                                                slr::durations(session), cfg.attenuation),
                                 dump);
        }
      }
    } else if (*cpwer_cmd) {
      const auto refs = slr::read_reference_file(reference_path);
      const auto sessions = slr::read_segments_file(hyp_path);
      std::vector<slr::CpWerReport> reports;
      for (const auto& s : sessions) {
        const auto* ref = slr::find_reference(refs, s.session_id);
        if (!ref) throw slr::ValidationError("session " + s.session_id + " has no reference");
        reports.push_back(slr::cpwer_from_segments(*ref, s, slr::initial_assignment(s), slr::initial_speakers(s)));
        if (per_session) std::cout << slr::report_line(reports.back()) << '\n';
      }
      print_summary("cpwer", reports);
    } else if (*oracle_cmd) {
      const auto oracle_mode = slr::parse_oracle_mode(mode);
      const auto refs = slr::read_reference_file(reference_path);
      const auto sessions = slr::read_segments_file(segments_path);
      auto out = open_out(out_path);
      std::vector<slr::CpWerReport> reports;
      for (const auto& s : sessions) {
        const auto* ref = slr::find_reference(refs, s.session_id);
        if (!ref) throw slr::ValidationError("session " + s.session_id + " has no reference");
        const auto result = slr::oracle_assignment(s, *ref, oracle_mode);
        auto relabeled = s;
        relabeled.num_speakers = static_cast<int>(result.speakers.size());
        slr::write_assignment(relabeled, result.labels, out, result.speakers);
        std::cout << slr::report_line(result.report) << '\n';
        reports.push_back(result.report);
      }
      print_summary("oracle", reports);
    } else if (*report_cmd) {
      slr::ReportOptions options;
      options.sweep = slr::parse_sweep(sweep);
      options.seed = seed;
      options.num_speakers = parse_num_speakers(num_speakers);
      const auto rows = slr::build_report(slr::read_segments_file(segments_path),
                                          slr::read_reference_file(reference_path), options);
      auto out = open_out(out_path);
      slr::write_report(rows, out);
    } else if (*synth_cmd) {
      std::ifstream spec_in(spec_path);
      if (!spec_in) throw slr::ValidationError("cannot open " + spec_path);
      const auto generated = slr::generate_session(slr::parse_synth_spec(spec_in), seed);
      auto seg_out = open_out(prefix + ".segments.jsonl");
      slr::write_session(generated.session, seg_out);
      auto ref_out = open_out(prefix + ".reference.jsonl");
      slr::write_reference(generated.reference, ref_out);
      auto truth_out = open_out(prefix + ".truth.jsonl");
      for (std::size_t i = 0; i < generated.session.size(); ++i) {
        nlohmann::ordered_json j;
        j["session_id"] = generated.session.session_id;
        j["segment_id"] = generated.session.segments[i].segment_id;
        j["speaker"] = "speaker" + std::to_string(generated.true_labels[i]);
        truth_out << j.dump() << '\n';
      }
    }
  } catch (const slr::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
