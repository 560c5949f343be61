#include "slr/pipeline.hpp"
#include "slr/report.hpp"
#include "slr/synth.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <sstream>

using namespace slr;
using slr::test::canonical;

namespace {

SynthSpec clean_spec(int k, std::size_t count) {
  SynthSpec spec;
  spec.session_id = "clean";
  spec.num_speakers = k;
  spec.dim = 16;
  spec.buckets = {{count, 1.0, 3.0, 0.0}};
  spec.confusion_rate = 0.4;
  return spec;
}

}  // namespace

TEST_CASE("reassign groups orthogonal embeddings") {
  Eigen::MatrixXd e(6, 3);
  e << 1, 0, 0, 0, 1, 0, 0.9, 0.1, 0, 0, 0, 1, 0.05, 1, 0, 0, 0.1, 1;
  auto s = slr::test::make_session(e, std::vector<double>(6, 2.0), 3);
  for (auto alg : {Algorithm::sc, Algorithm::kmeans}) {
    PipelineConfig cfg;
    cfg.algorithm = alg;
    const auto r = reassign(s, nullptr, cfg);
    CHECK(canonical(r.labels.labels) == std::vector<int>{0, 1, 0, 2, 1, 2});
    CHECK(!r.reports);
  }
}

TEST_CASE("kmeans ignores attenuation with a warning") {
  const auto fx = generate_session(clean_spec(2, 8), 1);
  PipelineConfig cfg;
  cfg.algorithm = Algorithm::kmeans;
  cfg.attenuation = AttenuationConfig::stepwise(0.25);
  const auto warned = reassign(fx.session, nullptr, cfg);
  REQUIRE(warned.warnings.size() == 1);
  CHECK(warned.warnings[0].find("ignored") != std::string::npos);
  cfg.attenuation = AttenuationConfig::none();
  const auto plain = reassign(fx.session, nullptr, cfg);
  CHECK(plain.warnings.empty());
  CHECK(plain.labels.labels == warned.labels.labels);
}

TEST_CASE("num_speakers override and validation") {
  const auto fx = generate_session(clean_spec(3, 12), 2);
  PipelineConfig cfg;
  cfg.num_speakers = 2;
  const auto r = reassign(fx.session, nullptr, cfg);
  CHECK(*std::max_element(r.labels.labels.begin(), r.labels.labels.end()) <= 1);
  cfg.num_speakers = 13;
  CHECK_THROWS_AS(reassign(fx.session, nullptr, cfg), ValidationError);
  cfg.num_speakers = 0;
  CHECK_THROWS_AS(reassign(fx.session, nullptr, cfg), ValidationError);
  CHECK(parse_algorithm("kmeans") == Algorithm::kmeans);
  CHECK_THROWS_AS(parse_algorithm("ahc"), ValidationError);
}

TEST_CASE("generate_session: noise-free embeddings are recovered exactly") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto fx = generate_session(clean_spec(4, 20), seed);
    CHECK(fx.session.size() == 20);
    CHECK(fx.reference.per_speaker.size() == 4);
    PipelineConfig cfg;
    cfg.seed = seed;
    const auto r = reassign(fx.session, &fx.reference, cfg);
    CHECK(canonical(r.labels.labels) == canonical(fx.true_labels));
    REQUIRE(r.reports);
    CHECK(r.reports->after.cpwer == 0.0);
    CHECK(r.reports->oracle.cpwer == 0.0);
  }
}

TEST_CASE("generate_session: determinism and separation failure") {
  const auto spec = mixed_duration_spec();
  const auto a = generate_session(spec, 3), b = generate_session(spec, 3);
  CHECK(a.true_labels == b.true_labels);
  std::ostringstream sa, sb;
  write_session(a.session, sa);
  write_session(b.session, sb);
  CHECK(sa.str() == sb.str());
  CHECK(a.session.size() == 100);
  std::size_t long_segments = 0;
  for (const auto& seg : a.session.segments) long_segments += seg.duration() >= 8.0;
  CHECK(long_segments == 40);

  SynthSpec crowded = clean_spec(8, 16);
  crowded.dim = 2;
  crowded.min_angle_deg = 80.0;
  CHECK_THROWS_AS(generate_session(crowded, 0), ValidationError);

  std::istringstream json(R"({"num_speakers": 3, "dim": 4, "buckets": [{"count": 6, "min_duration": 1, "max_duration": 2}]})");
  const auto parsed = parse_synth_spec(json);
  CHECK(parsed.num_speakers == 3);
  CHECK(parsed.buckets.at(0).count == 6);
}

TEST_CASE("alpha = 1 and beta = 0 reproduce unattenuated clustering") {
  const auto fx = generate_session(mixed_duration_spec(), 11);
  PipelineConfig cfg;
  cfg.seed = 4;
  const auto none = reassign(fx.session, nullptr, cfg).labels.labels;
  cfg.attenuation = AttenuationConfig::stepwise(1.0);
  CHECK(reassign(fx.session, nullptr, cfg).labels.labels == none);
  cfg.attenuation = AttenuationConfig::polynomial(0.0);
  CHECK(reassign(fx.session, nullptr, cfg).labels.labels == none);
}

TEST_CASE("reassign reports: oracle bounds every labeling") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto fx = generate_session(mixed_duration_spec(4), seed);
    PipelineConfig cfg;
    cfg.seed = seed;
    cfg.attenuation = AttenuationConfig::stepwise(0.25);
    const auto r = reassign(fx.session, &fx.reference, cfg);
    REQUIRE(r.reports);
    CHECK(r.reports->oracle_mode == OracleMode::greedy);
    CHECK(r.reports->oracle.cpwer <= r.reports->after.cpwer);
    CHECK(r.reports->oracle.cpwer <= r.reports->before.cpwer);
    if (r.reports->relative_error) CHECK(*r.reports->relative_error >= 0.0);
    const auto line = reassign_report_line(fx.session.session_id, *r.reports);
    CHECK(line.find("\"cpwer_oracle\"") != std::string::npos);
  }
}

TEST_CASE("reassign_all is deterministic and order-preserving") {
  std::vector<SessionHypothesis> sessions;
  std::vector<ReferenceTranscript> refs;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    auto spec = mixed_duration_spec(3);
    spec.session_id = "s" + std::to_string(seed);
    auto fx = generate_session(spec, seed);
    sessions.push_back(fx.session);
    refs.push_back(fx.reference);
  }
  PipelineConfig cfg;
  cfg.seed = 21;
  const auto a = reassign_all(sessions, refs, cfg), b = reassign_all(sessions, refs, cfg);
  REQUIRE(a.size() == sessions.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].labels.session_id == sessions[i].session_id);
    CHECK(a[i].labels.labels == b[i].labels.labels);
    CHECK(a[i].labels.labels == reassign(sessions[i], &refs[i], cfg, i).labels.labels);
  }
  CHECK(session_seed(21, 0) != session_seed(21, 1));
  CHECK(session_seed(21, 0) != session_seed(22, 0));
}

TEST_CASE("parse_sweep") {
  const auto sweep = parse_sweep("step:0,0.25,1;poly:2");
  REQUIRE(sweep.size() == 4);
  CHECK(sweep[1].mode == AttenuationMode::stepwise);
  CHECK(sweep[1].alpha == 0.25);
  CHECK(sweep[3].mode == AttenuationMode::polynomial);
  CHECK(sweep[3].beta == 2.0);
  CHECK_THROWS_AS(parse_sweep(""), ValidationError);
  CHECK_THROWS_AS(parse_sweep("step"), ValidationError);
  CHECK_THROWS_AS(parse_sweep("step:2"), ValidationError);
}

TEST_CASE("report rows and byte-identical reruns") {
  std::vector<SessionHypothesis> sessions;
  std::vector<ReferenceTranscript> refs;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto spec = mixed_duration_spec(3);
    spec.session_id = "r" + std::to_string(seed);
    auto fx = generate_session(spec, seed);
    sessions.push_back(fx.session);
    refs.push_back(fx.reference);
  }
  ReportOptions opts;
  opts.sweep = parse_sweep("step:0.25,1");
  opts.seed = 5;
  const auto rows = build_report(sessions, refs, opts);
  REQUIRE(rows.size() == 5);
  CHECK(rows.front().name == "none");
  CHECK(rows[1].name == "kmeans");
  CHECK(rows.back().name == "oracle");
  for (const auto& row : rows) {
    CHECK(row.sessions.size() == 3);
    CHECK(rows.back().total.errors <= row.total.errors);
  }
  REQUIRE(rows.front().relative_error_pooled);
  CHECK(*rows.front().relative_error_pooled == 1.0);
  CHECK(*rows.back().relative_error_pooled == 0.0);

  std::ostringstream a, b;
  write_report(rows, a);
  write_report(build_report(sessions, refs, opts), b);
  CHECK(a.str() == b.str());

  refs.pop_back();
  CHECK_THROWS_AS(build_report(sessions, refs, opts), ValidationError);
}
