#include "slr/oracle.hpp"

#include "slr/kmeans.hpp"
#include "slr/spectral.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <random>

using namespace slr;
using namespace slr::test;

namespace {

ReferenceTranscript ref_of(std::string id, std::map<std::string, std::string> speakers) {
  ReferenceTranscript r{std::move(id), {}};
  for (const auto& [k, v] : speakers) r.per_speaker[k] = tokenize(v);
  return r;
}

}  // namespace

TEST_CASE("oracle: single segment, single speaker") {
  auto s = make_session(Eigen::MatrixXd::Identity(1, 2), {1.0}, 1, {{"a", "b"}});
  const auto ref = ref_of("test", {{"A", "a b"}});
  for (auto mode : {OracleMode::exact, OracleMode::greedy}) {
    const auto o = oracle_assignment(s, ref, mode);
    CHECK(o.labels.labels == std::vector<int>{0});
    CHECK(o.report.cpwer == 0.0);
  }
}

TEST_CASE("oracle: perfect ASR with wrong labels reaches zero") {
  auto s = make_session(Eigen::MatrixXd::Identity(4, 4), {1, 1, 1, 1}, 2, {{"a1", "a2"}, {"b1"}, {"a3"}, {"b2"}});
  for (auto& seg : s.segments) seg.initial_speaker = "spk0";
  const auto ref = ref_of("test", {{"A", "a1 a2 a3"}, {"B", "b1 b2"}});
  for (auto mode : {OracleMode::exact, OracleMode::greedy}) {
    const auto o = oracle_assignment(s, ref, mode);
    CHECK(o.report.cpwer == 0.0);
    CHECK(o.labels.labels == std::vector<int>{0, 1, 0, 1});
    CHECK(o.speakers == std::vector<std::string>{"A", "B"});
  }
}

TEST_CASE("oracle: exact matches exhaustive search and bounds every labeling") {
  std::mt19937_64 rng(5);
  int greedy_hits = 0, fixtures = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto fx = small_fixture(seed, 3 + seed % 6, 2 + static_cast<int>(seed % 2));
    const auto& s = fx.session;
    const auto exact = oracle_assignment(s, fx.reference, OracleMode::exact);
    CHECK(exact.report.errors == brute_force_oracle_errors(s, fx.reference));
    CHECK(exact.report.errors == identity_mapped_errors(s, fx.reference, exact.labels.labels));

    const auto sc = spectral_cluster(s, AttenuationConfig::none(), seed);
    const auto km = kmeans_cluster(s, seed);
    CHECK(exact.report.cpwer <= cpwer_from_segments(fx.reference, s, sc).cpwer);
    CHECK(exact.report.cpwer <= cpwer_from_segments(fx.reference, s, km).cpwer);
    CHECK(exact.report.cpwer <= cpwer_from_segments(fx.reference, s, initial_assignment(s), initial_speakers(s)).cpwer);
    std::uniform_int_distribution<int> label(0, s.num_speakers - 1);
    for (int trial = 0; trial < 10; ++trial) {
      LabelAssignment random{s.session_id, std::vector<int>(s.size())};
      for (auto& l : random.labels) l = label(rng);
      CHECK(exact.report.cpwer <= cpwer_from_segments(fx.reference, s, random).cpwer);
    }

    const auto greedy = oracle_assignment(s, fx.reference, OracleMode::greedy);
    CHECK(greedy.report.errors >= exact.report.errors);
    greedy_hits += greedy.report.errors == exact.report.errors;
    ++fixtures;
  }
  CHECK(greedy_hits * 10 >= fixtures * 9);
}

TEST_CASE("oracle: greedy warm starts never hurt") {
  for (std::uint64_t seed = 100; seed < 115; ++seed) {
    const auto fx = small_fixture(seed, 9, 3);
    const auto cold = oracle_assignment(fx.session, fx.reference, OracleMode::greedy);
    const auto initial = to_reference_labels(fx.session, fx.reference, initial_assignment(fx.session),
                                             initial_speakers(fx.session));
    const LabelAssignment starts[] = {initial};
    const auto warm = oracle_assignment(fx.session, fx.reference, OracleMode::greedy, starts);
    CHECK(warm.report.errors <= cold.report.errors);
    CHECK(warm.report.errors <=
          cpwer_from_segments(fx.reference, fx.session, initial_assignment(fx.session), initial_speakers(fx.session)).errors);
  }
}

TEST_CASE("to_reference_labels preserves the cpWER of a labeling") {
  for (std::uint64_t seed = 200; seed < 210; ++seed) {
    const auto fx = small_fixture(seed, 8, 2);
    const auto names = initial_speakers(fx.session);
    const auto initial = initial_assignment(fx.session);
    const auto mapped = to_reference_labels(fx.session, fx.reference, initial, names);
    // Matched speakers keep their streams; the mapping can only help.
    CHECK(identity_mapped_errors(fx.session, fx.reference, mapped.labels) <=
          cpwer_from_segments(fx.reference, fx.session, initial, names).errors);
  }
}

TEST_CASE("oracle: exact budget") {
  const auto fx = small_fixture(7, 13, 3);  // 3^13 > 1e6
  CHECK_FALSE(exact_oracle_fits(fx.session, fx.reference));
  CHECK_THROWS_AS(oracle_assignment(fx.session, fx.reference, OracleMode::exact), ValidationError);
  CHECK_NOTHROW(oracle_assignment(fx.session, fx.reference, OracleMode::greedy));
  const auto fits = small_fixture(7, 12, 3);  // 3^12 = 531441
  CHECK(exact_oracle_fits(fits.session, fits.reference));
  CHECK(parse_oracle_mode("exact") == OracleMode::exact);
  CHECK_THROWS_AS(parse_oracle_mode("beam"), ValidationError);
}

TEST_CASE("relative_confusion_error") {
  CHECK(std::abs(relative_confusion_error(62.25, 63.74, 51.08) - 1.1334) <= 0.0005);
  CHECK(std::abs(relative_confusion_error(5.36, 3.51, 3.27) - 0.1148) <= 0.0005);
  CHECK(relative_confusion_error(10, 10, 5) == 1.0);
  CHECK(relative_confusion_error(10, 5, 5) == 0.0);
  CHECK(relative_confusion_error(4, 4, 4) == 0.0);
  CHECK(relative_confusion_error(10, 12, 5) > 1.0);  // not clamped

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 50.0), scale(0.1, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double oracle = u(rng), none = oracle + 0.5 + u(rng), slr = oracle + u(rng);
    const double a = scale(rng), b = u(rng);
    CHECK(relative_confusion_error(a * none + b, a * slr + b, a * oracle + b) ==
          doctest::Approx(relative_confusion_error(none, slr, oracle)).epsilon(1e-9));
  }

  CHECK_THROWS_AS(relative_confusion_error(5, 6, 5), ValidationError);
  CHECK_THROWS_AS(relative_confusion_error(4, 6, 5), ValidationError);
  CHECK_THROWS_AS(relative_confusion_error(-1, 0, 0), ValidationError);
}
