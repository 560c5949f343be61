#include "slr/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <limits>
#include <numeric>

namespace slr {

namespace {

struct Cell {
  std::size_t cost = 0;
  EditCounts counts;
};

// Speakers sorted by label, optionally padded with empty streams up to n.
struct Side {
  std::vector<std::string> names;
  std::vector<const Tokens*> streams;
};

const Tokens kEmpty;

template <typename Map>
Side collect(const Map& m, std::size_t n) {
  Side s;
  for (const auto& [name, words] : m) {
    s.names.push_back(name);
    s.streams.push_back(&words);
  }
  while (s.names.size() < n) {
    s.names.emplace_back();
    s.streams.push_back(&kEmpty);
  }
  return s;
}

CpWerReport build_report(const ReferenceTranscript& ref, const Side& refs, const Side& hyps,
                         const std::vector<std::size_t>& column_for_row) {
  CpWerReport r;
  r.session_id = ref.session_id;
  r.ref_words = ref.total_words();
  for (std::size_t i = 0; i < column_for_row.size(); ++i) {
    const auto j = column_for_row[i];
    SpeakerPair p{refs.names[i], hyps.names[j], edit_distance(*refs.streams[i], *hyps.streams[j])};
    r.totals += p.counts;
    if (!p.hypothesis.empty()) r.mapping[p.hypothesis] = p.reference.empty() ? kUnmatched : p.reference;
    r.pairs.push_back(std::move(p));
  }
  r.errors = r.totals.errors();
  r.cpwer = static_cast<double>(r.errors) / static_cast<double>(r.ref_words);
  return r;
}

std::vector<std::vector<long long>> cost_matrix(const Side& refs, const Side& hyps) {
  const auto n = refs.names.size();
  std::vector<std::vector<long long>> cost(n, std::vector<long long>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      cost[i][j] = static_cast<long long>(edit_cost(*refs.streams[i], *hyps.streams[j]));
  return cost;
}

void require_words(const ReferenceTranscript& ref) {
  if (ref.total_words() == 0) throw ValidationError("session " + ref.session_id + ": reference has no words");
}

}  // namespace

EditCounts edit_distance(std::span<const std::string> ref, std::span<const std::string> hyp) {
  const std::size_t m = hyp.size();
  std::vector<Cell> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    prev[j].cost = j;
    prev[j].counts.insertions = j;
  }
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    cur[0].cost = i;
    cur[0].counts = prev[0].counts;
    ++cur[0].counts.deletions;
    for (std::size_t j = 1; j <= m; ++j) {
      const bool same = ref[i - 1] == hyp[j - 1];
      const std::size_t diag = prev[j - 1].cost + (same ? 0 : 1);
      const std::size_t ins = cur[j - 1].cost + 1;
      const std::size_t del = prev[j].cost + 1;
      if (diag <= ins && diag <= del) {
        cur[j].counts = prev[j - 1].counts;
        if (!same) ++cur[j].counts.substitutions;
        cur[j].cost = diag;
      } else if (ins <= del) {
        cur[j].counts = cur[j - 1].counts;
        ++cur[j].counts.insertions;
        cur[j].cost = ins;
      } else {
        cur[j].counts = prev[j].counts;
        ++cur[j].counts.deletions;
        cur[j].cost = del;
      }
    }
    std::swap(prev, cur);
  }
  EditCounts out = prev[m].counts;
  out.ref_len = ref.size();
  return out;
}

std::size_t edit_cost(std::span<const std::string> ref, std::span<const std::string> hyp) {
  if (ref.size() < hyp.size()) std::swap(ref, hyp);
  std::vector<std::size_t> row(hyp.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({diag + (ref[i - 1] == hyp[j - 1] ? 0 : 1), up + 1, row[j - 1] + 1});
      diag = up;
    }
  }
  return row.back();
}

std::size_t window_edit_cost(std::span<const std::string> query, std::span<const std::string> text) {
  std::vector<std::size_t> row(text.size() + 1, 0);
  for (std::size_t i = 1; i <= query.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= text.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({diag + (query[i - 1] == text[j - 1] ? 0 : 1), up + 1, row[j - 1] + 1});
      diag = up;
    }
  }
  return *std::min_element(row.begin(), row.end());
}

std::vector<std::size_t> solve_assignment(const std::vector<std::vector<long long>>& cost) {
  // Shortest augmenting path with row/column potentials; O(n^3).
  const std::size_t n = cost.size();
  constexpr long long inf = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> u(n + 1, 0), v(n + 1, 0), min_to(n + 1);
  std::vector<std::size_t> row_of(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    row_of[0] = i;
    std::size_t j0 = 0;
    std::fill(min_to.begin(), min_to.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = row_of[j0];
      long long delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const long long reduced = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (reduced < min_to[j]) min_to[j] = reduced, way[j] = j0;
        if (min_to[j] < delta) delta = min_to[j], j1 = j;
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          min_to[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of[j0] = row_of[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> column_for_row(n);
  for (std::size_t j = 1; j <= n; ++j) column_for_row[row_of[j] - 1] = j - 1;
  return column_for_row;
}

CpWerReport cpwer(const ReferenceTranscript& ref, const SpeakerStreams& hyp) {
  require_words(ref);
  const auto n = std::max(ref.per_speaker.size(), hyp.size());
  const auto refs = collect(ref.per_speaker, n);
  const auto hyps = collect(hyp, n);
  return build_report(ref, refs, hyps, solve_assignment(cost_matrix(refs, hyps)));
}

CpWerReport brute_force_cpwer(const ReferenceTranscript& ref, const SpeakerStreams& hyp) {
  require_words(ref);
  const auto n = std::max(ref.per_speaker.size(), hyp.size());
  if (n > 8) throw ValidationError("brute_force_cpwer: " + std::to_string(n) + " speakers exceed the limit of 8");
  const auto refs = collect(ref.per_speaker, n);
  const auto hyps = collect(hyp, n);
  const auto cost = cost_matrix(refs, hyps);

  std::vector<std::size_t> perm(n), best;
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  long long best_cost = std::numeric_limits<long long>::max();
  do {
    long long total = 0;
    for (std::size_t i = 0; i < n; ++i) total += cost[i][perm[i]];
    if (total < best_cost) best_cost = total, best = perm;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return build_report(ref, refs, hyps, best);
}

SpeakerStreams label_streams(const SessionHypothesis& session, const LabelAssignment& labels,
                             std::span<const std::string> names) {
  labels.validate(session.size(), names.empty() ? std::numeric_limits<int>::max() : static_cast<int>(names.size()));
  std::vector<std::size_t> order(session.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = session.segments[a];
    const auto& y = session.segments[b];
    return x.start != y.start ? x.start < y.start : x.segment_id < y.segment_id;
  });
  SpeakerStreams streams;
  for (auto i : order) {
    const int l = labels.labels[i];
    auto& stream = streams[names.empty() ? "spk" + std::to_string(l) : names[static_cast<std::size_t>(l)]];
    const auto& words = session.segments[i].words;
    stream.insert(stream.end(), words.begin(), words.end());
  }
  return streams;
}

CpWerReport cpwer_from_segments(const ReferenceTranscript& ref, const SessionHypothesis& session,
                                const LabelAssignment& labels, std::span<const std::string> names) {
  return cpwer(ref, label_streams(session, labels, names));
}

AggregateCpWer aggregate(std::span<const CpWerReport> reports) {
  AggregateCpWer a;
  double sum = 0.0;
  for (const auto& r : reports) {
    a.errors += r.errors;
    a.ref_words += r.ref_words;
    sum += r.cpwer;
  }
  if (!reports.empty()) {
    a.pooled = a.ref_words ? static_cast<double>(a.errors) / static_cast<double>(a.ref_words) : 0.0;
    a.macro = sum / static_cast<double>(reports.size());
  }
  return a;
}

std::string report_line(const CpWerReport& report) {
  nlohmann::ordered_json j;
  j["session_id"] = report.session_id;
  j["cpwer"] = report.cpwer;
  j["errors"] = report.errors;
  j["ref_words"] = report.ref_words;
  j["mapping"] = report.mapping;
  j["substitutions"] = report.totals.substitutions;
  j["deletions"] = report.totals.deletions;
  j["insertions"] = report.totals.insertions;
  return j.dump();
}

}  // namespace slr
