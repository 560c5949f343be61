#include "slr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace slr {

namespace {

// Edit cost of each reference stream against the time-ordered concatenation of a segment subset.
class StreamCoster {
 public:
  StreamCoster(const SessionHypothesis& session, const ReferenceTranscript& ref) : session_(session) {
    for (const auto& [name, words] : ref.per_speaker) {
      names_.push_back(name);
      refs_.push_back(&words);
    }
    order_.resize(session.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      const auto& x = session.segments[a];
      const auto& y = session.segments[b];
      return x.start != y.start ? x.start < y.start : x.segment_id < y.segment_id;
    });
    memo_.resize(refs_.size());
  }

  int speakers() const { return static_cast<int>(refs_.size()); }
  const std::vector<std::string>& names() const { return names_; }

  // `member[i]` marks segment i as part of the stream.
  std::size_t cost(int r, const std::vector<char>& member) {
    std::string key(member.begin(), member.end());
    auto& memo = memo_[static_cast<std::size_t>(r)];
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    Tokens stream;
    for (auto i : order_)
      if (member[i]) stream.insert(stream.end(), session_.segments[i].words.begin(), session_.segments[i].words.end());
    const auto c = edit_cost(*refs_[static_cast<std::size_t>(r)], stream);
    memo.emplace(std::move(key), c);
    return c;
  }

  std::size_t total(const std::vector<int>& labels) {
    std::size_t sum = 0;
    for (int r = 0; r < speakers(); ++r) sum += cost(r, membership(labels, r));
    return sum;
  }

  std::vector<char> membership(const std::vector<int>& labels, int r) const {
    std::vector<char> m(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) m[i] = labels[i] == r;
    return m;
  }

  int best_window(std::size_t segment) const {
    int best = 0;
    std::size_t best_cost = std::numeric_limits<std::size_t>::max();
    for (int r = 0; r < speakers(); ++r) {
      const auto c = window_edit_cost(session_.segments[segment].words, *refs_[static_cast<std::size_t>(r)]);
      if (c < best_cost) best_cost = c, best = r;
    }
    return best;
  }

 private:
  const SessionHypothesis& session_;
  std::vector<std::string> names_;
  std::vector<const Tokens*> refs_;
  std::vector<std::size_t> order_;
  std::vector<std::unordered_map<std::string, std::size_t>> memo_;
};

std::vector<int> exact_search(StreamCoster& coster, std::size_t num_segments) {
  const int r_count = coster.speakers();
  std::vector<int> labels(num_segments, 0), best = labels;
  if (r_count == 1) return best;
  std::size_t best_cost = std::numeric_limits<std::size_t>::max();
  while (true) {
    const auto c = coster.total(labels);
    if (c < best_cost) best_cost = c, best = labels;
    // Odometer over labels, last position fastest: lexicographic order.
    std::size_t pos = num_segments;
    while (pos > 0 && labels[pos - 1] == r_count - 1) labels[--pos] = 0;
    if (pos == 0) break;
    ++labels[pos - 1];
  }
  return best;
}

// Edit-distance columns over one reference stream, cached at every boundary between member
// segments so single-segment moves can be priced without re-aligning the whole stream.
class StreamColumns {
 public:
  StreamColumns(std::vector<int> ref, const std::vector<std::vector<int>>* words) : ref_(std::move(ref)), words_(words) {}

  // `members` are segment indices in time order.
  void rebuild(std::vector<std::size_t> members) {
    members_ = std::move(members);
    const auto m = members_.size();
    forward_.assign(m + 1, {});
    backward_.assign(m + 1, {});
    forward_[0].resize(ref_.size() + 1);
    std::iota(forward_[0].begin(), forward_[0].end(), 0);
    for (std::size_t j = 0; j < m; ++j) forward_[j + 1] = extend_forward(forward_[j], (*words_)[members_[j]]);
    backward_[m].resize(ref_.size() + 1);
    for (std::size_t k = 0; k <= ref_.size(); ++k) backward_[m][k] = static_cast<int>(ref_.size() - k);
    for (std::size_t j = m; j-- > 0;) backward_[j] = extend_backward(backward_[j + 1], (*words_)[members_[j]]);
  }

  std::size_t cost() const { return static_cast<std::size_t>(forward_.back().back()); }

  // Cost after removing the member at position `j`.
  std::size_t without(std::size_t j) const { return join(forward_[j], backward_[j + 1]); }

  // Cost after inserting `segment` with `before` members preceding it.
  std::size_t with(std::size_t before, std::size_t segment) const {
    return join(extend_forward(forward_[before], (*words_)[segment]), backward_[before]);
  }

 private:
  std::vector<int> extend_forward(std::vector<int> col, const std::vector<int>& hyp) const {
    for (int w : hyp) {
      int diag = col[0];
      col[0] += 1;
      for (std::size_t k = 1; k <= ref_.size(); ++k) {
        const int up = col[k];
        col[k] = std::min({up + 1, col[k - 1] + 1, diag + (ref_[k - 1] != w)});
        diag = up;
      }
    }
    return col;
  }

  std::vector<int> extend_backward(std::vector<int> col, const std::vector<int>& hyp) const {
    const auto n = ref_.size();
    for (auto it = hyp.rbegin(); it != hyp.rend(); ++it) {
      int diag = col[n];
      col[n] += 1;
      for (std::size_t k = n; k-- > 0;) {
        const int down = col[k];
        col[k] = std::min({down + 1, col[k + 1] + 1, diag + (ref_[k] != *it)});
        diag = down;
      }
    }
    return col;
  }

  static std::size_t join(const std::vector<int>& f, const std::vector<int>& b) {
    int best = std::numeric_limits<int>::max();
    for (std::size_t k = 0; k < f.size(); ++k) best = std::min(best, f[k] + b[k]);
    return static_cast<std::size_t>(best);
  }

  std::vector<int> ref_;
  const std::vector<std::vector<int>>* words_;
  std::vector<std::size_t> members_;
  std::vector<std::vector<int>> forward_, backward_;
};

class GreedyDescent {
 public:
  GreedyDescent(const SessionHypothesis& session, const ReferenceTranscript& ref) {
    std::unordered_map<std::string, int> ids;
    auto intern = [&](const Tokens& tokens) {
      std::vector<int> out;
      for (const auto& t : tokens) out.push_back(ids.try_emplace(t, static_cast<int>(ids.size())).first->second);
      return out;
    };
    for (const auto& seg : session.segments) words_.push_back(intern(seg.words));
    for (const auto& [name, tokens] : ref.per_speaker) streams_.emplace_back(intern(tokens), &words_);
    order_.resize(session.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      const auto& x = session.segments[a];
      const auto& y = session.segments[b];
      return x.start != y.start ? x.start < y.start : x.segment_id < y.segment_id;
    });
  }

  // Best-improvement single-segment moves until none lowers the total; returns the total.
  std::size_t run(std::vector<int>& labels) {
    const int r_count = static_cast<int>(streams_.size());
    for (int r = 0; r < r_count; ++r) rebuild(labels, r);
    while (true) {
      // rank[s] = position of s within its own stream; before[r] = members of r seen so far.
      std::vector<std::size_t> before(streams_.size(), 0), rank(labels.size());
      long long best_delta = 0;
      std::size_t best_segment = 0;
      int best_target = -1;
      std::vector<std::pair<std::size_t, std::vector<std::size_t>>> visits;
      for (auto s : order_) {
        rank[s] = before[static_cast<std::size_t>(labels[s])];
        visits.emplace_back(s, before);
        ++before[static_cast<std::size_t>(labels[s])];
      }
      std::sort(visits.begin(), visits.end());
      for (const auto& [s, preceding] : visits) {
        const int from = labels[s];
        const auto& src = streams_[static_cast<std::size_t>(from)];
        const auto without = src.without(rank[s]);
        for (int to = 0; to < r_count; ++to) {
          if (to == from) continue;
          const auto& dst = streams_[static_cast<std::size_t>(to)];
          const auto with = dst.with(preceding[static_cast<std::size_t>(to)], s);
          const long long delta = static_cast<long long>(without + with) - static_cast<long long>(src.cost() + dst.cost());
          if (delta < best_delta) best_delta = delta, best_segment = s, best_target = to;
        }
      }
      if (best_target < 0) break;
      const int from = labels[best_segment];
      labels[best_segment] = best_target;
      rebuild(labels, from);
      rebuild(labels, best_target);
    }
    std::size_t total = 0;
    for (const auto& st : streams_) total += st.cost();
    return total;
  }

 private:
  void rebuild(const std::vector<int>& labels, int r) {
    std::vector<std::size_t> members;
    for (auto s : order_)
      if (labels[s] == r) members.push_back(s);
    streams_[static_cast<std::size_t>(r)].rebuild(std::move(members));
  }

  std::vector<std::vector<int>> words_;
  std::vector<StreamColumns> streams_;
  std::vector<std::size_t> order_;
};

void check_coverage(const SessionHypothesis& session, const ReferenceTranscript& ref) {
  if (ref.session_id != session.session_id)
    throw ValidationError("reference session " + ref.session_id + " does not match " + session.session_id);
  if (ref.per_speaker.empty()) throw ValidationError("session " + ref.session_id + ": reference has no speakers");
}

}  // namespace

OracleMode parse_oracle_mode(std::string_view text) {
  if (text == "exact") return OracleMode::exact;
  if (text == "greedy") return OracleMode::greedy;
  throw ValidationError("oracle mode must be exact or greedy, got \"" + std::string(text) + "\"");
}

std::string to_string(OracleMode mode) { return mode == OracleMode::exact ? "exact" : "greedy"; }

bool exact_oracle_fits(const SessionHypothesis& session, const ReferenceTranscript& ref) {
  const auto r = static_cast<double>(ref.per_speaker.size());
  return r <= 1.0 || static_cast<double>(session.size()) * std::log(r) <= std::log(kExactOracleBudget) + 1e-12;
}

OracleResult oracle_assignment(const SessionHypothesis& session, const ReferenceTranscript& ref, OracleMode mode,
                               std::span<const LabelAssignment> warm_starts) {
  check_coverage(session, ref);
  StreamCoster coster(session, ref);
  const auto n = session.size();

  std::vector<int> labels;
  if (mode == OracleMode::exact) {
    if (!exact_oracle_fits(session, ref))
      throw ValidationError("session " + session.session_id + ": exact oracle over budget (" +
                            std::to_string(ref.per_speaker.size()) + "^" + std::to_string(n) + " assignments)");
    labels = exact_search(coster, n);
  } else {
    labels.resize(n);
    for (std::size_t s = 0; s < n; ++s) labels[s] = coster.best_window(s);
    GreedyDescent descent(session, ref);
    auto best_cost = descent.run(labels);
    for (const auto& start : warm_starts) {
      start.validate(n, coster.speakers());
      auto candidate = start.labels;
      const auto c = descent.run(candidate);
      if (c < best_cost) best_cost = c, labels = std::move(candidate);
    }
  }

  OracleResult out;
  out.mode = mode;
  out.speakers = coster.names();
  out.labels = {session.session_id, std::move(labels)};
  out.report = cpwer_from_segments(ref, session, out.labels, out.speakers);
  return out;
}

LabelAssignment to_reference_labels(const SessionHypothesis& session, const ReferenceTranscript& ref,
                                    const LabelAssignment& labels, std::span<const std::string> names) {
  check_coverage(session, ref);
  const auto report = cpwer_from_segments(ref, session, labels, names);
  StreamCoster coster(session, ref);
  const auto& speakers = coster.names();
  LabelAssignment out{session.session_id, std::vector<int>(session.size())};
  for (std::size_t i = 0; i < session.size(); ++i) {
    const int l = labels.labels[i];
    const auto& hyp = names.empty() ? "spk" + std::to_string(l) : names[static_cast<std::size_t>(l)];
    const auto& target = report.mapping.at(hyp);
    out.labels[i] = target == kUnmatched
                        ? coster.best_window(i)
                        : static_cast<int>(std::find(speakers.begin(), speakers.end(), target) - speakers.begin());
  }
  return out;
}

double relative_confusion_error(double cpwer_none, double cpwer_slr, double cpwer_oracle) {
  for (double v : {cpwer_none, cpwer_slr, cpwer_oracle})
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("relative_confusion_error: cpWER must be finite and >= 0");
  if (cpwer_none < cpwer_oracle) throw ValidationError("relative_confusion_error: cpWER without SLR is below the oracle");
  if (cpwer_none == cpwer_oracle) {
    if (cpwer_slr == cpwer_oracle) return 0.0;
    throw ValidationError("relative_confusion_error: undefined, no confusion errors to remove");
  }
  return (cpwer_slr - cpwer_oracle) / (cpwer_none - cpwer_oracle);
}

}  // namespace slr
