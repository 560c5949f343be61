#include "slr/corpus.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

namespace slr {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool blank(const std::string& line) { return std::all_of(line.begin(), line.end(), is_ascii_space); }

[[noreturn]] void fail_at(std::size_t line_no, const std::string& what) {
  throw ValidationError("line " + std::to_string(line_no) + ": " + what);
}

template <typename T>
T required(const json& record, const char* key, std::size_t line_no) {
  auto it = record.find(key);
  if (it == record.end()) fail_at(line_no, std::string("missing field \"") + key + "\"");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    fail_at(line_no, std::string("field \"") + key + "\" has the wrong type");
  }
}

json parse_line(const std::string& line, std::size_t line_no) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    fail_at(line_no, std::string("malformed record: ") + e.what());
  }
  if (!record.is_object()) fail_at(line_no, "record is not an object");
  return record;
}

// Sidecars are loaded once per parse call.
class SidecarCache {
 public:
  explicit SidecarCache(std::filesystem::path base) : base_(std::move(base)) {}

  const Eigen::VectorXf& get(const EmbeddingRef& ref, std::size_t line_no) {
    auto path = std::filesystem::path(ref.file);
    if (path.is_relative()) path = base_ / path;
    auto key = path.string();
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, read_sidecar(path)).first;
    if (ref.index >= it->second.size())
      fail_at(line_no, "embedding_ref index " + std::to_string(ref.index) + " out of range for " + ref.file);
    return it->second[ref.index];
  }

 private:
  std::filesystem::path base_;
  std::unordered_map<std::string, std::vector<Eigen::VectorXf>> cache_;
};

int count_distinct(const std::vector<int>& labels) {
  return static_cast<int>(std::set<int>(labels.begin(), labels.end()).size());
}

ordered_json segment_record(const Segment& seg, const std::string& speaker) {
  ordered_json rec;
  rec["session_id"] = seg.session_id;
  rec["segment_id"] = seg.segment_id;
  rec["start"] = seg.start;
  rec["end"] = seg.end;
  rec["speaker"] = speaker;
  rec["words"] = join_tokens(seg.words);
  if (seg.embedding_ref) {
    rec["embedding_ref"] = {{"file", seg.embedding_ref->file}, {"index", seg.embedding_ref->index}};
  } else {
    rec["embedding"] = std::vector<double>(seg.embedding.data(), seg.embedding.data() + seg.embedding.size());
  }
  return rec;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(const unsigned char* b) {
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_ascii_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_ascii_space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join_tokens(const Tokens& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

Eigen::MatrixXd embedding_matrix(const SessionHypothesis& session) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(session.size()), session.dim());
  for (std::size_t i = 0; i < session.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = session.segments[i].embedding;
  return m;
}

Eigen::VectorXd durations(const SessionHypothesis& session) {
  Eigen::VectorXd t(static_cast<Eigen::Index>(session.size()));
  for (std::size_t i = 0; i < session.size(); ++i) t[static_cast<Eigen::Index>(i)] = session.segments[i].duration();
  return t;
}

std::vector<std::string> initial_speakers(const SessionHypothesis& session) {
  std::vector<std::string> names;
  for (const auto& seg : session.segments)
    if (std::find(names.begin(), names.end(), seg.initial_speaker) == names.end()) names.push_back(seg.initial_speaker);
  return names;
}

LabelAssignment initial_assignment(const SessionHypothesis& session) {
  auto names = initial_speakers(session);
  LabelAssignment a{session.session_id, {}};
  a.labels.reserve(session.size());
  for (const auto& seg : session.segments)
    a.labels.push_back(static_cast<int>(std::find(names.begin(), names.end(), seg.initial_speaker) - names.begin()));
  return a;
}

std::size_t ReferenceTranscript::total_words() const {
  std::size_t n = 0;
  for (const auto& [_, words] : per_speaker) n += words.size();
  return n;
}

void LabelAssignment::validate(std::size_t num_segments, int num_labels) const {
  if (labels.size() != num_segments)
    throw ValidationError("session " + session_id + ": " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(num_segments) + " segments");
  for (int l : labels)
    if (l < 0 || l >= num_labels)
      throw ValidationError("session " + session_id + ": label " + std::to_string(l) + " outside [0, " +
                            std::to_string(num_labels) + ")");
}

void validate_session(const SessionHypothesis& session) {
  const auto& id = session.session_id;
  if (session.segments.empty()) throw ValidationError("session " + id + ": no segments");
  if (session.num_speakers < 1) throw ValidationError("session " + id + ": num_speakers must be >= 1");
  if (static_cast<std::size_t>(session.num_speakers) > session.size())
    throw ValidationError("session " + id + ": num_speakers " + std::to_string(session.num_speakers) +
                          " exceeds segment count " + std::to_string(session.size()));
  const auto dim = session.dim();
  for (const auto& seg : session.segments) {
    if (seg.session_id != id) throw ValidationError("segment " + seg.segment_id + " belongs to another session");
    if (!(seg.start >= 0.0)) throw ValidationError("segment " + seg.segment_id + ": negative start");
    if (!(seg.end > seg.start)) throw ValidationError("segment " + seg.segment_id + ": end <= start");
    if (seg.embedding.size() != dim || dim == 0)
      throw ValidationError("segment " + seg.segment_id + ": inconsistent embedding dimension");
    if (!seg.embedding.allFinite()) throw ValidationError("segment " + seg.segment_id + ": non-finite embedding");
    if (seg.embedding.squaredNorm() == 0.0) throw ValidationError("segment " + seg.segment_id + ": zero-norm embedding");
  }
}

std::vector<SessionHypothesis> parse_segments(std::istream& in, const SegmentParseOptions& options) {
  std::vector<SessionHypothesis> sessions;
  std::unordered_map<std::string, std::size_t> index;
  std::unordered_map<std::string, int> record_k;
  SidecarCache sidecars(options.base_dir);

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const json rec = parse_line(line, line_no);

    Segment seg;
    seg.session_id = required<std::string>(rec, "session_id", line_no);
    seg.segment_id = required<std::string>(rec, "segment_id", line_no);
    seg.start = required<double>(rec, "start", line_no);
    seg.end = required<double>(rec, "end", line_no);
    seg.initial_speaker = required<std::string>(rec, "speaker", line_no);
    seg.words = tokenize(required<std::string>(rec, "words", line_no));
    if (!(seg.start >= 0.0)) fail_at(line_no, "start must be >= 0");
    if (!(seg.end > seg.start)) fail_at(line_no, "end <= start");

    if (rec.contains("embedding")) {
      auto values = required<std::vector<double>>(rec, "embedding", line_no);
      seg.embedding = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    } else if (rec.contains("embedding_ref")) {
      const auto& r = rec["embedding_ref"];
      if (!r.is_object()) fail_at(line_no, "embedding_ref is not an object");
      EmbeddingRef ref{required<std::string>(r, "file", line_no), required<std::uint64_t>(r, "index", line_no)};
      seg.embedding = sidecars.get(ref, line_no).cast<double>();
      seg.embedding_ref = std::move(ref);
    } else {
      fail_at(line_no, "missing field \"embedding\"");
    }
    if (seg.embedding.size() == 0) fail_at(line_no, "empty embedding");
    if (!seg.embedding.allFinite()) fail_at(line_no, "non-finite embedding");
    if (seg.embedding.squaredNorm() == 0.0) fail_at(line_no, "zero-norm embedding");

    if (rec.contains("num_speakers")) {
      int k = required<int>(rec, "num_speakers", line_no);
      auto [it, inserted] = record_k.emplace(seg.session_id, k);
      if (!inserted && it->second != k) fail_at(line_no, "conflicting num_speakers within session");
    }

    auto [it, inserted] = index.emplace(seg.session_id, sessions.size());
    if (inserted) sessions.push_back(SessionHypothesis{seg.session_id, {}, 1});
    auto& session = sessions[it->second];
    if (!session.segments.empty() && session.dim() != seg.embedding.size())
      fail_at(line_no, "inconsistent embedding dimension (" + std::to_string(seg.embedding.size()) + " vs " +
                           std::to_string(session.dim()) + ")");
    session.segments.push_back(std::move(seg));
  }

  for (auto& session : sessions) {
    session.num_speakers = static_cast<int>(initial_speakers(session).size());
    if (auto it = record_k.find(session.session_id); it != record_k.end()) session.num_speakers = it->second;
    if (auto it = options.num_speakers.find(session.session_id); it != options.num_speakers.end())
      session.num_speakers = it->second;
    validate_session(session);
  }
  return sessions;
}

std::vector<SessionHypothesis> read_segments_file(const std::filesystem::path& path, SegmentParseOptions options) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  if (options.base_dir == ".") options.base_dir = path.parent_path().empty() ? "." : path.parent_path();
  return parse_segments(in, options);
}

std::vector<ReferenceTranscript> parse_reference(std::istream& in, const ReferenceParseOptions& options) {
  std::vector<ReferenceTranscript> refs;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const json rec = parse_line(line, line_no);
    auto session_id = required<std::string>(rec, "session_id", line_no);
    auto speaker = required<std::string>(rec, "speaker", line_no);
    auto words = tokenize(required<std::string>(rec, "words", line_no));

    auto [it, inserted] = index.emplace(session_id, refs.size());
    if (inserted) refs.push_back(ReferenceTranscript{session_id, {}});
    auto& stream = refs[it->second].per_speaker[speaker];
    stream.insert(stream.end(), std::make_move_iterator(words.begin()), std::make_move_iterator(words.end()));
  }
  if (!options.allow_empty_speakers)
    for (const auto& ref : refs)
      for (const auto& [speaker, words] : ref.per_speaker)
        if (words.empty())
          throw ValidationError("session " + ref.session_id + ": reference speaker " + speaker + " has no words");
  return refs;
}

std::vector<ReferenceTranscript> read_reference_file(const std::filesystem::path& path,
                                                     const ReferenceParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return parse_reference(in, options);
}

void write_reference(const ReferenceTranscript& reference, std::ostream& out) {
  for (const auto& [speaker, words] : reference.per_speaker) {
    ordered_json rec;
    rec["session_id"] = reference.session_id;
    rec["speaker"] = speaker;
    rec["words"] = join_tokens(words);
    out << rec.dump() << '\n';
  }
}

void write_assignment(const SessionHypothesis& session, const LabelAssignment& labels, std::ostream& out,
                      std::span<const std::string> names) {
  const int num_labels = names.empty() ? session.num_speakers : static_cast<int>(names.size());
  labels.validate(session.size(), num_labels);
  // K survives the round trip only if it equals the number of distinct labels written.
  const bool emit_k = count_distinct(labels.labels) != session.num_speakers;
  for (std::size_t i = 0; i < session.size(); ++i) {
    const int l = labels.labels[i];
    auto rec = segment_record(session.segments[i], names.empty() ? "spk" + std::to_string(l) : names[l]);
    if (emit_k) rec["num_speakers"] = session.num_speakers;
    out << rec.dump() << '\n';
  }
  if (!out) throw std::runtime_error("write failed for session " + session.session_id);
}

void write_session(const SessionHypothesis& session, std::ostream& out) {
  auto names = initial_speakers(session);
  write_assignment(session, initial_assignment(session), out, names);
}

void write_sidecar(const std::filesystem::path& path, std::span<const Eigen::VectorXf> embeddings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const auto dim = embeddings.empty() ? 0u : static_cast<std::uint32_t>(embeddings.front().size());
  out.write("SLRE", 4);
  put_u32(out, dim);
  for (const auto& e : embeddings) {
    if (static_cast<std::uint32_t>(e.size()) != dim) throw ValidationError("sidecar embeddings differ in dimension");
    for (float v : e) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<Eigen::VectorXf> read_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open sidecar " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 8 || std::memcmp(bytes.data(), "SLRE", 4) != 0)
    throw ValidationError(path.string() + ": not an SLRE sidecar");
  const std::uint32_t dim = get_u32(bytes.data() + 4);
  const std::size_t payload = bytes.size() - 8;
  if (dim == 0 || payload % (4ull * dim) != 0) throw ValidationError(path.string() + ": truncated sidecar");
  std::vector<Eigen::VectorXf> out(payload / (4ull * dim), Eigen::VectorXf(dim));
  const unsigned char* p = bytes.data() + 8;
  for (auto& e : out)
    for (std::uint32_t j = 0; j < dim; ++j, p += 4) e[j] = std::bit_cast<float>(get_u32(p));
  return out;
}

}  // namespace slr
