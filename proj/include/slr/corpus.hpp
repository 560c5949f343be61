#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace slr {

/// Raised for malformed or inconsistent input data. The CLI maps it to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Tokens = std::vector<std::string>;

/// Splits on ASCII whitespace only.
Tokens tokenize(std::string_view text);
std::string join_tokens(const Tokens& tokens);

/// Location of an embedding inside an SLRE sidecar file.
struct EmbeddingRef {
  std::string file;
  std::uint64_t index = 0;

  bool operator==(const EmbeddingRef&) const = default;
};

struct Segment {
  std::string session_id;
  std::string segment_id;
  double start = 0.0;
  double end = 0.0;
  std::string initial_speaker;
  Tokens words;
  Eigen::VectorXd embedding;
  // Set when the embedding was loaded from a sidecar; write-back keeps the reference.
  std::optional<EmbeddingRef> embedding_ref;

  double duration() const { return end - start; }
};

struct SessionHypothesis {
  std::string session_id;
  std::vector<Segment> segments;
  int num_speakers = 1;

  std::size_t size() const { return segments.size(); }
  Eigen::Index dim() const { return segments.empty() ? 0 : segments.front().embedding.size(); }
};

/// Segment embeddings stacked as rows (S x d).
Eigen::MatrixXd embedding_matrix(const SessionHypothesis& session);
Eigen::VectorXd durations(const SessionHypothesis& session);

/// Distinct initial speaker labels in order of first appearance.
std::vector<std::string> initial_speakers(const SessionHypothesis& session);

struct ReferenceTranscript {
  std::string session_id;
  std::map<std::string, Tokens> per_speaker;

  std::size_t total_words() const;
};

struct LabelAssignment {
  std::string session_id;
  std::vector<int> labels;

  /// Throws ValidationError unless labels has one entry per segment and each is in [0, num_labels).
  void validate(std::size_t num_segments, int num_labels) const;
  bool operator==(const LabelAssignment&) const = default;
};

/// Initial diarization labels as an assignment, indexed by initial_speakers(session).
LabelAssignment initial_assignment(const SessionHypothesis& session);

struct SegmentParseOptions {
  // Directory that relative sidecar paths in "embedding_ref" resolve against.
  std::filesystem::path base_dir = ".";
  // Per-session speaker count overrides; wins over a "num_speakers" record field.
  std::map<std::string, int> num_speakers;
};

std::vector<SessionHypothesis> parse_segments(std::istream& in, const SegmentParseOptions& options = {});
std::vector<SessionHypothesis> read_segments_file(const std::filesystem::path& path,
                                                  SegmentParseOptions options = {});

/// Throws ValidationError on any broken session invariant.
void validate_session(const SessionHypothesis& session);

struct ReferenceParseOptions {
  bool allow_empty_speakers = false;
};

std::vector<ReferenceTranscript> parse_reference(std::istream& in, const ReferenceParseOptions& options = {});
std::vector<ReferenceTranscript> read_reference_file(const std::filesystem::path& path,
                                                     const ReferenceParseOptions& options = {});
void write_reference(const ReferenceTranscript& reference, std::ostream& out);

/// Emits one record per segment with the speaker replaced by the new label.
/// Label k is written as names[k] when names is given, otherwise "spk<k>".
void write_assignment(const SessionHypothesis& session, const LabelAssignment& labels, std::ostream& out,
                      std::span<const std::string> names = {});

/// Writes the session unchanged (initial speakers kept).
void write_session(const SessionHypothesis& session, std::ostream& out);

// SLRE sidecar: "SLRE", u32 dim, then dim little-endian f32 values per record.
void write_sidecar(const std::filesystem::path& path, std::span<const Eigen::VectorXf> embeddings);
std::vector<Eigen::VectorXf> read_sidecar(const std::filesystem::path& path);

}  // namespace slr
