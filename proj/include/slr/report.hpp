#pragma once

#include "slr/pipeline.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace slr {

/// Parses "step:0,0.1,0.25,1;poly:1,2,4,8,16" into attenuation settings, in order.
std::vector<AttenuationConfig> parse_sweep(std::string_view text);

struct ReportOptions {
  std::vector<AttenuationConfig> sweep;
  std::uint64_t seed = 0;
  std::optional<int> num_speakers;
  KMeansOptions kmeans;
};

/// One evaluated configuration: no reassignment, k-means++, SC per sweep entry, oracle.
struct ReportRow {
  std::string name;
  std::string algorithm;
  std::optional<AttenuationConfig> attenuation;
  std::vector<CpWerReport> sessions;
  AggregateCpWer total;
  std::optional<double> relative_error_pooled;
  std::optional<double> relative_error_macro;
};

/// Runs every configuration on every session. Every session needs a reference.
std::vector<ReportRow> build_report(const std::vector<SessionHypothesis>& sessions,
                                    const std::vector<ReferenceTranscript>& refs, const ReportOptions& options);

/// Per-session lines followed by one aggregate line per row, as JSON lines.
void write_report(const std::vector<ReportRow>& rows, std::ostream& out);

}  // namespace slr
