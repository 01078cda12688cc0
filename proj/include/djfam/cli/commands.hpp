#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <vector>

#include "djfam/cli/config.hpp"
#include "djfam/gateway/service.hpp"

namespace djfam::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsageError = 2;

struct IngestSummary {
  int ingested = 0;
  int skipped = 0;
  int failed = 0;
};

/// Featurizes manifest entries on `workers` threads, then commits them in
/// manifest order. Per-entry failures are reported on `err`. Throws
/// Error(kIo) when the manifest itself cannot be read or parsed.
IngestSummary ingest_manifest(gateway::Service& service, const std::filesystem::path& manifest, int workers,
                              std::ostream& err);

/// Canonical (key-sorted) JSON of a recommendation list; shared by the CLI
/// and by tests comparing against the HTTP response.
std::string recommendations_json(const std::vector<recommender::Recommendation>& recs);

std::unique_ptr<gateway::Service> open_service(const Config& config);

/// Entry point of the `djfam` tool. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace djfam::cli
