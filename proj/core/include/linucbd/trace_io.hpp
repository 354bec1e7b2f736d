#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include <nlohmann/json.hpp>

#include "linucbd/diversity.hpp"
#include "linucbd/model.hpp"
#include "linucbd/simulate.hpp"

namespace linucbd {

/// JSON-lines trace file. Line 1 is a header
///   {"instance", "policy", "T", "K", "d", "seed", "partition"?}
/// and each further line is one round
///   [t, context, chosen, optimal, regret, alpha, [r_hat], [sigma_hat], [r], [x(a*)]?]
/// with arms and contexts 0-based.
struct TraceFile {
  Instance instance;
  Trace trace;
  std::optional<MetaContextPartition> partition;
};

nlohmann::json partition_to_json(const MetaContextPartition& partition);
MetaContextPartition partition_from_json(const nlohmann::json& doc);

void write_trace(std::ostream& out, const Instance& instance, const Trace& trace,
                 const MetaContextPartition* partition = nullptr);
void write_trace(const std::filesystem::path& path, const Instance& instance, const Trace& trace,
                 const MetaContextPartition* partition = nullptr);

/// Throws kParse on malformed content, kIo when the file cannot be opened.
TraceFile read_trace(std::istream& in);
TraceFile read_trace(const std::filesystem::path& path);

}  // namespace linucbd
