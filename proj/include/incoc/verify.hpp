#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>

#include "incoc/config.hpp"
#include "incoc/engine.hpp"
#include "incoc/workloads.hpp"

namespace incoc {

/// Random well-formed trace: 2-4 cores, at most 64 distinct lines spread over
/// few cache sets, mixed memory types and ops, plus LX/SX/W lock triples on
/// a dedicated lock word.
Trace random_trace(std::mt19937_64& rng);

struct VerifyFailure {
  std::size_t index = 0;  // which random trace
  std::string check;
  std::string detail;
  std::string trace_text;
  std::string event_log;
};

struct VerifyResult {
  std::uint64_t traces = 0;
  std::map<std::string, std::uint64_t> violations;  // check name -> count
  std::optional<VerifyFailure> first_failure;

  bool ok() const { return violations.empty(); }
};

// Names used as keys of VerifyResult::violations.
inline constexpr const char* kCheckSwmr = "swmr";
inline constexpr const char* kCheckInclusion = "inclusion";
inline constexpr const char* kCheckDirectory = "directory";
inline constexpr const char* kCheckIncOc = "incoc_exclusion";
inline constexpr const char* kCheckMonitor = "monitor";
inline constexpr const char* kCheckValue = "value";
inline constexpr const char* kCheckMemory = "final_memory";
inline constexpr const char* kCheckDeterminism = "determinism";
inline constexpr const char* kCheckFault = "simulation_fault";

/// Checks one trace; returns the violated check names with a detail string
/// for the first violation of each.
std::map<std::string, std::string> check_trace(const RunConfig& cfg, const Trace& trace,
                                               std::string* log_out = nullptr);

VerifyResult verify(const RunConfig& cfg, std::uint64_t n_traces, std::uint64_t seed);

}  // namespace incoc
