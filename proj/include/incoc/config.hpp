#pragma once

#include <string>
#include <string_view>

#include "incoc/common.hpp"
#include "incoc/protocol.hpp"

namespace incoc {

struct L1Config {
  std::uint64_t size = 32768;
  std::uint32_t associativity = 4;
  std::uint32_t line_size = 64;

  std::uint32_t sets() const {
    return static_cast<std::uint32_t>(size / (std::uint64_t{associativity} * line_size));
  }
};

struct L2Config {
  std::uint64_t size = 2097152;
  std::uint32_t associativity = 16;
  std::uint32_t line_size = 64;

  std::uint32_t sets() const {
    return static_cast<std::uint32_t>(size / (std::uint64_t{associativity} * line_size));
  }
};

// Defaults reproduce the 4 / 128 / 729 dirty-miss marks; see
// tests/test_calibration.cpp for the search that selects them.
struct LatencyConfig {
  Tick l1_proc = 4;
  Tick l1_to_l2_hop = 124;
  Tick l2_proc = 70;
  Tick l2_to_l1_hop = 151;
  Tick dram_access = 200;
  Tick queue_issue = 27;
};

// Test hook for checking the checker.
enum class FaultInjection : std::uint8_t { None, SkipOneInv };

struct RunConfig {
  std::uint32_t n_cores = 4;
  L1Config l1;
  L2Config l2;
  LatencyConfig latency;
  std::uint64_t memory_size = 4ull << 30;
  std::uint64_t page_size = 4096;
  RemoteLoadPolicy remote_load_policy = RemoteLoadPolicy::DowngradeShared;
  std::uint64_t seed = 1;
  Tick max_ticks = 4'000'000'000ull;
  FaultInjection fault = FaultInjection::None;
};

/// Throws SimError(Config) naming the offending field.
void validate(const RunConfig& cfg);

/// Applies one `key = value` setting. Unknown keys are errors.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// Parses the flat dotted-key config format; starts from defaults.
RunConfig parse_config(std::string_view text);

/// Inverse of parse_config for every key.
std::string render_config(const RunConfig& cfg);

}  // namespace incoc
