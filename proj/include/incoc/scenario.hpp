#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "incoc/config.hpp"
#include "incoc/workloads.hpp"

namespace incoc {

enum class ScenarioKind : std::uint8_t { DirtyMiss, WriteStorm, MicroLoad, MicroStore, MicroLock, Pipeline };

std::optional<ScenarioKind> parse_scenario(std::string_view name);
const char* to_string(ScenarioKind k);

struct ScenarioParams {
  ScenarioKind kind = ScenarioKind::DirtyMiss;
  MemoryType mem_type = MemoryType::NormalCacheable;
  std::optional<std::uint32_t> cores;  // scenario default when unset
  std::optional<std::uint32_t> iters;
  Sharing sharing = Sharing::Shared;
  Typing typing = Typing::Selective;
};

struct Scenario {
  RunConfig config;
  Trace trace;
};

/// Builds the trace and widens base.n_cores to what the trace needs.
/// write-storm --cores n uses n writers plus one warm-up owner.
Scenario make_scenario(const RunConfig& base, const ScenarioParams& p);

}  // namespace incoc
