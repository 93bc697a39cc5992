#include "incoc/scenario.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace incoc {

namespace {

constexpr std::array<std::pair<ScenarioKind, const char*>, 6> kNames{{
    {ScenarioKind::DirtyMiss, "dirty-miss"},
    {ScenarioKind::WriteStorm, "write-storm"},
    {ScenarioKind::MicroLoad, "micro-load"},
    {ScenarioKind::MicroStore, "micro-store"},
    {ScenarioKind::MicroLock, "micro-lock"},
    {ScenarioKind::Pipeline, "pipeline"},
}};

}  // namespace

std::optional<ScenarioKind> parse_scenario(std::string_view name) {
  for (const auto& [k, n] : kNames)
    if (name == n) return k;
  return std::nullopt;
}

const char* to_string(ScenarioKind k) {
  for (const auto& [kk, n] : kNames)
    if (kk == k) return n;
  return "?";
}

Scenario make_scenario(const RunConfig& base, const ScenarioParams& p) {
  Scenario s{base, {}};
  if (p.cores && *p.cores == 0) throw SimError(ErrorKind::InvalidArgument, "cores must be at least 1");
  if (p.iters && *p.iters == 0) throw SimError(ErrorKind::InvalidArgument, "iters must be at least 1");
  switch (p.kind) {
    case ScenarioKind::DirtyMiss:
      s.trace = gen_dirty_miss(p.mem_type, p.cores == 1u ? 1 : std::max(p.cores.value_or(2), 2u));
      break;
    case ScenarioKind::WriteStorm:
      s.trace = gen_write_storm(p.cores.value_or(4), p.mem_type);
      break;
    case ScenarioKind::MicroLoad:
    case ScenarioKind::MicroStore:
    case ScenarioKind::MicroLock: {
      MicroParams m;
      m.kind = p.kind == ScenarioKind::MicroLoad    ? MicroKind::Load
               : p.kind == ScenarioKind::MicroStore ? MicroKind::Store
                                                    : MicroKind::Lock;
      m.sharing = p.sharing;
      m.mem_type = p.mem_type;
      m.n_cores = p.cores.value_or(m.n_cores);
      m.iters = p.iters.value_or(m.iters);
      s.trace = gen_micro(m);
      break;
    }
    case ScenarioKind::Pipeline: {
      PipelineParams pp;
      pp.typing = p.typing;
      if (p.cores) {
        if (*p.cores < 2) throw SimError(ErrorKind::InvalidArgument, "pipeline needs at least 2 stages");
        pp.n_stages = *p.cores;
      }
      pp.iters = p.iters.value_or(pp.iters);
      s.trace = gen_producer_consumer(pp);
      break;
    }
  }
  s.config.n_cores = std::max(s.config.n_cores, s.trace.cores_used());
  return s;
}

}  // namespace incoc
