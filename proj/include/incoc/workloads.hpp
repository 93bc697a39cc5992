#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "incoc/common.hpp"
#include "incoc/mem_model.hpp"
#include "incoc/messages.hpp"

namespace incoc {

struct TraceRecord {
  Tick inject_at = 0;
  CoreId core = 0;
  CoreOp op = CoreOp::Read;
  Addr address = 0;
  std::optional<std::uint64_t> value;

  bool operator==(const TraceRecord&) const = default;
};

struct TraceRegion {
  Addr base = 0;
  std::uint64_t length = 0;
  MemoryType mem_type = MemoryType::NormalCacheable;

  bool operator==(const TraceRegion&) const = default;
};

struct Trace {
  std::vector<TraceRegion> regions;
  Tick measure_from = 0;
  std::vector<TraceRecord> records;

  bool operator==(const Trace&) const = default;
  // Highest core id referenced, plus one.
  std::uint32_t cores_used() const;
};

/// Throws ParseError (Syntax / Range / Order) with a 1-based line and column.
Trace parse_trace(std::string_view text, std::uint64_t memory_size = 4ull << 30);
std::string render_trace(const Trace& t);

// Word-aligned value stored by W/SX when the record carries none.
inline constexpr std::uint64_t kDefaultStoreValue = 1;

/// Warm-up puts the line in M at core 1 (or in L2 for INC-OC); core 0 then
/// writes it once. With one core the warm-up is done by core 0 itself.
Trace gen_dirty_miss(MemoryType type, std::uint32_t n_cores = 2);

/// n writers hit one line at the same tick; core n owns it beforehand.
Trace gen_write_storm(std::uint32_t n_writers, MemoryType type);

enum class MicroKind : std::uint8_t { Load, Store, Lock };
enum class Sharing : std::uint8_t { Private, Shared };

struct MicroParams {
  MicroKind kind = MicroKind::Load;
  Sharing sharing = Sharing::Shared;
  MemoryType mem_type = MemoryType::NormalCacheable;
  std::uint32_t n_cores = 4;
  std::uint32_t iters = 10002;  // measured operations per core
  std::uint64_t working_set = 16 * 1024;
  Tick lock_period = 4000;  // ticks between a core's lock iterations
};

Trace gen_micro(const MicroParams& p);

// Which memory is typed INC-OC in the pipeline experiment.
enum class Typing : std::uint8_t { Normal, Selective, Blind };

std::optional<Typing> parse_typing(std::string_view s);
const char* to_string(Typing t);

struct PipelineParams {
  std::uint32_t n_stages = 4;
  std::uint32_t payload_lines = 16;
  std::uint32_t iters = 8;
  Typing typing = Typing::Selective;
  std::uint32_t work_ops = 256;  // private accesses per stage per round
  Tick period = 50'000;          // think time between rounds
};

Trace gen_producer_consumer(const PipelineParams& p);

}  // namespace incoc
