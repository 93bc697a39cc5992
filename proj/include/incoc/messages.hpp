#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "incoc/common.hpp"
#include "incoc/mem_model.hpp"
#include "incoc/protocol.hpp"

namespace incoc {

enum class CoreOp : std::uint8_t { Read, Write, LoadExcl, StoreExcl };

const char* to_string(CoreOp op);  // R, W, LX, SX
std::optional<CoreOp> parse_core_op(std::string_view s);

constexpr bool is_store(CoreOp op) {
  return op == CoreOp::Write || op == CoreOp::StoreExcl;
}

// A core request after page-attribute resolution.
struct MemoryRequest {
  ReqId id = kNoRequest;
  CoreId core = 0;
  CoreOp op = CoreOp::Read;
  Addr address = 0;
  std::uint64_t value = 0;
  MemoryType mem_type = MemoryType::NormalCacheable;
};

struct CoreResponse {
  ReqId id = kNoRequest;
  CoreId core = 0;
  std::uint64_t value = 0;  // loaded value (loads) or stored value
  bool success = true;      // StoreExcl outcome
};

// `core` is the L1 on the other end: sender for L1->L2 traffic, receiver for
// L2->L1 traffic.
struct Message {
  MessageKind kind = MessageKind::GetS;
  CoreId core = 0;
  LineAddr line = 0;
  ReqId req = kNoRequest;
  std::optional<LineData> data;
  std::uint32_t word = 0;
  std::uint64_t value = 0;
  bool downgrade = false;  // Inv: owner keeps an S copy
  bool success = true;     // IncOcStoreAck
  bool replayed = false;   // re-delivered from the directory wait queue
};

struct TimedAction {
  enum class Kind : std::uint8_t { ToL2, ToL1, ToCore, L2Unblock, L2Replay };
  Kind kind;
  Tick delay = 0;
  Message msg{};
  CoreResponse response{};
  LineAddr line = 0;

  static TimedAction to_l2(Message m, Tick d) { return {Kind::ToL2, d, std::move(m), {}, 0}; }
  static TimedAction to_l1(Message m, Tick d) { return {Kind::ToL1, d, std::move(m), {}, 0}; }
  static TimedAction to_core(CoreResponse r, Tick d) { return {Kind::ToCore, d, {}, r, 0}; }
  static TimedAction unblock(LineAddr l, Tick d) { return {Kind::L2Unblock, d, {}, {}, l}; }
  static TimedAction replay(Message m, Tick d) {
    m.replayed = true;
    return {Kind::L2Replay, d, std::move(m), {}, 0};
  }
};

// `occupancy` is how long the controller stays busy with this input.
struct HandlerResult {
  std::vector<TimedAction> actions;
  Tick occupancy = 0;
};

// One access taking effect on memory, in global perform order.
struct PerformRecord {
  std::uint64_t seq = 0;
  Tick tick = 0;
  CoreId core = 0;
  ReqId req = kNoRequest;
  CoreOp op = CoreOp::Read;
  MemoryType mem_type = MemoryType::NormalCacheable;
  LineAddr line = 0;
  std::uint32_t word = 0;
  std::uint64_t value = 0;  // value read, or value written
  bool success = true;
  Tick complete = 0;  // when the core saw the response; filled by the engine
};

/// Side channel from the controllers to the engine: the transition log and
/// perform notifications.
class SimObserver {
 public:
  virtual ~SimObserver() = default;
  virtual void on_transition(Tick tick, std::string_view comp, LineAddr line,
                             std::string_view ev, std::string_view from,
                             std::string_view to) = 0;
  virtual void on_perform(PerformRecord rec) = 0;
};

}  // namespace incoc
