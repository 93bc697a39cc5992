#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "incoc/config.hpp"
#include "incoc/mem_model.hpp"
#include "incoc/messages.hpp"

namespace incoc {

enum class LineKind : std::uint8_t { Normal, IncOc };

struct DirectoryEntry {
  LineAddr tag = 0;
  LineData data;
  LineKind kind = LineKind::Normal;
  std::optional<CoreId> owner;
  std::uint64_t sharers = 0;  // bit per core
  bool dirty = false;         // differs from DRAM
  std::uint64_t lru_stamp = 0;

  bool has_sharer(CoreId c) const { return (sharers >> c) & 1u; }
  bool has_l1_copies() const { return owner.has_value() || sharers != 0; }
};

/// Shared, strictly inclusive L2 that doubles as the coherence directory.
/// One transaction in flight per line; conflicting requests wait in a
/// per-line FIFO and are replayed queue_issue ticks after the line unblocks.
class L2Directory {
 public:
  L2Directory(const RunConfig& cfg, BackingStore& dram, SimObserver* observer = nullptr);

  // Dispatches any L1->L2 message (request or response).
  HandlerResult handle(const Message& msg, Tick now);

  HandlerResult handle_normal_request(const Message& msg, Tick now);
  HandlerResult handle_incoc_request(const Message& msg, Tick now);
  HandlerResult handle_uncacheable_request(const Message& msg, Tick now);

  // Fired by the engine when a line's transaction window closes.
  HandlerResult handle_unblock(LineAddr line, Tick now);

  /// Starts evicting `victim` to make room: sends Inv to every L1 copy and
  /// writes dirty data back. Returns true when the way is free right away
  /// (no L1 copies); otherwise the eviction completes once all responses
  /// are absorbed.
  bool enforce_inclusion_on_evict(DirectoryEntry& victim, HandlerResult& res, Tick now);

  // Inspection.
  const DirectoryEntry* find(LineAddr line) const;
  bool line_busy(LineAddr line) const;
  void for_each_entry(const std::function<void(const DirectoryEntry&)>& fn) const;
  std::uint64_t monitors(LineAddr line) const;
  std::size_t resident_count() const { return index_.size(); }

  // Quiescent flush of one line: writes dirty data to DRAM and drops it.
  void flush_line(LineAddr line);
  // Quiescent merge of an L1's dirty data before that L1 drops the line.
  void absorb_flush(LineAddr line, CoreId core, const std::optional<LineData>& dirty);

 private:
  struct Transaction {
    enum class Kind : std::uint8_t { Recall, Evict, Fill, Done } kind;
    Message request;           // GetS / GetM being served (Recall)
    std::uint32_t pending = 0;  // outstanding InvAck / FwdData
    std::optional<CoreId> old_owner;
  };
  struct LineWait {
    std::optional<Transaction> txn;
    std::deque<Message> queue;
    bool replay_in_flight = false;
  };

  DirectoryEntry* find_mut(LineAddr line);
  bool blocked(LineAddr line, const Message& msg) const;
  // Returns nullptr when the request had to wait for a victim.
  DirectoryEntry* allocate(const Message& msg, LineKind kind, HandlerResult& res, Tick now);
  void remove(LineAddr line);
  void maybe_replay(LineAddr line, Tick base_delay, HandlerResult& res);
  void send(HandlerResult& res, MessageKind kind, CoreId core, const Message& about,
            Tick delay, std::optional<LineData> data = std::nullopt);
  HandlerResult handle_response(const Message& msg, Tick now);
  void finish_transaction(LineAddr line, Transaction& txn, HandlerResult& res, Tick now);
  void log(Tick t, LineAddr line, std::string_view ev, const DirectoryEntry* before_state,
           std::string_view before) const;
  std::string state_name(LineAddr line) const;
  void perform(Tick t, const Message& msg, CoreOp op, MemoryType type, std::uint64_t value,
               bool success) const;

  std::uint32_t sets_;
  std::uint32_t ways_;
  std::uint32_t words_per_line_;
  std::uint32_t n_cores_;
  LatencyConfig lat_;
  RemoteLoadPolicy policy_;
  FaultInjection fault_;
  bool fault_fired_ = false;
  BackingStore& dram_;
  SimObserver* observer_;

  std::vector<std::optional<DirectoryEntry>> ways_storage_;  // sets_ * ways_
  std::map<LineAddr, std::uint32_t> index_;
  std::map<LineAddr, LineWait> waits_;
  std::map<LineAddr, std::uint64_t> monitors_;  // exclusive links, bit per core
  std::uint64_t clock_ = 0;
};

}  // namespace incoc
