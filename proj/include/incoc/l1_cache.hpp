#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "incoc/config.hpp"
#include "incoc/messages.hpp"

namespace incoc {

struct CacheLine {
  LineAddr tag = 0;
  MsiState state = MsiState::I;
  LineData data;
  std::uint64_t lru_stamp = 0;  // larger = more recently used
};

/// Private per-core cache. Normal requests run MSI locally; INC-OC and
/// Uncacheable requests are forwarded to the L2 after the L1 processing
/// latency without allocating anything. Blocking: one outstanding request.
class L1Cache {
 public:
  L1Cache(CoreId id, const RunConfig& cfg, SimObserver* observer = nullptr);

  CoreId id() const { return id_; }

  HandlerResult handle_core_request(const MemoryRequest& req, Tick now);
  HandlerResult handle_l2_message(const Message& msg, Tick now);

  /// Frees a way in `set_index` if none is free: the LRU stable line is
  /// dropped, returning PutM (dirty, moved to the writeback buffer) or PutS.
  /// Returns nullopt when a free way already exists.
  std::optional<Message> evict_victim(std::uint32_t set_index);

  // Inspection (checkers, residency probes, tests).
  std::optional<MsiState> state_of(LineAddr line) const;
  const LineData* data_of(LineAddr line) const;
  bool in_writeback(LineAddr line) const { return writeback_.count(line) != 0; }
  const LineData* writeback_data(LineAddr line) const;
  bool busy() const { return pending_.has_value() || deferred_.has_value(); }
  std::uint32_t set_of(LineAddr line) const { return static_cast<std::uint32_t>(line % sets_); }

  void for_each_line(const std::function<void(LineAddr, MsiState, const LineData&)>& fn) const;

  // Drops a stable line outside of any transaction (quiescent flush).
  // Returns its data if it was Modified.
  std::optional<LineData> flush_line(LineAddr line);

  // Ways of a set ordered from LRU to MRU (stable lines only).
  std::vector<LineAddr> lru_order(std::uint32_t set_index) const;

 private:
  CacheLine* find(LineAddr line);
  const CacheLine* find(LineAddr line) const;
  CacheLine& allocate(LineAddr line, MemoryType t);
  void touch(CacheLine& l) { l.lru_stamp = ++clock_; }
  void log(Tick t, LineAddr line, CoherenceEvent ev, MsiState from, MsiState to) const;
  void perform(Tick t, const MemoryRequest& req, LineAddr line, std::uint32_t word,
               std::uint64_t value, bool success) const;

  HandlerResult handle_normal(const MemoryRequest& req, Tick now);
  HandlerResult handle_forwarded(const MemoryRequest& req, Tick now);
  HandlerResult complete_fill(const Message& msg, Tick now);
  HandlerResult handle_inv(const Message& msg, Tick now);

  std::uint32_t word_of(Addr a) const { return static_cast<std::uint32_t>((a % line_size_) / 8); }
  LineAddr line_of(Addr a) const { return a / line_size_; }

  CoreId id_;
  std::uint32_t line_size_;
  std::uint32_t sets_;
  std::uint32_t ways_;
  LatencyConfig lat_;
  RemoteLoadPolicy policy_;
  SimObserver* observer_;

  std::vector<CacheLine> lines_;          // sets_ * ways_
  std::map<LineAddr, std::uint32_t> index_;  // tag -> slot, non-I lines only
  std::map<LineAddr, LineData> writeback_;   // lines in MI_WB
  std::map<LineAddr, std::uint64_t> links_;  // LX link: line -> observed version
  std::optional<MemoryRequest> pending_;     // awaiting DataS/DataM or an L2 reply
  std::optional<MemoryRequest> deferred_;    // waiting for a WbAck on its line
  std::uint64_t clock_ = 0;
};

}  // namespace incoc
