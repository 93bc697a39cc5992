#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <queue>
#include <variant>
#include <vector>

#include "incoc/config.hpp"
#include "incoc/l1_cache.hpp"
#include "incoc/l2_directory.hpp"
#include "incoc/mem_model.hpp"
#include "incoc/report.hpp"
#include "incoc/workloads.hpp"

namespace incoc {

/// Timed queue firing in (tick, seq) order.
template <class Payload>
class EventQueue {
 public:
  struct Event {
    Tick at;
    std::uint64_t seq;
    Payload payload;
  };

  Tick now() const { return now_; }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  Tick next_tick() const { return heap_.top().at; }

  void schedule(Payload p, Tick delay) { heap_.push({now_ + delay, seq_++, std::move(p)}); }
  void schedule_at(Payload p, Tick at) { heap_.push({at < now_ ? now_ : at, seq_++, std::move(p)}); }

  Event pop() {
    Event e = heap_.top();
    heap_.pop();
    now_ = e.at;
    return e;
  }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  Tick now_ = 0;
  std::uint64_t seq_ = 0;
};

class Simulator;

struct SimOptions {
  bool keep_log = false;
  // Called once per simulated tick after every event of that tick fired.
  std::function<void(Tick, const Simulator&)> on_tick_end;
};

/// One run of a trace: cores, private L1s, the shared L2 directory and DRAM.
class Simulator : public SimObserver {
 public:
  Simulator(const RunConfig& cfg, const Trace& trace, SimOptions opts = {});
  ~Simulator() override;

  // Throws Deadlock / Livelock / ProtocolViolation / TypeMismatch.
  Report run();

  const RunConfig& config() const { return cfg_; }
  const L1Cache& l1(CoreId c) const { return *l1s_[c]; }
  const L2Directory& l2() const { return *l2_; }
  const MemoryModel& memory() const { return mem_; }
  const BackingStore& dram() const { return dram_; }
  const std::vector<PerformRecord>& performs() const { return performs_; }
  Tick now() const { return events_.now(); }

  // Most recent log records (all of them when keep_log is set).
  std::string event_log() const;

  // Coherent memory image: DRAM overlaid by L2 and then L1 Modified data.
  std::map<LineAddr, LineData> final_memory() const;

  // Region retyping between runs; fails while any line is cached.
  bool any_resident(Addr base, std::uint64_t length) const;
  void invalidate_region(Addr base, std::uint64_t length);
  void set_region_type(const RegionHandle& region, MemoryType t);

 private:
  struct CoreWake { CoreId core; };
  struct CoreRetryLx { CoreId core; };
  struct L1Arrive { CoreId core; std::variant<MemoryRequest, Message> input; };
  struct L1Drain { CoreId core; };
  struct L2Arrive { Message msg; };
  struct L2Drain {};
  struct L2Unblock { LineAddr line; };
  struct CoreDeliver { CoreResponse r; };
  using Payload =
      std::variant<CoreWake, CoreRetryLx, L1Arrive, L1Drain, L2Arrive, L2Drain, L2Unblock,
                   CoreDeliver>;

  struct Inbox {
    std::deque<std::pair<Tick, L1Arrive>> l1_items;
    Tick busy_until = 0;
    bool drain_scheduled = false;
  };
  struct L2Item {
    Tick arrival;
    Message msg;
  };
  struct CoreState {
    std::vector<std::size_t> program;  // record indices in program order
    std::size_t next = 0;
    bool waiting = false;
    bool in_pair = false;  // between the LX and SX of a lock pair
    std::size_t last_perform = SIZE_MAX;
  };

  void on_transition(Tick tick, std::string_view comp, LineAddr line, std::string_view ev,
                     std::string_view from, std::string_view to) override;
  void on_perform(PerformRecord rec) override;

  void dispatch(Payload& p);
  void try_issue(CoreId c);
  void send_request(CoreId c, ReqId id, CoreOp op, Addr addr, std::uint64_t value);
  void on_response(const CoreResponse& r);
  void apply(const HandlerResult& res);
  void drain_l1(CoreId c);
  void drain_l2();
  void kick_l1(CoreId c);
  void kick_l2();
  bool pair_sx(CoreId c) const;

  RunConfig cfg_;
  Trace trace_;
  SimOptions opts_;
  MemoryModel mem_;
  BackingStore dram_;
  std::vector<std::unique_ptr<L1Cache>> l1s_;
  std::unique_ptr<L2Directory> l2_;
  EventQueue<Payload> events_;

  std::vector<CoreState> cores_;
  std::vector<Inbox> l1_inbox_;
  std::deque<L2Item> l2_inbox_;
  Tick l2_busy_until_ = 0;
  bool l2_drain_scheduled_ = false;

  std::vector<RequestRow> rows_;  // one per trace record
  std::vector<bool> issued_;
  std::vector<bool> done_;
  std::vector<RequestMarks> marks_;
  std::size_t remaining_ = 0;

  std::vector<PerformRecord> performs_;
  std::deque<std::string> log_;
};

Report run(const RunConfig& cfg, const Trace& trace, bool keep_log = false);

}  // namespace incoc
