#include "incoc/engine.hpp"

#include <algorithm>
#include <sstream>

namespace incoc {

namespace {

// Internal LX re-issued while spinning on a lock pair; never a report row.
constexpr ReqId kRetryFlag = ReqId{1} << 62;
constexpr std::size_t kLogTail = 256;

bool is_core_reply(MessageKind k) {
  return k == MessageKind::IncOcData || k == MessageKind::IncOcStoreAck;
}

bool is_l2_response(MessageKind k) {
  return k == MessageKind::InvAck || k == MessageKind::FwdData;
}

std::uint64_t value_of(const TraceRecord& r) {
  return r.value.value_or(is_store(r.op) ? kDefaultStoreValue : 0);
}

}  // namespace

Simulator::Simulator(const RunConfig& cfg, const Trace& trace, SimOptions opts)
    : cfg_(cfg),
      trace_(trace),
      opts_(std::move(opts)),
      mem_(cfg.memory_size, cfg.page_size),
      dram_(cfg.l2.line_size) {
  validate(cfg_);
  if (trace_.cores_used() > cfg_.n_cores)
    throw SimError(ErrorKind::InvalidArgument,
                   "trace uses " + std::to_string(trace_.cores_used()) +
                       " cores but n_cores is " + std::to_string(cfg_.n_cores));
  for (const auto& r : trace_.regions) mem_.map_region(r.base, r.length, r.mem_type);

  for (CoreId c = 0; c < cfg_.n_cores; ++c)
    l1s_.push_back(std::make_unique<L1Cache>(c, cfg_, this));
  l2_ = std::make_unique<L2Directory>(cfg_, dram_, this);

  cores_.resize(cfg_.n_cores);
  l1_inbox_.resize(cfg_.n_cores);
  const auto n = trace_.records.size();
  rows_.resize(n);
  issued_.assign(n, false);
  done_.assign(n, false);
  marks_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = trace_.records[i];
    rows_[i] = {i, rec.core, rec.op, mem_.resolve_type(rec.address), 0, 0};
    marks_[i].req_id = i;
    cores_[rec.core].program.push_back(i);
  }
  remaining_ = n;
}

Simulator::~Simulator() = default;

void Simulator::on_transition(Tick tick, std::string_view comp, LineAddr line,
                              std::string_view ev, std::string_view from, std::string_view to) {
  std::ostringstream os;
  os << "tick=" << tick << " comp=" << comp << " line=" << hex(line * cfg_.l1.line_size)
     << " ev=" << ev << " st=" << from << "->" << to;
  log_.push_back(os.str());
  if (!opts_.keep_log && log_.size() > kLogTail) log_.pop_front();
}

void Simulator::on_perform(PerformRecord rec) {
  rec.seq = performs_.size();
  cores_[rec.core].last_perform = performs_.size();
  performs_.push_back(rec);
}

std::string Simulator::event_log() const {
  std::string out;
  for (const auto& l : log_) {
    out += l;
    out += '\n';
  }
  return out;
}

bool Simulator::pair_sx(CoreId c) const {
  const auto& cs = cores_[c];
  if (cs.next + 1 >= cs.program.size()) return false;
  const auto& lx = trace_.records[cs.program[cs.next]];
  const auto& sx = trace_.records[cs.program[cs.next + 1]];
  return lx.op == CoreOp::LoadExcl && sx.op == CoreOp::StoreExcl && sx.address == lx.address;
}

void Simulator::send_request(CoreId c, ReqId id, CoreOp op, Addr addr, std::uint64_t value) {
  cores_[c].waiting = true;
  MemoryRequest req{id, c, op, addr, value, mem_.resolve_type(addr)};
  l1_inbox_[c].l1_items.push_back({now(), L1Arrive{c, req}});
  kick_l1(c);
}

void Simulator::try_issue(CoreId c) {
  auto& cs = cores_[c];
  if (cs.waiting || cs.next >= cs.program.size()) return;
  const std::size_t idx = cs.program[cs.next];
  const auto& rec = trace_.records[idx];
  if (rec.inject_at > now()) {
    events_.schedule_at(CoreWake{c}, rec.inject_at);
    return;
  }
  if (!issued_[idx]) {
    rows_[idx].issue = now();
    issued_[idx] = true;
  }
  send_request(c, idx, rec.op, rec.address, value_of(rec));
}

void Simulator::on_response(const CoreResponse& r) {
  auto& cs = cores_[r.core];
  cs.waiting = false;
  if (cs.last_perform != SIZE_MAX) {
    performs_[cs.last_perform].complete = now();
    cs.last_perform = SIZE_MAX;
  }
  if (r.id & kRetryFlag) {
    try_issue(r.core);
    return;
  }
  const std::size_t idx = r.id;
  const auto& rec = trace_.records[idx];
  if (rec.op == CoreOp::LoadExcl && pair_sx(r.core)) {
    cs.in_pair = true;
  } else if (rec.op == CoreOp::StoreExcl && cs.in_pair) {
    // A failed SX redoes the LX one issue slot later, then the SX again.
    if (!r.success) {
      cs.waiting = true;
      events_.schedule(CoreRetryLx{r.core}, cfg_.latency.queue_issue);
      return;
    }
    cs.in_pair = false;
  }
  rows_[idx].complete = now();
  done_[idx] = true;
  --remaining_;
  ++cs.next;
  try_issue(r.core);
}

void Simulator::apply(const HandlerResult& res) {
  const auto& lat = cfg_.latency;
  for (const auto& a : res.actions) {
    switch (a.kind) {
      case TimedAction::Kind::ToL2:
        events_.schedule(L2Arrive{a.msg}, a.delay + lat.l1_to_l2_hop);
        break;
      case TimedAction::Kind::ToL1:
        events_.schedule(L1Arrive{a.msg.core, a.msg}, a.delay + lat.l2_to_l1_hop);
        break;
      case TimedAction::Kind::ToCore:
        events_.schedule(CoreDeliver{a.response}, a.delay);
        break;
      case TimedAction::Kind::L2Unblock:
        events_.schedule(L2Unblock{a.line}, a.delay);
        break;
      case TimedAction::Kind::L2Replay:
        events_.schedule(L2Arrive{a.msg}, a.delay);
        break;
    }
  }
}

void Simulator::kick_l1(CoreId c) {
  auto& in = l1_inbox_[c];
  if (in.drain_scheduled || in.l1_items.empty()) return;
  in.drain_scheduled = true;
  events_.schedule_at(L1Drain{c}, std::max(now(), in.busy_until));
}

void Simulator::kick_l2() {
  if (l2_drain_scheduled_ || l2_inbox_.empty()) return;
  l2_drain_scheduled_ = true;
  events_.schedule_at(L2Drain{}, std::max(now(), l2_busy_until_));
}

void Simulator::drain_l1(CoreId c) {
  auto& in = l1_inbox_[c];
  in.drain_scheduled = false;
  if (in.l1_items.empty()) return;
  auto item = std::move(in.l1_items.front().second);
  in.l1_items.pop_front();
  auto& l1 = *l1s_[c];
  HandlerResult res;
  if (auto* req = std::get_if<MemoryRequest>(&item.input)) {
    if (!(req->id & kRetryFlag) && !marks_[req->id].l1_action)
      marks_[req->id].l1_action = now() + cfg_.latency.l1_proc;
    res = l1.handle_core_request(*req, now());
  } else {
    res = l1.handle_l2_message(std::get<Message>(item.input), now());
  }
  in.busy_until = now() + res.occupancy;
  apply(res);
  kick_l1(c);
}

void Simulator::drain_l2() {
  l2_drain_scheduled_ = false;
  if (l2_inbox_.empty()) return;
  Message msg = std::move(l2_inbox_.front().msg);
  l2_inbox_.pop_front();
  if (msg.req != kNoRequest && !(msg.req & kRetryFlag) && !is_l2_response(msg.kind) &&
      msg.req < marks_.size() && !marks_[msg.req].l2_receipt)
    marks_[msg.req].l2_receipt = now();
  auto res = l2_->handle(msg, now());
  l2_busy_until_ = now() + res.occupancy;
  apply(res);
  kick_l2();
}

void Simulator::dispatch(Payload& p) {
  std::visit(
      [&](auto& ev) {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, CoreWake>) {
          try_issue(ev.core);
        } else if constexpr (std::is_same_v<T, CoreRetryLx>) {
          const auto& sx = trace_.records[cores_[ev.core].program[cores_[ev.core].next]];
          send_request(ev.core, cores_[ev.core].program[cores_[ev.core].next] | kRetryFlag,
                       CoreOp::LoadExcl, sx.address, 0);
        } else if constexpr (std::is_same_v<T, L1Arrive>) {
          const auto* msg = std::get_if<Message>(&ev.input);
          if (msg && is_core_reply(msg->kind)) {
            // Straight through to the core; the L1 only relays it.
            apply(l1s_[ev.core]->handle_l2_message(*msg, now()));
          } else {
            l1_inbox_[ev.core].l1_items.push_back({now(), std::move(ev)});
            kick_l1(ev.core);
          }
        } else if constexpr (std::is_same_v<T, L1Drain>) {
          drain_l1(ev.core);
        } else if constexpr (std::is_same_v<T, L2Arrive>) {
          // FIFO by arrival tick, ties by core id.
          auto pos = std::find_if(l2_inbox_.begin(), l2_inbox_.end(), [&](const L2Item& it) {
            return it.arrival > now() || (it.arrival == now() && it.msg.core > ev.msg.core);
          });
          l2_inbox_.insert(pos, L2Item{now(), std::move(ev.msg)});
          kick_l2();
        } else if constexpr (std::is_same_v<T, L2Drain>) {
          drain_l2();
        } else if constexpr (std::is_same_v<T, L2Unblock>) {
          apply(l2_->handle_unblock(ev.line, now()));
        } else if constexpr (std::is_same_v<T, CoreDeliver>) {
          on_response(ev.r);
        }
      },
      p);
}

Report Simulator::run() {
  for (CoreId c = 0; c < cfg_.n_cores; ++c)
    if (!cores_[c].program.empty())
      events_.schedule_at(CoreWake{c}, trace_.records[cores_[c].program.front()].inject_at);

  bool any = false;
  Tick cur = 0;
  while (!events_.empty()) {
    const Tick next = events_.next_tick();
    if (next > cfg_.max_ticks)
      throw SimError(ErrorKind::Livelock, "no quiescence within max_ticks = " +
                                              std::to_string(cfg_.max_ticks) + " (" +
                                              std::to_string(remaining_) +
                                              " requests outstanding)");
    if (any && next != cur && opts_.on_tick_end) opts_.on_tick_end(cur, *this);
    auto ev = events_.pop();
    cur = ev.at;
    any = true;
    dispatch(ev.payload);
  }
  if (any && opts_.on_tick_end) opts_.on_tick_end(cur, *this);

  if (remaining_ > 0) {
    std::ostringstream os;
    os << "event queue drained with " << remaining_ << " requests outstanding at tick " << cur
       << ";";
    for (CoreId c = 0; c < cfg_.n_cores; ++c)
      if (cores_[c].next < cores_[c].program.size())
        os << " core " << c << " stuck at record " << cores_[c].program[cores_[c].next];
    throw SimError(ErrorKind::Deadlock, os.str());
  }

  Report rep;
  rep.config = cfg_;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (trace_.records[i].inject_at < trace_.measure_from) continue;
    rep.per_request.push_back(rows_[i]);
    rep.marks.push_back(marks_[i]);
  }
  rep.event_log = opts_.keep_log ? event_log() : std::string{};
  rep.end_tick = cur;
  return rep;
}

std::map<LineAddr, LineData> Simulator::final_memory() const {
  std::map<LineAddr, LineData> img = dram_.contents();
  l2_->for_each_entry([&](const DirectoryEntry& e) { img[e.tag] = e.data; });
  for (const auto& l1 : l1s_)
    l1->for_each_line([&](LineAddr line, MsiState st, const LineData& d) {
      if (st == MsiState::M || st == MsiState::MI_WB) img[line] = d;
    });
  return img;
}

bool Simulator::any_resident(Addr base, std::uint64_t length) const {
  const LineAddr first = base / cfg_.l1.line_size;
  const LineAddr last = (base + length + cfg_.l1.line_size - 1) / cfg_.l1.line_size;
  bool found = false;
  const auto in = [&](LineAddr l) { return l >= first && l < last; };
  l2_->for_each_entry([&](const DirectoryEntry& e) { found = found || in(e.tag); });
  for (const auto& l1 : l1s_)
    l1->for_each_line([&](LineAddr l, MsiState, const LineData&) { found = found || in(l); });
  return found;
}

void Simulator::invalidate_region(Addr base, std::uint64_t length) {
  if (!events_.empty())
    throw SimError(ErrorKind::InvalidArgument, "invalidate_region needs a quiescent system");
  const LineAddr first = base / cfg_.l1.line_size;
  const LineAddr last = (base + length + cfg_.l1.line_size - 1) / cfg_.l1.line_size;
  for (CoreId c = 0; c < cfg_.n_cores; ++c) {
    std::vector<LineAddr> lines;
    l1s_[c]->for_each_line([&](LineAddr l, MsiState, const LineData&) {
      if (l >= first && l < last) lines.push_back(l);
    });
    for (auto l : lines) l2_->absorb_flush(l, c, l1s_[c]->flush_line(l));
  }
  std::vector<LineAddr> lines;
  l2_->for_each_entry([&](const DirectoryEntry& e) {
    if (e.tag >= first && e.tag < last) lines.push_back(e.tag);
  });
  for (auto l : lines) l2_->flush_line(l);
}

void Simulator::set_region_type(const RegionHandle& region, MemoryType t) {
  mem_.set_region_type(region, t,
                       [this](Addr b, std::uint64_t len) { return any_resident(b, len); });
}

Report run(const RunConfig& cfg, const Trace& trace, bool keep_log) {
  SimOptions opts;
  opts.keep_log = keep_log;
  Simulator sim(cfg, trace, opts);
  return sim.run();
}

}  // namespace incoc
