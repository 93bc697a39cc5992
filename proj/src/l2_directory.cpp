#include "incoc/l2_directory.hpp"

#include <string>

namespace incoc {

namespace {

[[noreturn]] void violation(const std::string& what) {
  throw SimError(ErrorKind::ProtocolViolation, what);
}

constexpr std::uint64_t bit(CoreId c) { return std::uint64_t{1} << c; }

bool is_response(MessageKind k) { return k == MessageKind::InvAck || k == MessageKind::FwdData; }

bool is_incoc(MessageKind k) {
  return k == MessageKind::IncOcLoad || k == MessageKind::IncOcStore ||
         k == MessageKind::IncOcLoadExcl || k == MessageKind::IncOcStoreExcl;
}

bool is_uncacheable(MessageKind k) {
  return k == MessageKind::UncLoad || k == MessageKind::UncStore ||
         k == MessageKind::UncLoadExcl || k == MessageKind::UncStoreExcl;
}

CoreOp op_of(MessageKind k) {
  switch (k) {
    case MessageKind::IncOcStore:
    case MessageKind::UncStore: return CoreOp::Write;
    case MessageKind::IncOcLoadExcl:
    case MessageKind::UncLoadExcl: return CoreOp::LoadExcl;
    case MessageKind::IncOcStoreExcl:
    case MessageKind::UncStoreExcl: return CoreOp::StoreExcl;
    default: return CoreOp::Read;
  }
}

}  // namespace

L2Directory::L2Directory(const RunConfig& cfg, BackingStore& dram, SimObserver* observer)
    : sets_(cfg.l2.sets()),
      ways_(cfg.l2.associativity),
      words_per_line_(cfg.l2.line_size / 8),
      n_cores_(cfg.n_cores),
      lat_(cfg.latency),
      policy_(cfg.remote_load_policy),
      fault_(cfg.fault),
      dram_(dram),
      observer_(observer),
      ways_storage_(std::size_t{sets_} * ways_) {}

const DirectoryEntry* L2Directory::find(LineAddr line) const {
  auto it = index_.find(line);
  return it == index_.end() ? nullptr : &*ways_storage_[it->second];
}

DirectoryEntry* L2Directory::find_mut(LineAddr line) {
  auto it = index_.find(line);
  return it == index_.end() ? nullptr : &*ways_storage_[it->second];
}

bool L2Directory::line_busy(LineAddr line) const {
  auto it = waits_.find(line);
  return it != waits_.end() &&
         (it->second.txn || !it->second.queue.empty() || it->second.replay_in_flight);
}

void L2Directory::for_each_entry(const std::function<void(const DirectoryEntry&)>& fn) const {
  for (const auto& [tag, slot] : index_) fn(*ways_storage_[slot]);
}

std::uint64_t L2Directory::monitors(LineAddr line) const {
  auto it = monitors_.find(line);
  return it == monitors_.end() ? 0 : it->second;
}

std::string L2Directory::state_name(LineAddr line) const {
  std::string s;
  const auto* e = find(line);
  if (!e) s = "NP";
  else if (e->kind == LineKind::IncOc) s = "X";
  else if (e->owner) s = "M";
  else if (e->sharers) s = "S";
  else s = "V";
  auto it = waits_.find(line);
  if (it != waits_.end() && it->second.txn) s += "_B";
  return s;
}

void L2Directory::log(Tick t, LineAddr line, std::string_view ev, const DirectoryEntry*,
                      std::string_view before) const {
  if (observer_) observer_->on_transition(t, "l2", line, ev, before, state_name(line));
}

void L2Directory::perform(Tick t, const Message& msg, CoreOp op, MemoryType type,
                          std::uint64_t value, bool success) const {
  if (!observer_) return;
  PerformRecord r;
  r.tick = t;
  r.core = msg.core;
  r.req = msg.req;
  r.op = op;
  r.mem_type = type;
  r.line = msg.line;
  r.word = msg.word;
  r.value = value;
  r.success = success;
  observer_->on_perform(r);
}

void L2Directory::send(HandlerResult& res, MessageKind kind, CoreId core, const Message& about,
                       Tick delay, std::optional<LineData> data) {
  Message m;
  m.kind = kind;
  m.core = core;
  m.line = about.line;
  m.req = about.req;
  m.data = std::move(data);
  res.actions.push_back(TimedAction::to_l1(std::move(m), delay));
}

bool L2Directory::blocked(LineAddr line, const Message& msg) const {
  auto it = waits_.find(line);
  if (it == waits_.end()) return false;
  if (it->second.txn) return true;
  return !msg.replayed && (!it->second.queue.empty() || it->second.replay_in_flight);
}

void L2Directory::maybe_replay(LineAddr line, Tick base_delay, HandlerResult& res) {
  auto it = waits_.find(line);
  if (it == waits_.end()) return;
  auto& w = it->second;
  if (!w.txn && !w.queue.empty() && !w.replay_in_flight) {
    Message m = std::move(w.queue.front());
    w.queue.pop_front();
    w.replay_in_flight = true;
    res.actions.push_back(TimedAction::replay(std::move(m), base_delay + lat_.queue_issue));
  }
  if (!w.txn && w.queue.empty() && !w.replay_in_flight) waits_.erase(it);
}

void L2Directory::remove(LineAddr line) {
  auto it = index_.find(line);
  if (it == index_.end()) return;
  ways_storage_[it->second].reset();
  index_.erase(it);
}

bool L2Directory::enforce_inclusion_on_evict(DirectoryEntry& victim, HandlerResult& res,
                                             Tick now) {
  const LineAddr line = victim.tag;
  if (!victim.has_l1_copies()) {
    const auto before = state_name(line);
    if (victim.dirty) dram_.write(line, victim.data);
    remove(line);
    log(now, line, "Evict", nullptr, before);
    return true;
  }
  Transaction txn{Transaction::Kind::Evict, Message{}, 0, victim.owner};
  txn.request.line = line;
  Message about;
  about.line = line;
  if (victim.owner) {
    send(res, MessageKind::Inv, *victim.owner, about, lat_.l2_proc);
    ++txn.pending;
  }
  for (CoreId c = 0; c < n_cores_; ++c) {
    if (!victim.has_sharer(c)) continue;
    send(res, MessageKind::Inv, c, about, lat_.l2_proc);
    ++txn.pending;
  }
  const auto before = state_name(line);
  waits_[line].txn = std::move(txn);
  log(now, line, "Evict", &victim, before);
  return false;
}

DirectoryEntry* L2Directory::allocate(const Message& msg, LineKind kind, HandlerResult& res,
                                      Tick now) {
  const auto set = static_cast<std::uint32_t>(msg.line % sets_);
  std::optional<std::uint32_t> slot;
  for (std::uint32_t w = 0; w < ways_ && !slot; ++w)
    if (!ways_storage_[set * ways_ + w]) slot = set * ways_ + w;

  if (!slot) {
    // LRU among idle lines; ties go to the lowest way.
    DirectoryEntry* victim = nullptr;
    std::uint32_t victim_slot = 0;
    for (std::uint32_t w = 0; w < ways_; ++w) {
      auto& e = *ways_storage_[set * ways_ + w];
      if (line_busy(e.tag)) continue;
      if (!victim || e.lru_stamp < victim->lru_stamp) {
        victim = &e;
        victim_slot = set * ways_ + w;
      }
    }
    Message retry = msg;
    retry.replayed = false;
    if (!victim) {
      res.actions.push_back({TimedAction::Kind::L2Replay, lat_.queue_issue, retry, {}, 0});
      return nullptr;
    }
    if (!enforce_inclusion_on_evict(*victim, res, now)) {
      waits_[victim->tag].txn->request = retry;
      return nullptr;
    }
    slot = victim_slot;
  }

  auto& e = ways_storage_[*slot].emplace();
  e.tag = msg.line;
  e.kind = kind;
  e.data = dram_.read(msg.line);
  e.lru_stamp = ++clock_;
  index_[msg.line] = *slot;
  return &e;
}

HandlerResult L2Directory::handle(const Message& msg, Tick now) {
  if (is_response(msg.kind)) return handle_response(msg, now);
  if (is_uncacheable(msg.kind)) return handle_uncacheable_request(msg, now);

  HandlerResult res;
  res.occupancy = lat_.l2_proc;
  if (msg.replayed) {
    auto it = waits_.find(msg.line);
    if (it != waits_.end()) it->second.replay_in_flight = false;
  }
  if (blocked(msg.line, msg)) {
    auto& q = waits_[msg.line].queue;
    if (msg.replayed) q.push_front(msg);
    else q.push_back(msg);
    if (observer_) {
      const auto st = state_name(msg.line);
      observer_->on_transition(now, "l2", msg.line, std::string("queue:") + to_string(msg.kind),
                               st, st);
    }
    return res;
  }
  res = is_incoc(msg.kind) ? handle_incoc_request(msg, now) : handle_normal_request(msg, now);
  maybe_replay(msg.line, lat_.l2_proc, res);
  return res;
}

HandlerResult L2Directory::handle_normal_request(const Message& msg, Tick now) {
  HandlerResult res;
  res.occupancy = lat_.l2_proc;
  const Tick p = lat_.l2_proc;
  const auto before = state_name(msg.line);
  DirectoryEntry* e = find_mut(msg.line);
  if (e && e->kind == LineKind::IncOc)
    throw SimError(ErrorKind::TypeMismatch, "normal request " + std::string(to_string(msg.kind)) +
                                                " to INC-OC line " + hex(msg.line));
  const CoreId c = msg.core;

  switch (msg.kind) {
    case MessageKind::GetS:
    case MessageKind::GetM: {
      const bool getm = msg.kind == MessageKind::GetM;
      if (!e) {
        e = allocate(msg, LineKind::Normal, res, now);
        if (!e) return res;
        if (getm) e->owner = c;
        else e->sharers |= bit(c);
        const Tick d = p + lat_.dram_access;
        send(res, getm ? MessageKind::DataM : MessageKind::DataS, c, msg, d, e->data);
        waits_[msg.line].txn = Transaction{Transaction::Kind::Fill, msg, 0, std::nullopt};
        res.actions.push_back(TimedAction::unblock(msg.line, d));
        break;
      }
      e->lru_stamp = ++clock_;
      if (e->owner && *e->owner == c)
        violation(std::string(to_string(msg.kind)) + " from the current owner of " +
                  hex(msg.line));

      Transaction txn{Transaction::Kind::Recall, msg, 0, e->owner};
      if (!getm) {
        if (!e->owner) {
          e->sharers |= bit(c);
          send(res, MessageKind::DataS, c, msg, p, e->data);
          break;
        }
        Message inv;
        inv.line = msg.line;
        inv.req = msg.req;
        send(res, MessageKind::Inv, *e->owner, inv, p);
        res.actions.back().msg.downgrade = policy_ == RemoteLoadPolicy::DowngradeShared;
        txn.pending = 1;
      } else {
        if (e->owner) {
          send(res, MessageKind::Inv, *e->owner, msg, p);
          ++txn.pending;
        }
        for (CoreId s = 0; s < n_cores_; ++s) {
          if (s == c || !e->has_sharer(s)) continue;
          if (fault_ == FaultInjection::SkipOneInv && !fault_fired_) {
            fault_fired_ = true;
            continue;
          }
          send(res, MessageKind::Inv, s, msg, p);
          ++txn.pending;
        }
        if (txn.pending == 0) {
          e->owner = c;
          e->sharers = 0;
          send(res, MessageKind::DataM, c, msg, p, e->data);
          break;
        }
      }
      waits_[msg.line].txn = std::move(txn);
      break;
    }
    case MessageKind::PutM: {
      if (e && e->owner == c) {
        if (!msg.data) violation("PutM without data");
        e->data = *msg.data;
        e->dirty = true;
        e->owner.reset();
      } else if (e) {
        e->sharers &= ~bit(c);  // stale PutM after a downgrade raced it
      }
      send(res, MessageKind::WbAck, c, msg, p);
      break;
    }
    case MessageKind::PutS:
      if (e) e->sharers &= ~bit(c);
      break;
    default:
      violation(std::string("not a normal request: ") + to_string(msg.kind));
  }
  log(now, msg.line, to_string(msg.kind), e, before);
  return res;
}

HandlerResult L2Directory::handle_response(const Message& msg, Tick now) {
  HandlerResult res;
  res.occupancy = lat_.l2_proc;
  const auto before = state_name(msg.line);
  auto it = waits_.find(msg.line);
  if (it == waits_.end() || !it->second.txn || it->second.txn->kind == Transaction::Kind::Done ||
      it->second.txn->pending == 0)
    violation(std::string(to_string(msg.kind)) + " for " + hex(msg.line) +
              " with no transaction waiting for it");
  auto& txn = *it->second.txn;
  DirectoryEntry* e = find_mut(msg.line);
  if (!e) violation("response for a line missing from L2");
  if (msg.kind == MessageKind::FwdData) {
    if (!msg.data) violation("FwdData without data");
    e->data = *msg.data;
    e->dirty = true;
  }
  --txn.pending;
  if (txn.pending == 0) finish_transaction(msg.line, txn, res, now);
  log(now, msg.line, to_string(msg.kind), e, before);
  return res;
}

void L2Directory::finish_transaction(LineAddr line, Transaction& txn, HandlerResult& res, Tick) {
  const Tick resume = lat_.l2_proc + lat_.queue_issue;
  DirectoryEntry* e = find_mut(line);
  switch (txn.kind) {
    case Transaction::Kind::Recall: {
      const CoreId req = txn.request.core;
      if (txn.request.kind == MessageKind::GetS) {
        e->owner.reset();
        e->sharers |= bit(req);
        if (policy_ == RemoteLoadPolicy::DowngradeShared && txn.old_owner)
          e->sharers |= bit(*txn.old_owner);
        send(res, MessageKind::DataS, req, txn.request, resume, e->data);
      } else {
        e->owner = req;
        e->sharers = 0;
        send(res, MessageKind::DataM, req, txn.request, resume, e->data);
      }
      txn.kind = Transaction::Kind::Done;
      res.actions.push_back(TimedAction::unblock(line, resume));
      break;
    }
    case Transaction::Kind::Evict: {
      if (e->dirty) dram_.write(line, e->data);
      remove(line);
      if (txn.request.line != line) {  // a fill was waiting for this way
        Message waiter = txn.request;
        waiter.replayed = false;
        res.actions.push_back({TimedAction::Kind::L2Replay, resume, waiter, {}, 0});
      }
      txn.kind = Transaction::Kind::Done;
      res.actions.push_back(TimedAction::unblock(line, lat_.l2_proc));
      break;
    }
    default:
      violation("transaction cannot complete from its state");
  }
}

HandlerResult L2Directory::handle_unblock(LineAddr line, Tick now) {
  HandlerResult res;
  auto it = waits_.find(line);
  if (it == waits_.end() || !it->second.txn) violation("unblock of an idle line " + hex(line));
  const auto before = state_name(line);
  it->second.txn.reset();
  log(now, line, "Unblock", find(line), before);
  maybe_replay(line, 0, res);
  return res;
}

namespace {

struct AccessResult {
  std::uint64_t value = 0;
  bool success = true;
  bool wrote = false;
};

AccessResult apply_access(LineData& data, std::uint64_t& links, CoreId c, CoreOp op,
                          std::uint32_t word, std::uint64_t value) {
  AccessResult r;
  switch (op) {
    case CoreOp::Read:
      r.value = data.words[word];
      break;
    case CoreOp::LoadExcl:
      r.value = data.words[word];
      links |= bit(c);
      break;
    case CoreOp::StoreExcl:
      r.value = value;
      r.success = (links & bit(c)) != 0;
      r.wrote = r.success;
      break;
    case CoreOp::Write:
      r.value = value;
      r.wrote = true;
      break;
  }
  if (r.wrote) {
    data.words[word] = value;
    ++data.version;
    links = 0;
  }
  return r;
}

}  // namespace

HandlerResult L2Directory::handle_incoc_request(const Message& msg, Tick now) {
  HandlerResult res;
  res.occupancy = lat_.l2_proc;
  const auto before = state_name(msg.line);
  DirectoryEntry* e = find_mut(msg.line);
  if (e && e->kind != LineKind::IncOc)
    throw SimError(ErrorKind::TypeMismatch, std::string(to_string(msg.kind)) +
                                                " to a line cached as Normal: " + hex(msg.line) +
                                                " (invalidate before changing its type)");
  bool fill = false;
  if (!e) {
    e = allocate(msg, LineKind::IncOc, res, now);
    if (!e) return res;
    fill = true;
  }
  e->lru_stamp = ++clock_;

  const CoreOp op = op_of(msg.kind);
  std::uint64_t links = monitors(msg.line);
  const auto r = apply_access(e->data, links, msg.core, op, msg.word, msg.value);
  if (links) monitors_[msg.line] = links;
  else monitors_.erase(msg.line);
  if (r.wrote) e->dirty = true;
  perform(now, msg, op, MemoryType::IncOc, r.value, r.success);

  const Tick d = lat_.l2_proc + (fill ? lat_.dram_access : 0);
  Message reply;
  reply.kind = is_store(op) ? MessageKind::IncOcStoreAck : MessageKind::IncOcData;
  reply.core = msg.core;
  reply.line = msg.line;
  reply.req = msg.req;
  reply.word = msg.word;
  reply.value = r.value;
  reply.success = r.success;
  res.actions.push_back(TimedAction::to_l1(std::move(reply), d));
  if (fill) {
    waits_[msg.line].txn = Transaction{Transaction::Kind::Fill, msg, 0, std::nullopt};
    res.actions.push_back(TimedAction::unblock(msg.line, d));
  }
  log(now, msg.line, to_string(msg.kind), e, before);
  return res;
}

HandlerResult L2Directory::handle_uncacheable_request(const Message& msg, Tick now) {
  HandlerResult res;
  res.occupancy = lat_.l2_proc;
  if (find(msg.line))
    throw SimError(ErrorKind::TypeMismatch,
                   "uncacheable access to a line resident in L2: " + hex(msg.line));
  const CoreOp op = op_of(msg.kind);
  LineData data = dram_.read(msg.line);
  std::uint64_t links = monitors(msg.line);
  const auto r = apply_access(data, links, msg.core, op, msg.word, msg.value);
  if (links) monitors_[msg.line] = links;
  else monitors_.erase(msg.line);
  if (r.wrote) dram_.write(msg.line, data);
  perform(now, msg, op, MemoryType::Uncacheable, r.value, r.success);

  Message reply;
  reply.kind = is_store(op) ? MessageKind::IncOcStoreAck : MessageKind::IncOcData;
  reply.core = msg.core;
  reply.line = msg.line;
  reply.req = msg.req;
  reply.value = r.value;
  reply.success = r.success;
  res.actions.push_back(
      TimedAction::to_l1(std::move(reply), lat_.l2_proc + lat_.dram_access));
  if (observer_)
    observer_->on_transition(now, "l2", msg.line, to_string(msg.kind), "NP", "NP");
  return res;
}

void L2Directory::absorb_flush(LineAddr line, CoreId core, const std::optional<LineData>& dirty) {
  DirectoryEntry* e = find_mut(line);
  if (!e) violation("inclusion broken during flush of " + hex(line));
  if (dirty) {
    e->data = *dirty;
    e->dirty = true;
  }
  if (e->owner == core) e->owner.reset();
  e->sharers &= ~bit(core);
}

void L2Directory::flush_line(LineAddr line) {
  DirectoryEntry* e = find_mut(line);
  if (!e) return;
  if (e->has_l1_copies() || line_busy(line)) violation("flush of a line still in use: " + hex(line));
  if (e->dirty) dram_.write(line, e->data);
  remove(line);
}

}  // namespace incoc
