#include "incoc/l1_cache.hpp"

#include <algorithm>
#include <string>

namespace incoc {

namespace {

[[noreturn]] void violation(const std::string& what) {
  throw SimError(ErrorKind::ProtocolViolation, what);
}

MessageKind forwarded_kind(MemoryType t, CoreOp op) {
  const bool incoc = t == MemoryType::IncOc;
  switch (op) {
    case CoreOp::Read: return incoc ? MessageKind::IncOcLoad : MessageKind::UncLoad;
    case CoreOp::Write: return incoc ? MessageKind::IncOcStore : MessageKind::UncStore;
    case CoreOp::LoadExcl: return incoc ? MessageKind::IncOcLoadExcl : MessageKind::UncLoadExcl;
    case CoreOp::StoreExcl:
      return incoc ? MessageKind::IncOcStoreExcl : MessageKind::UncStoreExcl;
  }
  return MessageKind::IncOcLoad;
}

Message make_message(MessageKind kind, CoreId core, LineAddr line, ReqId req) {
  Message m;
  m.kind = kind;
  m.core = core;
  m.line = line;
  m.req = req;
  return m;
}

}  // namespace

const char* to_string(CoreOp op) {
  switch (op) {
    case CoreOp::Read: return "R";
    case CoreOp::Write: return "W";
    case CoreOp::LoadExcl: return "LX";
    case CoreOp::StoreExcl: return "SX";
  }
  return "?";
}

std::optional<CoreOp> parse_core_op(std::string_view s) {
  if (s == "R") return CoreOp::Read;
  if (s == "W") return CoreOp::Write;
  if (s == "LX") return CoreOp::LoadExcl;
  if (s == "SX") return CoreOp::StoreExcl;
  return std::nullopt;
}

L1Cache::L1Cache(CoreId id, const RunConfig& cfg, SimObserver* observer)
    : id_(id),
      line_size_(cfg.l1.line_size),
      sets_(cfg.l1.sets()),
      ways_(cfg.l1.associativity),
      lat_(cfg.latency),
      policy_(cfg.remote_load_policy),
      observer_(observer),
      lines_(std::size_t{sets_} * ways_) {}

CacheLine* L1Cache::find(LineAddr line) {
  auto it = index_.find(line);
  return it == index_.end() ? nullptr : &lines_[it->second];
}

const CacheLine* L1Cache::find(LineAddr line) const {
  auto it = index_.find(line);
  return it == index_.end() ? nullptr : &lines_[it->second];
}

std::optional<MsiState> L1Cache::state_of(LineAddr line) const {
  if (const auto* l = find(line)) return l->state;
  return std::nullopt;
}

const LineData* L1Cache::data_of(LineAddr line) const {
  const auto* l = find(line);
  return l ? &l->data : nullptr;
}

const LineData* L1Cache::writeback_data(LineAddr line) const {
  auto it = writeback_.find(line);
  return it == writeback_.end() ? nullptr : &it->second;
}

void L1Cache::for_each_line(
    const std::function<void(LineAddr, MsiState, const LineData&)>& fn) const {
  for (const auto& [tag, slot] : index_) fn(tag, lines_[slot].state, lines_[slot].data);
  for (const auto& [tag, data] : writeback_) fn(tag, MsiState::MI_WB, data);
}

std::vector<LineAddr> L1Cache::lru_order(std::uint32_t set_index) const {
  std::vector<const CacheLine*> v;
  for (std::uint32_t w = 0; w < ways_; ++w) {
    const auto& l = lines_[std::size_t{set_index} * ways_ + w];
    if (l.state == MsiState::S || l.state == MsiState::M) v.push_back(&l);
  }
  std::sort(v.begin(), v.end(),
            [](const CacheLine* a, const CacheLine* b) { return a->lru_stamp < b->lru_stamp; });
  std::vector<LineAddr> out;
  for (const auto* l : v) out.push_back(l->tag);
  return out;
}

std::optional<LineData> L1Cache::flush_line(LineAddr line) {
  auto* l = find(line);
  if (!l) return std::nullopt;
  if (!is_stable(l->state)) violation("flush of a line in a transient state");
  std::optional<LineData> dirty;
  if (l->state == MsiState::M) dirty = l->data;
  l->state = MsiState::I;
  index_.erase(line);
  return dirty;
}

void L1Cache::log(Tick t, LineAddr line, CoherenceEvent ev, MsiState from, MsiState to) const {
  if (observer_)
    observer_->on_transition(t, "l1." + std::to_string(id_), line, to_string(ev),
                             to_string(from), to_string(to));
}

void L1Cache::perform(Tick t, const MemoryRequest& req, LineAddr line, std::uint32_t word,
                      std::uint64_t value, bool success) const {
  if (!observer_) return;
  PerformRecord r;
  r.tick = t;
  r.core = id_;
  r.req = req.id;
  r.op = req.op;
  r.mem_type = req.mem_type;
  r.line = line;
  r.word = word;
  r.value = value;
  r.success = success;
  observer_->on_perform(r);
}

std::optional<Message> L1Cache::evict_victim(std::uint32_t set_index) {
  CacheLine* victim = nullptr;
  for (std::uint32_t w = 0; w < ways_; ++w) {
    auto& l = lines_[std::size_t{set_index} * ways_ + w];
    if (l.state == MsiState::I) return std::nullopt;
    if ((l.state == MsiState::S || l.state == MsiState::M) &&
        (!victim || l.lru_stamp < victim->lru_stamp))
      victim = &l;
  }
  if (!victim) violation("L1 set " + std::to_string(set_index) + " has no evictable way");

  const auto out = l1_next(victim->state, CoherenceEvent::SelfEvict, policy_);
  Message m;
  m.kind = out.emit.front();
  m.core = id_;
  m.line = victim->tag;
  if (out.writeback) {
    m.data = victim->data;
    writeback_[victim->tag] = victim->data;
  }
  index_.erase(victim->tag);
  victim->state = MsiState::I;
  return m;
}

CacheLine& L1Cache::allocate(LineAddr line, MemoryType t) {
  if (t != MemoryType::NormalCacheable)
    violation("L1 allocation for a " + std::string(to_string(t)) + " line " + hex(line));
  const auto set = set_of(line);
  for (std::uint32_t w = 0; w < ways_; ++w) {
    const std::uint32_t slot = set * ways_ + w;
    auto& l = lines_[slot];
    if (l.state != MsiState::I) continue;
    l.tag = line;
    l.data = LineData{};
    index_[line] = slot;
    touch(l);
    return l;
  }
  violation("L1 allocation with a full set");
}

HandlerResult L1Cache::handle_core_request(const MemoryRequest& req, Tick now) {
  if (busy()) violation("core " + std::to_string(id_) + " issued while a request is outstanding");
  if (req.mem_type == MemoryType::NormalCacheable) return handle_normal(req, now);
  return handle_forwarded(req, now);
}

HandlerResult L1Cache::handle_forwarded(const MemoryRequest& req, Tick now) {
  HandlerResult res;
  res.occupancy = lat_.l1_proc;
  Message m;
  m.kind = forwarded_kind(req.mem_type, req.op);
  m.core = id_;
  m.line = line_of(req.address);
  m.req = req.id;
  m.word = word_of(req.address);
  m.value = req.value;
  if (observer_)
    observer_->on_transition(now + lat_.l1_proc, "l1." + std::to_string(id_), m.line,
                             to_string(m.kind), "I", "I");
  pending_ = req;
  res.actions.push_back(TimedAction::to_l2(std::move(m), lat_.l1_proc));
  return res;
}

HandlerResult L1Cache::handle_normal(const MemoryRequest& req, Tick now) {
  HandlerResult res;
  const Tick d = lat_.l1_proc;
  res.occupancy = d;
  const LineAddr line = line_of(req.address);
  const std::uint32_t word = word_of(req.address);

  if (in_writeback(line)) {
    deferred_ = req;
    return res;
  }

  CacheLine* l = find(line);
  const bool store = is_store(req.op);
  const CoherenceEvent ev = store ? CoherenceEvent::SelfStore : CoherenceEvent::SelfLoad;
  const auto respond = [&](std::uint64_t value, bool success) {
    res.actions.push_back(TimedAction::to_core({req.id, id_, value, success}, d));
  };

  if (req.op == CoreOp::StoreExcl) {
    auto link = links_.find(line);
    const bool stale = link != links_.end() && l &&
                       (l->state == MsiState::S || l->state == MsiState::M) &&
                       l->data.version != link->second;
    if (link == links_.end() || stale) {
      perform(now, req, line, word, req.value, false);
      respond(req.value, false);
      return res;
    }
  }

  const MsiState cur = l ? l->state : MsiState::I;
  switch (classify(cur, store ? AccessOp::Store : AccessOp::Load, l != nullptr)) {
    case AccessClass::Hit: {
      l1_next(cur, ev, policy_);  // validates the pair
      touch(*l);
      log(now + d, line, ev, cur, cur);
      if (store) {
        l->data.words[word] = req.value;
        ++l->data.version;
        perform(now, req, line, word, req.value, true);
        respond(req.value, true);
      } else {
        if (req.op == CoreOp::LoadExcl) links_[line] = l->data.version;
        perform(now, req, line, word, l->data.words[word], true);
        respond(l->data.words[word], true);
      }
      return res;
    }
    case AccessClass::CoherenceMiss: {
      const auto out = l1_next(cur, ev, policy_);
      l->state = out.next;
      touch(*l);
      log(now + d, line, ev, cur, out.next);
      pending_ = req;
      Message m = make_message(out.emit.front(), id_, line, req.id);
      res.actions.push_back(TimedAction::to_l2(std::move(m), d));
      return res;
    }
    case AccessClass::Miss: break;
  }

  if (auto put = evict_victim(set_of(line))) {
    const MsiState from = put->kind == MessageKind::PutM ? MsiState::M : MsiState::S;
    const MsiState to = put->kind == MessageKind::PutM ? MsiState::MI_WB : MsiState::I;
    log(now + d, put->line, CoherenceEvent::SelfEvict, from, to);
    res.actions.push_back(TimedAction::to_l2(std::move(*put), d));
  }
  CacheLine& fresh = allocate(line, req.mem_type);
  const auto out = l1_next(MsiState::I, ev, policy_);
  fresh.state = out.next;
  log(now + d, line, ev, MsiState::I, out.next);
  pending_ = req;
  Message m = make_message(out.emit.front(), id_, line, req.id);
  res.actions.push_back(TimedAction::to_l2(std::move(m), d));
  return res;
}

HandlerResult L1Cache::complete_fill(const Message& msg, Tick now) {
  HandlerResult res;
  const Tick d = lat_.l1_proc;
  res.occupancy = d;
  CacheLine* l = find(msg.line);
  if (!pending_ || !l || line_of(pending_->address) != msg.line)
    violation(std::string(to_string(msg.kind)) + " for " + hex(msg.line) +
              " with no matching outstanding request at core " + std::to_string(id_));
  const bool want_m = is_store(pending_->op);
  if ((msg.kind == MessageKind::DataM) != want_m)
    violation(std::string(to_string(msg.kind)) + " does not match the outstanding request");
  if (!msg.data) violation("data response without payload");

  const MsiState cur = l->state;
  const auto out = l1_next(cur, CoherenceEvent::DataResponse, policy_);
  l->state = out.next;
  l->data = *msg.data;
  touch(*l);
  log(now, msg.line, CoherenceEvent::DataResponse, cur, out.next);

  const MemoryRequest req = *pending_;
  pending_.reset();
  const std::uint32_t word = word_of(req.address);
  CoreResponse r{req.id, id_, 0, true};
  switch (req.op) {
    case CoreOp::Read:
    case CoreOp::LoadExcl:
      if (req.op == CoreOp::LoadExcl) links_[msg.line] = l->data.version;
      r.value = l->data.words[word];
      break;
    case CoreOp::StoreExcl: {
      auto link = links_.find(msg.line);
      r.success = link != links_.end() && link->second == l->data.version;
      r.value = req.value;
      if (r.success) {
        l->data.words[word] = req.value;
        ++l->data.version;
      }
      break;
    }
    case CoreOp::Write:
      l->data.words[word] = req.value;
      ++l->data.version;
      r.value = req.value;
      break;
  }
  perform(now, req, msg.line, word, r.value, r.success);
  res.actions.push_back(TimedAction::to_core(r, d));
  return res;
}

HandlerResult L1Cache::handle_inv(const Message& msg, Tick now) {
  HandlerResult res;
  const Tick d = lat_.l1_proc;
  res.occupancy = d;
  const CoherenceEvent ev = msg.downgrade ? CoherenceEvent::OtherLoad : CoherenceEvent::OtherStore;
  Message reply = make_message(MessageKind::InvAck, id_, msg.line, msg.req);

  if (auto wb = writeback_.find(msg.line); wb != writeback_.end()) {
    const auto out = l1_next(MsiState::MI_WB, ev, policy_);
    reply.kind = out.emit.front();
    reply.data = wb->second;
    log(now + d, msg.line, ev, MsiState::MI_WB, out.next);
    res.actions.push_back(TimedAction::to_l2(std::move(reply), d));
    return res;
  }

  CacheLine* l = find(msg.line);
  const MsiState cur = l ? l->state : MsiState::I;
  const auto out = l1_next(cur, ev, policy_);
  reply.kind = out.emit.front();
  if (out.writeback) reply.data = l->data;
  if (l) {
    l->state = out.next;
    if (out.next == MsiState::I) index_.erase(msg.line);
  }
  log(now + d, msg.line, ev, cur, out.next);
  res.actions.push_back(TimedAction::to_l2(std::move(reply), d));
  return res;
}

HandlerResult L1Cache::handle_l2_message(const Message& msg, Tick now) {
  if (msg.core != id_) violation("message for core " + std::to_string(msg.core) +
                                 " delivered to core " + std::to_string(id_));
  switch (msg.kind) {
    case MessageKind::DataS:
    case MessageKind::DataM:
      return complete_fill(msg, now);
    case MessageKind::Inv:
      return handle_inv(msg, now);
    case MessageKind::WbAck: {
      if (!writeback_.count(msg.line)) violation("WbAck without a pending writeback");
      l1_next(MsiState::MI_WB, CoherenceEvent::WbAck, policy_);
      writeback_.erase(msg.line);
      log(now, msg.line, CoherenceEvent::WbAck, MsiState::MI_WB, MsiState::I);
      if (deferred_ && line_of(deferred_->address) == msg.line) {
        const MemoryRequest req = *deferred_;
        deferred_.reset();
        return handle_normal(req, now);
      }
      return {};
    }
    case MessageKind::IncOcData:
    case MessageKind::IncOcStoreAck: {
      if (!pending_ || pending_->id != msg.req)
        violation(std::string(to_string(msg.kind)) + " with no matching request");
      const MemoryRequest req = *pending_;
      pending_.reset();
      HandlerResult res;
      const std::uint64_t value = msg.kind == MessageKind::IncOcData ? msg.value : req.value;
      res.actions.push_back(TimedAction::to_core({req.id, id_, value, msg.success}, 0));
      return res;
    }
    default:
      violation(std::string("L1 cannot handle ") + to_string(msg.kind));
  }
}

}  // namespace incoc
