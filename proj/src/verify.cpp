#include "incoc/verify.hpp"

#include <algorithm>
#include <set>

namespace incoc {

namespace {

constexpr Addr kPoolBase = 0x400000;
constexpr std::uint64_t kSetStride = 128 * 1024;  // same L1 and L2 set under defaults
constexpr Addr kLockPage = 0x200000;

}  // namespace

Trace random_trace(std::mt19937_64& rng) {
  auto pick = [&](std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
  };
  Trace t;
  const auto n_cores = static_cast<CoreId>(pick(2, 4));

  // Lines crowd a handful of sets so both levels evict.
  const std::size_t n_lines = pick(1, 64);
  std::set<Addr> chosen;
  while (chosen.size() < n_lines) chosen.insert(kPoolBase + pick(0, 1) * 64 + pick(0, 31) * kSetStride);
  std::vector<Addr> lines(chosen.begin(), chosen.end());

  std::map<Addr, MemoryType> pages;
  for (Addr a : lines) {
    const Addr page = a / 4096 * 4096;
    if (pages.count(page)) continue;
    const auto r = pick(0, 9);
    pages[page] = r < 6 ? MemoryType::NormalCacheable
                        : r < 9 ? MemoryType::IncOc : MemoryType::Uncacheable;
  }
  const auto lock_type = pick(0, 2) == 0 ? MemoryType::NormalCacheable : MemoryType::IncOc;
  t.regions.push_back({kLockPage, 4096, lock_type});
  for (const auto& [page, type] : pages) t.regions.push_back({page, 4096, type});

  std::vector<Tick> clock(n_cores, 0);
  std::vector<std::optional<Addr>> last_lx(n_cores);
  const std::size_t n_ops = pick(10, 160);
  for (std::size_t i = 0; i < n_ops; ++i) {
    const auto c = static_cast<CoreId>(pick(0, n_cores - 1));
    clock[c] += pick(0, 3) == 0 ? 0 : pick(1, 600);
    const auto roll = pick(0, 99);
    if (roll < 6) {
      const Addr lock = kLockPage + 8 * pick(0, 1);
      t.records.push_back({clock[c], c, CoreOp::LoadExcl, lock, std::nullopt});
      t.records.push_back({clock[c], c, CoreOp::StoreExcl, lock, 1});
      t.records.push_back({clock[c], c, CoreOp::Write, lock, 0});
      last_lx[c].reset();
      continue;
    }
    TraceRecord r;
    r.inject_at = clock[c];
    r.core = c;
    r.address = lines[pick(0, lines.size() - 1)] + 8 * pick(0, 7);
    if (roll < 45) r.op = CoreOp::Read;
    else if (roll < 80) r.op = CoreOp::Write;
    else if (roll < 90) r.op = CoreOp::LoadExcl;
    else r.op = CoreOp::StoreExcl;
    // An SX right after an LX to the same word would form a spin pair.
    if (r.op == CoreOp::StoreExcl && last_lx[c] == r.address) r.op = CoreOp::Write;
    if (is_store(r.op)) r.value = rng();
    last_lx[c] = r.op == CoreOp::LoadExcl ? std::optional<Addr>(r.address) : std::nullopt;
    t.records.push_back(r);
  }
  return t;
}

namespace {

struct Violations {
  std::map<std::string, std::string> found;
  void add(const char* check, const std::string& detail) { found.try_emplace(check, detail); }
};

void check_tick(Tick tick, const Simulator& sim, Violations& v) {
  const auto& cfg = sim.config();
  const auto& l2 = sim.l2();
  const auto& mem = sim.memory();
  const auto at = " at tick " + std::to_string(tick);

  std::map<LineAddr, std::pair<int, int>> held;  // line -> (M count, S count)
  for (CoreId c = 0; c < cfg.n_cores; ++c) {
    sim.l1(c).for_each_line([&](LineAddr line, MsiState st, const LineData&) {
      const MemoryType type = mem.resolve_type(line * cfg.l1.line_size);
      if (type != MemoryType::NormalCacheable)
        v.add(kCheckIncOc, "core " + std::to_string(c) + " caches " + to_string(type) +
                               " line " + hex(line) + at);
      if (st != MsiState::S && st != MsiState::M) return;
      auto& h = held[line];
      (st == MsiState::M ? h.first : h.second)++;
      const auto* e = l2.find(line);
      if (!e) {
        v.add(kCheckInclusion, "line " + hex(line) + " in L1 of core " + std::to_string(c) +
                                   " but not in L2" + at);
        return;
      }
      const bool listed = st == MsiState::M ? e->owner == c : e->has_sharer(c) || e->owner == c;
      if (!listed)
        v.add(kCheckDirectory, "core " + std::to_string(c) + " holds " + hex(line) + " in " +
                                   to_string(st) + " unknown to the directory" + at);
    });
  }
  for (const auto& [line, h] : held)
    if (h.first > 1 || (h.first == 1 && h.second > 0))
      v.add(kCheckSwmr, "line " + hex(line) + " has " + std::to_string(h.first) + " M and " +
                            std::to_string(h.second) + " S copies" + at);

  l2.for_each_entry([&](const DirectoryEntry& e) {
    const MemoryType type = mem.resolve_type(e.tag * cfg.l1.line_size);
    const bool incoc_kind = e.kind == LineKind::IncOc;
    if (type == MemoryType::Uncacheable || incoc_kind != (type == MemoryType::IncOc))
      v.add(kCheckIncOc, "L2 holds " + hex(e.tag) + " with the wrong kind for a " +
                             to_string(type) + " page" + at);
    if (incoc_kind && e.has_l1_copies())
      v.add(kCheckIncOc, "INC-OC line " + hex(e.tag) + " has L1 copies recorded" + at);
  });
}

// Replays performs in completion order against a flat memory and a flat
// monitor table.
void check_values(const Simulator& sim, Violations& v) {
  auto performs = sim.performs();
  std::sort(performs.begin(), performs.end(), [](const PerformRecord& a, const PerformRecord& b) {
    return a.complete != b.complete ? a.complete < b.complete : a.seq < b.seq;
  });
  const std::uint32_t words = sim.config().l1.line_size / 8;
  std::map<LineAddr, std::vector<std::uint64_t>> flat;
  std::map<LineAddr, std::uint64_t> links;
  const auto word_ref = [&](LineAddr line, std::uint32_t w) -> std::uint64_t& {
    auto& l = flat[line];
    if (l.empty()) l.assign(words, 0);
    return l[w];
  };
  for (const auto& p : performs) {
    const std::string who = "core " + std::to_string(p.core) + " " + to_string(p.op) + " " +
                            hex(p.line) + "[" + std::to_string(p.word) + "] at tick " +
                            std::to_string(p.tick);
    auto& cell = word_ref(p.line, p.word);
    switch (p.op) {
      case CoreOp::Read:
      case CoreOp::LoadExcl:
        if (p.value != cell)
          v.add(kCheckValue, who + " read " + hex(p.value) + ", reference has " + hex(cell));
        if (p.op == CoreOp::LoadExcl) links[p.line] |= std::uint64_t{1} << p.core;
        break;
      case CoreOp::StoreExcl: {
        const bool expect = (links[p.line] >> p.core) & 1u;
        if (p.success != expect)
          v.add(kCheckMonitor, who + (p.success ? " succeeded" : " failed") +
                                   ", reference monitor says " + (expect ? "success" : "failure"));
        if (!p.success) break;
        cell = p.value;
        links[p.line] = 0;
        break;
      }
      case CoreOp::Write:
        cell = p.value;
        links[p.line] = 0;
        break;
    }
  }

  const auto image = sim.final_memory();
  for (const auto& [line, ws] : flat) {
    auto it = image.find(line);
    for (std::uint32_t w = 0; w < words; ++w) {
      const std::uint64_t got = it == image.end() ? 0 : it->second.words[w];
      if (got != ws[w]) {
        v.add(kCheckMemory, "final " + hex(line) + "[" + std::to_string(w) + "] = " + hex(got) +
                                ", reference " + hex(ws[w]));
        return;
      }
    }
  }
  for (const auto& [line, d] : image) {
    if (flat.count(line)) continue;
    for (auto w : d.words)
      if (w != 0) {
        v.add(kCheckMemory, "final " + hex(line) + " holds data never written");
        return;
      }
  }
}

}  // namespace

std::map<std::string, std::string> check_trace(const RunConfig& cfg, const Trace& trace,
                                               std::string* log_out) {
  Violations v;
  std::string json, log;
  {
    SimOptions opts;
    opts.keep_log = true;
    opts.on_tick_end = [&](Tick t, const Simulator& s) { check_tick(t, s, v); };
    Simulator sim(cfg, trace, opts);
    try {
      const Report rep = sim.run();
      for (const auto& row : rep.per_request)
        if (row.complete < row.issue) v.add(kCheckValue, "request completes before issue");
      json = to_json(rep);
      check_values(sim, v);
    } catch (const SimError& e) {
      v.add(kCheckFault, std::string(to_string(e.kind())) + ": " + e.what());
    }
    log = sim.event_log();
  }
  if (!v.found.count(kCheckFault)) {
    try {
      SimOptions opts;
      opts.keep_log = true;
      Simulator again(cfg, trace, opts);
      const Report rep = again.run();
      if (to_json(rep) != json || again.event_log() != log)
        v.add(kCheckDeterminism, "repeat run produced different report or log bytes");
    } catch (const SimError& e) {
      v.add(kCheckDeterminism, std::string("repeat run failed: ") + e.what());
    }
  }
  if (log_out) *log_out = std::move(log);
  return v.found;
}

VerifyResult verify(const RunConfig& base, std::uint64_t n_traces, std::uint64_t seed) {
  VerifyResult res;
  std::mt19937_64 rng(seed);
  for (std::uint64_t i = 0; i < n_traces; ++i) {
    Trace t = random_trace(rng);
    RunConfig cfg = base;
    cfg.n_cores = std::max(cfg.n_cores, t.cores_used());
    std::string log;
    const auto found = check_trace(cfg, t, &log);
    ++res.traces;
    for (const auto& [check, detail] : found) {
      ++res.violations[check];
      if (!res.first_failure)
        res.first_failure = VerifyFailure{i, check, detail, render_trace(t), log};
    }
  }
  return res;
}

}  // namespace incoc
