#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <cmath>
#include <random>

#include "incoc/engine.hpp"
#include "incoc/workloads.hpp"

using namespace incoc;

namespace {

ParseError parse_error(std::string_view text) {
  try {
    parse_trace(text);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("trace parsed");
  throw;
}

std::vector<Trace> all_generated() {
  std::vector<Trace> out;
  for (auto type : {MemoryType::NormalCacheable, MemoryType::IncOc, MemoryType::Uncacheable}) {
    out.push_back(gen_dirty_miss(type));
    out.push_back(gen_dirty_miss(type, 1));
    out.push_back(gen_write_storm(4, type));
    for (auto kind : {MicroKind::Load, MicroKind::Store, MicroKind::Lock})
      for (auto sharing : {Sharing::Shared, Sharing::Private}) {
        MicroParams p;
        p.kind = kind;
        p.sharing = sharing;
        p.mem_type = type;
        p.iters = 90;
        out.push_back(gen_micro(p));
      }
  }
  for (auto typing : {Typing::Normal, Typing::Selective, Typing::Blind}) {
    PipelineParams p;
    p.typing = typing;
    p.iters = 2;
    out.push_back(gen_producer_consumer(p));
  }
  return out;
}

double mean_of(const Report& r) { return summarize(r).mean; }

}  // namespace

TEST_CASE("minimal trace") {
  const Trace t = parse_trace("#region 0x1000 0x1000 incoc\n0,0,W,0x1000,0xAB\n");
  REQUIRE(t.regions.size() == 1);
  CHECK(t.regions[0] == TraceRegion{0x1000, 0x1000, MemoryType::IncOc});
  REQUIRE(t.records.size() == 1);
  CHECK(t.records[0] == TraceRecord{0, 0, CoreOp::Write, 0x1000, 0xAB});
}

TEST_CASE("records outside any region are Normal") {
  const Trace t = parse_trace("# a comment\n0,0,R,0x1000\n");
  MemoryModel m(4ull << 30, 4096);
  for (const auto& r : t.regions) m.map_region(r.base, r.length, r.mem_type);
  CHECK(m.resolve_type(t.records[0].address) == MemoryType::NormalCacheable);
}

TEST_CASE("error kinds and positions") {
  auto e = parse_error("0,0,R,0x1000\n0,0,Q,0x1000\n");
  CHECK(e.kind() == ErrorKind::Syntax);
  CHECK(e.line() == 2);
  CHECK(e.column() == 5);

  e = parse_error("#region 0x1000 0x1000 sticky\n");
  CHECK(e.kind() == ErrorKind::Syntax);
  CHECK(e.line() == 1);

  e = parse_error("0,0,R,0x1000,0x5\n");
  CHECK(e.kind() == ErrorKind::Syntax);

  e = parse_error("0,0,R,0x100000000\n");
  CHECK(e.kind() == ErrorKind::Range);

  e = parse_error("0,0,R,0x1003\n");
  CHECK(e.kind() == ErrorKind::Range);

  e = parse_error("0,64,R,0x1000\n");
  CHECK(e.kind() == ErrorKind::Range);
}

TEST_CASE("order errors agree with a reference per-core scan") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    std::map<CoreId, Tick> last;
    std::optional<std::size_t> first_bad;
    const std::size_t n = 1 + rng() % 30;
    for (std::size_t i = 0; i < n; ++i) {
      const CoreId c = rng() % 3;
      const Tick at = rng() % 200;
      text += std::to_string(at) + "," + std::to_string(c) + ",R,0x1000\n";
      if (!first_bad && last.count(c) && at < last[c]) first_bad = i + 1;
      last[c] = std::max(last[c], at);
    }
    if (!first_bad) {
      CHECK_NOTHROW(parse_trace(text));
      continue;
    }
    const auto e = parse_error(text);
    CHECK(e.kind() == ErrorKind::Order);
    CHECK(e.line() == *first_bad);
  }
}

TEST_CASE("render and parse round-trip every generator") {
  for (const Trace& t : all_generated()) CHECK(parse_trace(render_trace(t)) == t);
}

TEST_CASE("generators are deterministic and stay inside their regions") {
  const auto a = all_generated();
  const auto b = all_generated();
  CHECK(a == b);
  for (const Trace& t : a) {
    for (const auto& r : t.records) {
      const bool inside = std::any_of(t.regions.begin(), t.regions.end(), [&](const TraceRegion& g) {
        return r.address >= g.base && r.address < g.base + g.length;
      });
      CHECK(inside);
    }
  }
}

TEST_CASE("dirty miss") {
  CHECK(summarize(run(RunConfig{}, gen_dirty_miss(MemoryType::NormalCacheable))).all_complete == 729);
  CHECK(summarize(run(RunConfig{}, gen_dirty_miss(MemoryType::IncOc))).all_complete == 349);
  const Report one = run(RunConfig{}, gen_dirty_miss(MemoryType::NormalCacheable, 1));
  CHECK(summarize(one).all_complete == RunConfig{}.latency.l1_proc);
}

TEST_CASE("write storm against the dirty-miss cross-check") {
  RunConfig cfg;
  cfg.n_cores = 5;
  for (auto type : {MemoryType::NormalCacheable, MemoryType::IncOc}) {
    const Tick dirty = summarize(run(cfg, gen_dirty_miss(type))).all_complete;
    CHECK(summarize(run(cfg, gen_write_storm(2, type))).first_complete == dirty);
    const auto s1 = summarize(run(cfg, gen_write_storm(1, type)));
    CHECK(s1.first_complete == dirty);
    CHECK(s1.all_complete == dirty);
  }
  const Tick n4 = summarize(run(cfg, gen_write_storm(4, MemoryType::NormalCacheable))).all_complete;
  const Tick i4 = summarize(run(cfg, gen_write_storm(4, MemoryType::IncOc))).all_complete;
  CHECK(double(i4) <= 0.30 * double(n4));
}

TEST_CASE("warm private Normal loads all hit") {
  MicroParams p;
  p.kind = MicroKind::Load;
  p.sharing = Sharing::Private;
  p.iters = 500;
  const Report r = run(RunConfig{}, gen_micro(p));
  CHECK(r.per_request.size() == 500u * p.n_cores);
  for (const auto& row : r.per_request) CHECK(row.latency() == 4);
}

TEST_CASE("micro directions on shared data") {
  const auto mean = [](MicroKind k, MemoryType t) {
    MicroParams p;
    p.kind = k;
    p.mem_type = t;
    p.iters = 600;
    return mean_of(run(RunConfig{}, gen_micro(p)));
  };
  CHECK(mean(MicroKind::Load, MemoryType::IncOc) > mean(MicroKind::Load, MemoryType::NormalCacheable));
  CHECK(mean(MicroKind::Store, MemoryType::IncOc) > mean(MicroKind::Store, MemoryType::NormalCacheable));
  CHECK(mean(MicroKind::Lock, MemoryType::IncOc) < mean(MicroKind::Lock, MemoryType::NormalCacheable));
}

TEST_CASE("pipeline with two stages and one round has one handoff") {
  PipelineParams p;
  p.n_stages = 2;
  p.iters = 1;
  p.payload_lines = 1;
  p.work_ops = 0;
  const Trace t = gen_producer_consumer(p);
  std::size_t buffer_writes = 0, buffer_reads = 0;
  for (const auto& r : t.records) {
    if (r.inject_at < t.measure_from) continue;
    (r.op == CoreOp::Write ? buffer_writes : buffer_reads)++;
  }
  CHECK(buffer_writes == 1);
  CHECK(buffer_reads == 1);
  const Report rep = run(RunConfig{}, t, true);
  CHECK(rep.per_request.size() == 2);
}

TEST_CASE("selective typing keeps handoff write latency constant across rounds") {
  PipelineParams p;
  const Trace t = gen_producer_consumer(p);
  RunConfig cfg;
  const Report r = run(cfg, t);
  std::map<Tick, Tick> worst;  // round -> worst buffer write latency
  for (const auto& row : r.per_request)
    if (row.op == CoreOp::Write && row.mem_type == MemoryType::IncOc) {
      auto& w = worst[row.issue / p.period];  // round r runs in period r + 1
      w = std::max(w, row.latency());
    }
  REQUIRE(worst.size() == p.iters);
  Tick lo = ~Tick{0}, hi = 0;
  for (const auto& [round, w] : worst) {
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  CHECK(hi - lo == 0);
}

TEST_CASE("blind typing is slower than selective, selective near Normal") {
  const auto total = [](Typing ty) {
    PipelineParams p;
    p.typing = ty;
    return double(summarize(run(RunConfig{}, gen_producer_consumer(p))).all_complete);
  };
  const double normal = total(Typing::Normal), selective = total(Typing::Selective),
               blind = total(Typing::Blind);
  CHECK(blind > selective);
  CHECK(std::abs(selective - normal) <= 0.05 * normal);
}
