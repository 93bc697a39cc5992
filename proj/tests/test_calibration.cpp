#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <optional>
#include <tuple>

#include "incoc/engine.hpp"

using namespace incoc;

namespace {

// Hop sums of the two scenarios, written out by hand from the message flow.
struct Timing {
  Tick l1, up, l2, down, queue;

  // L1 action, hop up, recall Inv down, FwdData up (after the owner's L1
  // pass), queue_issue to resume, DataM down, L1 fill pass.
  Tick normal_dirty() const { return 2 * (l1 + up) + l1 + 2 * (l2 + down) + queue; }
  Tick incoc_dirty() const { return l1 + up + l2 + down; }
  // Four simultaneous stores; the L2 serves one per l2 pass.
  Tick incoc_storm() const { return incoc_dirty() + 3 * l2; }
  // Each later GetM waits for the previous owner to be recalled.
  Tick normal_storm() const { return normal_dirty() + 3 * (2 * queue + 2 * l2 + down + l1 + up); }

  // The storm sum is exact only while the L2 drains the three queued GetMs
  // before the first recall returns, and the next Inv reaches a new owner
  // after its fill pass. Outside this the L2 or L1 queues add delay.
  bool storm_exact() const { return 3 * l2 <= down + up + l1 && l2 + queue >= l1; }
};

struct Pick {
  Tick l2, down, queue;
};

// The selection rule for the shipped defaults.
std::optional<Pick> solve() {
  const Tick l1 = 4, up = 128 - 4;  // the 4 and 128 marks pin these
  std::optional<Pick> best;
  double best_err = 1e9;
  for (Tick l2 = 1; l2 <= 300; ++l2)
    for (Tick down = 1; down <= 300; ++down) {
      const Tick fixed = Timing{l1, up, l2, down, 0}.normal_dirty();
      if (fixed >= 729) continue;
      const Timing t{l1, up, l2, down, 729 - fixed};
      const double dirty = double(t.incoc_dirty()) / double(t.normal_dirty());
      const double storm = double(t.incoc_storm()) / double(t.normal_storm());
      if (!t.storm_exact()) continue;
      if (dirty < 0.40 || dirty > 0.48 || storm > 0.30) continue;
      const double err = std::abs(dirty - 0.48) + std::abs(storm - 0.26);
      if (err < best_err) {
        best_err = err;
        best = Pick{l2, down, t.queue};
      }
    }
  return best;
}

Tick all_complete(const RunConfig& cfg, const Trace& t) { return summarize(run(cfg, t)).all_complete; }

}  // namespace

TEST_CASE("brute-force solve reproduces the default latencies") {
  const auto pick = solve();
  REQUIRE(pick);
  const LatencyConfig d;
  CHECK(d.l1_proc == 4);
  CHECK(d.l1_to_l2_hop == 124);
  CHECK(pick->l2 == d.l2_proc);
  CHECK(pick->down == d.l2_to_l1_hop);
  CHECK(pick->queue == d.queue_issue);
}

TEST_CASE("closed forms agree with the simulator across the search space") {
  const LatencyConfig d;
  for (const auto& [l2, down, queue] :
       {std::tuple<Tick, Tick, Tick>{70, 151, 27}, {68, 154, 25}, {40, 100, 149}, {100, 120, 9},
        {1, 1, 1}, {150, 30, 60}, {1, 300, 2}, {50, 60, 40}}) {
    RunConfig cfg;
    cfg.n_cores = 5;
    cfg.latency.l2_proc = l2;
    cfg.latency.l2_to_l1_hop = down;
    cfg.latency.queue_issue = queue;
    const Timing t{d.l1_proc, d.l1_to_l2_hop, l2, down, queue};
    CAPTURE(l2);
    CAPTURE(down);
    CAPTURE(queue);
    CHECK(all_complete(cfg, gen_dirty_miss(MemoryType::NormalCacheable)) == t.normal_dirty());
    CHECK(all_complete(cfg, gen_dirty_miss(MemoryType::IncOc)) == t.incoc_dirty());
    const Tick storm = all_complete(cfg, gen_write_storm(4, MemoryType::NormalCacheable));
    if (t.storm_exact()) CHECK(storm == t.normal_storm());
    else CHECK(storm > t.normal_storm());
    CHECK(all_complete(cfg, gen_write_storm(4, MemoryType::IncOc)) == t.incoc_storm());
  }
}

TEST_CASE("closed forms over a grid") {
  const LatencyConfig d;
  int exact = 0;
  for (Tick l2 = 1; l2 <= 181; l2 += 30)
    for (Tick down = 1; down <= 301; down += 50)
      for (Tick queue = 1; queue <= 121; queue += 40) {
        RunConfig cfg;
        cfg.n_cores = 5;
        cfg.latency.l2_proc = l2;
        cfg.latency.l2_to_l1_hop = down;
        cfg.latency.queue_issue = queue;
        const Timing t{d.l1_proc, d.l1_to_l2_hop, l2, down, queue};
        CAPTURE(l2);
        CAPTURE(down);
        CAPTURE(queue);
        CHECK(all_complete(cfg, gen_dirty_miss(MemoryType::NormalCacheable)) == t.normal_dirty());
        CHECK(all_complete(cfg, gen_dirty_miss(MemoryType::IncOc)) == t.incoc_dirty());
        CHECK(all_complete(cfg, gen_write_storm(4, MemoryType::IncOc)) == t.incoc_storm());
        const Tick storm = all_complete(cfg, gen_write_storm(4, MemoryType::NormalCacheable));
        if (t.storm_exact()) {
          CHECK(storm == t.normal_storm());
          ++exact;
        } else {
          CHECK(storm >= t.normal_storm());
        }
      }
  CHECK(exact > 50);
}

TEST_CASE("default timeline marks") {
  const auto s = summarize(run(RunConfig{}, gen_dirty_miss(MemoryType::NormalCacheable)));
  CHECK(s.l1_action == Tick{4});
  CHECK(s.l2_receipt == Tick{128});
  CHECK(s.all_complete == 729);
  // The remaining 601 ticks against the 128 it took to reach the L2.
  CHECK(double(729 - 128) / 128 == doctest::Approx(4.7).epsilon(0.01));
}
