#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <bit>
#include <random>
#include <set>

#include "incoc/l2_directory.hpp"

using namespace incoc;
using K = MessageKind;

namespace {

struct Rig {
  RunConfig cfg;
  BackingStore dram{64};
  L2Directory l2;
  Tick now = 0;
  ReqId next_id = 1;

  explicit Rig(RunConfig c) : cfg(c), l2(cfg, dram) {}

  // Delivers one message, closes any transaction windows it opens, and
  // returns what went to the L1s.
  std::vector<TimedAction> send(K kind, CoreId core, LineAddr line,
                                std::optional<LineData> data = std::nullopt,
                                std::uint64_t value = 0, std::uint32_t word = 0) {
    Message m;
    m.kind = kind;
    m.core = core;
    m.line = line;
    m.req = next_id++;
    m.data = std::move(data);
    m.value = value;
    m.word = word;
    return run(l2.handle(m, now));
  }

  std::vector<TimedAction> run(HandlerResult r) {
    std::vector<TimedAction> out;
    for (auto& a : r.actions) {
      if (a.kind == TimedAction::Kind::L2Unblock) {
        auto more = run(l2.handle_unblock(a.line, now));
        out.insert(out.end(), more.begin(), more.end());
      } else if (a.kind == TimedAction::Kind::L2Replay) {
        auto more = run(l2.handle(a.msg, now));
        out.insert(out.end(), more.begin(), more.end());
      } else {
        out.push_back(a);
      }
    }
    return out;
  }
};

RunConfig cfg_with(std::uint32_t n_cores, std::uint64_t l2_size = 2097152, std::uint32_t ways = 16) {
  RunConfig c;
  c.n_cores = n_cores;
  c.l2 = {l2_size, ways, 64};
  return c;
}

std::vector<TimedAction> only(const std::vector<TimedAction>& v, K kind) {
  std::vector<TimedAction> out;
  for (const auto& a : v)
    if (a.msg.kind == kind && a.kind == TimedAction::Kind::ToL1) out.push_back(a);
  return out;
}

LineData line_of(std::uint64_t fill) { return {std::vector<std::uint64_t>(8, fill), 1}; }

}  // namespace

TEST_CASE("GetS miss fills from DRAM and records the sharer") {
  Rig r(cfg_with(2));
  const auto out = r.send(K::GetS, 0, 10);
  const auto data = only(out, K::DataS);
  REQUIRE(data.size() == 1);
  CHECK(data[0].delay == r.cfg.latency.l2_proc + r.cfg.latency.dram_access);
  const auto* e = r.l2.find(10);
  REQUIRE(e);
  CHECK(e->has_sharer(0));
  CHECK_FALSE(e->owner);
}

TEST_CASE("GetS with another sharer and no owner shares without invalidations") {
  Rig r(cfg_with(2));
  r.send(K::GetS, 0, 10);
  const auto out = r.send(K::GetS, 1, 10);
  CHECK(only(out, K::Inv).empty());
  REQUIRE(only(out, K::DataS).size() == 1);
  CHECK(only(out, K::DataS)[0].delay == r.cfg.latency.l2_proc);
  CHECK(r.l2.find(10)->sharers == 0b11);
}

TEST_CASE("GetM invalidates exactly the other sharers and waits for every ack") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint32_t n = 2 + rng() % 7;
    Rig r(cfg_with(n));
    std::set<CoreId> sharers;
    for (CoreId c = 0; c < n; ++c)
      if (rng() % 2) sharers.insert(c);
    if (sharers.empty()) sharers.insert(0);
    for (CoreId c : sharers) r.send(K::GetS, c, 77);
    const CoreId req = static_cast<CoreId>(rng() % n);

    auto out = r.send(K::GetM, req, 77);
    std::set<CoreId> want = sharers;
    want.erase(req);
    std::set<CoreId> got;
    for (const auto& a : only(out, K::Inv)) got.insert(a.msg.core);
    CHECK(got == want);
    if (want.empty()) {
      CHECK(only(out, K::DataM).size() == 1);
      continue;
    }
    CHECK(only(out, K::DataM).empty());
    std::size_t left = want.size();
    for (CoreId c : want) {
      out = r.send(K::InvAck, c, 77);
      --left;
      CHECK(only(out, K::DataM).size() == (left == 0 ? 1u : 0u));
    }
    CHECK(r.l2.find(77)->owner == req);
    CHECK(r.l2.find(77)->sharers == 0);
  }
}

TEST_CASE("dirty miss: recall from the owner, data to the requester") {
  Rig r(cfg_with(2));
  r.send(K::GetM, 1, 20);
  REQUIRE(r.l2.find(20)->owner == 1u);
  auto out = r.send(K::GetM, 0, 20);
  const auto inv = only(out, K::Inv);
  REQUIRE(inv.size() == 1);
  CHECK(inv[0].msg.core == 1);
  CHECK(inv[0].delay == r.cfg.latency.l2_proc);
  CHECK(r.l2.line_busy(20));

  out = r.send(K::FwdData, 1, 20, line_of(0xA));
  const auto data = only(out, K::DataM);
  REQUIRE(data.size() == 1);
  CHECK(data[0].delay == r.cfg.latency.l2_proc + r.cfg.latency.queue_issue);
  CHECK(data[0].msg.data->words[0] == 0xA);
  CHECK(r.l2.find(20)->owner == 0u);
}

TEST_CASE("INC-OC store to a resident line costs the same whoever wrote before") {
  Rig r(cfg_with(4));
  r.send(K::IncOcStore, 0, 30, std::nullopt, 1);
  std::set<Tick> delays;
  std::mt19937_64 rng(9);
  for (int i = 0; i < 50; ++i) {
    const auto out = r.send(i % 2 ? K::IncOcStore : K::IncOcLoad, static_cast<CoreId>(rng() % 4), 30,
                            std::nullopt, rng(), static_cast<std::uint32_t>(rng() % 8));
    REQUIRE(out.size() == 1);
    delays.insert(out[0].delay);
  }
  CHECK(delays == std::set<Tick>{r.cfg.latency.l2_proc});
  CHECK_FALSE(r.l2.find(30)->has_l1_copies());
}

TEST_CASE("INC-OC monitors") {
  Rig r(cfg_with(2));
  r.send(K::IncOcLoadExcl, 0, 40);
  r.send(K::IncOcStore, 1, 40, std::nullopt, 5);
  auto out = r.send(K::IncOcStoreExcl, 0, 40, std::nullopt, 6);
  REQUIRE(out.size() == 1);
  CHECK_FALSE(out[0].msg.success);

  r.send(K::IncOcLoadExcl, 0, 40);
  out = r.send(K::IncOcStoreExcl, 0, 40, std::nullopt, 6);
  CHECK(out[0].msg.success);
  CHECK(r.l2.monitors(40) == 0);
}

TEST_CASE("INC-OC access to a line the L2 holds as Normal is a type mismatch") {
  Rig r(cfg_with(2));
  r.send(K::GetS, 0, 50);
  CHECK_THROWS_AS(r.send(K::IncOcLoad, 1, 50), SimError);
}

TEST_CASE("eviction of an owned victim recalls it and writes it back") {
  Rig r(cfg_with(2, 2 * 64, 2));  // one set, two ways
  r.send(K::GetM, 1, 1);
  r.send(K::GetS, 0, 2);
  r.send(K::GetS, 0, 2);  // line 2 is now the MRU
  auto out = r.send(K::GetS, 0, 3);
  const auto inv = only(out, K::Inv);
  REQUIRE(inv.size() == 1);
  CHECK(inv[0].msg.core == 1);
  CHECK(inv[0].msg.line == 1);
  CHECK(only(out, K::DataS).empty());

  out = r.send(K::FwdData, 1, 1, line_of(0xD));
  CHECK(r.dram.read(1).words[0] == 0xD);
  CHECK_FALSE(r.l2.find(1));
  CHECK(only(out, K::DataS).size() == 1);
  CHECK(r.l2.find(3));
}

TEST_CASE("dirty INC-OC victim goes to DRAM without invalidations") {
  Rig r(cfg_with(2, 64, 1));  // one way
  r.send(K::IncOcStore, 0, 1, std::nullopt, 0x77);
  const auto out = r.send(K::GetS, 1, 2);
  CHECK(only(out, K::Inv).empty());
  CHECK(r.dram.read(1).words[0] == 0x77);
  CHECK_FALSE(r.l2.find(1));
}

TEST_CASE("clean victim without sharers is dropped silently") {
  Rig r(cfg_with(2, 64, 1));
  r.send(K::IncOcLoad, 0, 1);
  const auto out = r.send(K::GetS, 1, 2);
  CHECK(only(out, K::Inv).empty());
  CHECK(r.dram.contents().empty());
  CHECK(r.l2.find(2));
}

TEST_CASE("uncacheable access bypasses the array") {
  Rig r(cfg_with(2));
  auto out = r.send(K::UncStore, 0, 60, std::nullopt, 9, 3);
  REQUIRE(out.size() == 1);
  CHECK(out[0].delay == r.cfg.latency.l2_proc + r.cfg.latency.dram_access);
  CHECK_FALSE(r.l2.find(60));
  CHECK(r.dram.read(60).words[3] == 9);
}
