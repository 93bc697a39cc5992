#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "incoc/mem_model.hpp"

using namespace incoc;

TEST_CASE("allocation rounds to pages") {
  MemoryModel m(1 << 20, 4096);
  const auto a = m.allocate_region(4096, MemoryType::IncOc);
  CHECK(a.length == 4096);
  CHECK(a.mem_type == MemoryType::IncOc);
  const auto b = m.allocate_region(5000, MemoryType::NormalCacheable);
  CHECK(b.length == 8192);
  CHECK(b.base % 4096 == 0);
}

TEST_CASE("successive allocations never overlap") {
  MemoryModel m(64 << 20, 4096);
  std::mt19937_64 rng(3);
  m.map_region(0x10000, 0x4000, MemoryType::Uncacheable);
  std::vector<RegionHandle> all{m.regions()};
  for (int i = 0; i < 200; ++i) all.push_back(m.allocate_region(1 + rng() % 20000, MemoryType::IncOc));
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      CAPTURE(i);
      CAPTURE(j);
      CHECK((all[i].end() <= all[j].base || all[j].end() <= all[i].base));
    }
}

TEST_CASE("allocation past memory size fails") {
  MemoryModel m(16384, 4096);
  m.allocate_region(12288, MemoryType::NormalCacheable);
  CHECK_THROWS_AS(m.allocate_region(8192, MemoryType::NormalCacheable), SimError);
  try {
    m.allocate_region(8192, MemoryType::NormalCacheable);
  } catch (const SimError& e) {
    CHECK(e.kind() == ErrorKind::OutOfMemory);
  }
}

TEST_CASE("resolve_type inside, outside and one past a region") {
  MemoryModel m(1 << 20, 4096);
  const auto r = m.map_region(0x3000, 0x2000, MemoryType::IncOc);
  CHECK(m.resolve_type(0x3000) == MemoryType::IncOc);
  CHECK(m.resolve_type(r.end() - 1) == MemoryType::IncOc);
  CHECK(m.resolve_type(r.end()) == MemoryType::NormalCacheable);
  CHECK(m.resolve_type(0x2FFF) == MemoryType::NormalCacheable);
  CHECK(m.resolve_type(0x80000) == MemoryType::NormalCacheable);
  CHECK_THROWS_AS(m.resolve_type(1 << 20), SimError);
}

TEST_CASE("mapping rejects unaligned, overlapping and out-of-range regions") {
  MemoryModel m(1 << 20, 4096);
  m.map_region(0x4000, 0x1000, MemoryType::IncOc);
  CHECK_THROWS_AS(m.map_region(0x100, 0x1000, MemoryType::IncOc), SimError);
  CHECK_THROWS_AS(m.map_region(0x4000, 0x2000, MemoryType::IncOc), SimError);
  CHECK_THROWS_AS(m.map_region(0xFF000, 0x2000, MemoryType::IncOc), SimError);
  CHECK_NOTHROW(m.map_region(0x4000, 0x1000, MemoryType::IncOc));  // same region again
}

TEST_CASE("retyping honours the residency probe") {
  MemoryModel m(1 << 20, 4096);
  const auto r = m.allocate_region(8192, MemoryType::NormalCacheable);
  bool resident = false;
  const ResidencyProbe probe = [&](Addr, std::uint64_t) { return resident; };
  m.set_region_type(r, MemoryType::IncOc, probe);
  CHECK(m.resolve_type(r.base + 4096) == MemoryType::IncOc);

  resident = true;
  try {
    m.set_region_type(r, MemoryType::NormalCacheable, probe);
    FAIL("expected ResidentLinesExist");
  } catch (const SimError& e) {
    CHECK(e.kind() == ErrorKind::ResidentLinesExist);
  }
  CHECK(m.resolve_type(r.base) == MemoryType::IncOc);

  resident = false;
  m.set_region_type(r, MemoryType::NormalCacheable, probe);
  CHECK(m.resolve_type(r.base) == MemoryType::NormalCacheable);
}

TEST_CASE("backing store reads zero until written") {
  BackingStore s(64);
  CHECK(s.read(9).words == std::vector<std::uint64_t>(8, 0));
  LineData d{std::vector<std::uint64_t>(8, 5), 3};
  s.write(9, d);
  CHECK(s.read(9) == d);
}
