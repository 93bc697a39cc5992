#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "incoc/common.hpp"

namespace incoc {

enum class MemoryType : std::uint8_t { NormalCacheable, Uncacheable, IncOc };

const char* to_string(MemoryType t);
std::optional<MemoryType> parse_memory_type(std::string_view s);

// Which levels may hold a copy.
constexpr bool inner_cacheable(MemoryType t) {
  return t == MemoryType::NormalCacheable;
}
constexpr bool outer_cacheable(MemoryType t) {
  return t != MemoryType::Uncacheable;
}

class PageAttributeMap {
 public:
  explicit PageAttributeMap(std::uint64_t page_size = 4096,
                            MemoryType default_type = MemoryType::NormalCacheable);

  std::uint64_t page_size() const { return page_size_; }
  MemoryType default_type() const { return default_type_; }

  MemoryType lookup(Addr addr) const;
  void set_page(std::uint64_t page_index, MemoryType t);

 private:
  std::uint64_t page_size_;
  MemoryType default_type_;
  std::unordered_map<std::uint64_t, MemoryType> entries_;
};

struct RegionHandle {
  Addr base = 0;
  std::uint64_t length = 0;
  MemoryType mem_type = MemoryType::NormalCacheable;

  Addr end() const { return base + length; }
  bool contains(Addr a) const { return a >= base && a < end(); }
  bool operator==(const RegionHandle&) const = default;
};

// Answers "is any line in [base, base+length) resident anywhere?".
using ResidencyProbe = std::function<bool(Addr base, std::uint64_t length)>;

/// Flat physical address space with page-granular memory types. Allocation
/// is a bump allocator; explicitly mapped regions (trace directives) share
/// the same non-overlap rule.
class MemoryModel {
 public:
  MemoryModel(std::uint64_t memory_size, std::uint64_t page_size);

  std::uint64_t memory_size() const { return memory_size_; }
  std::uint64_t page_size() const { return attrs_.page_size(); }

  RegionHandle allocate_region(std::uint64_t length, MemoryType t);
  RegionHandle map_region(Addr base, std::uint64_t length, MemoryType t);

  MemoryType resolve_type(Addr addr) const;

  // Fails with ResidentLinesExist when the probe reports any cached line.
  void set_region_type(const RegionHandle& region, MemoryType t,
                       const ResidencyProbe& probe);

  const std::vector<RegionHandle>& regions() const { return regions_; }

 private:
  std::size_t find_region(const RegionHandle& region) const;
  bool overlaps(Addr base, std::uint64_t length) const;
  void stamp(const RegionHandle& r);

  std::uint64_t memory_size_;
  PageAttributeMap attrs_;
  std::vector<RegionHandle> regions_;
  Addr next_free_ = 0;
};

/// Constant-latency DRAM contents, sparse by line. Lines never written read
/// as zero.
class BackingStore {
 public:
  explicit BackingStore(std::uint32_t line_size) : words_per_line_(line_size / 8) {}

  LineData read(LineAddr line) const;
  void write(LineAddr line, const LineData& data);
  std::uint32_t words_per_line() const { return words_per_line_; }
  const std::map<LineAddr, LineData>& contents() const { return lines_; }

 private:
  std::uint32_t words_per_line_;
  std::map<LineAddr, LineData> lines_;
};

}  // namespace incoc
