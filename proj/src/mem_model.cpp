#include "incoc/mem_model.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

namespace incoc {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::OutOfMemory: return "OutOfMemory";
    case ErrorKind::AddressOutOfRange: return "AddressOutOfRange";
    case ErrorKind::ResidentLinesExist: return "ResidentLinesExist";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::Range: return "RangeError";
    case ErrorKind::Order: return "OrderError";
    case ErrorKind::ProtocolViolation: return "ProtocolViolation";
    case ErrorKind::TypeMismatch: return "TypeMismatch";
    case ErrorKind::Deadlock: return "Deadlock";
    case ErrorKind::Livelock: return "Livelock";
    case ErrorKind::Verification: return "VerificationFailure";
    case ErrorKind::Io: return "IoError";
  }
  return "?";
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

const char* to_string(MemoryType t) {
  switch (t) {
    case MemoryType::NormalCacheable: return "normal";
    case MemoryType::Uncacheable: return "uncacheable";
    case MemoryType::IncOc: return "incoc";
  }
  return "?";
}

std::optional<MemoryType> parse_memory_type(std::string_view s) {
  if (s == "normal") return MemoryType::NormalCacheable;
  if (s == "incoc") return MemoryType::IncOc;
  if (s == "uncacheable") return MemoryType::Uncacheable;
  return std::nullopt;
}

PageAttributeMap::PageAttributeMap(std::uint64_t page_size, MemoryType default_type)
    : page_size_(page_size), default_type_(default_type) {
  if (page_size == 0 || !std::has_single_bit(page_size))
    throw SimError(ErrorKind::InvalidArgument, "page_size must be a power of two");
}

MemoryType PageAttributeMap::lookup(Addr addr) const {
  auto it = entries_.find(addr / page_size_);
  return it == entries_.end() ? default_type_ : it->second;
}

void PageAttributeMap::set_page(std::uint64_t page_index, MemoryType t) {
  entries_[page_index] = t;
}

MemoryModel::MemoryModel(std::uint64_t memory_size, std::uint64_t page_size)
    : memory_size_(memory_size), attrs_(page_size) {
  if (memory_size == 0 || memory_size % page_size != 0)
    throw SimError(ErrorKind::InvalidArgument,
                   "memory_size must be a nonzero multiple of page_size");
}

bool MemoryModel::overlaps(Addr base, std::uint64_t length) const {
  return std::any_of(regions_.begin(), regions_.end(), [&](const RegionHandle& r) {
    return base < r.end() && r.base < base + length;
  });
}

void MemoryModel::stamp(const RegionHandle& r) {
  const auto ps = page_size();
  for (Addr p = r.base / ps; p < r.end() / ps; ++p) attrs_.set_page(p, r.mem_type);
}

RegionHandle MemoryModel::allocate_region(std::uint64_t length, MemoryType t) {
  if (length == 0)
    throw SimError(ErrorKind::InvalidArgument, "region length must be positive");
  const auto ps = page_size();
  const std::uint64_t rounded = (length + ps - 1) / ps * ps;

  // First fit above the bump pointer, skipping explicitly mapped regions.
  Addr base = next_free_;
  for (bool moved = true; moved;) {
    moved = false;
    for (const auto& r : regions_) {
      if (base < r.end() && r.base < base + rounded) {
        base = r.end();
        moved = true;
      }
    }
  }
  if (base > memory_size_ || rounded > memory_size_ - base)
    throw SimError(ErrorKind::OutOfMemory,
                   "cannot allocate " + std::to_string(rounded) + " bytes");
  RegionHandle r{base, rounded, t};
  regions_.push_back(r);
  stamp(r);
  next_free_ = r.end();
  return r;
}

RegionHandle MemoryModel::map_region(Addr base, std::uint64_t length, MemoryType t) {
  const auto ps = page_size();
  if (length == 0 || base % ps != 0 || length % ps != 0)
    throw SimError(ErrorKind::InvalidArgument,
                   "region " + hex(base) + "+" + hex(length) + " is not page aligned");
  if (base > memory_size_ || length > memory_size_ - base)
    throw SimError(ErrorKind::AddressOutOfRange,
                   "region " + hex(base) + "+" + hex(length) + " exceeds memory size");
  RegionHandle r{base, length, t};
  if (std::find(regions_.begin(), regions_.end(), r) != regions_.end()) return r;
  if (overlaps(base, length))
    throw SimError(ErrorKind::InvalidArgument,
                   "region " + hex(base) + "+" + hex(length) + " overlaps an existing region");
  regions_.push_back(r);
  stamp(r);
  return r;
}

MemoryType MemoryModel::resolve_type(Addr addr) const {
  if (addr >= memory_size_)
    throw SimError(ErrorKind::AddressOutOfRange, "address " + hex(addr) + " out of range");
  return attrs_.lookup(addr);
}

std::size_t MemoryModel::find_region(const RegionHandle& region) const {
  for (std::size_t i = 0; i < regions_.size(); ++i)
    if (regions_[i].base == region.base && regions_[i].length == region.length) return i;
  throw SimError(ErrorKind::InvalidArgument,
                 "region " + hex(region.base) + " was never allocated");
}

void MemoryModel::set_region_type(const RegionHandle& region, MemoryType t,
                                  const ResidencyProbe& probe) {
  const auto idx = find_region(region);
  if (probe && probe(region.base, region.length))
    throw SimError(ErrorKind::ResidentLinesExist,
                   "region " + hex(region.base) +
                       " has resident lines; invalidate before changing its type");
  regions_[idx].mem_type = t;
  stamp(regions_[idx]);
}

LineData BackingStore::read(LineAddr line) const {
  auto it = lines_.find(line);
  if (it != lines_.end()) return it->second;
  return LineData{std::vector<std::uint64_t>(words_per_line_, 0), 0};
}

void BackingStore::write(LineAddr line, const LineData& data) { lines_[line] = data; }

}  // namespace incoc
