#include "incoc/workloads.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

namespace incoc {

namespace {

struct Field {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Field> split(std::string_view line, char sep, bool collapse) {
  std::vector<Field> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep || (collapse && line[i] == '\t')) {
      if (!collapse || i > start) out.push_back({line.substr(start, i - start), start + 1});
      start = i + 1;
    }
  }
  for (auto& f : out) {
    while (!f.text.empty() && (f.text.front() == ' ' || f.text.front() == '\t')) {
      f.text.remove_prefix(1);
      ++f.column;
    }
    while (!f.text.empty() && (f.text.back() == ' ' || f.text.back() == '\t'))
      f.text.remove_suffix(1);
  }
  return out;
}

std::uint64_t number(std::size_t lineno, const Field& f, int base, const char* what) {
  std::string_view v = f.text;
  if (base == 16 && v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) v.remove_prefix(2);
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
  if (v.empty() || ec != std::errc{} || p != v.data() + v.size())
    throw ParseError(ErrorKind::Syntax, lineno, f.column,
                     std::string("expected ") + what + ", got '" + std::string(f.text) + "'");
  return out;
}

}  // namespace

std::uint32_t Trace::cores_used() const {
  std::uint32_t n = 0;
  for (const auto& r : records) n = std::max(n, r.core + 1);
  return n;
}

Trace parse_trace(std::string_view text, std::uint64_t memory_size) {
  Trace t;
  std::map<CoreId, Tick> last_tick;
  std::size_t lineno = 0;
  while (!text.empty()) {
    ++lineno;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos) continue;

    if (line[first] == '#') {
      auto words = split(line, ' ', true);
      if (words[0].text == "#region") {
        if (words.size() != 4)
          throw ParseError(ErrorKind::Syntax, lineno, words[0].column,
                           "#region takes <hex base> <hex length> <type>");
        TraceRegion r;
        r.base = number(lineno, words[1], 16, "a hex base");
        r.length = number(lineno, words[2], 16, "a hex length");
        auto type = parse_memory_type(words[3].text);
        if (!type)
          throw ParseError(ErrorKind::Syntax, lineno, words[3].column,
                           "unknown memory type '" + std::string(words[3].text) +
                               "' (normal, incoc, uncacheable)");
        r.mem_type = *type;
        if (r.length == 0 || r.base >= memory_size || r.length > memory_size - r.base)
          throw ParseError(ErrorKind::Range, lineno, words[1].column,
                           "region " + hex(r.base) + "+" + hex(r.length) +
                               " is empty or exceeds memory size " + hex(memory_size));
        t.regions.push_back(r);
      } else if (words[0].text == "#measure_from") {
        if (words.size() != 2)
          throw ParseError(ErrorKind::Syntax, lineno, words[0].column,
                           "#measure_from takes one decimal tick");
        t.measure_from = number(lineno, words[1], 10, "a decimal tick");
      }
      continue;  // any other '#' line is a comment
    }

    auto fields = split(line, ',', false);
    if (fields.size() < 4 || fields.size() > 5)
      throw ParseError(ErrorKind::Syntax, lineno, 1,
                       "expected tick,core,op,address[,value] but found " +
                           std::to_string(fields.size()) + " fields");
    TraceRecord r;
    r.inject_at = number(lineno, fields[0], 10, "a decimal tick");
    const std::uint64_t core = number(lineno, fields[1], 10, "a decimal core id");
    if (core >= 64)
      throw ParseError(ErrorKind::Range, lineno, fields[1].column, "core id must be below 64");
    r.core = static_cast<CoreId>(core);
    auto op = parse_core_op(fields[2].text);
    if (!op)
      throw ParseError(ErrorKind::Syntax, lineno, fields[2].column,
                       "unknown op '" + std::string(fields[2].text) + "' (R, W, LX, SX)");
    r.op = *op;
    r.address = number(lineno, fields[3], 16, "a hex address");
    if (r.address >= memory_size)
      throw ParseError(ErrorKind::Range, lineno, fields[3].column,
                       "address " + hex(r.address) + " is outside memory (size " +
                           hex(memory_size) + ")");
    if (r.address % 8 != 0)
      throw ParseError(ErrorKind::Range, lineno, fields[3].column,
                       "address " + hex(r.address) + " is not 8-byte aligned");
    if (fields.size() == 5) {
      if (!is_store(r.op))
        throw ParseError(ErrorKind::Syntax, lineno, fields[4].column,
                         "a value is only allowed on W and SX");
      r.value = number(lineno, fields[4], 16, "a hex value");
    }
    auto [it, fresh] = last_tick.try_emplace(r.core, r.inject_at);
    if (!fresh) {
      if (r.inject_at < it->second)
        throw ParseError(ErrorKind::Order, lineno, fields[0].column,
                         "tick " + std::to_string(r.inject_at) + " for core " +
                             std::to_string(r.core) + " is earlier than its previous tick " +
                             std::to_string(it->second));
      it->second = r.inject_at;
    }
    t.records.push_back(r);
  }
  return t;
}

std::string render_trace(const Trace& t) {
  std::ostringstream os;
  for (const auto& r : t.regions)
    os << "#region " << hex(r.base) << ' ' << hex(r.length) << ' ' << to_string(r.mem_type)
       << '\n';
  if (t.measure_from) os << "#measure_from " << t.measure_from << '\n';
  for (const auto& r : t.records) {
    os << r.inject_at << ',' << r.core << ',' << to_string(r.op) << ',' << hex(r.address);
    if (r.value) os << ',' << hex(*r.value);
    os << '\n';
  }
  return os.str();
}

namespace {

constexpr Addr kScenarioBase = 0x100000;
constexpr Addr kSharedBase = 0x1000000;
constexpr Addr kPrivateBase = 0x2000000;
constexpr Addr kLockBase = 0x3000000;
constexpr Addr kBufferBase = 0x4000000;
constexpr Addr kWorkBase = 0x5000000;
constexpr std::uint64_t kPage = 4096;
constexpr std::uint64_t kLine = 64;

std::uint64_t round_pages(std::uint64_t n) { return (n + kPage - 1) / kPage * kPage; }

}  // namespace

Trace gen_dirty_miss(MemoryType type, std::uint32_t n_cores) {
  Trace t;
  t.regions.push_back({kScenarioBase, kPage, type});
  const CoreId owner = n_cores >= 2 ? 1 : 0;
  t.records.push_back({0, owner, CoreOp::Write, kScenarioBase, 0xA});
  t.records.push_back({1000, 0, CoreOp::Write, kScenarioBase, 0xB});
  t.measure_from = 1000;
  return t;
}

Trace gen_write_storm(std::uint32_t n_writers, MemoryType type) {
  Trace t;
  t.regions.push_back({kScenarioBase, kPage, type});
  t.records.push_back({0, n_writers, CoreOp::Write, kScenarioBase, 0xA});
  for (CoreId c = 0; c < n_writers; ++c)
    t.records.push_back({1000, c, CoreOp::Write, kScenarioBase, 0x100 + c});
  t.measure_from = 1000;
  return t;
}

Trace gen_micro(const MicroParams& p) {
  Trace t;
  const std::uint64_t lines = std::max<std::uint64_t>(1, p.working_set / kLine);
  const std::uint64_t span = round_pages(lines * kLine);

  if (p.kind == MicroKind::Lock) {
    const std::uint64_t len = round_pages(std::uint64_t{p.n_cores} * kLine);
    t.regions.push_back({kLockBase, len, p.mem_type});
  } else if (p.sharing == Sharing::Shared) {
    t.regions.push_back({kSharedBase, span, p.mem_type});
  } else {
    t.regions.push_back({kPrivateBase, span * p.n_cores, p.mem_type});
  }

  const auto buffer = [&](CoreId c) {
    return p.sharing == Sharing::Shared ? kSharedBase : kPrivateBase + c * span;
  };
  const auto lock_word = [&](CoreId c) {
    return p.sharing == Sharing::Shared ? kLockBase : kLockBase + c * kLine;
  };

  // Generous bound on the warm-up pass so measured records start warm.
  const std::uint64_t warm_ops = p.kind == MicroKind::Lock ? 1 : lines;
  t.measure_from = warm_ops * p.n_cores * 1000 + 1000;

  for (CoreId c = 0; c < p.n_cores; ++c) {
    if (p.kind == MicroKind::Lock) {
      t.records.push_back({0, c, CoreOp::Read, lock_word(c), std::nullopt});
    } else {
      for (std::uint64_t i = 0; i < lines; ++i)
        t.records.push_back({0, c, CoreOp::Read, buffer(c) + i * kLine, std::nullopt});
    }
  }

  for (CoreId c = 0; c < p.n_cores; ++c) {
    const Tick at = t.measure_from;
    const std::uint64_t words = lines * (kLine / 8);
    const std::uint64_t offset = p.sharing == Sharing::Shared ? c * words / p.n_cores : 0;
    switch (p.kind) {
      case MicroKind::Load:
        for (std::uint32_t i = 0; i < p.iters; ++i)
          t.records.push_back(
              {at, c, CoreOp::Read, buffer(c) + (offset + i) % words * 8, std::nullopt});
        break;
      case MicroKind::Store:
        for (std::uint32_t i = 0; i < p.iters; i += 2) {
          const Addr a = buffer(c) + (offset + i / 2) % words * 8;
          t.records.push_back({at, c, CoreOp::Write, a, (std::uint64_t{c} + 1) << 32 | i});
          t.records.push_back({at, c, CoreOp::Read, a, std::nullopt});
        }
        break;
      case MicroKind::Lock:
        // Core c starts iteration k at k*period + c*period/n: the cores take
        // turns, overlapping when an acquisition outlasts its slot.
        for (std::uint32_t i = 0, k = 0; i < p.iters; i += 3, ++k) {
          const Tick round = at + k * p.lock_period + c * p.lock_period / p.n_cores;
          t.records.push_back({round, c, CoreOp::LoadExcl, lock_word(c), std::nullopt});
          t.records.push_back({round, c, CoreOp::StoreExcl, lock_word(c), 1});
          t.records.push_back({round, c, CoreOp::Write, lock_word(c), 0});
        }
        break;
    }
  }
  // Per-core order is what the parser checks; keep records grouped by tick.
  std::stable_sort(t.records.begin(), t.records.end(),
                   [](const TraceRecord& a, const TraceRecord& b) {
                     return a.inject_at < b.inject_at;
                   });
  return t;
}

std::optional<Typing> parse_typing(std::string_view s) {
  if (s == "normal") return Typing::Normal;
  if (s == "selective") return Typing::Selective;
  if (s == "blind") return Typing::Blind;
  return std::nullopt;
}

const char* to_string(Typing t) {
  switch (t) {
    case Typing::Normal: return "normal";
    case Typing::Selective: return "selective";
    case Typing::Blind: return "blind";
  }
  return "?";
}

Trace gen_producer_consumer(const PipelineParams& p) {
  Trace t;
  const MemoryType shared_type =
      p.typing == Typing::Normal ? MemoryType::NormalCacheable : MemoryType::IncOc;
  const MemoryType private_type =
      p.typing == Typing::Blind ? MemoryType::IncOc : MemoryType::NormalCacheable;
  const std::uint64_t buf_span = round_pages(std::uint64_t{p.payload_lines} * kLine);
  constexpr std::uint64_t kWorkLines = 64;
  const std::uint64_t work_span = round_pages(kWorkLines * kLine);

  const std::uint32_t n_buffers = p.n_stages - 1;
  t.regions.push_back({kBufferBase, buf_span * n_buffers, shared_type});
  t.regions.push_back({kWorkBase, work_span * p.n_stages, private_type});

  const Tick stage_gap = p.period / p.n_stages;
  // Round 0 warms the caches and is not measured. Its misses go to DRAM,
  // so it gets an extra period to drain before round 1.
  t.measure_from = 2 * p.period;
  for (std::uint32_t r = 0; r <= p.iters; ++r) {
    for (CoreId s = 0; s < p.n_stages; ++s) {
      const Tick at = (r == 0 ? 0 : (r + 1) * p.period) + s * stage_gap;
      if (s > 0) {
        const Addr in = kBufferBase + (s - 1) * buf_span;
        for (std::uint32_t l = 0; l < p.payload_lines; ++l)
          t.records.push_back({at, s, CoreOp::Read, in + l * kLine, std::nullopt});
      }
      const Addr work = kWorkBase + s * work_span;
      for (std::uint32_t i = 0; i < p.work_ops; ++i) {
        const Addr a = work + (i % kWorkLines) * kLine + (i / kWorkLines % 8) * 8;
        if (i % 4 == 3)
          t.records.push_back({at, s, CoreOp::Write, a, std::uint64_t{r} << 16 | i});
        else
          t.records.push_back({at, s, CoreOp::Read, a, std::nullopt});
      }
      if (s + 1 < p.n_stages) {
        const Addr out = kBufferBase + s * buf_span;
        for (std::uint32_t l = 0; l < p.payload_lines; ++l)
          t.records.push_back(
              {at, s, CoreOp::Write, out + l * kLine, (std::uint64_t{r} << 32) | (s << 16) | l});
      }
    }
  }
  std::stable_sort(t.records.begin(), t.records.end(),
                   [](const TraceRecord& a, const TraceRecord& b) {
                     return a.inject_at < b.inject_at;
                   });
  return t;
}

}  // namespace incoc
