#include "incoc/config.hpp"

#include <bit>
#include <charconv>
#include <limits>
#include <sstream>

namespace incoc {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  int base = 10;
  if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) {
    v.remove_prefix(2);
    base = 16;
  }
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
  if (ec != std::errc{} || p != v.data() + v.size() || v.empty())
    throw SimError(ErrorKind::Config,
                   std::string(key) + ": expected an unsigned integer, got '" +
                       std::string(v) + "'");
  return out;
}

template <class T>
T narrow(std::string_view key, std::uint64_t v) {
  if (v > std::numeric_limits<T>::max())
    throw SimError(ErrorKind::Config, std::string(key) + ": value too large");
  return static_cast<T>(v);
}

void require(bool ok, const char* field, const std::string& why) {
  if (!ok) throw SimError(ErrorKind::Config, std::string(field) + ": " + why);
}

}  // namespace

void validate(const RunConfig& c) {
  require(c.n_cores >= 1 && c.n_cores <= 64, "n_cores", "must be in [1, 64]");
  require(std::has_single_bit(c.page_size), "page_size", "must be a power of two");
  require(c.memory_size > 0 && c.memory_size % c.page_size == 0, "memory_size",
          "must be a positive multiple of page_size");

  require(c.l1.line_size >= 8 && std::has_single_bit(c.l1.line_size), "l1.line_size",
          "must be a power of two >= 8");
  require(c.l1.associativity >= 1, "l1.associativity", "must be >= 1");
  require(c.l1.size > 0 && c.l1.size % (std::uint64_t{c.l1.associativity} * c.l1.line_size) == 0,
          "l1.size_bytes", "must equal sets x ways x line_size");
  require(c.page_size % c.l1.line_size == 0, "l1.line_size", "must divide page_size");

  require(c.l2.line_size == c.l1.line_size, "l2.line_size", "must equal l1.line_size");
  require(c.l2.associativity >= 1, "l2.associativity", "must be >= 1");
  require(c.l2.size > 0 && c.l2.size % (std::uint64_t{c.l2.associativity} * c.l2.line_size) == 0,
          "l2.size_bytes", "must equal sets x ways x line_size");
  require(c.l2.size >= c.l1.size, "l2.size_bytes", "must be at least l1.size_bytes");

  const auto& l = c.latency;
  require(l.l1_proc >= 1, "latency.l1_proc", "must be >= 1");
  require(l.l1_to_l2_hop >= 1, "latency.l1_to_l2_hop", "must be >= 1");
  require(l.l2_proc >= 1, "latency.l2_proc", "must be >= 1");
  require(l.l2_to_l1_hop >= 1, "latency.l2_to_l1_hop", "must be >= 1");
  require(l.dram_access >= 1, "latency.dram_access", "must be >= 1");
  require(l.queue_issue >= 1, "latency.queue_issue", "must be >= 1");
  require(c.max_ticks >= 1, "max_ticks", "must be >= 1");
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
  const auto u64 = [&] { return to_u64(key, value); };
  const auto u32 = [&] { return narrow<std::uint32_t>(key, u64()); };

  if (key == "n_cores") c.n_cores = u32();
  else if (key == "memory_size") c.memory_size = u64();
  else if (key == "page_size") c.page_size = u64();
  else if (key == "seed") c.seed = u64();
  else if (key == "max_ticks") c.max_ticks = u64();
  else if (key == "remote_load_policy") {
    auto p = parse_remote_load_policy(value);
    if (!p)
      throw SimError(ErrorKind::Config,
                     "remote_load_policy: expected downgrade_shared or invalidate");
    c.remote_load_policy = *p;
  } else if (key == "fault") {
    if (value == "none") c.fault = FaultInjection::None;
    else if (value == "skip_one_inv") c.fault = FaultInjection::SkipOneInv;
    else throw SimError(ErrorKind::Config, "fault: expected none or skip_one_inv");
  }
  else if (key == "l1.size_bytes") c.l1.size = u64();
  else if (key == "l1.associativity") c.l1.associativity = u32();
  else if (key == "l1.line_size") c.l1.line_size = u32();
  else if (key == "l2.size_bytes") c.l2.size = u64();
  else if (key == "l2.associativity") c.l2.associativity = u32();
  else if (key == "l2.line_size") c.l2.line_size = u32();
  else if (key == "latency.l1_proc") c.latency.l1_proc = u64();
  else if (key == "latency.l1_to_l2_hop") c.latency.l1_to_l2_hop = u64();
  else if (key == "latency.l2_proc") c.latency.l2_proc = u64();
  else if (key == "latency.l2_to_l1_hop") c.latency.l2_to_l1_hop = u64();
  else if (key == "latency.dram_access") c.latency.dram_access = u64();
  else if (key == "latency.queue_issue") c.latency.queue_issue = u64();
  else throw SimError(ErrorKind::Config, "unknown key '" + std::string(key) + "'");
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::size_t lineno = 0;
  while (!text.empty()) {
    ++lineno;
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw SimError(ErrorKind::Config,
                     "config line " + std::to_string(lineno) + ": expected 'key = value'");
    try {
      apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const SimError& e) {
      throw SimError(ErrorKind::Config,
                     "config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  validate(cfg);
  return cfg;
}

std::string render_config(const RunConfig& c) {
  std::ostringstream os;
  os << "n_cores = " << c.n_cores << '\n'
     << "memory_size = " << c.memory_size << '\n'
     << "page_size = " << c.page_size << '\n'
     << "remote_load_policy = " << to_string(c.remote_load_policy) << '\n'
     << "seed = " << c.seed << '\n'
     << "max_ticks = " << c.max_ticks << '\n'
     << "l1.size_bytes = " << c.l1.size << '\n'
     << "l1.associativity = " << c.l1.associativity << '\n'
     << "l1.line_size = " << c.l1.line_size << '\n'
     << "l2.size_bytes = " << c.l2.size << '\n'
     << "l2.associativity = " << c.l2.associativity << '\n'
     << "l2.line_size = " << c.l2.line_size << '\n'
     << "latency.l1_proc = " << c.latency.l1_proc << '\n'
     << "latency.l1_to_l2_hop = " << c.latency.l1_to_l2_hop << '\n'
     << "latency.l2_proc = " << c.latency.l2_proc << '\n'
     << "latency.l2_to_l1_hop = " << c.latency.l2_to_l1_hop << '\n'
     << "latency.dram_access = " << c.latency.dram_access << '\n'
     << "latency.queue_issue = " << c.latency.queue_issue << '\n';
  if (c.fault == FaultInjection::SkipOneInv) os << "fault = skip_one_inv\n";
  return os.str();
}

}  // namespace incoc
