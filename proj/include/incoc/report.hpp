#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "incoc/config.hpp"
#include "incoc/messages.hpp"

namespace incoc {

struct RequestRow {
  ReqId req_id = 0;
  CoreId core = 0;
  CoreOp op = CoreOp::Read;
  MemoryType mem_type = MemoryType::NormalCacheable;
  Tick issue = 0;
  Tick complete = 0;

  Tick latency() const { return complete - issue; }
  bool operator==(const RequestRow&) const = default;
};

// Intermediate marks of one request, absolute ticks.
struct RequestMarks {
  ReqId req_id = 0;
  std::optional<Tick> l1_action;   // L1 finished its first pass over the request
  std::optional<Tick> l2_receipt;  // L2 first received a message for it
};

struct LatencyStats {
  std::uint64_t count = 0;
  double mean = 0;
  Tick max = 0;
  // Bucket lower bound (0, 1, 2, 4, ...) -> count.
  std::map<Tick, std::uint64_t> histogram;

  bool operator==(const LatencyStats&) const = default;
};

struct Report {
  RunConfig config;
  std::vector<RequestRow> per_request;  // sorted by req_id

  // Not serialized.
  std::vector<RequestMarks> marks;
  std::string event_log;
  Tick end_tick = 0;
};

Tick histogram_bucket(Tick latency);
LatencyStats stats_of(const std::vector<RequestRow>& rows);
std::map<CoreId, LatencyStats> per_core(const Report& r);
std::map<MemoryType, LatencyStats> per_memtype(const Report& r);

std::string to_json(const Report& r);
std::string to_csv(const Report& r);
Report report_from_json(std::string_view text);
Report report_from_csv(std::string_view text);
// Sniffs the format: JSON starts with '{'.
Report parse_report(std::string_view text);

struct Summary {
  std::uint64_t count = 0;
  double mean = 0;
  Tick max = 0;
  // Relative to the earliest measured issue tick.
  Tick first_complete = 0;
  Tick all_complete = 0;
  std::optional<Tick> l1_action;
  std::optional<Tick> l2_receipt;
};

Summary summarize(const Report& r);
std::string render_summary(const Summary& s, const Summary* baseline = nullptr);

}  // namespace incoc
