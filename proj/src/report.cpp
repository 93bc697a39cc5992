#include "incoc/report.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace incoc {

using ojson = nlohmann::ordered_json;

Tick histogram_bucket(Tick latency) {
  if (latency == 0) return 0;
  Tick b = 1;
  while (b <= latency / 2) b <<= 1;
  return b;
}

LatencyStats stats_of(const std::vector<RequestRow>& rows) {
  LatencyStats s;
  long double sum = 0;
  for (const auto& r : rows) {
    ++s.count;
    sum += r.latency();
    s.max = std::max(s.max, r.latency());
    ++s.histogram[histogram_bucket(r.latency())];
  }
  if (s.count) s.mean = static_cast<double>(sum / s.count);
  return s;
}

std::map<CoreId, LatencyStats> per_core(const Report& r) {
  std::map<CoreId, std::vector<RequestRow>> by;
  for (const auto& row : r.per_request) by[row.core].push_back(row);
  std::map<CoreId, LatencyStats> out;
  for (const auto& [k, rows] : by) out[k] = stats_of(rows);
  return out;
}

std::map<MemoryType, LatencyStats> per_memtype(const Report& r) {
  std::map<MemoryType, std::vector<RequestRow>> by;
  for (const auto& row : r.per_request) by[row.mem_type].push_back(row);
  std::map<MemoryType, LatencyStats> out;
  for (const auto& [k, rows] : by) out[k] = stats_of(rows);
  return out;
}

namespace {

ojson stats_json(const LatencyStats& s) {
  ojson h = ojson::object();
  for (const auto& [b, n] : s.histogram) h[std::to_string(b)] = n;
  return ojson{{"count", s.count}, {"mean", s.mean}, {"max", s.max}, {"histogram", h}};
}

ojson config_json(const RunConfig& cfg) {
  ojson out = ojson::object();
  std::istringstream in(render_config(cfg));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 3);
    std::uint64_t n = 0;
    auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), n);
    if (ec == std::errc{} && p == val.data() + val.size()) out[key] = n;
    else out[key] = val;
  }
  return out;
}

[[noreturn]] void bad_report(const std::string& what) {
  throw SimError(ErrorKind::Syntax, "report: " + what);
}

MemoryType memtype_field(std::string_view s) {
  auto t = parse_memory_type(s);
  if (!t) bad_report("unknown memtype '" + std::string(s) + "'");
  return *t;
}

CoreOp op_field(std::string_view s) {
  auto op = parse_core_op(s);
  if (!op) bad_report("unknown op '" + std::string(s) + "'");
  return *op;
}

void check_row(const RequestRow& r, Tick latency) {
  if (r.complete < r.issue) bad_report("request " + std::to_string(r.req_id) + " completes before it issues");
  if (latency != r.latency())
    bad_report("request " + std::to_string(r.req_id) + " latency does not equal complete - issue");
}

}  // namespace

std::string to_json(const Report& r) {
  ojson j;
  j["config"] = config_json(r.config);
  ojson rows = ojson::array();
  for (const auto& row : r.per_request)
    rows.push_back({{"req_id", row.req_id},
                    {"core", row.core},
                    {"op", to_string(row.op)},
                    {"memtype", to_string(row.mem_type)},
                    {"issue", row.issue},
                    {"complete", row.complete},
                    {"latency", row.latency()}});
  j["per_request"] = rows;
  ojson cores = ojson::object();
  for (const auto& [c, s] : per_core(r)) cores[std::to_string(c)] = stats_json(s);
  ojson types = ojson::object();
  for (const auto& [t, s] : per_memtype(r)) types[to_string(t)] = stats_json(s);
  j["aggregates"] = {{"per_core", cores}, {"per_memtype", types}};
  return j.dump(2) + "\n";
}

std::string to_csv(const Report& r) {
  std::ostringstream os;
  os << "req_id,core,op,memtype,issue,complete,latency\n";
  for (const auto& row : r.per_request)
    os << row.req_id << ',' << row.core << ',' << to_string(row.op) << ','
       << to_string(row.mem_type) << ',' << row.issue << ',' << row.complete << ','
       << row.latency() << '\n';
  return os.str();
}

Report report_from_json(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    bad_report(e.what());
  }
  Report r;
  try {
    if (!j.is_object() || !j.contains("per_request")) bad_report("missing per_request");
    if (j.contains("config")) {
      for (const auto& [k, v] : j["config"].items())
        apply_setting(r.config, k, v.is_string() ? v.get<std::string>() : v.dump());
    }
    for (const auto& row : j["per_request"]) {
      RequestRow x;
      x.req_id = row.at("req_id").get<ReqId>();
      x.core = row.at("core").get<CoreId>();
      x.op = op_field(row.at("op").get<std::string>());
      x.mem_type = memtype_field(row.at("memtype").get<std::string>());
      x.issue = row.at("issue").get<Tick>();
      x.complete = row.at("complete").get<Tick>();
      check_row(x, row.at("latency").get<Tick>());
      r.per_request.push_back(x);
    }
  } catch (const nlohmann::json::exception& e) {
    bad_report(e.what());
  }
  return r;
}

Report report_from_csv(std::string_view text) {
  Report r;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "req_id,core,op,memtype,issue,complete,latency")
    bad_report("missing CSV header");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 7) bad_report("line " + std::to_string(lineno) + ": expected 7 fields");
    const auto num = [&](const std::string& s) {
      std::uint64_t v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || ec != std::errc{} || p != s.data() + s.size())
        bad_report("line " + std::to_string(lineno) + ": bad number '" + s + "'");
      return v;
    };
    RequestRow x;
    x.req_id = num(f[0]);
    x.core = static_cast<CoreId>(num(f[1]));
    x.op = op_field(f[2]);
    x.mem_type = memtype_field(f[3]);
    x.issue = num(f[4]);
    x.complete = num(f[5]);
    check_row(x, num(f[6]));
    r.per_request.push_back(x);
  }
  return r;
}

Report parse_report(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') return report_from_json(text);
  return report_from_csv(text);
}

Summary summarize(const Report& r) {
  Summary s;
  const auto st = stats_of(r.per_request);
  s.count = st.count;
  s.mean = st.mean;
  s.max = st.max;
  if (r.per_request.empty()) return s;
  Tick start = r.per_request.front().issue, first = r.per_request.front().complete, last = 0;
  for (const auto& row : r.per_request) {
    start = std::min(start, row.issue);
    first = std::min(first, row.complete);
    last = std::max(last, row.complete);
  }
  s.first_complete = first - start;
  s.all_complete = last - start;
  if (!r.marks.empty()) {
    const auto& m = r.marks.front();
    const Tick issue = r.per_request.front().issue;
    if (m.l1_action) s.l1_action = *m.l1_action - issue;
    if (m.l2_receipt) s.l2_receipt = *m.l2_receipt - issue;
  }
  return s;
}

std::string render_summary(const Summary& s, const Summary* baseline) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "requests        " << s.count << '\n'
     << "mean latency    " << s.mean << '\n'
     << "max latency     " << s.max << '\n'
     << "first complete  " << s.first_complete << '\n'
     << "all complete    " << s.all_complete << '\n';
  if (s.l1_action) os << "l1 action       " << *s.l1_action << '\n';
  if (s.l2_receipt) os << "l2 receipt      " << *s.l2_receipt << '\n';
  if (baseline) {
    os << std::setprecision(4);
    const auto ratio = [](double a, double b) { return b == 0 ? 0.0 : a / b; };
    os << "vs baseline: all complete " << s.all_complete << " / " << baseline->all_complete
       << " = " << ratio(s.all_complete, baseline->all_complete) << '\n'
       << "vs baseline: mean latency ratio " << ratio(s.mean, baseline->mean) << '\n'
       << "vs baseline: max latency ratio " << ratio(s.max, baseline->max) << '\n';
  }
  return os.str();
}

}  // namespace incoc
