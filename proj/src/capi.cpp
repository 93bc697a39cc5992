#include "incoc_sim.h"

#include <cstring>
#include <new>
#include <sstream>

#include "incoc/engine.hpp"
#include "incoc/scenario.hpp"
#include "incoc/verify.hpp"

struct incoc_config {
  incoc::RunConfig cfg;
};
struct incoc_trace {
  incoc::Trace trace;
};
struct incoc_report {
  incoc::Report report;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_fault_log;

incoc_status status_of(incoc::ErrorKind k) {
  using incoc::ErrorKind;
  switch (k) {
    case ErrorKind::ProtocolViolation:
    case ErrorKind::TypeMismatch:
    case ErrorKind::Deadlock:
    case ErrorKind::Livelock:
      return INCOC_ERR_FAULT;
    case ErrorKind::Verification:
      return INCOC_ERR_VERIFY;
    case ErrorKind::OutOfMemory:
      return INCOC_ERR_INTERNAL;
    default:
      return INCOC_ERR_INPUT;
  }
}

incoc_status fail(incoc_status s, std::string msg) {
  g_error = std::move(msg);
  return s;
}

template <class F>
incoc_status guarded(F&& f) {
  try {
    return f();
  } catch (const incoc::SimError& e) {
    return fail(status_of(e.kind()), std::string(incoc::to_string(e.kind())) + ": " + e.what());
  } catch (const std::bad_alloc&) {
    return fail(INCOC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(INCOC_ERR_INTERNAL, e.what());
  }
}

char* dup(const std::string& s) {
  char* p = new char[s.size() + 1];
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

incoc_status put(char** out, const std::string& s) {
  if (!out) return fail(INCOC_ERR_INPUT, "null output pointer");
  *out = dup(s);
  return INCOC_OK;
}

#define REQUIRE_ARG(x) \
  if (!(x)) return fail(INCOC_ERR_INPUT, "null argument: " #x)

}  // namespace

extern "C" {

const char* incoc_last_error(void) { return g_error.c_str(); }
const char* incoc_last_fault_log(void) { return g_fault_log.c_str(); }

void incoc_string_free(char* s) { delete[] s; }

incoc_config* incoc_config_default(void) { return new (std::nothrow) incoc_config{}; }

incoc_status incoc_config_parse(const char* text, incoc_config** out) {
  REQUIRE_ARG(text);
  REQUIRE_ARG(out);
  return guarded([&] {
    *out = new incoc_config{incoc::parse_config(text)};
    return INCOC_OK;
  });
}

incoc_status incoc_config_set(incoc_config* cfg, const char* key, const char* value) {
  REQUIRE_ARG(cfg);
  REQUIRE_ARG(key);
  REQUIRE_ARG(value);
  return guarded([&] {
    incoc::RunConfig next = cfg->cfg;
    incoc::apply_setting(next, key, value);
    incoc::validate(next);
    cfg->cfg = next;
    return INCOC_OK;
  });
}

incoc_status incoc_config_render(const incoc_config* cfg, char** out) {
  REQUIRE_ARG(cfg);
  return guarded([&] { return put(out, incoc::render_config(cfg->cfg)); });
}

void incoc_config_free(incoc_config* cfg) { delete cfg; }

incoc_status incoc_trace_parse(const char* text, uint64_t memory_size, incoc_trace** out) {
  REQUIRE_ARG(text);
  REQUIRE_ARG(out);
  return guarded([&] {
    *out = new incoc_trace{incoc::parse_trace(text, memory_size)};
    return INCOC_OK;
  });
}

incoc_status incoc_trace_render(const incoc_trace* trace, char** out) {
  REQUIRE_ARG(trace);
  return guarded([&] { return put(out, incoc::render_trace(trace->trace)); });
}

void incoc_trace_free(incoc_trace* trace) { delete trace; }

incoc_status incoc_scenario(const incoc_scenario_params* p, incoc_config* cfg_inout,
                            incoc_trace** out) {
  REQUIRE_ARG(p);
  REQUIRE_ARG(p->name);
  REQUIRE_ARG(cfg_inout);
  REQUIRE_ARG(out);
  return guarded([&] {
    incoc::ScenarioParams sp;
    const auto kind = incoc::parse_scenario(p->name);
    if (!kind) return fail(INCOC_ERR_INPUT, std::string("unknown scenario '") + p->name + "'");
    sp.kind = *kind;
    if (p->memtype) {
      const auto t = incoc::parse_memory_type(p->memtype);
      if (!t) return fail(INCOC_ERR_INPUT, std::string("unknown memtype '") + p->memtype + "'");
      sp.mem_type = *t;
    }
    if (p->sharing) {
      const std::string s = p->sharing;
      if (s == "shared") sp.sharing = incoc::Sharing::Shared;
      else if (s == "private") sp.sharing = incoc::Sharing::Private;
      else return fail(INCOC_ERR_INPUT, "unknown sharing '" + s + "'");
    }
    if (p->typing) {
      const auto t = incoc::parse_typing(p->typing);
      if (!t) return fail(INCOC_ERR_INPUT, std::string("unknown typing '") + p->typing + "'");
      sp.typing = *t;
    }
    if (p->cores) sp.cores = p->cores;
    if (p->iters) sp.iters = p->iters;
    auto s = incoc::make_scenario(cfg_inout->cfg, sp);
    incoc::validate(s.config);
    cfg_inout->cfg = s.config;
    *out = new incoc_trace{std::move(s.trace)};
    return INCOC_OK;
  });
}

incoc_status incoc_simulate(const incoc_config* cfg, const incoc_trace* trace, int emit_log,
                            incoc_report** out) {
  REQUIRE_ARG(cfg);
  REQUIRE_ARG(trace);
  REQUIRE_ARG(out);
  g_fault_log.clear();
  return guarded([&] {
    incoc::SimOptions opts;
    opts.keep_log = emit_log != 0;
    incoc::Simulator sim(cfg->cfg, trace->trace, opts);
    try {
      *out = new incoc_report{sim.run()};
    } catch (const incoc::SimError& e) {
      g_fault_log = sim.event_log();
      throw;
    }
    return INCOC_OK;
  });
}

incoc_status incoc_report_parse(const char* text, incoc_report** out) {
  REQUIRE_ARG(text);
  REQUIRE_ARG(out);
  return guarded([&] {
    *out = new incoc_report{incoc::parse_report(text)};
    return INCOC_OK;
  });
}

incoc_status incoc_report_json(const incoc_report* r, char** out) {
  REQUIRE_ARG(r);
  return guarded([&] { return put(out, incoc::to_json(r->report)); });
}

incoc_status incoc_report_csv(const incoc_report* r, char** out) {
  REQUIRE_ARG(r);
  return guarded([&] { return put(out, incoc::to_csv(r->report)); });
}

incoc_status incoc_report_log(const incoc_report* r, char** out) {
  REQUIRE_ARG(r);
  return guarded([&] { return put(out, r->report.event_log); });
}

incoc_status incoc_report_summary(const incoc_report* r, const incoc_report* baseline, char** out) {
  REQUIRE_ARG(r);
  return guarded([&] {
    const auto s = incoc::summarize(r->report);
    if (!baseline) return put(out, incoc::render_summary(s));
    const auto b = incoc::summarize(baseline->report);
    return put(out, incoc::render_summary(s, &b));
  });
}

incoc_status incoc_report_stats(const incoc_report* r, incoc_summary* out) {
  REQUIRE_ARG(r);
  REQUIRE_ARG(out);
  const auto s = incoc::summarize(r->report);
  out->count = s.count;
  out->mean = s.mean;
  out->max = s.max;
  out->first_complete = s.first_complete;
  out->all_complete = s.all_complete;
  out->l1_action = s.l1_action ? static_cast<int64_t>(*s.l1_action) : -1;
  out->l2_receipt = s.l2_receipt ? static_cast<int64_t>(*s.l2_receipt) : -1;
  return INCOC_OK;
}

incoc_status incoc_report_row_latency(const incoc_report* r, size_t i, uint64_t* out) {
  REQUIRE_ARG(r);
  REQUIRE_ARG(out);
  if (i >= r->report.per_request.size()) return fail(INCOC_ERR_INPUT, "row index out of range");
  *out = r->report.per_request[i].latency();
  return INCOC_OK;
}

size_t incoc_report_rows(const incoc_report* r) { return r ? r->report.per_request.size() : 0; }

void incoc_report_free(incoc_report* r) { delete r; }

incoc_status incoc_verify(const incoc_config* cfg, uint64_t n_traces, uint64_t seed,
                          char** details, char** failing_trace, char** failing_log) {
  REQUIRE_ARG(cfg);
  return guarded([&] {
    incoc::validate(cfg->cfg);
    const auto res = incoc::verify(cfg->cfg, n_traces, seed);
    std::ostringstream os;
    os << "traces " << res.traces << '\n';
    for (const char* c : {incoc::kCheckSwmr, incoc::kCheckInclusion, incoc::kCheckDirectory,
                          incoc::kCheckIncOc, incoc::kCheckMonitor, incoc::kCheckValue,
                          incoc::kCheckMemory, incoc::kCheckDeterminism, incoc::kCheckFault}) {
      auto it = res.violations.find(c);
      os << c << ' ' << (it == res.violations.end() ? 0 : it->second) << '\n';
    }
    if (res.first_failure)
      os << "first failure: trace " << res.first_failure->index << ", " << res.first_failure->check
         << ": " << res.first_failure->detail << '\n';
    if (details) *details = dup(os.str());
    if (failing_trace) *failing_trace = dup(res.first_failure ? res.first_failure->trace_text : "");
    if (failing_log) *failing_log = dup(res.first_failure ? res.first_failure->event_log : "");
    if (!res.ok()) return fail(INCOC_ERR_VERIFY, "verification failed");
    return INCOC_OK;
  });
}

}  // extern "C"
