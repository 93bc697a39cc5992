// Command-line driver. Talks to the simulator only through incoc_sim.h.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "incoc_sim.h"

namespace {

struct Freer {
  void operator()(incoc_config* p) const { incoc_config_free(p); }
  void operator()(incoc_trace* p) const { incoc_trace_free(p); }
  void operator()(incoc_report* p) const { incoc_report_free(p); }
  void operator()(char* p) const { incoc_string_free(p); }
};
using ConfigPtr = std::unique_ptr<incoc_config, Freer>;
using TracePtr = std::unique_ptr<incoc_trace, Freer>;
using ReportPtr = std::unique_ptr<incoc_report, Freer>;
using CStr = std::unique_ptr<char, Freer>;

// Carries a status code out of nested helpers.
struct Exit {
  int code;
};

int report_error(incoc_status s) {
  std::cerr << "error: " << incoc_last_error() << '\n';
  return s;
}

void check(incoc_status s) {
  if (s != INCOC_OK) throw Exit{report_error(s)};
}

std::string take(char* s) {
  CStr owned(s);
  return owned ? std::string(owned.get()) : std::string{};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read " << path << '\n';
    throw Exit{INCOC_ERR_INPUT};
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << data)) {
    std::cerr << "error: cannot write " << path << '\n';
    throw Exit{INCOC_ERR_INPUT};
  }
}

bool log_from_env() {
  const char* v = std::getenv("INCOC_SIM_LOG");
  return v && std::string(v) == "1";
}

ConfigPtr load_config(const std::string& path) {
  if (path.empty()) return ConfigPtr(incoc_config_default());
  incoc_config* c = nullptr;
  const auto text = read_file(path);
  const auto s = incoc_config_parse(text.c_str(), &c);
  if (s != INCOC_OK) {
    std::cerr << path << ": ";
    throw Exit{report_error(s)};
  }
  return ConfigPtr(c);
}

// Numeric setting read back from the rendered config.
uint64_t setting(const incoc_config* cfg, const std::string& key) {
  char* out = nullptr;
  check(incoc_config_render(cfg, &out));
  std::istringstream in(take(out));
  const std::string prefix = key + " = ";
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(prefix, 0) == 0) return std::stoull(line.substr(prefix.size()));
  throw Exit{INCOC_ERR_INTERNAL};
}

ReportPtr run(const incoc_config* cfg, const incoc_trace* trace, bool emit_log) {
  incoc_report* r = nullptr;
  const auto s = incoc_simulate(cfg, trace, emit_log, &r);
  if (s != INCOC_OK) {
    const int code = report_error(s);
    if (s == INCOC_ERR_FAULT) std::cerr << "event log (most recent last):\n" << incoc_last_fault_log();
    throw Exit{code};
  }
  return ReportPtr(r);
}

std::string render(const incoc_report* r, const std::string& format) {
  char* out = nullptr;
  check(format == "csv" ? incoc_report_csv(r, &out) : incoc_report_json(r, &out));
  return take(out);
}

// Writes the report to out (stdout when empty) and the log next to it.
void emit(const incoc_report* r, const std::string& out, const std::string& format, bool emit_log) {
  const auto body = render(r, format);
  if (out.empty()) std::cout << body;
  else write_file(out, body);
  if (!emit_log) return;
  char* log = nullptr;
  check(incoc_report_log(r, &log));
  const auto text = take(log);
  if (out.empty()) std::cerr << text;
  else write_file(out + ".log", text);
}

ReportPtr load_report(const std::string& path) {
  incoc_report* r = nullptr;
  const auto text = read_file(path);
  const auto s = incoc_report_parse(text.c_str(), &r);
  if (s != INCOC_OK) {
    std::cerr << path << ": ";
    throw Exit{report_error(s)};
  }
  return ReportPtr(r);
}

std::string summary(const incoc_report* r, const std::string& baseline_path) {
  ReportPtr base;
  if (!baseline_path.empty()) base = load_report(baseline_path);
  char* out = nullptr;
  check(incoc_report_summary(r, base.get(), &out));
  return take(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"INC-OC memory type coherence simulator"};
  app.require_subcommand(1);

  std::string config_path, trace_path, out_path, format = "json", baseline;
  bool emit_log = false;
  const auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}));
  };

  auto* sim = app.add_subcommand("simulate", "run a trace file");
  sim->add_option("--config", config_path, "config file (defaults when omitted)");
  sim->add_option("trace", trace_path, "trace file")->required();
  sim->add_option("-o,--out", out_path, "report path (stdout when omitted)");
  sim->add_flag("--log", emit_log, "write the event log to <out>.log");
  add_format(sim);

  std::string name, memtype = "normal", sharing = "shared", typing = "selective";
  uint32_t cores = 0, iters = 0;
  auto* scen = app.add_subcommand("scenario", "generate and run a built-in scenario");
  scen->add_option("name", name, "dirty-miss | write-storm | micro-load | micro-store | micro-lock | pipeline")
      ->required();
  scen->add_option("--config", config_path, "config file");
  scen->add_option("--memtype", memtype, "normal | incoc | uncacheable");
  scen->add_option("--cores", cores, "cores (writers for write-storm, stages for pipeline)");
  scen->add_option("--iters", iters, "operations per core, or rounds for pipeline");
  scen->add_option("--sharing", sharing, "shared | private (micro scenarios)");
  scen->add_option("--typing", typing, "normal | selective | blind (pipeline)");
  scen->add_option("-o,--out", out_path, "report path");
  scen->add_option("--baseline", baseline, "report to normalize against");
  scen->add_option("--trace-out", trace_path, "also write the generated trace");
  scen->add_flag("--log", emit_log, "write the event log to <out>.log");
  add_format(scen);

  uint64_t n_traces = 1000, seed = 0;
  std::string dump_dir;
  auto* ver = app.add_subcommand("verify", "check invariants on random traces");
  ver->add_option("--config", config_path, "config file");
  ver->add_option("-n,--traces", n_traces, "number of random traces");
  ver->add_option("--seed", seed, "generator seed (config seed when omitted)");
  ver->add_option("--dump-dir", dump_dir, "where to write the failing trace and log");

  std::string input;
  bool want_summary = false;
  auto* rep = app.add_subcommand("report", "convert or summarize a report");
  rep->add_option("input", input, "report file, json or csv")->required();
  rep->add_option("-o,--out", out_path, "converted report path");
  rep->add_flag("--summary", want_summary, "print the summary");
  rep->add_option("--baseline", baseline, "report to normalize against");
  add_format(rep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : INCOC_ERR_INPUT;
  }
  emit_log = emit_log || log_from_env();

  try {
    if (*sim) {
      auto cfg = load_config(config_path);
      incoc_trace* t = nullptr;
      const auto text = read_file(trace_path);
      const auto s = incoc_trace_parse(text.c_str(), setting(cfg.get(), "memory_size"), &t);
      if (s != INCOC_OK) {
        std::cerr << trace_path << ": ";
        return report_error(s);
      }
      TracePtr trace(t);
      auto r = run(cfg.get(), trace.get(), emit_log);
      emit(r.get(), out_path, format, emit_log);
      return 0;
    }
    if (*scen) {
      auto cfg = load_config(config_path);
      incoc_scenario_params p{name.c_str(), memtype.c_str(), cores, iters, sharing.c_str(), typing.c_str()};
      incoc_trace* t = nullptr;
      check(incoc_scenario(&p, cfg.get(), &t));
      TracePtr trace(t);
      if (!trace_path.empty()) {
        char* text = nullptr;
        check(incoc_trace_render(trace.get(), &text));
        write_file(trace_path, take(text));
      }
      auto r = run(cfg.get(), trace.get(), emit_log);
      if (!out_path.empty()) emit(r.get(), out_path, format, emit_log);
      std::cout << "scenario " << name << " memtype " << memtype << '\n' << summary(r.get(), baseline);
      return 0;
    }
    if (*ver) {
      auto cfg = load_config(config_path);
      if (ver->count("--seed") == 0) seed = setting(cfg.get(), "seed");
      char *details = nullptr, *bad_trace = nullptr, *bad_log = nullptr;
      const auto s = incoc_verify(cfg.get(), n_traces, seed, &details, &bad_trace, &bad_log);
      const auto d = take(details), tr = take(bad_trace), lg = take(bad_log);
      std::cout << d;
      if (s == INCOC_ERR_VERIFY) {
        if (!dump_dir.empty()) {
          std::filesystem::create_directories(dump_dir);
          write_file(dump_dir + "/failing.trace", tr);
          write_file(dump_dir + "/failing.log", lg);
          std::cerr << "failing trace and log written to " << dump_dir << '\n';
        } else {
          std::cerr << "failing trace:\n" << tr << "event log:\n" << lg;
        }
        return INCOC_ERR_VERIFY;
      }
      if (s != INCOC_OK) return report_error(s);
      return 0;
    }
    if (*rep) {
      auto r = load_report(input);
      if (!out_path.empty()) write_file(out_path, render(r.get(), format));
      if (want_summary || out_path.empty()) std::cout << summary(r.get(), baseline);
      return 0;
    }
  } catch (const Exit& e) {
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return INCOC_ERR_INTERNAL;
  }
  return 0;
}
