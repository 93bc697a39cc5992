/* C interface to the INC-OC coherence simulator. */
#ifndef INCOC_SIM_H
#define INCOC_SIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(__GNUC__)
#define INCOC_API __attribute__((visibility("default")))
#else
#define INCOC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as CLI exit codes. */
typedef enum {
  INCOC_OK = 0,
  INCOC_ERR_INTERNAL = 1,
  INCOC_ERR_INPUT = 2,  /* bad config, trace, report or argument */
  INCOC_ERR_FAULT = 3,  /* protocol violation, deadlock, livelock, type mismatch */
  INCOC_ERR_VERIFY = 4  /* property check failed */
} incoc_status;

typedef struct incoc_config incoc_config;
typedef struct incoc_trace incoc_trace;
typedef struct incoc_report incoc_report;

/* Message for the last failing call on this thread; never NULL. */
INCOC_API const char* incoc_last_error(void);
/* Event log of the last run that faulted on this thread; "" if none. */
INCOC_API const char* incoc_last_fault_log(void);

/* Strings returned through char** out-parameters are owned by the caller. */
INCOC_API void incoc_string_free(char* s);

INCOC_API incoc_config* incoc_config_default(void);
INCOC_API incoc_status incoc_config_parse(const char* text, incoc_config** out);
INCOC_API incoc_status incoc_config_set(incoc_config* cfg, const char* key, const char* value);
INCOC_API incoc_status incoc_config_render(const incoc_config* cfg, char** out);
INCOC_API void incoc_config_free(incoc_config* cfg);

INCOC_API incoc_status incoc_trace_parse(const char* text, uint64_t memory_size, incoc_trace** out);
INCOC_API incoc_status incoc_trace_render(const incoc_trace* trace, char** out);
INCOC_API void incoc_trace_free(incoc_trace* trace);

typedef struct {
  const char* name;     /* dirty-miss, write-storm, micro-load, micro-store, micro-lock, pipeline */
  const char* memtype;  /* normal, incoc, uncacheable; NULL means normal */
  uint32_t cores;       /* 0 selects the scenario default */
  uint32_t iters;       /* 0 selects the scenario default */
  const char* sharing;  /* shared or private; NULL means shared */
  const char* typing;   /* normal, selective, blind; NULL means selective */
} incoc_scenario_params;

/* Builds a scenario trace. *cfg_inout is widened to the cores it needs. */
INCOC_API incoc_status incoc_scenario(const incoc_scenario_params* p, incoc_config* cfg_inout,
                            incoc_trace** out);

/* Runs a trace. With emit_log set the report keeps the full event log. */
INCOC_API incoc_status incoc_simulate(const incoc_config* cfg, const incoc_trace* trace, int emit_log,
                            incoc_report** out);

INCOC_API incoc_status incoc_report_parse(const char* text, incoc_report** out);
INCOC_API incoc_status incoc_report_json(const incoc_report* r, char** out);
INCOC_API incoc_status incoc_report_csv(const incoc_report* r, char** out);
INCOC_API incoc_status incoc_report_log(const incoc_report* r, char** out);
/* baseline may be NULL. */
INCOC_API incoc_status incoc_report_summary(const incoc_report* r, const incoc_report* baseline, char** out);

typedef struct {
  uint64_t count;
  double mean;
  uint64_t max;
  uint64_t first_complete;
  uint64_t all_complete;
  int64_t l1_action;   /* -1 when absent */
  int64_t l2_receipt;  /* -1 when absent */
} incoc_summary;

INCOC_API incoc_status incoc_report_stats(const incoc_report* r, incoc_summary* out);
/* Latency of row i, in row order. */
INCOC_API incoc_status incoc_report_row_latency(const incoc_report* r, size_t i, uint64_t* out);
INCOC_API size_t incoc_report_rows(const incoc_report* r);
INCOC_API void incoc_report_free(incoc_report* r);

/* Checks n random traces. Returns INCOC_ERR_VERIFY on any violation;
   *details always receives a human-readable result, and on failure the
   first failing trace and its event log. */
INCOC_API incoc_status incoc_verify(const incoc_config* cfg, uint64_t n_traces, uint64_t seed,
                          char** details, char** failing_trace, char** failing_log);

#ifdef __cplusplus
}
#endif

#endif
