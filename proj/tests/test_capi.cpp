#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "incoc_sim.h"

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  incoc_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("scenario through the C API") {
  incoc_config* cfg = incoc_config_default();
  REQUIRE(cfg);
  incoc_scenario_params p{"dirty-miss", "normal", 0, 0, nullptr, nullptr};
  incoc_trace* t = nullptr;
  REQUIRE(incoc_scenario(&p, cfg, &t) == INCOC_OK);
  incoc_report* r = nullptr;
  REQUIRE(incoc_simulate(cfg, t, 0, &r) == INCOC_OK);
  incoc_summary s{};
  REQUIRE(incoc_report_stats(r, &s) == INCOC_OK);
  CHECK(s.all_complete == 729);
  CHECK(s.l1_action == 4);
  CHECK(s.l2_receipt == 128);
  CHECK(incoc_report_rows(r) == 1);
  uint64_t lat = 0;
  CHECK(incoc_report_row_latency(r, 0, &lat) == INCOC_OK);
  CHECK(lat == 729);
  CHECK(incoc_report_row_latency(r, 1, &lat) == INCOC_ERR_INPUT);

  char* csv = nullptr;
  REQUIRE(incoc_report_csv(r, &csv) == INCOC_OK);
  incoc_report* back = nullptr;
  const std::string text = take(csv);
  REQUIRE(incoc_report_parse(text.c_str(), &back) == INCOC_OK);
  char* again = nullptr;
  REQUIRE(incoc_report_csv(back, &again) == INCOC_OK);
  CHECK(take(again) == text);

  incoc_report_free(back);
  incoc_report_free(r);
  incoc_trace_free(t);
  incoc_config_free(cfg);
}

TEST_CASE("input errors map to status 2 with a message") {
  incoc_trace* t = nullptr;
  CHECK(incoc_trace_parse("0,0,R,0x1000\n1,0,Z,0x1000\n", 1ull << 32, &t) == INCOC_ERR_INPUT);
  CHECK(std::string(incoc_last_error()).find("line 2") != std::string::npos);

  incoc_config* cfg = nullptr;
  CHECK(incoc_config_parse("l1.associativity = 0\n", &cfg) == INCOC_ERR_INPUT);
  CHECK(std::string(incoc_last_error()).find("l1.associativity") != std::string::npos);

  cfg = incoc_config_default();
  CHECK(incoc_config_set(cfg, "n_cores", "0") == INCOC_ERR_INPUT);
  CHECK(incoc_config_set(cfg, "n_cores", "8") == INCOC_OK);
  incoc_scenario_params p{"no-such", nullptr, 0, 0, nullptr, nullptr};
  CHECK(incoc_scenario(&p, cfg, &t) == INCOC_ERR_INPUT);
  CHECK(incoc_scenario(nullptr, cfg, &t) == INCOC_ERR_INPUT);
  incoc_config_free(cfg);
}

TEST_CASE("a simulation fault is status 3 and keeps the log") {
  incoc_config* cfg = incoc_config_default();
  REQUIRE(incoc_config_set(cfg, "max_ticks", "100") == INCOC_OK);
  incoc_trace* t = nullptr;
  REQUIRE(incoc_trace_parse("0,0,W,0x1000\n", 1ull << 32, &t) == INCOC_OK);
  incoc_report* r = nullptr;
  CHECK(incoc_simulate(cfg, t, 0, &r) == INCOC_ERR_FAULT);
  CHECK(std::string(incoc_last_error()).find("Livelock") != std::string::npos);
  CHECK(std::string(incoc_last_fault_log()).find("tick=") != std::string::npos);
  incoc_trace_free(t);
  incoc_config_free(cfg);
}

TEST_CASE("verify status") {
  incoc_config* cfg = incoc_config_default();
  char* details = nullptr;
  CHECK(incoc_verify(cfg, 20, 3, &details, nullptr, nullptr) == INCOC_OK);
  CHECK(take(details).find("swmr 0") != std::string::npos);

  REQUIRE(incoc_config_set(cfg, "fault", "skip_one_inv") == INCOC_OK);
  char *bad_trace = nullptr, *bad_log = nullptr;
  CHECK(incoc_verify(cfg, 50, 1, &details, &bad_trace, &bad_log) == INCOC_ERR_VERIFY);
  take(details);
  CHECK_FALSE(take(bad_trace).empty());
  CHECK_FALSE(take(bad_log).empty());
  incoc_config_free(cfg);
}
