#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "incoc/engine.hpp"
#include "incoc/report.hpp"
#include "json.hpp"

using namespace incoc;

namespace {

Report two_rows() {
  Report r;
  r.per_request = {{1, 0, CoreOp::Write, MemoryType::NormalCacheable, 1000, 1729},
                   {2, 1, CoreOp::Read, MemoryType::IncOc, 1000, 1349}};
  return r;
}

}  // namespace

TEST_CASE("empty report CSV is the header only") {
  CHECK(to_csv(Report{}) == "req_id,core,op,memtype,issue,complete,latency\n");
}

TEST_CASE("two rows, latency = complete - issue") {
  CHECK(to_csv(two_rows()) ==
        "req_id,core,op,memtype,issue,complete,latency\n"
        "1,0,W,normal,1000,1729,729\n"
        "2,1,R,incoc,1000,1349,349\n");
}

TEST_CASE("json keys and aggregates") {
  const auto j = nlohmann::ordered_json::parse(to_json(two_rows()));
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"config", "per_request", "aggregates"});
  CHECK(j["per_request"][0]["latency"] == 729);
  CHECK(j["aggregates"]["per_memtype"]["incoc"]["mean"] == 349.0);
  CHECK(j["aggregates"]["per_core"]["0"]["histogram"]["512"] == 1);
  CHECK(j["config"]["latency.l2_proc"] == 70);
}

TEST_CASE("json -> csv -> json keeps per_request") {
  MicroParams p;
  p.kind = MicroKind::Lock;
  p.iters = 60;
  const Report r = run(RunConfig{}, gen_micro(p));
  const std::string json = to_json(r);
  const Report via_csv = parse_report(to_csv(parse_report(json)));
  const auto a = nlohmann::ordered_json::parse(json);
  const auto b = nlohmann::ordered_json::parse(to_json(via_csv));
  CHECK(a["per_request"] == b["per_request"]);
  CHECK(a["aggregates"] == b["aggregates"]);
  CHECK(to_json(parse_report(json)) == json);
}

TEST_CASE("inconsistent latency is rejected") {
  CHECK_THROWS_AS(parse_report("req_id,core,op,memtype,issue,complete,latency\n1,0,W,normal,10,20,5\n"),
                  SimError);
  CHECK_THROWS_AS(parse_report("req_id,core,op,memtype,issue,complete,latency\n1,0,W,normal,20,10,0\n"),
                  SimError);
  CHECK_THROWS_AS(parse_report("{\"per_request\": [{\"req_id\": 1}]}"), SimError);
  CHECK_THROWS_AS(parse_report("not a report"), SimError);
}

TEST_CASE("power-of-two histogram buckets") {
  CHECK(histogram_bucket(0) == 0);
  CHECK(histogram_bucket(1) == 1);
  CHECK(histogram_bucket(3) == 2);
  CHECK(histogram_bucket(4) == 4);
  CHECK(histogram_bucket(729) == 512);
  CHECK(histogram_bucket(1024) == 1024);
}

TEST_CASE("summary against a baseline prints the ratio") {
  const Summary a = summarize(run(RunConfig{}, gen_dirty_miss(MemoryType::IncOc)));
  const Summary b = summarize(run(RunConfig{}, gen_dirty_miss(MemoryType::NormalCacheable)));
  const std::string text = render_summary(a, &b);
  CHECK(text.find("349 / 729 = 0.4787") != std::string::npos);
}
