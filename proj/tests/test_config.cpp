#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "incoc/config.hpp"

using namespace incoc;

namespace {

std::string config_error(std::string_view text) {
  try {
    parse_config(text);
  } catch (const SimError& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults are the calibrated timing") {
  const RunConfig c;
  CHECK(c.latency.l1_proc == 4);
  CHECK(c.latency.l1_to_l2_hop == 124);
  CHECK(c.latency.l2_proc == 70);
  CHECK(c.latency.l2_to_l1_hop == 151);
  CHECK(c.latency.queue_issue == 27);
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("parse and render round-trip") {
  RunConfig c = parse_config(
      "# experiment\n"
      "n_cores = 8\n"
      "l1.size_bytes = 16384   # half size\n"
      "latency.dram_access = 90\n"
      "remote_load_policy = invalidate\n");
  CHECK(c.n_cores == 8);
  CHECK(c.l1.size == 16384);
  CHECK(c.latency.dram_access == 90);
  CHECK(c.remote_load_policy == RemoteLoadPolicy::Invalidate);
  CHECK(render_config(parse_config(render_config(c))) == render_config(c));
}

TEST_CASE("errors name the field") {
  CHECK(config_error("l1.size_bytes = 1000\n").find("l1.size_bytes") != std::string::npos);
  CHECK(config_error("n_cores = 0\n").find("n_cores") != std::string::npos);
  CHECK(config_error("bogus = 1\n").find("bogus") != std::string::npos);
  CHECK(config_error("latency.l2_proc = x\n").find("latency.l2_proc") != std::string::npos);
  CHECK(config_error("n_cores 4\n").find("line 1") != std::string::npos);
  CHECK(config_error("l2.line_size = 128\n").find("l2.line_size") != std::string::npos);
}
