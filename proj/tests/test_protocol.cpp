#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <utility>

#include "incoc/protocol.hpp"

using namespace incoc;
using S = MsiState;
using E = CoherenceEvent;
using K = MessageKind;

namespace {

// Hand-written expectation, one entry per pair the protocol produces.
const std::map<std::pair<S, E>, TransitionOutcome>& expected() {
  static const std::map<std::pair<S, E>, TransitionOutcome> table{
      {{S::I, E::SelfLoad}, {S::IS_D, {K::GetS}}},
      {{S::I, E::SelfStore}, {S::IM_D, {K::GetM}}},
      {{S::I, E::OtherStore}, {S::I, {K::InvAck}}},
      {{S::S, E::SelfLoad}, {S::S, {}}},
      {{S::S, E::SelfStore}, {S::SM_D, {K::GetM}}},
      {{S::S, E::SelfEvict}, {S::I, {K::PutS}}},
      {{S::S, E::OtherStore}, {S::I, {K::InvAck}}},
      {{S::M, E::SelfLoad}, {S::M, {}}},
      {{S::M, E::SelfStore}, {S::M, {}}},
      {{S::M, E::SelfEvict}, {S::MI_WB, {K::PutM}, true}},
      {{S::M, E::OtherLoad}, {S::S, {K::FwdData}, true}},
      {{S::M, E::OtherStore}, {S::I, {K::FwdData}, true}},
      {{S::IS_D, E::DataResponse}, {S::S, {}}},
      {{S::IM_D, E::DataResponse}, {S::M, {}}},
      {{S::SM_D, E::DataResponse}, {S::M, {}}},
      {{S::SM_D, E::OtherStore}, {S::IM_D, {K::InvAck}}},
      {{S::MI_WB, E::WbAck}, {S::I, {}}},
      {{S::MI_WB, E::OtherLoad}, {S::MI_WB, {K::FwdData}, true}},
      {{S::MI_WB, E::OtherStore}, {S::MI_WB, {K::FwdData}, true}},
  };
  return table;
}

}  // namespace

TEST_CASE("every legal state x event pair yields the expected transition") {
  int legal = 0;
  for (S s : kAllStates)
    for (E e : kAllEvents) {
      auto it = expected().find({s, e});
      if (it == expected().end()) continue;
      ++legal;
      CAPTURE(to_string(s));
      CAPTURE(to_string(e));
      CHECK(is_legal(s, e));
      CHECK(l1_next(s, e) == it->second);
    }
  CHECK(legal == 19);
}

TEST_CASE("every illegal pair raises ProtocolViolation") {
  int illegal = 0;
  for (S s : kAllStates)
    for (E e : kAllEvents) {
      if (expected().count({s, e})) continue;
      ++illegal;
      CAPTURE(to_string(s));
      CAPTURE(to_string(e));
      CHECK_FALSE(is_legal(s, e));
      try {
        l1_next(s, e);
        FAIL("no exception");
      } catch (const SimError& err) {
        CHECK(err.kind() == ErrorKind::ProtocolViolation);
      }
    }
  CHECK(illegal == 7 * 8 - 19);
}

TEST_CASE("remote load under the invalidate policy drops the owner to I") {
  const auto out = l1_next(S::M, E::OtherLoad, RemoteLoadPolicy::Invalidate);
  CHECK(out.next == S::I);
  CHECK(out.writeback);
  CHECK(out.emit == std::vector<K>{K::FwdData});
}

TEST_CASE("classify") {
  CHECK(classify(S::I, AccessOp::Load, false) == AccessClass::Miss);
  CHECK(classify(S::I, AccessOp::Store, true) == AccessClass::Miss);
  CHECK(classify(S::S, AccessOp::Load, true) == AccessClass::Hit);
  CHECK(classify(S::S, AccessOp::Store, true) == AccessClass::CoherenceMiss);
  CHECK(classify(S::M, AccessOp::Store, true) == AccessClass::Hit);
  CHECK(classify(S::M, AccessOp::Load, true) == AccessClass::Hit);
}
