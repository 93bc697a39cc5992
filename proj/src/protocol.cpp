#include "incoc/protocol.hpp"

namespace incoc {

const char* to_string(MsiState s) {
  switch (s) {
    case MsiState::I: return "I";
    case MsiState::S: return "S";
    case MsiState::M: return "M";
    case MsiState::IS_D: return "IS_D";
    case MsiState::IM_D: return "IM_D";
    case MsiState::SM_D: return "SM_D";
    case MsiState::MI_WB: return "MI_WB";
  }
  return "?";
}

const char* to_string(CoherenceEvent e) {
  switch (e) {
    case CoherenceEvent::SelfLoad: return "SelfLoad";
    case CoherenceEvent::SelfStore: return "SelfStore";
    case CoherenceEvent::SelfEvict: return "SelfEvict";
    case CoherenceEvent::OtherLoad: return "OtherLoad";
    case CoherenceEvent::OtherStore: return "OtherStore";
    case CoherenceEvent::DataResponse: return "DataResponse";
    case CoherenceEvent::InvAck: return "InvAck";
    case CoherenceEvent::WbAck: return "WbAck";
  }
  return "?";
}

const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::GetS: return "GetS";
    case MessageKind::GetM: return "GetM";
    case MessageKind::PutM: return "PutM";
    case MessageKind::PutS: return "PutS";
    case MessageKind::Inv: return "Inv";
    case MessageKind::InvAck: return "InvAck";
    case MessageKind::FwdData: return "FwdData";
    case MessageKind::DataS: return "DataS";
    case MessageKind::DataM: return "DataM";
    case MessageKind::WbAck: return "WbAck";
    case MessageKind::IncOcLoad: return "IncOcLoad";
    case MessageKind::IncOcStore: return "IncOcStore";
    case MessageKind::IncOcLoadExcl: return "IncOcLoadExcl";
    case MessageKind::IncOcStoreExcl: return "IncOcStoreExcl";
    case MessageKind::IncOcData: return "IncOcData";
    case MessageKind::IncOcStoreAck: return "IncOcStoreAck";
    case MessageKind::UncLoad: return "UncLoad";
    case MessageKind::UncStore: return "UncStore";
    case MessageKind::UncLoadExcl: return "UncLoadExcl";
    case MessageKind::UncStoreExcl: return "UncStoreExcl";
  }
  return "?";
}

const char* to_string(AccessClass c) {
  switch (c) {
    case AccessClass::Hit: return "Hit";
    case AccessClass::Miss: return "Miss";
    case AccessClass::CoherenceMiss: return "CoherenceMiss";
  }
  return "?";
}

std::optional<RemoteLoadPolicy> parse_remote_load_policy(std::string_view s) {
  if (s == "downgrade_shared") return RemoteLoadPolicy::DowngradeShared;
  if (s == "invalidate") return RemoteLoadPolicy::Invalidate;
  return std::nullopt;
}

const char* to_string(RemoteLoadPolicy p) {
  return p == RemoteLoadPolicy::DowngradeShared ? "downgrade_shared" : "invalidate";
}

namespace {

std::optional<TransitionOutcome> lookup(MsiState s, CoherenceEvent e,
                                        RemoteLoadPolicy policy) {
  using S = MsiState;
  using E = CoherenceEvent;
  using K = MessageKind;
  switch (s) {
    case S::I:
      switch (e) {
        case E::SelfLoad: return TransitionOutcome{S::IS_D, {K::GetS}};
        case E::SelfStore: return TransitionOutcome{S::IM_D, {K::GetM}};
        // A sharer that already dropped its copy (PutS in flight) still acks.
        case E::OtherStore: return TransitionOutcome{S::I, {K::InvAck}};
        default: return std::nullopt;
      }
    case S::S:
      switch (e) {
        case E::SelfLoad: return TransitionOutcome{S::S, {}};
        case E::SelfStore: return TransitionOutcome{S::SM_D, {K::GetM}};
        case E::SelfEvict: return TransitionOutcome{S::I, {K::PutS}};
        case E::OtherStore: return TransitionOutcome{S::I, {K::InvAck}};
        default: return std::nullopt;
      }
    case S::M:
      switch (e) {
        case E::SelfLoad: return TransitionOutcome{S::M, {}};
        case E::SelfStore: return TransitionOutcome{S::M, {}};
        case E::SelfEvict: return TransitionOutcome{S::MI_WB, {K::PutM}, true};
        case E::OtherLoad:
          return TransitionOutcome{
              policy == RemoteLoadPolicy::DowngradeShared ? S::S : S::I, {K::FwdData}, true};
        case E::OtherStore: return TransitionOutcome{S::I, {K::FwdData}, true};
        default: return std::nullopt;
      }
    case S::IS_D:
      if (e == E::DataResponse) return TransitionOutcome{S::S, {}};
      return std::nullopt;
    case S::IM_D:
      if (e == E::DataResponse) return TransitionOutcome{S::M, {}};
      return std::nullopt;
    case S::SM_D:
      if (e == E::DataResponse) return TransitionOutcome{S::M, {}};
      // Lost the upgrade race: our copy is gone, the GetM now needs data.
      if (e == E::OtherStore) return TransitionOutcome{S::IM_D, {K::InvAck}};
      return std::nullopt;
    case S::MI_WB:
      switch (e) {
        case E::WbAck: return TransitionOutcome{S::I, {}};
        // Recall raced with our PutM: hand the data over, keep waiting.
        case E::OtherLoad:
        case E::OtherStore: return TransitionOutcome{S::MI_WB, {K::FwdData}, true};
        default: return std::nullopt;
      }
  }
  return std::nullopt;
}

}  // namespace

TransitionOutcome l1_next(MsiState current, CoherenceEvent event, RemoteLoadPolicy policy) {
  auto out = lookup(current, event, policy);
  if (!out)
    throw SimError(ErrorKind::ProtocolViolation, std::string("illegal L1 transition: ") +
                                                     to_string(event) + " in state " +
                                                     to_string(current));
  return *out;
}

bool is_legal(MsiState current, CoherenceEvent event) {
  return lookup(current, event, RemoteLoadPolicy::DowngradeShared).has_value();
}

AccessClass classify(MsiState state, AccessOp op, bool present) {
  if (!present || state == MsiState::I) return AccessClass::Miss;
  const bool ok = op == AccessOp::Load ? (state == MsiState::S || state == MsiState::M)
                                       : state == MsiState::M;
  return ok ? AccessClass::Hit : AccessClass::CoherenceMiss;
}

}  // namespace incoc
