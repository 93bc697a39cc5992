#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "incoc/common.hpp"

namespace incoc {

// Stable MSI states plus the four transients of the blocking directory
// protocol. IS_D / IM_D / SM_D await data; MI_WB awaits a writeback ack.
enum class MsiState : std::uint8_t { I, S, M, IS_D, IM_D, SM_D, MI_WB };

inline constexpr std::array<MsiState, 7> kAllStates{
    MsiState::I,    MsiState::S,    MsiState::M,    MsiState::IS_D,
    MsiState::IM_D, MsiState::SM_D, MsiState::MI_WB};

constexpr bool is_stable(MsiState s) {
  return s == MsiState::I || s == MsiState::S || s == MsiState::M;
}

enum class CoherenceEvent : std::uint8_t {
  SelfLoad,
  SelfStore,
  SelfEvict,
  OtherLoad,
  OtherStore,
  DataResponse,
  InvAck,
  WbAck,
};

inline constexpr std::array<CoherenceEvent, 8> kAllEvents{
    CoherenceEvent::SelfLoad,     CoherenceEvent::SelfStore, CoherenceEvent::SelfEvict,
    CoherenceEvent::OtherLoad,    CoherenceEvent::OtherStore, CoherenceEvent::DataResponse,
    CoherenceEvent::InvAck,       CoherenceEvent::WbAck};

enum class MessageKind : std::uint8_t {
  GetS,
  GetM,
  PutM,
  PutS,
  Inv,
  InvAck,
  FwdData,
  DataS,
  DataM,
  WbAck,
  IncOcLoad,
  IncOcStore,
  IncOcLoadExcl,
  IncOcStoreExcl,
  IncOcData,
  IncOcStoreAck,
  UncLoad,
  UncStore,
  UncLoadExcl,
  UncStoreExcl,
};

enum class AccessClass : std::uint8_t { Hit, Miss, CoherenceMiss };

enum class AccessOp : std::uint8_t { Load, Store };

// What an M owner does when another core reads the line.
enum class RemoteLoadPolicy : std::uint8_t { DowngradeShared, Invalidate };

const char* to_string(MsiState s);
const char* to_string(CoherenceEvent e);
const char* to_string(MessageKind k);
const char* to_string(AccessClass c);
std::optional<RemoteLoadPolicy> parse_remote_load_policy(std::string_view s);
const char* to_string(RemoteLoadPolicy p);

struct TransitionOutcome {
  MsiState next;
  std::vector<MessageKind> emit;
  bool writeback = false;

  bool operator==(const TransitionOutcome&) const = default;
};

/// The L1 side of the MSI table. Pure; throws SimError(ProtocolViolation)
/// for pairs the protocol never produces.
TransitionOutcome l1_next(MsiState current, CoherenceEvent event,
                          RemoteLoadPolicy policy = RemoteLoadPolicy::DowngradeShared);

/// True when l1_next accepts the pair.
bool is_legal(MsiState current, CoherenceEvent event);

AccessClass classify(MsiState state, AccessOp op, bool present);

}  // namespace incoc
