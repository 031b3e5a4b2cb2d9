#pragma once

#include <array>
#include <cstdint>

#include "pmed/bigint.hpp"

namespace pmed::wire {

/// Wire protocol ids. SAD/SMD/CMP/SMIN_STEP/BPSK_STEP are the primitive
/// round trips that actually cross the wire; the composite ids (SET, SUT,
/// SRC, SSM_STEP, PGENE_STEP) are reserved; those operations orchestrate
/// primitive sessions from CP and never need a dedicated exchange.
enum ProtocolId : uint8_t {
  CONTROL = 0,
  SAD = 1,
  SMD = 2,
  CMP = 3,
  SET = 4,
  SUT = 5,
  SRC = 6,
  SSM_STEP = 7,
  SMIN_STEP = 8,
  BPSK_STEP = 9,
  PGENE_STEP = 10,
};

constexpr uint8_t kStepRequest = 0;
constexpr uint8_t kStepResponse = 1;
constexpr uint8_t kStepAbort = 0xFF;

constexpr uint8_t kWireVersion = 1;

// CONTROL payload kinds (first byte of a CONTROL frame payload).
constexpr uint8_t kCtrlHello = 1;
constexpr uint8_t kCtrlBye = 2;
constexpr uint8_t kCtrlAbort = 3;

using SessionId = std::array<uint8_t, 16>;

/// One message: 16-byte session id, 1-byte protocol id, 1-byte step index,
/// then the step's payload. On the wire the whole frame is prefixed with a
/// 4-byte big-endian length.
struct Frame {
  SessionId session_id{};
  uint8_t protocol_id = CONTROL;
  uint8_t step = 0;
  Bytes payload;
};

Bytes encode_frame(const Frame& f);                       // includes length prefix
Frame decode_frame_body(const Bytes& body);               // body excludes the prefix
constexpr size_t kMaxFrameBody = 64u << 20;               // sanity cap

}  // namespace pmed::wire
