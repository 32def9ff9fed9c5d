#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "uavshare/bytes.hpp"

namespace uavshare {

// First byte of every protocol frame.
enum class MsgType : std::uint8_t {
    SetupInit = 0x01,
    SetupResp = 0x02,
    M1 = 0x11,
    M2 = 0x12,
    M3 = 0x13,
    M4 = 0x14,
    Req = 0x21,
    Data = 0x22,
    Hint = 0x23,
    KeyRel = 0x24,
    Ack = 0x25,
    Dispute = 0x26,  // UE to AUSF when the delivered content fails σ_sp
};

std::string_view msg_type_name(std::uint8_t tag);
std::optional<MsgType> msg_type_from_name(std::string_view name);

inline std::uint8_t frame_tag(ByteView frame) { return frame.empty() ? 0 : frame[0]; }

}  // namespace uavshare
