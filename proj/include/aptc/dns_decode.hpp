#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "aptc/packet.hpp"

namespace aptc {

// Decode a DNS message carried in a UDP payload. Returns nullopt when the
// bytes are not a parseable message (short header, label overrun, pointer
// loop, missing question). Never throws on arbitrary input.
std::optional<DnsMessage> decode_dns(std::span<const std::uint8_t> payload);

}  // namespace aptc
