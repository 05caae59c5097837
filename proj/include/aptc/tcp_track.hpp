#pragma once

#include <vector>

#include "aptc/packet.hpp"

namespace aptc {

// Per flow-direction segment classification.
//
// For each direction the tracker keeps the set of byte ranges already seen
// and next_expected = highest (seq + len) so far. A payload-bearing segment
// whose range is entirely contained in previously observed bytes is a
// retransmission. One that starts past next_expected (opening a gap), or
// that covers at least one unseen byte below next_expected (filling a gap),
// is out of order. Everything else, including all zero-payload segments, is
// neither. Sequence numbers wrap mod 2^32; internally they are unwrapped
// into a 64-bit space relative to the first segment of the direction.
//
// Records carrying retrans/ooo hints (line-record ingestion) bypass the
// inference: the hinted verdicts are used as-is for payload-bearing
// segments, and the observed-range state is still updated.
std::vector<TcpSegmentEvent> track_tcp(const std::vector<PacketRecord>& records);

}  // namespace aptc
