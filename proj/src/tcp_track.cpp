#include "aptc/tcp_track.hpp"

#include <cstdint>
#include <map>
#include <unordered_map>

namespace aptc {

namespace {

struct DirectionState {
    bool seen_any = false;
    std::uint64_t unwrap_base = 0;   // 64-bit value assigned to the last seq seen
    std::uint32_t last_seq32 = 0;
    std::uint64_t next_expected = 0;
    std::map<std::uint64_t, std::uint64_t> observed;  // start -> end, disjoint, sorted

    // Maps a 32-bit sequence number to the closest point in the unwrapped
    // 64-bit space (handles wraparound in either direction).
    std::uint64_t unwrap(std::uint32_t seq) {
        if (!seen_any) {
            seen_any = true;
            last_seq32 = seq;
            // Start well above zero so reordered segments slightly below the
            // first seq do not underflow.
            unwrap_base = (1ull << 32) + seq;
            return unwrap_base;
        }
        std::int32_t delta = static_cast<std::int32_t>(seq - last_seq32);
        unwrap_base = unwrap_base + static_cast<std::int64_t>(delta);
        last_seq32 = seq;
        return unwrap_base;
    }

    // Number of bytes of [s, e) already present in `observed`.
    std::uint64_t covered_bytes(std::uint64_t s, std::uint64_t e) const {
        std::uint64_t covered = 0;
        auto it = observed.upper_bound(s);
        if (it != observed.begin()) --it;
        for (; it != observed.end() && it->first < e; ++it) {
            std::uint64_t lo = std::max(s, it->first);
            std::uint64_t hi = std::min(e, it->second);
            if (hi > lo) covered += hi - lo;
        }
        return covered;
    }

    void insert_range(std::uint64_t s, std::uint64_t e) {
        auto it = observed.upper_bound(s);
        if (it != observed.begin()) {
            auto prev = std::prev(it);
            if (prev->second >= s) {
                s = prev->first;
                e = std::max(e, prev->second);
                it = observed.erase(prev);
            }
        }
        while (it != observed.end() && it->first <= e) {
            e = std::max(e, it->second);
            it = observed.erase(it);
        }
        observed[s] = e;
    }
};

struct FlowState {
    std::uint32_t initiator_ip = 0;
    std::uint16_t initiator_port = 0;
    DirectionState dir[2];  // 0 = upload (initiator->responder), 1 = download
};

}  // namespace

std::vector<TcpSegmentEvent> track_tcp(const std::vector<PacketRecord>& records) {
    std::vector<TcpSegmentEvent> events;
    events.reserve(records.size());
    std::unordered_map<FlowKey, FlowState, FlowKeyHash> flows;

    for (const auto& rec : records) {
        if (rec.transport != Transport::Tcp) continue;

        FlowKey key = make_flow_key(rec.src_ip, rec.src_port, rec.dst_ip, rec.dst_port);
        auto [it, inserted] = flows.try_emplace(key);
        FlowState& flow = it->second;
        if (inserted) {
            // First segment (normally the SYN) defines the initiator.
            flow.initiator_ip = rec.src_ip;
            flow.initiator_port = rec.src_port;
        }
        bool upload = rec.src_ip == flow.initiator_ip && rec.src_port == flow.initiator_port;

        TcpSegmentEvent ev;
        ev.flow_key = key;
        ev.upload = upload;
        ev.record = rec;

        DirectionState& dir = flow.dir[upload ? 0 : 1];
        std::uint32_t seq32 = rec.tcp_seq.value_or(0);
        std::uint64_t s = dir.unwrap(seq32);
        std::uint64_t e = s + rec.payload_len;

        if (rec.payload_len > 0) {
            if (rec.retrans_hint || rec.ooo_hint) {
                ev.is_retransmission = rec.retrans_hint.value_or(false);
                ev.is_out_of_order = !ev.is_retransmission && rec.ooo_hint.value_or(false);
            } else {
                std::uint64_t covered = dir.covered_bytes(s, e);
                if (covered == rec.payload_len) {
                    ev.is_retransmission = true;
                } else if (dir.next_expected != 0 && s > dir.next_expected) {
                    ev.is_out_of_order = true;  // opens a gap
                } else if (dir.next_expected != 0 && s < dir.next_expected) {
                    // Some bytes below next_expected are new: fills a gap.
                    std::uint64_t below_end = std::min(e, dir.next_expected);
                    if (below_end > s && dir.covered_bytes(s, below_end) < below_end - s)
                        ev.is_out_of_order = true;
                }
            }
            dir.insert_range(s, e);
            dir.next_expected = std::max(dir.next_expected, e);
        } else {
            // Zero-payload segments advance nothing and are never flagged,
            // but a SYN/FIN still pins next_expected past its slot.
            if (rec.tcp_flags && (*rec.tcp_flags & (kTcpSyn | kTcpFin)))
                dir.next_expected = std::max(dir.next_expected, s + 1);
            else
                dir.next_expected = std::max(dir.next_expected, s);
        }

        events.push_back(std::move(ev));
    }
    return events;
}

}  // namespace aptc
