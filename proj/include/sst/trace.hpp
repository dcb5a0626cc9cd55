#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sst {

// Errors carry context (path, line number) in the message.
class TraceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PacketRecord {
    double t = 0.0;       // seconds, relative to the owning chain's clock zero
    int dir = 0;          // +1 upstream (attacker -> target), -1 downstream
    int64_t size = 0;     // payload bytes, >= 1
    bool dummy = false;   // provenance flag for injected chaff; never serialized
};

enum class TraceFormat { Csv, Jsonl };

TraceFormat trace_format_from_string(const std::string& s);

struct Trace {
    std::vector<PacketRecord> packets;   // nondecreasing timestamps
    std::string capture_point;

    bool empty() const { return packets.empty(); }
    size_t size() const { return packets.size(); }

    double duration() const {
        return packets.empty() ? 0.0 : packets.back().t - packets.front().t;
    }

    int64_t total_bytes() const {
        int64_t n = 0;
        for (const auto& p : packets) n += p.size;
        return n;
    }
};

// Validates record invariants and stable-sorts by timestamp.
void finalize_trace(Trace& trace);

// Parses a trace file. Rows are validated (direction in {+1,-1},
// size >= 1, timestamp >= 0); violations raise TraceError naming the
// line, an empty file raises TraceError. Packets are stable-sorted by
// timestamp on load.
Trace load_trace(const std::string& path, TraceFormat format);

// Writes a trace. Timestamps are serialized with full 64-bit precision
// (shortest exact decimal, padded to at least 9 fractional digits for
// CSV) so that load(save(t)) reproduces t bit-exactly. Refuses empty
// traces.
void save_trace(const Trace& trace, const std::string& path, TraceFormat format);

}  // namespace sst
