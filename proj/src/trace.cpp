#include "sst/trace.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace sst {

using nlohmann::json;

TraceFormat trace_format_from_string(const std::string& s) {
    if (s == "csv") return TraceFormat::Csv;
    if (s == "jsonl") return TraceFormat::Jsonl;
    throw TraceError("unknown trace format: " + s);
}

namespace {

void validate_record(const PacketRecord& p, const std::string& path, size_t line) {
    auto fail = [&](const std::string& what) {
        throw TraceError(path + ":" + std::to_string(line) + ": " + what);
    };
    if (p.dir != 1 && p.dir != -1) fail("direction must be +1 or -1");
    if (p.size < 1) fail("size must be >= 1");
    if (!(p.t >= 0.0)) fail("timestamp must be >= 0");
}

double parse_double(const std::string& s, const std::string& path, size_t line) {
    const char* b = s.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(b, &end);
    if (end == b || errno == ERANGE)
        throw TraceError(path + ":" + std::to_string(line) + ": bad number '" + s + "'");
    while (*end == ' ') ++end;
    if (*end != '\0')
        throw TraceError(path + ":" + std::to_string(line) + ": trailing junk '" + s + "'");
    return v;
}

int64_t parse_int(const std::string& s, const std::string& path, size_t line) {
    double v = parse_double(s, path, line);
    int64_t i = static_cast<int64_t>(v);
    if (static_cast<double>(i) != v)
        throw TraceError(path + ":" + std::to_string(line) + ": expected integer '" + s + "'");
    return i;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

// Shortest decimal that parses back to the same double, padded to at
// least 9 fractional digits.
std::string format_timestamp(double t) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), t, std::chars_format::fixed);
    std::string s(buf, res.ptr);
    auto dot = s.find('.');
    if (dot == std::string::npos) {
        s += '.';
        dot = s.size() - 1;
    }
    size_t frac = s.size() - dot - 1;
    if (frac < 9) s.append(9 - frac, '0');
    return s;
}

Trace load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TraceError("cannot open trace file: " + path);
    Trace trace;
    std::string line;
    size_t lineno = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!saw_header) {
            if (line != "timestamp_s,direction,size_bytes")
                throw TraceError(path + ":1: expected header 'timestamp_s,direction,size_bytes'");
            saw_header = true;
            continue;
        }
        auto fields = split_csv(line);
        if (fields.size() != 3)
            throw TraceError(path + ":" + std::to_string(lineno) + ": expected 3 fields, got " +
                             std::to_string(fields.size()));
        PacketRecord p;
        p.t = parse_double(fields[0], path, lineno);
        p.dir = static_cast<int>(parse_int(fields[1], path, lineno));
        p.size = parse_int(fields[2], path, lineno);
        validate_record(p, path, lineno);
        trace.packets.push_back(p);
    }
    if (!saw_header) throw TraceError("empty trace file: " + path);
    return trace;
}

Trace load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TraceError("cannot open trace file: " + path);
    Trace trace;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw TraceError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.contains("t") || !j.contains("d") || !j.contains("s"))
            throw TraceError(path + ":" + std::to_string(lineno) + ": record needs keys t, d, s");
        PacketRecord p;
        p.t = j.at("t").get<double>();
        p.dir = j.at("d").get<int>();
        p.size = j.at("s").get<int64_t>();
        validate_record(p, path, lineno);
        trace.packets.push_back(p);
    }
    return trace;
}

}  // namespace

void finalize_trace(Trace& trace) {
    std::stable_sort(trace.packets.begin(), trace.packets.end(),
                     [](const PacketRecord& a, const PacketRecord& b) { return a.t < b.t; });
}

Trace load_trace(const std::string& path, TraceFormat format) {
    Trace trace = format == TraceFormat::Csv ? load_csv(path) : load_jsonl(path);
    if (trace.packets.empty()) throw TraceError("empty trace: " + path);
    finalize_trace(trace);
    return trace;
}

void save_trace(const Trace& trace, const std::string& path, TraceFormat format) {
    if (trace.packets.empty()) throw TraceError("refusing to save empty trace: " + path);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw TraceError("cannot open for writing: " + path);
    if (format == TraceFormat::Csv) {
        out << "timestamp_s,direction,size_bytes\n";
        for (const auto& p : trace.packets)
            out << format_timestamp(p.t) << ',' << p.dir << ',' << p.size << '\n';
    } else {
        for (const auto& p : trace.packets) {
            json j;
            j["t"] = p.t;
            j["d"] = p.dir;
            j["s"] = p.size;
            out << j.dump() << '\n';
        }
    }
    out.flush();
    if (!out) throw TraceError("write failed: " + path);
}

}  // namespace sst
