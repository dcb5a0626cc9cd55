#include "sst/features.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sst {

IntervalTensor interval_features(const Trace& trace, double dt, int bins, double origin) {
    if (!(dt > 0.0)) throw std::invalid_argument("interval_features: dt must be > 0");
    if (bins < 1) throw std::invalid_argument("interval_features: bins must be >= 1");

    IntervalTensor t;
    t.bins = bins;
    t.dt = dt;
    t.data.assign(static_cast<size_t>(kIntervalChannels) * bins, 0.0);

    // First pass: per-bin counts and byte totals.
    std::vector<double> signed_bytes(bins, 0.0);
    double total_abs = 0.0;
    for (const auto& p : trace.packets) {
        double rel = p.t - origin;
        if (rel < 0.0) continue;
        int b = static_cast<int>(std::floor(rel / dt));
        if (b < 0 || b >= bins) continue;
        if (p.dir > 0) {
            t.at(kDirsUp, b) += 1.0;
            t.at(kSizeUp, b) += static_cast<double>(p.size);
        } else {
            t.at(kDirsDown, b) += 1.0;
            t.at(kSizeDown, b) += static_cast<double>(p.size);
        }
        double sb = static_cast<double>(p.dir) * static_cast<double>(p.size);
        signed_bytes[b] += sb;
        total_abs += std::abs(sb);
    }

    double running = 0.0;
    for (int b = 0; b < bins; ++b) {
        t.at(kDirsSum, b) = t.at(kDirsUp, b) + t.at(kDirsDown, b);
        t.at(kDirsSub, b) = t.at(kDirsUp, b) - t.at(kDirsDown, b);
        t.at(kSizeSum, b) = t.at(kSizeUp, b) + t.at(kSizeDown, b);
        t.at(kSizeSub, b) = t.at(kSizeUp, b) - t.at(kSizeDown, b);
        running += signed_bytes[b];
        t.at(kCumulNorm, b) = total_abs > 0.0 ? running / total_abs : 0.0;
    }
    return t;
}

PacketTensor packet_features(const Trace& trace, int max_len) {
    if (max_len < 1) throw std::invalid_argument("packet_features: max_len must be >= 1");

    PacketTensor t;
    t.max_len = max_len;
    t.populated = static_cast<int>(std::min<size_t>(trace.packets.size(), max_len));
    t.data.assign(static_cast<size_t>(kPacketChannels) * max_len, 0.0);

    for (int i = 0; i < t.populated; ++i) {
        const auto& p = trace.packets[i];
        t.at(kPktDirs, i) = static_cast<double>(p.dir);
        t.at(kPktIat, i) = i == 0 ? 0.0 : p.t - trace.packets[i - 1].t;
        t.at(kPktSizeDir, i) = static_cast<double>(p.dir) * static_cast<double>(p.size);
        t.at(kPktBurstEdges, i) =
            i == 0 ? 0.0 : static_cast<double>(p.dir - trace.packets[i - 1].dir);
    }
    return t;
}

namespace {
constexpr uint32_t kTensorMagic = 0x53535446;  // "SSTF"
}

void save_feature_tensor(const std::string& path, const std::vector<double>& data, int channels,
                         int length, double dt) {
    if (data.size() != static_cast<size_t>(channels) * length)
        throw std::invalid_argument("save_feature_tensor: size mismatch");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write tensor: " + path);
    uint32_t magic = kTensorMagic, c = channels, l = length;
    out.write(reinterpret_cast<const char*>(&magic), sizeof magic);
    out.write(reinterpret_cast<const char*>(&c), sizeof c);
    out.write(reinterpret_cast<const char*>(&l), sizeof l);
    out.write(reinterpret_cast<const char*>(&dt), sizeof dt);
    std::vector<float> f(data.size());
    for (size_t i = 0; i < data.size(); ++i) f[i] = static_cast<float>(data[i]);
    out.write(reinterpret_cast<const char*>(f.data()),
              static_cast<std::streamsize>(f.size() * sizeof(float)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<double> load_feature_tensor(const std::string& path, int& channels, int& length,
                                        double& dt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open tensor: " + path);
    uint32_t magic = 0, c = 0, l = 0;
    in.read(reinterpret_cast<char*>(&magic), sizeof magic);
    in.read(reinterpret_cast<char*>(&c), sizeof c);
    in.read(reinterpret_cast<char*>(&l), sizeof l);
    in.read(reinterpret_cast<char*>(&dt), sizeof dt);
    if (!in || magic != kTensorMagic) throw std::runtime_error("bad tensor header: " + path);
    std::vector<float> f(static_cast<size_t>(c) * l);
    in.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(float)));
    if (!in) throw std::runtime_error("truncated tensor: " + path);
    channels = static_cast<int>(c);
    length = static_cast<int>(l);
    std::vector<double> d(f.size());
    for (size_t i = 0; i < f.size(); ++i) d[i] = static_cast<double>(f[i]);
    return d;
}

void save_interval_tensor(const IntervalTensor& t, const std::string& path) {
    save_feature_tensor(path, t.data, kIntervalChannels, t.bins, t.dt);
}

IntervalTensor load_interval_tensor(const std::string& path) {
    IntervalTensor t;
    int channels = 0;
    t.data = load_feature_tensor(path, channels, t.bins, t.dt);
    if (channels != kIntervalChannels)
        throw std::runtime_error("tensor is not an interval tensor: " + path);
    return t;
}

}  // namespace sst
