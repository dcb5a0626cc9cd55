#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sst/trace.hpp"

namespace sst {

// Channel order is a stable contract: trained model weights depend on it.
enum IntervalChannel {
    kDirsUp = 0,
    kDirsDown,
    kDirsSum,
    kDirsSub,
    kSizeUp,
    kSizeDown,
    kSizeSum,
    kSizeSub,
    kCumulNorm,
    kIntervalChannels
};

// Time-binned multi-channel view of a trace. Bins are half-open
// [b*dt, (b+1)*dt) on the shared chain clock, so correlated traces
// stay index-aligned regardless of packet counts.
struct IntervalTensor {
    int bins = 0;
    double dt = 0.0;
    std::vector<double> data;  // kIntervalChannels rows, row-major

    double& at(int channel, int bin) { return data[static_cast<size_t>(channel) * bins + bin]; }
    double at(int channel, int bin) const { return data[static_cast<size_t>(channel) * bins + bin]; }
};

enum PacketChannel {
    kPktDirs = 0,
    kPktIat,
    kPktSizeDir,
    kPktBurstEdges,
    kPacketChannels
};

struct PacketTensor {
    int max_len = 0;
    int populated = 0;         // unpadded prefix length
    std::vector<double> data;  // kPacketChannels rows, row-major

    double& at(int channel, int i) { return data[static_cast<size_t>(channel) * max_len + i]; }
    double at(int channel, int i) const { return data[static_cast<size_t>(channel) * max_len + i]; }
};

// Bins packets relative to `origin` (the chain clock zero, not the
// per-trace first packet). Packets beyond bin T-1 are dropped.
// cumul_norm[b] is the running signed byte total through bin b divided
// by the total absolute signed bytes within the binned span (0 when
// the span is empty).
IntervalTensor interval_features(const Trace& trace, double dt = 0.030, int bins = 1200,
                                 double origin = 0.0);

// First max_len packets encoded as dirs / inter-arrival / size*dir /
// burst-edge rows; shorter traces zero-padded, iat[0] = 0.
PacketTensor packet_features(const Trace& trace, int max_len = 4096);

// Flat binary tensor container: magic, channel count, length, dt,
// then row-major 32-bit reals.
void save_feature_tensor(const std::string& path, const std::vector<double>& data, int channels,
                         int length, double dt);
std::vector<double> load_feature_tensor(const std::string& path, int& channels, int& length,
                                        double& dt);

void save_interval_tensor(const IntervalTensor& t, const std::string& path);
IntervalTensor load_interval_tensor(const std::string& path);

}  // namespace sst
