#include "sst/nn/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace sst::nn {

using nlohmann::json;

namespace {
constexpr uint32_t kMagic = 0x53535443;  // "SSTC"
constexpr uint32_t kVersion = 1;
}

void save_checkpoint(const std::string& path, const json& meta,
                     const std::vector<const ParamStore*>& stores) {
    json header = meta;
    header["tensors"] = json::array();
    for (const ParamStore* ps : stores)
        for (const auto& e : ps->entries())
            header["tensors"].push_back({{"name", e.name},
                                         {"rows", e.rows},
                                         {"cols", e.cols},
                                         {"trainable", e.trainable}});
    std::string hs = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    uint32_t magic = kMagic, version = kVersion;
    uint64_t hlen = hs.size();
    out.write(reinterpret_cast<const char*>(&magic), sizeof magic);
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&hlen), sizeof hlen);
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));

    std::vector<float> buf;
    for (const ParamStore* ps : stores)
        for (size_t idx = 0; idx < ps->entries().size(); ++idx) {
            const auto& e = ps->entries()[idx];
            auto m = ps->mat(idx);
            buf.resize(static_cast<size_t>(e.rows) * e.cols);
            size_t at = 0;
            for (int r = 0; r < e.rows; ++r)
                for (int c = 0; c < e.cols; ++c) buf[at++] = static_cast<float>(m(r, c));
            out.write(reinterpret_cast<const char*>(buf.data()),
                      static_cast<std::streamsize>(buf.size() * sizeof(float)));
        }
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

namespace {

json read_header(std::ifstream& in, const std::string& path) {
    uint32_t magic = 0, version = 0;
    uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&magic), sizeof magic);
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&hlen), sizeof hlen);
    if (!in || magic != kMagic) throw std::runtime_error("not a checkpoint file: " + path);
    if (version != kVersion) throw std::runtime_error("unsupported checkpoint version: " + path);
    std::string hs(hlen, '\0');
    in.read(hs.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw std::runtime_error("truncated checkpoint header: " + path);
    return json::parse(hs);
}

}  // namespace

json read_checkpoint_meta(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    return read_header(in, path);
}

json load_checkpoint(const std::string& path, const std::vector<ParamStore*>& stores) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    json header = read_header(in, path);

    size_t filled = 0, expected = 0;
    for (ParamStore* ps : stores) expected += ps->entries().size();

    std::vector<float> buf;
    for (const auto& jt : header.at("tensors")) {
        std::string name = jt.at("name").get<std::string>();
        int rows = jt.at("rows").get<int>();
        int cols = jt.at("cols").get<int>();
        buf.resize(static_cast<size_t>(rows) * cols);
        in.read(reinterpret_cast<char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * sizeof(float)));
        if (!in) throw std::runtime_error("truncated checkpoint tensor " + name + ": " + path);

        bool found = false;
        for (ParamStore* ps : stores) {
            for (size_t idx = 0; idx < ps->entries().size(); ++idx) {
                const auto& e = ps->entries()[idx];
                if (e.name != name) continue;
                if (e.rows != rows || e.cols != cols)
                    throw std::runtime_error("checkpoint tensor shape mismatch for " + name);
                auto m = ps->mat(idx);
                size_t at = 0;
                for (int r = 0; r < rows; ++r)
                    for (int c = 0; c < cols; ++c) m(r, c) = static_cast<double>(buf[at++]);
                found = true;
                ++filled;
                break;
            }
            if (found) break;
        }
        // Tensors for absent stores (e.g. loading only the FEN half)
        // are skipped silently.
    }
    if (filled != expected)
        throw std::runtime_error("checkpoint is missing tensors (" + std::to_string(filled) +
                                 "/" + std::to_string(expected) + "): " + path);
    return header;
}

}  // namespace sst::nn
