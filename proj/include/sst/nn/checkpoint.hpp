#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "sst/nn/param_store.hpp"

namespace sst::nn {

// Self-describing container: a JSON header (kind, config echo,
// training log, tensor table) followed by the named tensors as
// row-major 32-bit reals, in table order.
void save_checkpoint(const std::string& path, const nlohmann::json& meta,
                     const std::vector<const ParamStore*>& stores);

// Fills the stores' entries by name from the file (shapes must match;
// every store entry must be present). Returns the header metadata.
nlohmann::json load_checkpoint(const std::string& path, const std::vector<ParamStore*>& stores);

// Reads only the header metadata.
nlohmann::json read_checkpoint_meta(const std::string& path);

}  // namespace sst::nn
