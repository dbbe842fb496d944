#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "ecl/nn.hpp"

namespace ecl {

// Checkpoint document (JSON, version 1):
//
//   {
//     "format": "ecl-checkpoint",
//     "version": 1,
//     "networks": {
//       "<name>": {
//         "layers": [
//           {"in": I, "out": O, "activation": "relu" | "identity",
//            "weights": [O*I doubles, row-major: weights[o*I + i]],
//            "bias": [O doubles]}
//         ]
//       }
//     }
//   }
//
// Doubles are written in shortest round-trip form, so save -> load is exact.

using NamedNetworks = std::map<std::string, Network>;

std::string checkpoint_to_string(const NamedNetworks& nets);
NamedNetworks checkpoint_from_string(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const NamedNetworks& nets);
NamedNetworks load_checkpoint(const std::filesystem::path& path);

}  // namespace ecl
