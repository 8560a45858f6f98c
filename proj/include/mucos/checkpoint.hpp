#pragma once
// Binary checkpoint container.
//
// Layout: 8-byte magic "MUCOSCKP", u32 format version, u64 header length,
// UTF-8 JSON header, then every tensor as row-major little-endian f64 in the
// order listed in the header's tensor table. All integers are little-endian.

#include "mucos/model.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>

namespace mucos {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    ModelState state;
    // Free-form run description (task, sampler and training settings).
    nlohmann::json metadata = nlohmann::json::object();
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
// Throws DataError on a malformed, truncated or version-mismatched file.
Checkpoint load_checkpoint(const std::string& path);

nlohmann::json to_json(const EncoderConfig& cfg);
EncoderConfig encoder_config_from_json(const nlohmann::json& j);

}  // namespace mucos
