#pragma once

#include <string>

#include "ladderdet/net.hpp"

namespace ladderdet {

inline constexpr int kCheckpointFormatVersion = 1;

/// Self-describing binary container: magic, a JSON header (format version,
/// architecture, buffer table, Adam step) and raw float32 buffers. Save
/// followed by load round-trips byte-exactly.
void save_checkpoint(const std::string& path, const NetConfig& cfg,
                     const NetParams<float>& params);

struct Checkpoint {
    NetConfig config;
    NetParams<float> params;
};

Checkpoint load_checkpoint(const std::string& path);

} // namespace ladderdet
