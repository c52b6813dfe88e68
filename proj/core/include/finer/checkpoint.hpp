#pragma once

#include <string>

#include "finer/mlp.hpp"

namespace finer {

inline constexpr const char* kCheckpointMagic = "FINER-CKPT-1";

struct Checkpoint {
  Mlp mlp;
  InitScheme scheme;  ///< the draw the network started from
};

/// Layout: the magic string and a newline, one line of JSON metadata (dims,
/// activation, ω₀, σ, k, seed, bias scope, encoder, parameter count), then the
/// parameters as little-endian float64 in layer order (weights row-major,
/// then biases).
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace finer
