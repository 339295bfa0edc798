#pragma once

#include <filesystem>
#include <optional>

#include "yoloo/lgpenc.hpp"

namespace yoloo {

/// On-disk layout (all integers little-endian):
///
///   bytes 0..7   magic "LGPENC01"
///   bytes 8..15  uint64 header length H
///   next H bytes UTF-8 JSON header
///   remainder    payload of float32 tensors
///
/// The header is
///   {"format": "lgpenc", "version": 1, "dtype": "float32",
///    "layout": "row-major", "tau": <float or null>,
///    "tensors": [{"name": "mlp1.weight", "shape": [64, 3],
///                 "offset": 0, "nbytes": 768}, ...]}
/// with offsets counted from the start of the payload. Tensor names are
/// mlp1..mlp5, attn and fusion (each ".weight" [out, in] and ".bias" [out]),
/// then "alpha" and "beta" [1088].
struct Checkpoint {
  EncoderParams params;
  std::optional<double> tau;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace yoloo
