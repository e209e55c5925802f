#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "duet/autodiff.h"

namespace duet {

// Binary checkpoint, bit-exact round trip:
//   "DUET"  magic
//   u32     format version (currently 1)
//   u32     tensor count
//   per tensor:
//     u16   name length, then UTF-8 name
//     u8    rank
//     u32   dims[rank]
//     f32   data, row-major
//   "META"  trailer magic
//   u64     rng seed
//   u64     config digest (fnv1a64 of the resolved config text)
// All integers and floats little-endian.

struct CheckpointMeta {
  uint64_t seed = 0;
  uint64_t config_digest = 0;
};

void save_checkpoint(const std::string& path, const std::vector<FloatTensorPtr>& tensors,
                     const CheckpointMeta& meta);

std::vector<FloatTensorPtr> load_checkpoint(const std::string& path, CheckpointMeta* meta = nullptr);

}  // namespace duet
