#pragma once

// Versioned binary checkpoint container.
//
// Layout (little-endian):
//   "MAPEL1"                        6-byte magic
//   u32 format version
//   u64 config hash
//   u32 length, bytes               canonical run text
//   u32 epoch
//   u32 tensor count, then per tensor:
//     u32 name length, name bytes, u32 rows, u32 cols, f32[rows*cols]
//   u64 optimizer step
//   f32 first moments, f32 second moments (tensor order, no headers)

#include <cstdint>
#include <string>

#include "mapel/config.hpp"
#include "mapel/nn.hpp"
#include "mapel/qlearning.hpp"

namespace mapel {

inline constexpr char kCheckpointMagic[] = "MAPEL1";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  RunConfig run;
  std::uint64_t config_hash = 0;
  int epoch = 0;
  nn::ParamSet<float> params;
  AdamState<float> optimizer;
};

std::string serialize_checkpoint(const Checkpoint& checkpoint);
/// Throws CheckpointVersionMismatch on a foreign magic or version and
/// CorruptRecord on truncated data.
Checkpoint parse_checkpoint(const std::string& bytes);

void write_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace mapel
