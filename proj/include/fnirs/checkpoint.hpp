#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "fnirs/model.hpp"

namespace fnirs {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Binary layout (little-endian):
//   "FNIRSCKP" u32 version
//   u8 kind, u32 n_widths, u64 widths[n], f64 dropout, u64 classes, u64 steps, u64 channels
//   u32 n_params, then per parameter: u32 name_len, name, u32 rank, u64 dims[rank], f64 values[]
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const ModelState& model);
ModelState deserialize_checkpoint(const std::string& bytes);

void write_checkpoint(const std::filesystem::path& path, const ModelState& model);
ModelState read_checkpoint(const std::filesystem::path& path);

}  // namespace fnirs
