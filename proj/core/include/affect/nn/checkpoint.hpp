#pragma once

// Checkpoint layout (version 1):
//
//   affect-checkpoint 1\n
//   tensors <n>\n
//   <name> <rank> <d0> ... <d{rank-1}>\n      (n lines, payload order)
//   payload\n
//   <little-endian float64 values of every tensor, concatenated>

#include <filesystem>
#include <string>
#include <vector>

#include "affect/nn/tensor.hpp"

namespace affect::nn {

inline constexpr int kCheckpointVersion = 1;

struct TensorHeader {
  std::string name;
  std::vector<std::size_t> shape;

  friend bool operator==(const TensorHeader&, const TensorHeader&) = default;
};

void save_checkpoint(const ParamList& params, const std::filesystem::path& path);

/// Loads values into `params`; names and shapes must match the file exactly.
void load_checkpoint(const ParamList& params, const std::filesystem::path& path);

std::vector<TensorHeader> read_checkpoint_header(const std::filesystem::path& path);

}  // namespace affect::nn
