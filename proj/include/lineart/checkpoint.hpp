#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <map>
#include <string>

namespace lineart {

// A named set of tensors plus string metadata, stored in the safetensors layout:
//
//   u64 little-endian N | N bytes of JSON header | raw little-endian tensor bytes
//
// The header maps each tensor name to {"dtype", "shape", "data_offsets"} and carries a
// "__metadata__" object of string values. Tensors are written in name order, so the
// file for a given set of tensors and metadata is byte-stable.
struct Checkpoint {
  std::map<std::string, torch::Tensor> tensors;
  std::map<std::string, std::string> metadata;

  const torch::Tensor& tensor(const std::string& name) const;
  const std::string& meta(const std::string& key) const;
  bool has_meta(const std::string& key) const { return metadata.count(key) != 0; }
};

// Supported dtypes: float32 ("F32"), float64 ("F64"), int64 ("I64").
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies every parameter and buffer of `module` into `checkpoint` as "<prefix><name>".
void export_module(const torch::nn::Module& module, const std::string& prefix,
                   Checkpoint& checkpoint);

// Inverse of export_module. Every parameter and buffer must be present with a matching
// shape; throws ValidationError otherwise.
void import_module(torch::nn::Module& module, const std::string& prefix,
                   const Checkpoint& checkpoint);

}  // namespace lineart
