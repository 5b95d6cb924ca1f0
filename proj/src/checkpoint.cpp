#include "lineart/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstring>
#include <fstream>

#include "lineart/errors.hpp"

namespace lineart {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

std::string dtype_tag(torch::ScalarType type) {
  switch (type) {
    case torch::kFloat32:
      return "F32";
    case torch::kFloat64:
      return "F64";
    case torch::kInt64:
      return "I64";
    default:
      throw ValidationError(std::string("checkpoint: unsupported dtype ") +
                            c10::toString(type));
  }
}

torch::ScalarType dtype_from_tag(const std::string& tag) {
  if (tag == "F32") return torch::kFloat32;
  if (tag == "F64") return torch::kFloat64;
  if (tag == "I64") return torch::kInt64;
  throw IoError("checkpoint: unsupported dtype tag " + tag);
}

}  // namespace

const torch::Tensor& Checkpoint::tensor(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) {
    throw ValidationError("checkpoint: missing tensor " + name);
  }
  return it->second;
}

const std::string& Checkpoint::meta(const std::string& key) const {
  auto it = metadata.find(key);
  if (it == metadata.end()) {
    throw ValidationError("checkpoint: missing metadata " + key);
  }
  return it->second;
}

void save_checkpoint(const Checkpoint& checkpoint, const fs::path& path) {
  json header = json::object();
  header["__metadata__"] = checkpoint.metadata;

  std::vector<torch::Tensor> payload;
  uint64_t offset = 0;
  for (const auto& [name, tensor] : checkpoint.tensors) {
    auto flat = tensor.detach().cpu().contiguous();
    const auto bytes = static_cast<uint64_t>(flat.numel() * flat.element_size());
    header[name] = {{"dtype", dtype_tag(flat.scalar_type())},
                    {"shape", flat.sizes().vec()},
                    {"data_offsets", {offset, offset + bytes}}};
    offset += bytes;
    payload.push_back(flat);
  }

  std::string text = header.dump();
  // Pad the header so the data section is 8-byte aligned.
  while ((text.size() % 8) != 0) text.push_back(' ');

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint: " + path.string());
    const uint64_t n = text.size();
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& flat : payload) {
      out.write(static_cast<const char*>(flat.data_ptr()),
                static_cast<std::streamsize>(flat.numel() * flat.element_size()));
    }
    if (!out) throw IoError("short write on checkpoint: " + path.string());
  }
  fs::rename(tmp, path);
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint: " + path.string());
  uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!in || n == 0 || n > (uint64_t{1} << 30)) {
    throw IoError("corrupt checkpoint header: " + path.string());
  }
  std::string text(n, '\0');
  in.read(text.data(), static_cast<std::streamsize>(n));
  if (!in) throw IoError("truncated checkpoint header: " + path.string());

  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError("corrupt checkpoint header in " + path.string() + ": " + e.what());
  }
  std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  Checkpoint checkpoint;
  for (const auto& [name, entry] : header.items()) {
    if (name == "__metadata__") {
      checkpoint.metadata = entry.get<std::map<std::string, std::string>>();
      continue;
    }
    const auto dtype = dtype_from_tag(entry.at("dtype").get<std::string>());
    const auto shape = entry.at("shape").get<std::vector<int64_t>>();
    const auto offsets = entry.at("data_offsets").get<std::vector<uint64_t>>();
    if (offsets.size() != 2 || offsets[1] < offsets[0] || offsets[1] > data.size()) {
      throw IoError("checkpoint tensor out of range: " + name);
    }
    auto tensor = torch::empty(shape, torch::TensorOptions().dtype(dtype));
    const auto bytes = static_cast<uint64_t>(tensor.numel() * tensor.element_size());
    if (bytes != offsets[1] - offsets[0]) {
      throw IoError("checkpoint tensor size mismatch: " + name);
    }
    std::memcpy(tensor.data_ptr(), data.data() + offsets[0], bytes);
    checkpoint.tensors.emplace(name, std::move(tensor));
  }
  return checkpoint;
}

void export_module(const torch::nn::Module& module, const std::string& prefix,
                   Checkpoint& checkpoint) {
  for (const auto& item : module.named_parameters()) {
    checkpoint.tensors[prefix + item.key()] = item.value().detach().clone();
  }
  for (const auto& item : module.named_buffers()) {
    checkpoint.tensors[prefix + item.key()] = item.value().detach().clone();
  }
}

void import_module(torch::nn::Module& module, const std::string& prefix,
                   const Checkpoint& checkpoint) {
  torch::NoGradGuard no_grad;
  auto assign = [&](const std::string& name, torch::Tensor& target) {
    const auto& source = checkpoint.tensor(prefix + name);
    if (source.sizes() != target.sizes()) {
      throw ValidationError("checkpoint: shape mismatch for " + prefix + name);
    }
    target.copy_(source);
  };
  for (auto& item : module.named_parameters()) assign(item.key(), item.value());
  for (auto& item : module.named_buffers()) assign(item.key(), item.value());
}

}  // namespace lineart
