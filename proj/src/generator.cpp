#include "lineart/generator.hpp"

#include "lineart/errors.hpp"
#include "lineart/image.hpp"

namespace lineart {

void GeneratorOptions::validate() const {
  if (base_channels < 1) throw ValidationError("generator: base_channels must be >= 1");
  if (res_blocks < 0) throw ValidationError("generator: res_blocks must be >= 0");
  if (image_size < 16 || image_size % 16 != 0) {
    throw ValidationError("generator: image_size must be a positive multiple of 16");
  }
}

GeneratorImpl::GeneratorImpl(GeneratorOptions options) : options_(options) {
  options_.validate();
  const int64_t base = options_.base_channels;
  const int64_t dim = options_.sequence_dim();
  line_encoder = register_module("line_encoder", Encoder(1, base, true));
  ref_encoder = register_module("ref_encoder", Encoder(3, base, true));
  cross = register_module("cross", SgaBlock(dim, dim / 2, Normalization::Row));
  self = register_module("self", SgaBlock(dim, dim / 2, Normalization::Column));
  fusion = register_module("fusion", torch::nn::Linear(dim, options_.trunk_channels()));
  trunk = register_module("trunk", torch::nn::Sequential());
  for (int64_t i = 0; i < options_.res_blocks; ++i) {
    trunk->push_back(ResBlock(options_.trunk_channels()));
  }
  decoder = register_module("decoder", UNetDecoder(base, options_.trunk_channels(), 1, 3));
}

std::vector<torch::Tensor> GeneratorImpl::encode_line(const torch::Tensor& line) {
  return line_encoder->forward(line);
}

std::vector<torch::Tensor> GeneratorImpl::encode_reference(const torch::Tensor& reference) {
  return ref_encoder->forward(reference);
}

torch::Tensor GeneratorImpl::forward(const torch::Tensor& line, const torch::Tensor& reference) {
  const int64_t size = options_.image_size;
  if (line.dim() != 4 || reference.dim() != 4 || line.size(2) != size || line.size(3) != size ||
      reference.size(2) != size || reference.size(3) != size || line.size(0) != reference.size(0)) {
    throw ValidationError("generator: inputs must be B×C×" + std::to_string(size) + "×" +
                          std::to_string(size));
  }
  const auto line_maps = encode_line(line);
  const auto ref_maps = encode_reference(reference);
  const auto line_seq = feature_dim_transform(line_maps);
  const auto ref_seq = feature_dim_transform(ref_maps);
  const auto fused = fuse_features(line_seq, ref_seq, cross, self);

  const int64_t side = line_maps.back().size(2);
  auto z = sequence_to_map(fusion->forward(fused + line_seq), side, line_maps.back().size(3));
  if (!trunk->is_empty()) z = trunk->forward(z);
  return decoder->forward(z, line_maps, line);
}

void GeneratorImpl::pin_attention(bool pinned) {
  cross->pin_attention(pinned);
  self->pin_attention(pinned);
}

torch::Tensor generate(Generator& net, const torch::Tensor& line, const torch::Tensor& reference) {
  check_image(line, 1, "generate(line)");
  check_image(reference, 3, "generate(reference)");
  torch::NoGradGuard no_grad;
  return net->forward(line.unsqueeze(0), reference.unsqueeze(0)).squeeze(0);
}

}  // namespace lineart
