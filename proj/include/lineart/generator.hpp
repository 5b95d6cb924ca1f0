#pragma once

#include <torch/torch.h>

#include <vector>

#include "lineart/blocks.hpp"
#include "lineart/sga.hpp"

namespace lineart {

struct GeneratorOptions {
  int64_t image_size = 256;
  int64_t base_channels = 32;  // encoder plan base·{1,2,4,8}
  int64_t res_blocks = 4;

  // Sequence width after FDT: sum of the encoder stage widths.
  int64_t sequence_dim() const { return base_channels * 15; }
  // Residual trunk / fusion projection width.
  int64_t trunk_channels() const { return base_channels * 8; }
  int64_t bottleneck_size() const { return image_size / 16; }
  void validate() const;
};

// Reference-based colorization generator.
//
//   line ──E_l──▶ F_l ──FDT──▶ V_l ─┐
//                                    ├─ cross SGA ─▶ self SGA ─▶ V_f
//   ref  ──E_r──▶ F_r ──FDT──▶ V_r ─┘
//
//   V_f + V_l ─▶ linear D→trunk ─▶ reshape ─▶ residual blocks ─▶ U-Net decoder (skips from
//   E_l and the line input) ─▶ tanh
class GeneratorImpl : public torch::nn::Module {
 public:
  explicit GeneratorImpl(GeneratorOptions options = {});

  // line: B×1×H×W, reference: B×3×H×W, both in [-1,1] → B×3×H×W in [-1,1].
  torch::Tensor forward(const torch::Tensor& line, const torch::Tensor& reference);

  // Multi-scale encoder features (finest first).
  std::vector<torch::Tensor> encode_line(const torch::Tensor& line);
  std::vector<torch::Tensor> encode_reference(const torch::Tensor& reference);

  const GeneratorOptions& options() const { return options_; }

  // Pins both fusion blocks' attention matrices (see SgaBlockImpl::pin_attention).
  void pin_attention(bool pinned);

  Encoder line_encoder{nullptr};
  Encoder ref_encoder{nullptr};
  SgaBlock cross{nullptr};
  SgaBlock self{nullptr};
  torch::nn::Linear fusion{nullptr};
  torch::nn::Sequential trunk{nullptr};
  UNetDecoder decoder{nullptr};

 private:
  GeneratorOptions options_;
};
TORCH_MODULE(Generator);

// Single-image convenience wrapper: C×H×W tensors in, 3×H×W out, no gradient.
torch::Tensor generate(Generator& net, const torch::Tensor& line, const torch::Tensor& reference);

}  // namespace lineart
