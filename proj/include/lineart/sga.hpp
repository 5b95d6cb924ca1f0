#pragma once

#include <torch/torch.h>

namespace lineart {

// Axis along which attention scores are softmax-normalized.
//   Row:    every query row sums to 1 over the keys.
//   Column: every key column sums to 1 over the queries.
enum class Normalization { Row, Column };

// softmax(Q Kᵀ / √d) normalized along `mode`. Accepts [B×]L_q×d and [B×]L_k×d.
torch::Tensor attention_matrix(const torch::Tensor& queries, const torch::Tensor& keys,
                               Normalization mode);

// Stop-gradient attention block with a short connection:
//
//   Y = X_q + (A · (X_kv W_v)) W_o,   A = attention_matrix(X_q W_q, X_kv W_k)
//
// A is detached before it multiplies the values, so the backward pass never reaches
// W_q, W_k, or the inputs through the scores. The value path and the residual carry
// gradient normally.
class SgaBlockImpl : public torch::nn::Module {
 public:
  SgaBlockImpl(int64_t dim, int64_t proj_dim, Normalization mode);

  // x_q: B×L_q×D, x_kv: B×L_k×D → B×L_q×D.
  torch::Tensor forward(const torch::Tensor& x_q, const torch::Tensor& x_kv);

  // Attention weights for the given inputs (no gradient).
  torch::Tensor attention(const torch::Tensor& x_q, const torch::Tensor& x_kv);

  Normalization mode() const { return mode_; }

  // While pinned, the attention matrix computed by the next forward is reused by every
  // later forward. Finite differences of the pinned block therefore see the same
  // constant-attention surrogate that backward differentiates.
  void pin_attention(bool pinned);

  torch::Tensor w_q, w_k, w_v, w_o;

 private:
  Normalization mode_;
  bool pinned_ = false;
  torch::Tensor pinned_attention_;
};
TORCH_MODULE(SgaBlock);

// Cross-attention (queries from the line features, keys/values from the reference,
// row-normalized) followed by self-attention over the result (column-normalized).
torch::Tensor fuse_features(const torch::Tensor& line_seq, const torch::Tensor& ref_seq,
                            SgaBlock& cross, SgaBlock& self);

}  // namespace lineart
