#include "lineart/sga.hpp"

#include <cmath>

#include "lineart/errors.hpp"

namespace lineart {

torch::Tensor attention_matrix(const torch::Tensor& queries, const torch::Tensor& keys,
                               Normalization mode) {
  if (queries.dim() < 2 || keys.dim() != queries.dim()) {
    throw ValidationError("attention_matrix: expected [B×]L×d operands of equal rank");
  }
  const int64_t d = queries.size(-1);
  if (d < 1 || keys.size(-1) != d) {
    throw ValidationError("attention_matrix: query/key feature sizes differ or are empty");
  }
  if (queries.size(-2) == 0 || keys.size(-2) == 0) {
    throw ValidationError("attention_matrix: empty query or key set");
  }
  if (!torch::isfinite(queries).all().item<bool>() || !torch::isfinite(keys).all().item<bool>()) {
    throw ValidationError("attention_matrix: non-finite input");
  }
  const auto scores = torch::matmul(queries, keys.transpose(-2, -1)) / std::sqrt(static_cast<double>(d));
  return torch::softmax(scores, mode == Normalization::Row ? -1 : -2);
}

SgaBlockImpl::SgaBlockImpl(int64_t dim, int64_t proj_dim, Normalization mode) : mode_(mode) {
  if (proj_dim < 1 || proj_dim > dim) {
    throw ValidationError("SgaBlock: projection size must be in [1, D]");
  }
  const double in_scale = 1.0 / std::sqrt(static_cast<double>(dim));
  const double out_scale = 1.0 / std::sqrt(static_cast<double>(proj_dim));
  w_q = register_parameter("w_q", torch::randn({dim, proj_dim}) * in_scale);
  w_k = register_parameter("w_k", torch::randn({dim, proj_dim}) * in_scale);
  w_v = register_parameter("w_v", torch::randn({dim, proj_dim}) * in_scale);
  w_o = register_parameter("w_o", torch::randn({proj_dim, dim}) * out_scale);
}

torch::Tensor SgaBlockImpl::attention(const torch::Tensor& x_q, const torch::Tensor& x_kv) {
  torch::NoGradGuard no_grad;
  return attention_matrix(torch::matmul(x_q, w_q), torch::matmul(x_kv, w_k), mode_);
}

torch::Tensor SgaBlockImpl::forward(const torch::Tensor& x_q, const torch::Tensor& x_kv) {
  if (x_q.dim() != 3 || x_kv.dim() != 3) {
    throw ValidationError("SgaBlock: expected B×L×D sequences");
  }
  if (x_q.size(-1) != w_q.size(0) || x_kv.size(-1) != w_q.size(0) || x_q.size(0) != x_kv.size(0)) {
    throw ValidationError("SgaBlock: sequence feature size does not match the block");
  }
  torch::Tensor scores;
  if (pinned_ && pinned_attention_.defined()) {
    scores = pinned_attention_;
  } else {
    scores = attention(x_q, x_kv);
    if (pinned_) pinned_attention_ = scores;
  }
  const auto values = torch::matmul(x_kv, w_v);
  return x_q + torch::matmul(torch::matmul(scores, values), w_o);
}

void SgaBlockImpl::pin_attention(bool pinned) {
  pinned_ = pinned;
  pinned_attention_ = torch::Tensor();
}

torch::Tensor fuse_features(const torch::Tensor& line_seq, const torch::Tensor& ref_seq,
                            SgaBlock& cross, SgaBlock& self) {
  if (line_seq.sizes() != ref_seq.sizes()) {
    throw ValidationError("fuse_features: line and reference sequences differ in shape");
  }
  const auto mixed = cross->forward(line_seq, ref_seq);
  return self->forward(mixed, mixed);
}

}  // namespace lineart
