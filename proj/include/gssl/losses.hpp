#pragma once

#include <vector>

#include <torch/torch.h>

#include "gssl/image.hpp"

namespace gssl {

// Mean cross entropy of [M, 6] logits against [M] labels, with the softmax
// taken over the enabled classes only. Throws ConfigError if a label is not
// enabled.
torch::Tensor ssl_cross_entropy(const torch::Tensor& logits, const torch::Tensor& labels,
                                const std::vector<TransformLabel>& enabled);

// Arg-max over the enabled classes, as transform label indices.
torch::Tensor predict_enabled(const torch::Tensor& logits, const std::vector<TransformLabel>& enabled);

// Hinge adversarial losses:
//   D: mean(max(0, 1 - s_real)) + mean(max(0, 1 + s_fake))
//   G: -mean(s_fake)
torch::Tensor hinge_d_loss(const torch::Tensor& real_scores, const torch::Tensor& fake_scores);
torch::Tensor hinge_g_loss(const torch::Tensor& fake_scores);

// Mean squared difference over the border ring, i.e. the entries where the
// [P,P] mask is 0. Patches are [..., P, P].
torch::Tensor border_loss(const torch::Tensor& inpainted, const torch::Tensor& original,
                          const torch::Tensor& mask);

// Mean squared reconstruction error over all entries.
torch::Tensor autoencode_loss(const torch::Tensor& reconstructed, const torch::Tensor& original);

}  // namespace gssl
