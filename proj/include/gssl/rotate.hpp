#pragma once

#include <torch/torch.h>

namespace gssl {

// Counter-clockwise rotation by k * 90 degrees as a pure index permutation of
// the last two dimensions. Works on [C,H,W] and [N,C,H,W]. k is taken mod 4.
// Throws ShapeError for non-square images.
torch::Tensor rotate(const torch::Tensor& image, int k);

}  // namespace gssl
