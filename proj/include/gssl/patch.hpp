#pragma once

#include <torch/torch.h>

#include "gssl/rng.hpp"

namespace gssl {

// Square window of side `size` anchored at (top, left), with a preserved
// border ring `border` pixels wide.
struct PatchSpec {
  int top = 0;
  int left = 0;
  int size = 0;
  int border = 2;

  bool contains(int row, int col) const {
    return row >= top && row < top + size && col >= left && col < left + size;
  }
};

// Anchor drawn uniformly over the positions where the window fits inside the
// image. Throws ConfigError if it cannot fit.
PatchSpec sample_patch_spec(int height, int width, int size, int border, Rng& rng);

// Throws ShapeError unless the window lies inside a height x width image.
void check_patch_fits(const PatchSpec& spec, int height, int width);

// [P, P] float32: 1 in the center, 0 on the border ring. Throws ConfigError
// unless 2 * border < size and border >= 0.
torch::Tensor make_mask(int size, int border);

// Exact copy of the window, [C, P, P].
torch::Tensor extract_patch(const torch::Tensor& image, const PatchSpec& spec);

// Border pixels kept bit-exact; center replaced by standard normal noise.
torch::Tensor corrupt_patch(const torch::Tensor& patch, const torch::Tensor& mask, Rng& rng);
// Same, with caller-provided noise of the patch's shape.
torch::Tensor corrupt_patch(const torch::Tensor& patch, const torch::Tensor& mask,
                            const torch::Tensor& noise);

// Copy of `image` with the window overwritten by `patch`. Differentiable with
// respect to both inputs.
torch::Tensor paste_patch(const torch::Tensor& image, const torch::Tensor& patch,
                          const PatchSpec& spec);

}  // namespace gssl
