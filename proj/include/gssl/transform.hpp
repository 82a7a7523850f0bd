#pragma once

#include <functional>
#include <optional>

#include <torch/torch.h>

#include "gssl/image.hpp"
#include "gssl/patch.hpp"
#include "gssl/rng.hpp"
#include "gssl/warp.hpp"

namespace gssl {

// Maps a batch of patches [N,C,P,P] to a batch of the same shape.
using PatchMap = std::function<torch::Tensor(const torch::Tensor&)>;

// Parameters and handles apply_transform needs; fresh warp and patch
// parameters are drawn from `rng` on every call.
struct TransformContext {
  Rng* rng = nullptr;
  int warp_grid = 4;
  std::optional<double> warp_max_offset;
  int spline_order = 2;
  int patch_size = 16;
  int border = 2;
  PatchMap inpainter;
};

// Everything needed to reproduce a transformed image from its source.
struct TransformTrace {
  TransformLabel label = TransformLabel::kIdentity;
  std::optional<WarpSpec> warp;
  std::optional<PatchSpec> patch;
  torch::Tensor inpainted;  // r_i, [C,P,P], only for kInpaint
};

struct TransformResult {
  torch::Tensor image;
  TransformTrace trace;
};

// Limited context inpainting of one window: corrupt the patch center with
// noise, inpaint it, paste the result back.
struct InpaintResult {
  torch::Tensor image;      // composed image
  torch::Tensor original;   // e_i
  torch::Tensor corrupted;  // e_i * (1 - m) + z * m
  torch::Tensor inpainted;  // r_i
};
InpaintResult inpaint_window(const torch::Tensor& image, const PatchSpec& spec,
                             const PatchMap& inpainter, Rng& rng);

// Throws ConfigError for kInpaint without an inpainter or a missing rng.
TransformResult apply_transform_traced(const torch::Tensor& image, TransformLabel label,
                                       TransformContext& ctx);
torch::Tensor apply_transform(const torch::Tensor& image, TransformLabel label,
                              TransformContext& ctx);

// Re-applies a recorded transformation; bit-identical to the original output.
torch::Tensor replay_transform(const torch::Tensor& source, const TransformTrace& trace);

}  // namespace gssl
