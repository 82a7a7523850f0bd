#pragma once

#include <filesystem>
#include <vector>

#include <torch/torch.h>

#include "gssl/patch.hpp"

namespace gssl {

// Writes a [3, H, W] image in [-1, 1] as PNG, scaled up by an integer factor
// with nearest-neighbor sampling.
void save_png(const std::filesystem::path& path, const torch::Tensor& image, int scale = 1);

struct Grid {
  torch::Tensor image;  // [3, H, W]
  int rows = 0, cols = 0, tiles = 0;
};

// Tiles equally sized [3, h, w] images row-major with `pad` pixels of
// separation; unused cells stay black.
Grid image_grid(const std::vector<torch::Tensor>& tiles, int cols, int pad = 1);

// One tile per output filter of a [out, in, k, k] weight, each rescaled to
// span [-1, 1]. Inputs with other than 3 channels show their channel mean.
Grid filter_grid(const torch::Tensor& weight, int pad = 1);

// One-pixel red outline just inside the window.
torch::Tensor outline_window(const torch::Tensor& image, const PatchSpec& spec);

}  // namespace gssl
