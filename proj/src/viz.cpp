#include "gssl/viz.hpp"

#include <cmath>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "gssl/data.hpp"
#include "gssl/error.hpp"
#include "gssl/image.hpp"

namespace gssl {

void save_png(const std::filesystem::path& path, const torch::Tensor& image, int scale) {
  check_image(image);
  if (scale < 1) throw ConfigError("scale must be positive");
  auto u8 = denormalize(image.to(torch::kFloat32).clamp(-1, 1));
  cv::Mat rgb(static_cast<int>(u8.size(0)), static_cast<int>(u8.size(1)), CV_8UC3, u8.data_ptr());
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  if (scale > 1) cv::resize(bgr, bgr, cv::Size(), scale, scale, cv::INTER_NEAREST);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), bgr)) throw FormatError("could not write " + path.string());
}

Grid image_grid(const std::vector<torch::Tensor>& tiles, int cols, int pad) {
  if (tiles.empty()) throw ShapeError("grid needs at least one tile");
  if (cols < 1) throw ConfigError("grid needs at least one column");
  const auto h = tiles.front().size(1), w = tiles.front().size(2);
  Grid g;
  g.tiles = static_cast<int>(tiles.size());
  g.cols = std::min(cols, g.tiles);
  g.rows = (g.tiles + g.cols - 1) / g.cols;
  g.image = torch::full({3, g.rows * (h + pad) + pad, g.cols * (w + pad) + pad}, -1.0f);
  for (int i = 0; i < g.tiles; ++i) {
    const auto& t = tiles[static_cast<std::size_t>(i)];
    if (t.dim() != 3 || t.size(1) != h || t.size(2) != w) throw ShapeError("grid tiles differ in shape");
    const auto tile = t.size(0) == 3 ? t : t.mean(0, true).expand({3, h, w});
    g.image.narrow(1, pad + (i / g.cols) * (h + pad), h).narrow(2, pad + (i % g.cols) * (w + pad), w).copy_(tile);
  }
  return g;
}

Grid filter_grid(const torch::Tensor& weight, int pad) {
  if (weight.dim() != 4) throw ShapeError("filters must be [out, in, k, k]");
  std::vector<torch::Tensor> tiles;
  for (std::int64_t o = 0; o < weight.size(0); ++o) {
    auto f = weight[o].detach().to(torch::kFloat32);
    if (f.size(0) != 3) f = f.mean(0, true).expand({3, f.size(1), f.size(2)});
    const auto lo = f.min(), hi = f.max();
    const auto span = (hi - lo).clamp_min(1e-12);
    tiles.push_back(((f - lo) / span) * 2 - 1);
  }
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(tiles.size()))));
  return image_grid(tiles, cols, pad);
}

torch::Tensor outline_window(const torch::Tensor& image, const PatchSpec& spec) {
  check_image(image);
  check_patch_fits(spec, static_cast<int>(image.size(1)), static_cast<int>(image.size(2)));
  auto out = image.clone();
  const auto red = torch::tensor({1.0f, -1.0f, -1.0f}).view({3, 1});
  const int t = spec.top, l = spec.left, s = spec.size;
  out.narrow(1, t, 1).narrow(2, l, s).copy_(red.expand({3, s}).view({3, 1, s}));
  out.narrow(1, t + s - 1, 1).narrow(2, l, s).copy_(red.expand({3, s}).view({3, 1, s}));
  out.narrow(1, t, s).narrow(2, l, 1).copy_(red.expand({3, s}).view({3, s, 1}));
  out.narrow(1, t, s).narrow(2, l + s - 1, 1).copy_(red.expand({3, s}).view({3, s, 1}));
  return out;
}

}  // namespace gssl
