#include "gssl/rotate.hpp"

#include "gssl/error.hpp"

namespace gssl {

torch::Tensor rotate(const torch::Tensor& image, int k) {
  if (image.dim() < 2) throw ShapeError("rotate expects at least two dimensions");
  if (image.size(-1) != image.size(-2)) throw ShapeError("rotate requires a square image");
  k = ((k % 4) + 4) % 4;
  if (k == 0) return image.clone();
  // Viewed with rows going down, rot90 over (H, W) turns the picture
  // counter-clockwise.
  return torch::rot90(image, k, {-2, -1}).contiguous();
}

}  // namespace gssl
