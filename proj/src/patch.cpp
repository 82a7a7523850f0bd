#include "gssl/patch.hpp"

#include <string>

#include "gssl/error.hpp"
#include "gssl/image.hpp"

namespace gssl {

PatchSpec sample_patch_spec(int height, int width, int size, int border, Rng& rng) {
  if (size <= 0 || size > height || size > width) {
    throw ConfigError("patch of side " + std::to_string(size) + " does not fit a " +
                      std::to_string(height) + "x" + std::to_string(width) + " image");
  }
  PatchSpec spec;
  spec.size = size;
  spec.border = border;
  spec.top = static_cast<int>(rng.uniform_int(0, height - size));
  spec.left = static_cast<int>(rng.uniform_int(0, width - size));
  return spec;
}

void check_patch_fits(const PatchSpec& spec, int height, int width) {
  if (spec.size <= 0 || spec.top < 0 || spec.left < 0 || spec.top + spec.size > height ||
      spec.left + spec.size > width) {
    throw ShapeError("patch window [" + std::to_string(spec.top) + "," +
                     std::to_string(spec.left) + "]+" + std::to_string(spec.size) +
                     " outside the " + std::to_string(height) + "x" + std::to_string(width) +
                     " image");
  }
}

torch::Tensor make_mask(int size, int border) {
  if (border < 0 || 2 * border >= size) {
    throw ConfigError("mask border " + std::to_string(border) + " too large for patch side " +
                      std::to_string(size));
  }
  auto mask = torch::zeros({size, size}, torch::kFloat32);
  const int inner = size - 2 * border;
  mask.narrow(0, border, inner).narrow(1, border, inner).fill_(1.0f);
  return mask;
}

torch::Tensor extract_patch(const torch::Tensor& image, const PatchSpec& spec) {
  check_image(image);
  check_patch_fits(spec, static_cast<int>(image.size(1)), static_cast<int>(image.size(2)));
  return image.narrow(1, spec.top, spec.size).narrow(2, spec.left, spec.size).clone();
}

torch::Tensor corrupt_patch(const torch::Tensor& patch, const torch::Tensor& mask,
                            const torch::Tensor& noise) {
  if (patch.sizes() != noise.sizes()) throw ShapeError("noise must match the patch shape");
  if (mask.dim() != 2 || mask.size(0) != patch.size(-2) || mask.size(1) != patch.size(-1)) {
    throw ShapeError("mask must be [P,P] matching the patch");
  }
  return torch::where(mask.to(torch::kBool), noise.to(patch.scalar_type()), patch);
}

torch::Tensor corrupt_patch(const torch::Tensor& patch, const torch::Tensor& mask, Rng& rng) {
  return corrupt_patch(patch, mask, rng.normal_tensor(patch.sizes()));
}

torch::Tensor paste_patch(const torch::Tensor& image, const torch::Tensor& patch,
                          const PatchSpec& spec) {
  check_image(image);
  check_patch_fits(spec, static_cast<int>(image.size(1)), static_cast<int>(image.size(2)));
  if (patch.dim() != 3 || patch.size(0) != image.size(0) || patch.size(1) != spec.size ||
      patch.size(2) != spec.size) {
    throw ShapeError("pasted patch must be [C,P,P] matching the window");
  }
  auto out = image.clone();
  out.narrow(1, spec.top, spec.size).narrow(2, spec.left, spec.size).copy_(patch);
  return out;
}

}  // namespace gssl
