#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <torch/torch.h>

// Images are float32 tensors laid out channel-first, [C, H, W], with values
// normalized to [-1, 1]. Batches add a leading N dimension.

namespace gssl {

// The six global transformations the classifier discriminates.
enum class TransformLabel : std::int64_t {
  kIdentity = 0,
  kRot90 = 1,
  kRot180 = 2,
  kRot270 = 3,
  kWarp = 4,
  kInpaint = 5,
};

inline constexpr int kNumTransforms = 6;

inline constexpr std::array<std::string_view, kNumTransforms> kTransformNames = {
    "identity", "rot90", "rot180", "rot270", "warp", "lci"};

constexpr std::int64_t to_index(TransformLabel label) { return static_cast<std::int64_t>(label); }

// Throws ConfigError for values outside 0..5.
TransformLabel label_from_index(std::int64_t index);

// Which transformation families the classifier must discriminate. The
// identity is always part of the task.
struct TransformSet {
  bool rotation = true;
  bool warp = true;
  bool inpaint = true;

  // Accepts a comma separated subset of {rot, warp, lci}; throws ConfigError
  // for unknown or empty lists.
  static TransformSet parse(std::string_view csv);
  std::string to_string() const;
  bool contains(TransformLabel label) const;
  // Enabled labels in ascending order, identity first.
  std::vector<TransformLabel> labels() const;
  bool operator==(const TransformSet&) const = default;
};

// Throws ShapeError unless `image` is a 3-D float tensor.
void check_image(const torch::Tensor& image, std::string_view what = "image");
void check_batch(const torch::Tensor& batch, std::string_view what = "batch");

}  // namespace gssl
