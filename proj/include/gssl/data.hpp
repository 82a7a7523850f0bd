#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "gssl/rng.hpp"

namespace gssl {

// uint8 [H, W, 3] (RGB) -> float32 [3, H, W] in [-1, 1].
torch::Tensor normalize(const torch::Tensor& hwc_u8);
// Inverse of normalize, rounding to the nearest level; clamps out-of-range
// values.
torch::Tensor denormalize(const torch::Tensor& chw);

struct AugmentFlags {
  bool random_crop = false;
  int crop_size = 0;  // output side when random_crop is on
  bool horizontal_flip = false;
  double flip_probability = 0.5;
};
void to_json(nlohmann::json& j, const AugmentFlags& f);
void from_json(const nlohmann::json& j, AugmentFlags& f);

// Optional random crop, then optional horizontal flip. Throws ConfigError if
// the crop exceeds the image.
torch::Tensor augment(const torch::Tensor& image, const AugmentFlags& flags, Rng& rng);
torch::Tensor center_crop(const torch::Tensor& image, int size);
torch::Tensor horizontal_flip(const torch::Tensor& image);

struct Dataset {
  torch::Tensor images;  // [N, 3, H, W] in [-1, 1]
  torch::Tensor labels;  // [N] int64
  int num_classes = 0;
  std::int64_t skipped = 0;  // undecodable inputs
  std::string source;
  std::vector<std::string> class_names;

  std::int64_t size() const { return images.defined() ? images.size(0) : 0; }
  std::pair<torch::Tensor, std::int64_t> operator[](std::int64_t i) const {
    return {images[i], labels[i].item<std::int64_t>()};
  }
};

// Source forms:
//   synthetic:generic, synthetic:face  generated from (seed, split)
//   a directory                        one subdirectory per class, images inside
//   a *.gssl file                      archive written by save_dataset_archive
struct DatasetSpec {
  std::string source = "synthetic:generic";
  std::string split = "unlabeled";  // synthetic only: unlabeled | train | test
  std::int64_t size = 2000;         // synthetic only
  int image_size = 36;              // synthetic render size; resize target for directories (0 = keep)
  int num_classes = 8;              // synthetic only
  // Synthetic nuisances; a negative texture amplitude selects the variant's
  // default (0.15 generic, 0.05 face).
  double texture_amplitude = -1.0;
  double position_jitter = 3.0;
  double part_jitter = 1.0;
  std::uint64_t seed = 0;
};
void to_json(nlohmann::json& j, const DatasetSpec& s);
void from_json(const nlohmann::json& j, DatasetSpec& s);

// Deterministic for a fixed spec. Undecodable files are skipped, counted in
// `skipped` and reported on stderr.
Dataset load_dataset(const DatasetSpec& spec);

void save_dataset_archive(const std::filesystem::path& path, const Dataset& dataset);

enum class SyntheticVariant {
  kGeneric,  // disc layouts with a class-specific upright pose on isotropic texture
  kFace,     // aligned faces; every local patch reveals the orientation
};

struct SyntheticOrientedSpec {
  SyntheticVariant variant = SyntheticVariant::kGeneric;
  int num_classes = 8;
  std::int64_t size = 1000;
  int image_size = 36;
  int parts = 5;                 // discs per generic layout
  double texture_amplitude = 0.15;
  double texture_blur = 1.0;     // Gaussian sigma of the background texture, pixels
  double position_jitter = 3.0;  // object translation, pixels
  double part_jitter = 1.0;      // per-part translation, pixels
};

// The class layouts depend only on (variant, num_classes, parts) so every
// split shares them; `rng` drives the per-image nuisances. Labels are balanced
// exactly: image i has class i mod num_classes, then the order is shuffled.
Dataset gen_synthetic_oriented(const SyntheticOrientedSpec& spec, Rng& rng);

// Part centers (x, y) in [-1, 1] and radii of one generic class layout.
struct DiscLayout {
  std::vector<std::array<double, 3>> parts;  // x, y, radius (object units)
};
std::vector<DiscLayout> generic_layouts(int num_classes, int parts);
// Smallest matching distance between any layout and any 90/180/270 degree
// rotation (with or without mirroring) of any layout. A positive value means
// no rotated sample coincides with a validly oriented one.
double layout_rotation_margin(const std::vector<DiscLayout>& layouts);

// Accuracy of 1-nearest-neighbor orientation prediction (4-way) from
// mean-subtracted `patch` x `patch` crops: reference crops come from the
// first half of `images` in all four rotations, queries from the second half.
double patch_orientation_accuracy(const torch::Tensor& images, int patch, int patches_per_image,
                                  Rng& rng);

}  // namespace gssl
