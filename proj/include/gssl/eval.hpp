#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "gssl/nets.hpp"

namespace gssl {

inline constexpr std::int64_t kDefaultTargetUnits = 9216;

// Side of the square pooling grid: the largest s with channels * s^2 <=
// target, capped by the map size and at least 1.
int pooled_grid_side(std::int64_t channels, std::int64_t height, std::int64_t width, std::int64_t target_units);

struct FeatureMatrix {
  torch::Tensor data;  // [N, D] float32
  std::string stage;
  int grid = 0;
  std::int64_t target_units = 0;
  std::string checkpoint_hash;
};

// Runs C in inference mode up to `stage`, average-pools the map to the grid
// given by pooled_grid_side and flattens it. Throws ConfigError for unknown
// stages.
FeatureMatrix extract_features(Classifier& c, const torch::Tensor& images, const std::string& stage,
                               std::int64_t target_units = kDefaultTargetUnits, std::int64_t batch_size = 256);

// Per-dimension standardization; dimensions with zero spread keep unit scale.
struct Standardizer {
  torch::Tensor mean, scale;
  static Standardizer fit(const torch::Tensor& features);
  torch::Tensor apply(const torch::Tensor& features) const;
};

// Step schedule of the linear probe: lrs[i] applies from milestones[i-1] on.
struct ProbeSchedule {
  int epochs = 65;
  std::vector<int> milestones = {5, 25, 45};
  std::vector<double> lrs = {0.1, 0.01, 0.002, 0.0004};
  double momentum = 0.9;
  int batch_size = 192;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  double lr_at(int epoch) const;
};
void to_json(nlohmann::json& j, const ProbeSchedule& s);
void from_json(const nlohmann::json& j, ProbeSchedule& s);

struct ProbeResult {
  std::string stage;
  double accuracy = 0.0;             // on the held-out split
  std::vector<double> train_loss;    // per epoch
  std::vector<double> train_accuracy;
};

// Linear classifier trained with SGD + momentum on train features
// standardized with train statistics, scored on the held-out features.
// Throws ConfigError if the training labels hold a single class.
ProbeResult train_linear_probe(const torch::Tensor& train_features, const torch::Tensor& train_labels,
                               const torch::Tensor& test_features, const torch::Tensor& test_labels,
                               const ProbeSchedule& schedule);

// Leave-one-out k-NN on per-dimension standardized features with cosine
// similarity. Each point retrieves its k+1 nearest neighbors over the whole
// set and drops the self-match; the majority label wins, ties going to the
// tied label whose member ranks nearest. Requires N > k + 1 and k >= 1.
torch::Tensor knn_loocv_predictions(const torch::Tensor& features, const torch::Tensor& labels, int k);
double knn_loocv(const torch::Tensor& features, const torch::Tensor& labels, int k);

// Features of the four corner crops and the center crop, concatenated in
// that order (top-left, top-right, bottom-left, bottom-right, center).
// Throws ConfigError if the images are smaller than the crop.
torch::Tensor five_crop_features(Classifier& c, const torch::Tensor& images, const std::string& stage, int crop,
                                 std::int64_t target_units = kDefaultTargetUnits);

// Row indices of the top-k gallery rows per query by descending cosine
// similarity, ties by ascending index. [Q, topk] int64.
torch::Tensor retrieve(const torch::Tensor& queries, const torch::Tensor& gallery, std::int64_t topk);

}  // namespace gssl
