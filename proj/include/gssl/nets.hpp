#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

namespace gssl {

// Divides `weight` by a power-iteration estimate of its largest singular
// value. With `update`, runs one iteration first and stores the new vectors
// in u and v. The estimate itself carries gradient, the vectors do not.
torch::Tensor spectral_normalize(const torch::Tensor& weight, torch::Tensor& u, torch::Tensor& v,
                                 bool update, double eps = 1e-12);

// Conv2d with spectrally normalized weight. One power iteration per forward
// in training mode; eval mode reuses the stored vectors.
class SNConv2dImpl : public torch::nn::Module {
 public:
  SNConv2dImpl(int64_t in_channels, int64_t out_channels, int64_t kernel, int64_t stride,
               int64_t padding);
  torch::Tensor forward(const torch::Tensor& x);
  // Weight as used by forward(), without advancing the power iteration.
  torch::Tensor normalized_weight();

  torch::Tensor weight, bias, u, v;

 private:
  int64_t stride_, padding_;
};
TORCH_MODULE(SNConv2d);

class SNLinearImpl : public torch::nn::Module {
 public:
  SNLinearImpl(int64_t in_features, int64_t out_features);
  torch::Tensor forward(const torch::Tensor& x);
  torch::Tensor normalized_weight();

  torch::Tensor weight, bias, u, v;
};
TORCH_MODULE(SNLinear);

// Batch norm whose running statistics can be left untouched in training mode
// (batch statistics are still used for normalization).
class StatBatchNormImpl : public torch::nn::Module {
 public:
  StatBatchNormImpl(int64_t features, bool two_d);
  torch::Tensor forward(const torch::Tensor& x);

  torch::Tensor weight, bias, running_mean, running_var;
  bool update_stats = true;
  double momentum = 0.1;
  double eps = 1e-5;
};
TORCH_MODULE(StatBatchNorm);

// ---------------------------------------------------------------------------
// Inpainter F: encoder-decoder, P x P x C -> P x P x C, tanh output.

struct InpainterConfig {
  int channels = 3;
  int patch_size = 16;
  double width = 1.0;        // multiplies the 48/96/192(/384) channel widths
  bool extra_depth = false;  // the additional 384-wide level of the large-image variant
  double leaky_slope = 0.2;
};
void to_json(nlohmann::json& j, const InpainterConfig& c);
void from_json(const nlohmann::json& j, InpainterConfig& c);

class InpainterImpl : public torch::nn::Module {
 public:
  explicit InpainterImpl(const InpainterConfig& config);
  // Throws ShapeError unless x is [N, C, P, P] for the configured P.
  torch::Tensor forward(const torch::Tensor& x);
  void zero_output_layer();
  const InpainterConfig& config() const { return config_; }

 private:
  InpainterConfig config_;
  torch::nn::Sequential encoder_{nullptr}, decoder_{nullptr};
  torch::nn::ConvTranspose2d output_{nullptr};
};
TORCH_MODULE(Inpainter);

// ---------------------------------------------------------------------------
// Patch discriminator D on channel-concatenated pairs, P x P x 2C -> score.

struct DiscriminatorConfig {
  int channels = 3;  // per patch; the input has twice as many
  double width = 1.0;
  bool extra_depth = false;
  double leaky_slope = 0.2;
};
void to_json(nlohmann::json& j, const DiscriminatorConfig& c);
void from_json(const nlohmann::json& j, DiscriminatorConfig& c);

class DiscriminatorImpl : public torch::nn::Module {
 public:
  explicit DiscriminatorImpl(const DiscriminatorConfig& config);
  // [N, 2C, P, P] -> [N]
  torch::Tensor forward(const torch::Tensor& pairs);
  // Every spectrally normalized layer, in order, for inspection.
  std::vector<torch::Tensor> normalized_weights();
  const DiscriminatorConfig& config() const { return config_; }

 private:
  DiscriminatorConfig config_;
  std::vector<SNConv2d> convs_;
  SNLinear head_{nullptr};
};
TORCH_MODULE(Discriminator);

// ---------------------------------------------------------------------------
// Transformation classifier C: five named conv stages plus a 6-way head.

struct StageSpec {
  std::string name;
  int out_channels = 64;
  int kernel = 3;
  int stride = 1;
  int padding = 1;
  int groups = 1;
  int pool_kernel = 0;  // max-pool applied after the stage's activation; 0 = none
  int pool_stride = 0;
  int pool_padding = 0;
};

struct ClassifierConfig {
  int in_channels = 3;
  int input_size = 32;
  std::vector<StageSpec> stages;
  std::vector<int> hidden;  // fully connected widths before the output layer
  int num_outputs = 6;
};
void to_json(nlohmann::json& j, const StageSpec& s);
void from_json(const nlohmann::json& j, StageSpec& s);
void to_json(nlohmann::json& j, const ClassifierConfig& c);
void from_json(const nlohmann::json& j, ClassifierConfig& c);

// Small five-stage network for 32 x 32 inputs; widths scaled by `width`.
ClassifierConfig desk_classifier_config(double width = 1.0, int input_size = 32);
// AlexNet without local response norm, batch norm after every layer but the
// last, grouped conv2/4/5. `low_resolution` uses SAME padding and drops the
// pool after conv5.
ClassifierConfig alexnet_classifier_config(bool low_resolution = false);

class ClassifierImpl : public torch::nn::Module {
 public:
  explicit ClassifierImpl(const ClassifierConfig& config);

  torch::Tensor forward(const torch::Tensor& x);
  // Post-activation map of a stage, before its pooling. Throws ConfigError
  // for unknown names.
  torch::Tensor features(const torch::Tensor& x, const std::string& stage);
  std::vector<std::string> stage_names() const;
  // First conv layer weights, [out, in, k, k].
  torch::Tensor first_layer_weight() const;
  // Batch norm layers normalize with batch statistics but leave running
  // statistics untouched while this is off.
  void set_update_batch_stats(bool update);
  const ClassifierConfig& config() const { return config_; }

 private:
  struct Stage {
    torch::nn::Conv2d conv{nullptr};
    StatBatchNorm bn{nullptr};
    StageSpec spec;
  };
  torch::Tensor run_stage(Stage& stage, const torch::Tensor& x, bool pool);

  ClassifierConfig config_;
  std::vector<Stage> stages_;
  std::vector<torch::nn::Linear> fcs_;
  std::vector<StatBatchNorm> fc_bns_;
  torch::nn::Linear output_{nullptr};
};
TORCH_MODULE(Classifier);

}  // namespace gssl
