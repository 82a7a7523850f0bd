#include "gssl/nets.hpp"

#include <algorithm>
#include <cmath>

#include "gssl/error.hpp"

namespace gssl {

namespace nn = torch::nn;

namespace {

int scaled(int base, double width) {
  return std::max(1, static_cast<int>(std::lround(base * width)));
}

nn::LeakyReLU leaky(double slope) { return nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(slope)); }

}  // namespace

torch::Tensor spectral_normalize(const torch::Tensor& weight, torch::Tensor& u, torch::Tensor& v,
                                 bool update, double eps) {
  const auto mat = weight.reshape({weight.size(0), -1});
  if (update) {
    torch::NoGradGuard no_grad;
    auto new_v = torch::mv(mat.t(), u);
    new_v = new_v / new_v.norm().clamp_min(eps);
    auto new_u = torch::mv(mat, new_v);
    new_u = new_u / new_u.norm().clamp_min(eps);
    v.copy_(new_v);
    u.copy_(new_u);
  }
  const auto sigma = torch::dot(u.clone(), torch::mv(mat, v.clone()));
  return weight / sigma;
}

namespace {

// Fifteen power iterations at construction: eval-mode forwards of an
// untrained layer already divide by a converged estimate.
void warm_up(const torch::Tensor& weight, torch::Tensor& u, torch::Tensor& v) {
  for (int i = 0; i < 15; ++i) spectral_normalize(weight, u, v, true);
}

}  // namespace

SNConv2dImpl::SNConv2dImpl(int64_t in_channels, int64_t out_channels, int64_t kernel,
                           int64_t stride, int64_t padding)
    : stride_(stride), padding_(padding) {
  nn::Conv2d init(nn::Conv2dOptions(in_channels, out_channels, kernel));
  weight = register_parameter("weight", init->weight.detach().clone());
  bias = register_parameter("bias", init->bias.detach().clone());
  auto u0 = torch::randn({out_channels});
  auto v0 = torch::randn({weight.numel() / out_channels});
  u = register_buffer("u", u0 / u0.norm());
  v = register_buffer("v", v0 / v0.norm());
  warm_up(weight, u, v);
}

torch::Tensor SNConv2dImpl::forward(const torch::Tensor& x) {
  const auto w = spectral_normalize(weight, u, v, is_training());
  return torch::conv2d(x, w, bias, stride_, padding_);
}

torch::Tensor SNConv2dImpl::normalized_weight() { return spectral_normalize(weight, u, v, false); }

SNLinearImpl::SNLinearImpl(int64_t in_features, int64_t out_features) {
  nn::Linear init(in_features, out_features);
  weight = register_parameter("weight", init->weight.detach().clone());
  bias = register_parameter("bias", init->bias.detach().clone());
  auto u0 = torch::randn({out_features});
  auto v0 = torch::randn({in_features});
  u = register_buffer("u", u0 / u0.norm());
  v = register_buffer("v", v0 / v0.norm());
  warm_up(weight, u, v);
}

torch::Tensor SNLinearImpl::forward(const torch::Tensor& x) {
  return torch::linear(x, spectral_normalize(weight, u, v, is_training()), bias);
}

torch::Tensor SNLinearImpl::normalized_weight() { return spectral_normalize(weight, u, v, false); }

StatBatchNormImpl::StatBatchNormImpl(int64_t features, bool /*two_d*/) {
  weight = register_parameter("weight", torch::ones({features}));
  bias = register_parameter("bias", torch::zeros({features}));
  running_mean = register_buffer("running_mean", torch::zeros({features}));
  running_var = register_buffer("running_var", torch::ones({features}));
}

torch::Tensor StatBatchNormImpl::forward(const torch::Tensor& x) {
  const bool training = is_training();
  if (training && !update_stats) {
    return torch::batch_norm(x, weight, bias, {}, {}, true, momentum, eps, false);
  }
  return torch::batch_norm(x, weight, bias, running_mean, running_var, training, momentum, eps,
                           false);
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const InpainterConfig& c) {
  j = {{"channels", c.channels}, {"patch_size", c.patch_size}, {"width", c.width},
       {"extra_depth", c.extra_depth}, {"leaky_slope", c.leaky_slope}};
}

void from_json(const nlohmann::json& j, InpainterConfig& c) {
  c.channels = j.value("channels", c.channels);
  c.patch_size = j.value("patch_size", c.patch_size);
  c.width = j.value("width", c.width);
  c.extra_depth = j.value("extra_depth", c.extra_depth);
  c.leaky_slope = j.value("leaky_slope", c.leaky_slope);
}

InpainterImpl::InpainterImpl(const InpainterConfig& config) : config_(config) {
  const int levels = config.extra_depth ? 3 : 2;
  if (config.patch_size % (1 << levels) != 0) {
    throw ConfigError("inpainter patch size must be divisible by " + std::to_string(1 << levels));
  }
  const double w = config.width;
  const double s = config.leaky_slope;
  const int c0 = scaled(48, w), c1 = scaled(96, w), c2 = scaled(192, w), c3 = scaled(384, w);

  encoder_ = nn::Sequential(
      nn::Conv2d(nn::Conv2dOptions(config.channels, c0, 3).padding(1)), leaky(s),
      nn::Conv2d(nn::Conv2dOptions(c0, c1, 4).stride(2).padding(1).bias(false)),
      nn::BatchNorm2d(c1), leaky(s),
      nn::Conv2d(nn::Conv2dOptions(c1, c2, 4).stride(2).padding(1).bias(false)),
      nn::BatchNorm2d(c2), leaky(s));
  decoder_ = nn::Sequential();
  if (config.extra_depth) {
    encoder_->push_back(nn::Conv2d(nn::Conv2dOptions(c2, c3, 4).stride(2).padding(1).bias(false)));
    encoder_->push_back(nn::BatchNorm2d(c3));
    encoder_->push_back(leaky(s));
    decoder_->push_back(
        nn::ConvTranspose2d(nn::ConvTranspose2dOptions(c3, c2, 4).stride(2).padding(1).bias(false)));
    decoder_->push_back(nn::BatchNorm2d(c2));
    decoder_->push_back(leaky(s));
  }
  decoder_->push_back(
      nn::ConvTranspose2d(nn::ConvTranspose2dOptions(c2, c1, 4).stride(2).padding(1).bias(false)));
  decoder_->push_back(nn::BatchNorm2d(c1));
  decoder_->push_back(leaky(s));
  decoder_->push_back(
      nn::ConvTranspose2d(nn::ConvTranspose2dOptions(c1, c0, 4).stride(2).padding(1).bias(false)));
  decoder_->push_back(nn::BatchNorm2d(c0));
  decoder_->push_back(leaky(s));
  output_ = nn::ConvTranspose2d(nn::ConvTranspose2dOptions(c0, config.channels, 3).padding(1));

  register_module("encoder", encoder_);
  register_module("decoder", decoder_);
  register_module("output", output_);
}

torch::Tensor InpainterImpl::forward(const torch::Tensor& x) {
  if (x.dim() != 4 || x.size(1) != config_.channels || x.size(2) != config_.patch_size ||
      x.size(3) != config_.patch_size) {
    throw ShapeError("inpainter expects [N," + std::to_string(config_.channels) + "," +
                     std::to_string(config_.patch_size) + "," +
                     std::to_string(config_.patch_size) + "] input");
  }
  return torch::tanh(output_->forward(decoder_->forward(encoder_->forward(x))));
}

void InpainterImpl::zero_output_layer() {
  torch::NoGradGuard no_grad;
  output_->weight.zero_();
  if (output_->bias.defined()) output_->bias.zero_();
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const DiscriminatorConfig& c) {
  j = {{"channels", c.channels}, {"width", c.width}, {"extra_depth", c.extra_depth},
       {"leaky_slope", c.leaky_slope}};
}

void from_json(const nlohmann::json& j, DiscriminatorConfig& c) {
  c.channels = j.value("channels", c.channels);
  c.width = j.value("width", c.width);
  c.extra_depth = j.value("extra_depth", c.extra_depth);
  c.leaky_slope = j.value("leaky_slope", c.leaky_slope);
}

DiscriminatorImpl::DiscriminatorImpl(const DiscriminatorConfig& config) : config_(config) {
  struct Layer {
    int kernel, stride, width;
  };
  std::vector<Layer> layers = {{3, 1, 64}, {4, 2, 64}, {3, 1, 128}, {4, 2, 128}, {3, 1, 256}};
  if (config.extra_depth) {
    layers.push_back({4, 2, 256});
    layers.push_back({3, 1, 512});
  }
  int in = 2 * config.channels;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const int out = scaled(layers[i].width, config.width);
    convs_.push_back(register_module(
        "conv" + std::to_string(i + 1),
        SNConv2d(in, out, layers[i].kernel, layers[i].stride, 1)));
    in = out;
  }
  head_ = register_module("head", SNLinear(in, 1));
}

torch::Tensor DiscriminatorImpl::forward(const torch::Tensor& pairs) {
  if (pairs.dim() != 4 || pairs.size(1) != 2 * config_.channels) {
    throw ShapeError("discriminator expects channel-concatenated patch pairs");
  }
  auto x = pairs;
  for (auto& conv : convs_) x = torch::leaky_relu(conv->forward(x), config_.leaky_slope);
  x = x.mean({2, 3});
  return head_->forward(x).squeeze(1);
}

std::vector<torch::Tensor> DiscriminatorImpl::normalized_weights() {
  torch::NoGradGuard no_grad;
  std::vector<torch::Tensor> out;
  for (auto& conv : convs_) out.push_back(conv->normalized_weight());
  out.push_back(head_->normalized_weight());
  return out;
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const StageSpec& s) {
  j = {{"name", s.name},         {"out_channels", s.out_channels}, {"kernel", s.kernel},
       {"stride", s.stride},     {"padding", s.padding},           {"groups", s.groups},
       {"pool_kernel", s.pool_kernel}, {"pool_stride", s.pool_stride},
       {"pool_padding", s.pool_padding}};
}

void from_json(const nlohmann::json& j, StageSpec& s) {
  s.name = j.at("name").get<std::string>();
  s.out_channels = j.value("out_channels", s.out_channels);
  s.kernel = j.value("kernel", s.kernel);
  s.stride = j.value("stride", s.stride);
  s.padding = j.value("padding", s.padding);
  s.groups = j.value("groups", s.groups);
  s.pool_kernel = j.value("pool_kernel", s.pool_kernel);
  s.pool_stride = j.value("pool_stride", s.pool_stride);
  s.pool_padding = j.value("pool_padding", s.pool_padding);
}

void to_json(nlohmann::json& j, const ClassifierConfig& c) {
  j = {{"in_channels", c.in_channels}, {"input_size", c.input_size}, {"stages", c.stages},
       {"hidden", c.hidden}, {"num_outputs", c.num_outputs}};
}

void from_json(const nlohmann::json& j, ClassifierConfig& c) {
  c.in_channels = j.value("in_channels", c.in_channels);
  c.input_size = j.value("input_size", c.input_size);
  c.stages = j.at("stages").get<std::vector<StageSpec>>();
  c.hidden = j.value("hidden", c.hidden);
  c.num_outputs = j.value("num_outputs", c.num_outputs);
}

ClassifierConfig desk_classifier_config(double width, int input_size) {
  ClassifierConfig c;
  c.input_size = input_size;
  c.stages = {
      {"conv1", scaled(32, width), 5, 1, 2, 1, 2, 2, 0},
      {"conv2", scaled(64, width), 3, 1, 1, 1, 2, 2, 0},
      {"conv3", scaled(96, width), 3, 1, 1, 1, 0, 0, 0},
      {"conv4", scaled(96, width), 3, 1, 1, 1, 0, 0, 0},
      {"conv5", scaled(64, width), 3, 1, 1, 1, 2, 2, 0},
  };
  c.hidden = {scaled(128, width)};
  return c;
}

ClassifierConfig alexnet_classifier_config(bool low_resolution) {
  ClassifierConfig c;
  if (low_resolution) {
    c.input_size = 128;
    c.stages = {
        {"conv1", 96, 11, 4, 4, 1, 3, 2, 1},
        {"conv2", 256, 5, 1, 2, 2, 3, 2, 1},
        {"conv3", 384, 3, 1, 1, 1, 0, 0, 0},
        {"conv4", 384, 3, 1, 1, 2, 0, 0, 0},
        {"conv5", 256, 3, 1, 1, 2, 0, 0, 0},
    };
  } else {
    c.input_size = 227;
    c.stages = {
        {"conv1", 96, 11, 4, 0, 1, 3, 2, 0},
        {"conv2", 256, 5, 1, 2, 2, 3, 2, 0},
        {"conv3", 384, 3, 1, 1, 1, 0, 0, 0},
        {"conv4", 384, 3, 1, 1, 2, 0, 0, 0},
        {"conv5", 256, 3, 1, 1, 2, 3, 2, 0},
    };
  }
  c.hidden = {4096, 4096};
  return c;
}

ClassifierImpl::ClassifierImpl(const ClassifierConfig& config) : config_(config) {
  if (config.stages.empty()) throw ConfigError("classifier needs at least one stage");
  int in = config.in_channels;
  int side = config.input_size;
  for (const auto& spec : config.stages) {
    Stage stage;
    stage.spec = spec;
    stage.conv = register_module(
        spec.name, nn::Conv2d(nn::Conv2dOptions(in, spec.out_channels, spec.kernel)
                                  .stride(spec.stride)
                                  .padding(spec.padding)
                                  .groups(spec.groups)
                                  .bias(false)));
    stage.bn = register_module(spec.name + "_bn", StatBatchNorm(spec.out_channels, true));
    side = (side + 2 * spec.padding - spec.kernel) / spec.stride + 1;
    if (spec.pool_kernel > 0) {
      side = (side + 2 * spec.pool_padding - spec.pool_kernel) / spec.pool_stride + 1;
    }
    if (side <= 0) throw ConfigError("classifier input too small for stage " + spec.name);
    in = spec.out_channels;
    stages_.push_back(stage);
  }
  int features = in * side * side;
  for (std::size_t i = 0; i < config.hidden.size(); ++i) {
    const auto name = "fc" + std::to_string(i + 1);
    fcs_.push_back(register_module(name, nn::Linear(nn::LinearOptions(features, config.hidden[i]).bias(false))));
    fc_bns_.push_back(register_module(name + "_bn", StatBatchNorm(config.hidden[i], false)));
    features = config.hidden[i];
  }
  output_ = register_module("output", nn::Linear(features, config.num_outputs));
}

torch::Tensor ClassifierImpl::run_stage(Stage& stage, const torch::Tensor& x, bool pool) {
  auto y = torch::relu(stage.bn->forward(stage.conv->forward(x)));
  if (pool && stage.spec.pool_kernel > 0) {
    y = torch::max_pool2d(y, stage.spec.pool_kernel, stage.spec.pool_stride,
                          stage.spec.pool_padding);
  }
  return y;
}

torch::Tensor ClassifierImpl::forward(const torch::Tensor& x) {
  auto y = x;
  for (auto& stage : stages_) y = run_stage(stage, y, true);
  y = y.flatten(1);
  for (std::size_t i = 0; i < fcs_.size(); ++i) {
    y = torch::relu(fc_bns_[i]->forward(fcs_[i]->forward(y)));
  }
  return output_->forward(y);
}

torch::Tensor ClassifierImpl::features(const torch::Tensor& x, const std::string& stage) {
  auto y = x;
  for (auto& s : stages_) {
    if (s.spec.name == stage) return run_stage(s, y, false);
    y = run_stage(s, y, true);
  }
  throw ConfigError("unknown stage '" + stage + "'");
}

std::vector<std::string> ClassifierImpl::stage_names() const {
  std::vector<std::string> names;
  for (const auto& s : stages_) names.push_back(s.spec.name);
  return names;
}

torch::Tensor ClassifierImpl::first_layer_weight() const { return stages_.front().conv->weight; }

void ClassifierImpl::set_update_batch_stats(bool update) {
  for (auto& s : stages_) s.bn->update_stats = update;
  for (auto& bn : fc_bns_) bn->update_stats = update;
}

}  // namespace gssl
