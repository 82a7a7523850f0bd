#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "gssl/classifier.hpp"
#include "gssl/data.hpp"
#include "gssl/lci.hpp"
#include "gssl/nets.hpp"

namespace gssl {

struct PretrainConfig {
  TrainConfig train;
  LciConfig lci;
  AugmentFlags augment{.random_crop = true, .crop_size = 32, .horizontal_flip = true};
  std::string architecture = "desk";  // desk | alexnet | alexnet_low
  double classifier_width = 1.0;      // desk architecture only
};
void to_json(nlohmann::json& j, const PretrainConfig& c);
void from_json(const nlohmann::json& j, PretrainConfig& c);

ClassifierConfig classifier_config_for(const PretrainConfig& config, int channels, int input_size);

// C, F and D with their optimizers. F and D exist only when LCI is enabled.
struct ModelBundle {
  Classifier c{nullptr};
  Inpainter f{nullptr};
  Discriminator d{nullptr};
  std::unique_ptr<torch::optim::AdamW> c_opt;
  std::unique_ptr<torch::optim::Adam> f_opt, d_opt;
  std::int64_t step = 0;

  bool has_inpainter() const { return !f.is_empty(); }
};

// Seeds torch from config.train.seed before creating the networks, so equal
// configs give equal initial weights.
ModelBundle make_bundle(const PretrainConfig& config, int channels, int input_size);

// The inputs the training loop sees: random crop and flip per the config.
torch::Tensor augment_batch(const torch::Tensor& images, const AugmentFlags& flags, Rng& rng);

struct PretrainHooks {
  std::ostream* metrics = nullptr;  // line-delimited JSON records
  std::function<void(const ModelBundle&)> checkpoint;  // every checkpoint_interval steps
  std::filesystem::path diagnostics;  // where a divergence dump goes; empty = stderr only
};

struct PretrainSummary {
  std::int64_t steps = 0;
  double last_loss_c = 0.0;
  // Accuracy of C's training predictions per transform label over the final
  // epoch; -1 for labels that did not occur.
  std::array<double, kNumTransforms> final_epoch_accuracy{};
  double final_epoch_mean_accuracy = 0.0;
};

// Runs the D, F, C updates for config.train.epochs over `dataset`. Throws
// DivergenceError after dumping diagnostics when a loss turns non-finite.
PretrainSummary pretrain(ModelBundle& bundle, const Dataset& dataset, const PretrainConfig& config,
                         const PretrainHooks& hooks = {});

// Checkpoint containers: kind "classifier", "inpainter" or "discriminator",
// with meta {config_hash, step, model_config, stages}.
void save_checkpoint(const std::filesystem::path& path, const std::string& kind, torch::nn::Module& module,
                     const nlohmann::json& model_config, const std::string& config_hash, std::int64_t step);
void save_bundle(const std::filesystem::path& dir, ModelBundle& bundle, const std::string& config_hash);

struct LoadedClassifier {
  Classifier c{nullptr};
  std::string config_hash;
  std::string checkpoint_hash;  // module_checksum of the loaded weights
  std::int64_t step = 0;
};
LoadedClassifier load_classifier(const std::filesystem::path& path);
Inpainter load_inpainter(const std::filesystem::path& path);

}  // namespace gssl
