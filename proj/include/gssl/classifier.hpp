#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "gssl/image.hpp"
#include "gssl/lci.hpp"
#include "gssl/nets.hpp"
#include "gssl/rng.hpp"
#include "gssl/transform.hpp"

namespace gssl {

enum class LabelMode {
  kAllPerImage,      // every source contributes every enabled label
  kSampledPerImage,  // every source contributes one uniformly drawn label
};
std::string to_string(LabelMode mode);
LabelMode parse_label_mode(std::string_view name);

struct TrainConfig {
  int epochs = 10;
  int batch_size = 32;  // source images per minibatch
  double lr_start = 3e-4;
  double lr_end = 3e-7;
  double weight_decay = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.99;
  TransformSet transforms;
  LabelMode label_mode = LabelMode::kAllPerImage;
  double ae_substitute_fraction = 0.5;
  // Rotated images are built from the substituted sources too, not only the
  // identity branch.
  bool substitute_rotations = true;
  std::uint64_t seed = 0;
  int warp_grid = 4;
  std::optional<double> warp_max_offset;  // default: width / 10
  int spline_order = 2;
  int log_interval = 1;         // steps between metric records
  int confusion_interval = 50;  // steps between confusion matrix records
  int checkpoint_interval = 0;  // steps between checkpoints; 0 = final only
};
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
// Throws ConfigError for inconsistent settings.
void validate(const TrainConfig& config);

// The (T_y o x_i, y) pairs of one minibatch, with enough provenance to replay
// every element from its source.
struct SslBatch {
  torch::Tensor images;  // [M, C, H, W]
  torch::Tensor labels;  // [M] int64
  torch::Tensor sources;      // x_i, [N, C, H, W]
  torch::Tensor substituted;  // x_i with an autoencoded window where selected
  std::vector<bool> was_substituted;  // per source
  std::vector<std::int64_t> source_index;  // per element
  std::vector<bool> from_substituted;      // per element: input was `substituted`
  std::vector<TransformTrace> traces;      // per element
  std::optional<LciBatch> lci;             // the LCI elements' inpainting records
  std::vector<std::int64_t> lci_rows;      // element row of lci record k

  std::int64_t size() const { return images.defined() ? images.size(0) : 0; }
  // Input the element's transformation was applied to.
  torch::Tensor input_of(std::int64_t element) const;
};

// With LCI enabled, substitutes autoencoded windows into the configured
// fraction of the sources; then applies the enabled transformations per the
// label mode. `f` is required when LCI is enabled.
SslBatch build_batch(const torch::Tensor& sources, const TrainConfig& config,
                     const LciConfig& lci, Inpainter* f, Rng& rng);

// Mean cross entropy over the batch's (image, label) pairs, softmax
// over the enabled labels.
torch::Tensor ssl_loss(Classifier& c, const SslBatch& batch, const std::vector<TransformLabel>& enabled);

// lr_end + (lr_start - lr_end) * (1 + cos(pi * step / total)) / 2
double cosine_lr(std::int64_t step, std::int64_t total_steps, double lr_start, double lr_end);

torch::optim::AdamW make_classifier_optimizer(Classifier& c, const TrainConfig& config);

struct ClassifierStepResult {
  double loss = 0.0;
  torch::Tensor predictions;  // [M] int64
};
// One AdamW step on ssl_loss at learning rate `lr`.
ClassifierStepResult classifier_step(Classifier& c, const SslBatch& batch,
                                     torch::optim::AdamW& optimizer, double lr,
                                     const std::vector<TransformLabel>& enabled);

// Rows are true labels, columns predictions; 6 x 6 int64.
torch::Tensor confusion_matrix(const torch::Tensor& labels, const torch::Tensor& predictions);

}  // namespace gssl
