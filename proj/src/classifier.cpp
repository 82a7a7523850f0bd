#include "gssl/classifier.hpp"

#include <cmath>
#include <numbers>

#include "gssl/error.hpp"
#include "gssl/losses.hpp"
#include "gssl/rotate.hpp"

namespace gssl {

std::string to_string(LabelMode mode) {
  return mode == LabelMode::kAllPerImage ? "all" : "sampled";
}

LabelMode parse_label_mode(std::string_view name) {
  if (name == "all") return LabelMode::kAllPerImage;
  if (name == "sampled") return LabelMode::kSampledPerImage;
  throw ConfigError("label_mode must be 'all' or 'sampled', got '" + std::string(name) + "'");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"epochs", c.epochs},
       {"batch_size", c.batch_size},
       {"lr_start", c.lr_start},
       {"lr_end", c.lr_end},
       {"weight_decay", c.weight_decay},
       {"betas", {c.beta1, c.beta2}},
       {"transforms", c.transforms.to_string()},
       {"label_mode", to_string(c.label_mode)},
       {"ae_substitute_fraction", c.ae_substitute_fraction},
       {"substitute_rotations", c.substitute_rotations},
       {"seed", c.seed},
       {"warp_grid", c.warp_grid},
       {"warp_max_offset", c.warp_max_offset ? nlohmann::json(*c.warp_max_offset) : nlohmann::json()},
       {"spline_order", c.spline_order},
       {"log_interval", c.log_interval},
       {"confusion_interval", c.confusion_interval},
       {"checkpoint_interval", c.checkpoint_interval}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr_start = j.value("lr_start", c.lr_start);
  c.lr_end = j.value("lr_end", c.lr_end);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  if (j.contains("betas")) {
    const auto b = j.at("betas").get<std::vector<double>>();
    if (b.size() != 2) throw ConfigError("betas must hold two values");
    c.beta1 = b[0];
    c.beta2 = b[1];
  }
  if (j.contains("transforms")) c.transforms = TransformSet::parse(j.at("transforms").get<std::string>());
  if (j.contains("label_mode")) c.label_mode = parse_label_mode(j.at("label_mode").get<std::string>());
  c.ae_substitute_fraction = j.value("ae_substitute_fraction", c.ae_substitute_fraction);
  c.substitute_rotations = j.value("substitute_rotations", c.substitute_rotations);
  c.seed = j.value("seed", c.seed);
  c.warp_grid = j.value("warp_grid", c.warp_grid);
  if (j.contains("warp_max_offset")) {
    const auto& d = j.at("warp_max_offset");
    c.warp_max_offset = d.is_null() ? std::nullopt : std::optional<double>(d.get<double>());
  }
  c.spline_order = j.value("spline_order", c.spline_order);
  c.log_interval = j.value("log_interval", c.log_interval);
  c.confusion_interval = j.value("confusion_interval", c.confusion_interval);
  c.checkpoint_interval = j.value("checkpoint_interval", c.checkpoint_interval);
}

void validate(const TrainConfig& c) {
  if (c.epochs < 0) throw ConfigError("epochs must be non-negative");
  if (c.batch_size < 2) throw ConfigError("batch_size must be at least 2");
  if (c.lr_start < 0 || c.lr_end < 0) throw ConfigError("learning rates must be non-negative");
  if (c.ae_substitute_fraction < 0 || c.ae_substitute_fraction > 1) {
    throw ConfigError("ae_substitute_fraction must be in [0, 1]");
  }
  if (c.warp_grid < 2) throw ConfigError("warp_grid must be at least 2");
  if (c.spline_order < 1) throw ConfigError("spline_order must be positive");
  if (c.log_interval < 1 || c.confusion_interval < 1) throw ConfigError("intervals must be positive");
  if (c.checkpoint_interval < 0) throw ConfigError("checkpoint_interval must be non-negative");
}

torch::Tensor SslBatch::input_of(std::int64_t element) const {
  const auto i = source_index.at(static_cast<std::size_t>(element));
  return from_substituted.at(static_cast<std::size_t>(element)) ? substituted[i] : sources[i];
}

SslBatch build_batch(const torch::Tensor& sources, const TrainConfig& config,
                     const LciConfig& lci, Inpainter* f, Rng& rng) {
  check_batch(sources, "SSL sources");
  const auto n = sources.size(0);
  if (n == 0) throw ShapeError("SSL batch needs at least one source image");
  // Substitution hides the inpainter's footprint, so it only runs with LCI.
  const double fraction = config.transforms.inpaint ? config.ae_substitute_fraction : 0.0;
  const bool need_f = config.transforms.inpaint;
  if (need_f && f == nullptr) throw ConfigError("this configuration requires an inpainter");
  const PatchMap fmap = f != nullptr ? no_grad_map(*f) : PatchMap{};

  SslBatch batch;
  batch.sources = sources;
  if (fraction > 0.0) {
    auto sub = autoencoded_substitute(sources, fmap, fraction,
                                      lci.patch_size, lci.border, rng);
    batch.substituted = sub.images;
    for (const auto& r : sub.records) batch.was_substituted.push_back(r.has_value());
  } else {
    batch.substituted = sources;
    batch.was_substituted.assign(static_cast<std::size_t>(n), false);
  }

  const auto enabled = config.transforms.labels();
  // (source, label) in element order.
  std::vector<std::pair<std::int64_t, TransformLabel>> plan;
  if (config.label_mode == LabelMode::kAllPerImage) {
    for (auto y : enabled) {
      for (std::int64_t i = 0; i < n; ++i) plan.emplace_back(i, y);
    }
  } else {
    const auto last = static_cast<std::int64_t>(enabled.size()) - 1;
    for (std::int64_t i = 0; i < n; ++i) {
      plan.emplace_back(i, enabled[static_cast<std::size_t>(rng.uniform_int(0, last))]);
    }
  }

  TransformContext ctx;
  ctx.rng = &rng;
  ctx.warp_grid = config.warp_grid;
  ctx.warp_max_offset = config.warp_max_offset;
  ctx.spline_order = config.spline_order;
  ctx.patch_size = lci.patch_size;
  ctx.border = lci.border;

  std::vector<torch::Tensor> images(plan.size());
  std::vector<std::int64_t> labels(plan.size());
  batch.source_index.resize(plan.size());
  batch.from_substituted.resize(plan.size());
  batch.traces.resize(plan.size());
  std::vector<std::int64_t> lci_sources;
  for (std::size_t e = 0; e < plan.size(); ++e) {
    const auto [i, y] = plan[e];
    labels[e] = to_index(y);
    batch.source_index[e] = i;
    const bool rotation = y == TransformLabel::kRot90 || y == TransformLabel::kRot180 ||
                          y == TransformLabel::kRot270;
    const bool use_sub = y == TransformLabel::kIdentity || (rotation && config.substitute_rotations);
    batch.from_substituted[e] = use_sub;
    if (y == TransformLabel::kInpaint) {
      batch.lci_rows.push_back(static_cast<std::int64_t>(e));
      lci_sources.push_back(i);
      continue;
    }
    auto result = apply_transform_traced(use_sub ? batch.substituted[i] : sources[i], y, ctx);
    images[e] = result.image;
    batch.traces[e] = std::move(result.trace);
  }
  if (!lci_sources.empty()) {
    const auto idx = torch::tensor(lci_sources, torch::kInt64);
    batch.lci = make_lci_batch(sources.index_select(0, idx), fmap, lci, rng);
    for (std::size_t k = 0; k < lci_sources.size(); ++k) {
      const auto e = static_cast<std::size_t>(batch.lci_rows[k]);
      const auto kk = static_cast<std::int64_t>(k);
      images[e] = batch.lci->composed[kk];
      batch.traces[e].label = TransformLabel::kInpaint;
      batch.traces[e].patch = batch.lci->specs[k];
      batch.traces[e].inpainted = batch.lci->inpainted[kk];
    }
  }
  batch.images = torch::stack(images);
  batch.labels = torch::tensor(labels, torch::kInt64);
  if (batch.lci) {
    batch.lci->classifier_batch = batch.images;
    batch.lci->classifier_rows = batch.lci_rows;
  }
  return batch;
}

torch::Tensor ssl_loss(Classifier& c, const SslBatch& batch, const std::vector<TransformLabel>& enabled) {
  if (batch.size() == 0) throw ShapeError("empty SSL batch");
  return ssl_cross_entropy(c->forward(batch.images), batch.labels, enabled);
}

double cosine_lr(std::int64_t step, std::int64_t total_steps, double lr_start, double lr_end) {
  if (total_steps <= 0) return lr_start;
  if (step < 0 || step > total_steps) throw ConfigError("schedule step outside [0, total]");
  if (step == total_steps) return lr_end;
  const double t = static_cast<double>(step) / static_cast<double>(total_steps);
  return lr_end + 0.5 * (lr_start - lr_end) * (1.0 + std::cos(std::numbers::pi * t));
}

torch::optim::AdamW make_classifier_optimizer(Classifier& c, const TrainConfig& config) {
  return torch::optim::AdamW(c->parameters(), torch::optim::AdamWOptions(config.lr_start)
                                                  .betas({config.beta1, config.beta2})
                                                  .weight_decay(config.weight_decay));
}

ClassifierStepResult classifier_step(Classifier& c, const SslBatch& batch,
                                     torch::optim::AdamW& optimizer, double lr,
                                     const std::vector<TransformLabel>& enabled) {
  for (auto& group : optimizer.param_groups()) {
    static_cast<torch::optim::AdamWOptions&>(group.options()).lr(lr);
  }
  c->train();
  const auto logits = c->forward(batch.images);
  auto loss = ssl_cross_entropy(logits, batch.labels, enabled);
  optimizer.zero_grad();
  loss.backward();
  optimizer.step();
  ClassifierStepResult out;
  out.loss = loss.item<double>();
  out.predictions = predict_enabled(logits.detach(), enabled);
  return out;
}

torch::Tensor confusion_matrix(const torch::Tensor& labels, const torch::Tensor& predictions) {
  if (labels.numel() != predictions.numel()) throw ShapeError("labels and predictions differ in size");
  auto flat = (labels.to(torch::kInt64) * kNumTransforms + predictions.to(torch::kInt64)).reshape({-1});
  return torch::bincount(flat, {}, kNumTransforms * kNumTransforms).reshape({kNumTransforms, kNumTransforms});
}

}  // namespace gssl
