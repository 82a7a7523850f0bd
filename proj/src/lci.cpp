#include "gssl/lci.hpp"

#include <cmath>
#include <vector>

#include "gssl/error.hpp"
#include "gssl/image.hpp"
#include "gssl/losses.hpp"

namespace gssl {

void to_json(nlohmann::json& j, const LciConfig& c) {
  j = {{"patch_size", c.patch_size},
       {"border_b", c.border},
       {"lambda_border", c.lambda_border},
       {"lambda_ae", c.lambda_ae},
       {"lambda_adversarial", c.lambda_adversarial},
       {"d_lr", c.d_lr},
       {"f_lr", c.f_lr},
       {"beta1", c.beta1},
       {"beta2", c.beta2},
       {"update_ratio", {c.d_steps, c.f_steps, c.c_steps}},
       {"width", c.width},
       {"extra_depth", c.extra_depth}};
}

void from_json(const nlohmann::json& j, LciConfig& c) {
  c.patch_size = j.value("patch_size", c.patch_size);
  c.border = j.value("border_b", c.border);
  c.lambda_border = j.value("lambda_border", c.lambda_border);
  c.lambda_ae = j.value("lambda_ae", c.lambda_ae);
  c.lambda_adversarial = j.value("lambda_adversarial", c.lambda_adversarial);
  c.d_lr = j.value("d_lr", c.d_lr);
  c.f_lr = j.value("f_lr", c.f_lr);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  if (j.contains("update_ratio")) {
    const auto r = j.at("update_ratio").get<std::vector<int>>();
    if (r.size() != 3) throw ConfigError("update_ratio must list D, F and C steps");
    c.d_steps = r[0];
    c.f_steps = r[1];
    c.c_steps = r[2];
  }
  c.width = j.value("width", c.width);
  c.extra_depth = j.value("extra_depth", c.extra_depth);
}

PatchMap no_grad_map(Inpainter& inpainter) {
  // Running statistics are restored after the forward; only inpainter_step
  // moves them.
  return [inpainter](const torch::Tensor& x) mutable {
    torch::NoGradGuard no_grad;
    auto buffers = inpainter->buffers();
    std::vector<torch::Tensor> saved;
    saved.reserve(buffers.size());
    for (const auto& b : buffers) saved.push_back(b.clone());
    auto out = inpainter->forward(x);
    for (std::size_t i = 0; i < buffers.size(); ++i) buffers[i].copy_(saved[i]);
    return out;
  };
}

torch::Tensor paste_patches(const torch::Tensor& images, const torch::Tensor& patches,
                            const std::vector<PatchSpec>& specs) {
  check_batch(images, "paste target");
  if (patches.size(0) != images.size(0) || static_cast<std::size_t>(images.size(0)) != specs.size()) {
    throw ShapeError("one patch and one window per image required");
  }
  auto out = images.clone();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    check_patch_fits(s, static_cast<int>(images.size(2)), static_cast<int>(images.size(3)));
    out[static_cast<std::int64_t>(i)]
        .narrow(1, s.top, s.size)
        .narrow(2, s.left, s.size)
        .copy_(patches[static_cast<std::int64_t>(i)]);
  }
  return out;
}

torch::Tensor make_pairs(const torch::Tensor& patches, const std::vector<std::int64_t>& partners) {
  if (static_cast<std::size_t>(patches.size(0)) != partners.size()) {
    throw ShapeError("one partner per patch required");
  }
  return torch::cat({patches, patches.index_select(0, torch::tensor(partners, torch::kInt64))}, 1);
}

LciBatch make_lci_batch(const torch::Tensor& sources, const PatchMap& f, const LciConfig& config,
                        Rng& rng) {
  check_batch(sources, "LCI sources");
  if (!f) throw ConfigError("LCI batch requires an inpainter");
  const auto n = sources.size(0);
  const int height = static_cast<int>(sources.size(2));
  const int width = static_cast<int>(sources.size(3));

  LciBatch batch;
  batch.sources = sources;
  batch.mask = make_mask(config.patch_size, config.border);
  std::vector<torch::Tensor> originals, corrupted;
  for (std::int64_t i = 0; i < n; ++i) {
    const auto spec = sample_patch_spec(height, width, config.patch_size, config.border, rng);
    batch.specs.push_back(spec);
    auto e = extract_patch(sources[i], spec);
    corrupted.push_back(corrupt_patch(e, batch.mask, rng));
    originals.push_back(std::move(e));
  }
  for (std::int64_t i = 0; i < n; ++i) {
    if (n == 1) {
      batch.partners.push_back(0);
      continue;
    }
    auto j = rng.uniform_int(0, n - 2);
    batch.partners.push_back(j >= i ? j + 1 : j);
  }
  if (n == 0) return batch;
  batch.originals = torch::stack(originals);
  batch.corrupted = torch::stack(corrupted);
  {
    torch::NoGradGuard no_grad;
    batch.inpainted = f(batch.corrupted).detach();
    batch.composed = paste_patches(sources, batch.inpainted, batch.specs);
  }
  return batch;
}

torch::Tensor inpaint(Inpainter& inpainter, const torch::Tensor& corrupted) {
  return inpainter->forward(corrupted);
}

InpainterLoss inpainter_loss(Inpainter& inpainter, const LciBatch& batch,
                             Discriminator& discriminator, Classifier* classifier,
                             const InpainterLossWeights& weights,
                             const std::vector<TransformLabel>& enabled) {
  InpainterLoss loss;
  const auto r = inpainter->forward(batch.corrupted);
  loss.gan = hinge_g_loss(discriminator->forward(make_pairs(r, batch.partners)));
  loss.border = border_loss(r, batch.originals, batch.mask);
  loss.total = loss.gan + weights.border * loss.border;
  if (weights.autoencode != 0.0) {
    loss.autoencode = autoencode_loss(inpainter->forward(batch.originals), batch.originals);
    loss.total = loss.total + weights.autoencode * loss.autoencode;
  } else {
    loss.autoencode = torch::zeros({});
  }
  if (classifier != nullptr && weights.adversarial != 0.0) {
    const auto composed = paste_patches(batch.sources, r, batch.specs);
    const auto labels = torch::full({batch.size()}, to_index(TransformLabel::kInpaint), torch::kInt64);
    torch::Tensor logits;
    if (batch.classifier_batch.defined()) {
      const auto rows = torch::tensor(batch.classifier_rows, torch::kInt64);
      const auto full = batch.classifier_batch.detach().index_copy(0, rows, composed);
      logits = (*classifier)->forward(full).index_select(0, rows);
    } else {
      logits = (*classifier)->forward(composed);
    }
    loss.adversarial = ssl_cross_entropy(logits, labels, enabled);
    loss.total = loss.total - weights.adversarial * loss.adversarial;
  } else {
    loss.adversarial = torch::zeros({});
  }
  return loss;
}

double discriminator_step(Discriminator& discriminator, const LciBatch& batch,
                          torch::optim::Optimizer& optimizer) {
  if (batch.size() == 0) return 0.0;
  discriminator->train();
  const auto real = make_pairs(batch.originals, batch.partners);
  const auto fake = make_pairs(batch.inpainted.detach(), batch.partners);
  const auto scores = discriminator->forward(torch::cat({real, fake}, 0));
  const auto n = batch.size();
  auto loss = hinge_d_loss(scores.narrow(0, 0, n), scores.narrow(0, n, n));
  optimizer.zero_grad();
  loss.backward();
  optimizer.step();
  return loss.item<double>();
}

InpainterStepResult inpainter_step(Inpainter& inpainter, const LciBatch& batch,
                                   Discriminator& discriminator, Classifier* classifier,
                                   torch::optim::Optimizer& optimizer,
                                   const InpainterLossWeights& weights,
                                   const std::vector<TransformLabel>& enabled) {
  InpainterStepResult out;
  if (batch.size() == 0) return out;
  inpainter->train();
  FreezeParameters freeze_d(*discriminator);
  const bool d_training = discriminator->is_training();
  discriminator->eval();  // no power iteration: D's buffers stay put
  std::optional<FreezeParameters> freeze_c;
  if (classifier != nullptr) {
    freeze_c.emplace(**classifier);
    (*classifier)->set_update_batch_stats(false);
  }

  auto loss = inpainter_loss(inpainter, batch, discriminator, classifier, weights, enabled);
  optimizer.zero_grad();
  loss.total.backward();
  optimizer.step();

  discriminator->train(d_training);
  if (classifier != nullptr) (*classifier)->set_update_batch_stats(true);
  out.total = loss.total.item<double>();
  out.gan = loss.gan.item<double>();
  out.border = loss.border.item<double>();
  out.autoencode = loss.autoencode.item<double>();
  out.adversarial = loss.adversarial.item<double>();
  return out;
}

std::int64_t SubstituteResult::count() const {
  std::int64_t n = 0;
  for (const auto& r : records) n += r.has_value() ? 1 : 0;
  return n;
}

SubstituteResult autoencoded_substitute(const torch::Tensor& images, const PatchMap& f,
                                        double fraction, int patch_size, int border, Rng& rng) {
  check_batch(images, "substitution images");
  if (fraction < 0.0 || fraction > 1.0) throw ConfigError("substitution fraction must be in [0, 1]");
  const auto n = images.size(0);
  SubstituteResult result;
  result.records.resize(static_cast<std::size_t>(n));
  const auto count = static_cast<std::int64_t>(std::llround(fraction * static_cast<double>(n)));
  if (count == 0) {
    result.images = images.clone();
    return result;
  }
  if (!f) throw ConfigError("substitution requires an inpainter");
  const auto order = rng.permutation(n);
  std::vector<std::int64_t> chosen(order.begin(), order.begin() + count);
  std::sort(chosen.begin(), chosen.end());

  std::vector<PatchSpec> specs;
  std::vector<torch::Tensor> patches;
  for (auto i : chosen) {
    specs.push_back(sample_patch_spec(static_cast<int>(images.size(2)),
                                      static_cast<int>(images.size(3)), patch_size, border, rng));
    patches.push_back(extract_patch(images[i], specs.back()));
  }
  const auto encoded = f(torch::stack(patches)).detach();
  auto out = images.clone();
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    const auto& s = specs[k];
    const auto i = chosen[k];
    out[i].narrow(1, s.top, s.size).narrow(2, s.left, s.size).copy_(encoded[static_cast<std::int64_t>(k)]);
    result.records[static_cast<std::size_t>(i)] = Substitution{s, encoded[static_cast<std::int64_t>(k)].clone()};
  }
  result.images = out;
  return result;
}

FreezeParameters::FreezeParameters(torch::nn::Module& module) {
  for (auto& p : module.parameters()) {
    params_.push_back(p);
    previous_.push_back(p.requires_grad());
    p.requires_grad_(false);
  }
}

FreezeParameters::~FreezeParameters() {
  for (std::size_t i = 0; i < params_.size(); ++i) params_[i].requires_grad_(previous_[i]);
}

}  // namespace gssl
