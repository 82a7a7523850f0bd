#include "gssl/pretrain.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include "gssl/container.hpp"
#include "gssl/error.hpp"

namespace gssl {

void to_json(nlohmann::json& j, const PretrainConfig& c) {
  j = {{"train", c.train},
       {"lci", c.lci},
       {"augment", c.augment},
       {"architecture", c.architecture},
       {"classifier_width", c.classifier_width}};
}

void from_json(const nlohmann::json& j, PretrainConfig& c) {
  if (j.contains("train")) from_json(j.at("train"), c.train);
  if (j.contains("lci")) from_json(j.at("lci"), c.lci);
  if (j.contains("augment")) from_json(j.at("augment"), c.augment);
  c.architecture = j.value("architecture", c.architecture);
  c.classifier_width = j.value("classifier_width", c.classifier_width);
}

ClassifierConfig classifier_config_for(const PretrainConfig& config, int channels, int input_size) {
  ClassifierConfig cc;
  if (config.architecture == "desk") cc = desk_classifier_config(config.classifier_width, input_size);
  else if (config.architecture == "alexnet") cc = alexnet_classifier_config(false);
  else if (config.architecture == "alexnet_low") cc = alexnet_classifier_config(true);
  else throw ConfigError("unknown architecture '" + config.architecture + "'");
  if (cc.input_size != input_size) {
    throw ConfigError("architecture expects " + std::to_string(cc.input_size) + " pixel inputs, got " +
                      std::to_string(input_size));
  }
  cc.in_channels = channels;
  return cc;
}

ModelBundle make_bundle(const PretrainConfig& config, int channels, int input_size) {
  validate(config.train);
  torch::manual_seed(config.train.seed);
  ModelBundle b;
  b.c = Classifier(classifier_config_for(config, channels, input_size));
  b.c_opt = std::make_unique<torch::optim::AdamW>(make_classifier_optimizer(b.c, config.train));
  if (config.train.transforms.inpaint) {
    InpainterConfig fc;
    fc.channels = channels;
    fc.patch_size = config.lci.patch_size;
    fc.width = config.lci.width;
    fc.extra_depth = config.lci.extra_depth;
    DiscriminatorConfig dc;
    dc.channels = channels;
    dc.width = config.lci.width;
    dc.extra_depth = config.lci.extra_depth;
    b.f = Inpainter(fc);
    b.d = Discriminator(dc);
    b.f_opt = std::make_unique<torch::optim::Adam>(
        b.f->parameters(), torch::optim::AdamOptions(config.lci.f_lr).betas({config.lci.beta1, config.lci.beta2}));
    b.d_opt = std::make_unique<torch::optim::Adam>(
        b.d->parameters(), torch::optim::AdamOptions(config.lci.d_lr).betas({config.lci.beta1, config.lci.beta2}));
  }
  return b;
}

torch::Tensor augment_batch(const torch::Tensor& images, const AugmentFlags& flags, Rng& rng) {
  std::vector<torch::Tensor> out;
  out.reserve(static_cast<std::size_t>(images.size(0)));
  for (std::int64_t i = 0; i < images.size(0); ++i) out.push_back(augment(images[i], flags, rng));
  return torch::stack(out);
}

namespace {

double grad_norm(torch::nn::Module& m) {
  double s = 0;
  for (const auto& p : m.parameters()) {
    if (p.grad().defined()) s += p.grad().pow(2).sum().item<double>();
  }
  return std::sqrt(s);
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

[[noreturn]] void diverge(ModelBundle& b, const SslBatch& batch, double lr, const nlohmann::json& losses,
                          const PretrainHooks& hooks) {
  nlohmann::json dump = {
      {"type", "divergence"},
      {"step", b.step},
      {"lr", lr},
      {"losses", losses},
      {"grad_norm", {{"c", finite_or_null(grad_norm(*b.c))}}},
      {"batch",
       {{"size", batch.size()},
        {"mean", finite_or_null(batch.images.mean().item<double>())},
        {"std", finite_or_null(batch.images.std().item<double>())},
        {"min", finite_or_null(batch.images.min().item<double>())},
        {"max", finite_or_null(batch.images.max().item<double>())}}}};
  if (b.has_inpainter()) {
    dump["grad_norm"]["f"] = finite_or_null(grad_norm(*b.f));
    dump["grad_norm"]["d"] = finite_or_null(grad_norm(*b.d));
  }
  std::cerr << dump.dump() << "\n";
  if (!hooks.diagnostics.empty()) std::ofstream(hooks.diagnostics) << dump.dump(2) << "\n";
  if (hooks.metrics != nullptr) *hooks.metrics << dump.dump() << "\n" << std::flush;
  throw DivergenceError("non-finite loss at step " + std::to_string(b.step));
}

}  // namespace

PretrainSummary pretrain(ModelBundle& b, const Dataset& dataset, const PretrainConfig& config,
                         const PretrainHooks& hooks) {
  const auto& tc = config.train;
  validate(tc);
  if (tc.transforms.inpaint && !b.has_inpainter()) throw ConfigError("LCI enabled but the bundle has no inpainter");
  const auto n = dataset.size();
  const auto per_epoch = n / tc.batch_size;
  if (per_epoch == 0 && tc.epochs > 0) throw ConfigError("dataset smaller than one minibatch");
  const auto total = per_epoch * tc.epochs;
  const auto enabled = tc.transforms.labels();
  const InpainterLossWeights weights{config.lci.lambda_border, config.lci.lambda_ae, config.lci.lambda_adversarial};

  Rng rng(tc.seed ^ 0x5851f42d4c957f2dULL);
  PretrainSummary summary;
  auto confusion = torch::zeros({kNumTransforms, kNumTransforms}, torch::kInt64);
  b.c->train();
  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    const auto order = torch::tensor(rng.permutation(n), torch::kInt64);
    auto epoch_confusion = torch::zeros({kNumTransforms, kNumTransforms}, torch::kInt64);
    for (std::int64_t it = 0; it < per_epoch; ++it) {
      const auto idx = order.narrow(0, it * tc.batch_size, tc.batch_size);
      const auto sources = augment_batch(dataset.images.index_select(0, idx), config.augment, rng);
      const auto batch = build_batch(sources, tc, config.lci, b.has_inpainter() ? &b.f : nullptr, rng);
      const double lr = cosine_lr(b.step, total, tc.lr_start, tc.lr_end);

      nlohmann::json record = {{"type", "step"}, {"step", b.step}, {"epoch", epoch}, {"lr", lr}};
      if (batch.lci && batch.lci->size() > 0) {
        double d_loss = 0;
        for (int k = 0; k < config.lci.d_steps; ++k) d_loss = discriminator_step(b.d, *batch.lci, *b.d_opt);
        InpainterStepResult f_res;
        for (int k = 0; k < config.lci.f_steps; ++k) {
          f_res = inpainter_step(b.f, *batch.lci, b.d, &b.c, *b.f_opt, weights, enabled);
        }
        record["loss_d"] = d_loss;
        record["loss_f"] = f_res.total;
        record["loss_f_terms"] = {{"gan", f_res.gan},
                                  {"border", f_res.border},
                                  {"autoencode", f_res.autoencode},
                                  {"adversarial", f_res.adversarial}};
        if (!std::isfinite(d_loss) || !std::isfinite(f_res.total)) diverge(b, batch, lr, record, hooks);
      }
      ClassifierStepResult c_res;
      for (int k = 0; k < config.lci.c_steps; ++k) c_res = classifier_step(b.c, batch, *b.c_opt, lr, enabled);
      record["loss_c"] = c_res.loss;
      if (!std::isfinite(c_res.loss)) diverge(b, batch, lr, record, hooks);

      const auto cm = confusion_matrix(batch.labels, c_res.predictions);
      confusion += cm;
      epoch_confusion += cm;
      nlohmann::json acc = nlohmann::json::object();
      for (auto y : enabled) {
        const auto row = cm[to_index(y)];
        const auto count = row.sum().item<std::int64_t>();
        acc[std::string(kTransformNames[static_cast<std::size_t>(to_index(y))])] =
            count > 0 ? nlohmann::json(static_cast<double>(row[to_index(y)].item<std::int64_t>()) / static_cast<double>(count))
                      : nlohmann::json();
      }
      record["acc"] = acc;
      ++b.step;
      summary.last_loss_c = c_res.loss;
      if (hooks.metrics != nullptr && (b.step % tc.log_interval == 0)) *hooks.metrics << record.dump() << "\n";
      if (hooks.metrics != nullptr && (b.step % tc.confusion_interval == 0 || b.step == total)) {
        std::vector<std::vector<std::int64_t>> m(kNumTransforms, std::vector<std::int64_t>(kNumTransforms));
        for (int r = 0; r < kNumTransforms; ++r) {
          for (int c = 0; c < kNumTransforms; ++c) m[r][c] = confusion[r][c].item<std::int64_t>();
        }
        *hooks.metrics << nlohmann::json{{"type", "confusion"}, {"step", b.step}, {"labels", kTransformNames}, {"matrix", m}}.dump()
                       << "\n";
        confusion.zero_();
      }
      if (hooks.checkpoint && tc.checkpoint_interval > 0 && b.step % tc.checkpoint_interval == 0) hooks.checkpoint(b);
    }
    if (epoch == tc.epochs - 1) {
      double mean = 0;
      int counted = 0;
      for (int y = 0; y < kNumTransforms; ++y) {
        const auto count = epoch_confusion[y].sum().item<std::int64_t>();
        summary.final_epoch_accuracy[static_cast<std::size_t>(y)] =
            count > 0 ? static_cast<double>(epoch_confusion[y][y].item<std::int64_t>()) / static_cast<double>(count) : -1.0;
        if (count > 0) {
          mean += summary.final_epoch_accuracy[static_cast<std::size_t>(y)];
          ++counted;
        }
      }
      summary.final_epoch_mean_accuracy = counted > 0 ? mean / counted : 0.0;
    }
  }
  if (hooks.metrics != nullptr) hooks.metrics->flush();
  summary.steps = b.step;
  return summary;
}

void save_checkpoint(const std::filesystem::path& path, const std::string& kind, torch::nn::Module& module,
                     const nlohmann::json& model_config, const std::string& config_hash, std::int64_t step) {
  Container c;
  c.kind = kind;
  c.meta = {{"config_hash", config_hash}, {"step", step}, {"model_config", model_config}};
  c.tensors = module_state(module);
  save_container(path, c);
}

void save_bundle(const std::filesystem::path& dir, ModelBundle& b, const std::string& config_hash) {
  nlohmann::json cc = b.c->config();
  auto c_meta = cc;
  save_checkpoint(dir / "classifier.ckpt", "classifier", *b.c, c_meta, config_hash, b.step);
  if (b.has_inpainter()) {
    save_checkpoint(dir / "inpainter.ckpt", "inpainter", *b.f, b.f->config(), config_hash, b.step);
    save_checkpoint(dir / "discriminator.ckpt", "discriminator", *b.d, b.d->config(), config_hash, b.step);
  }
}

LoadedClassifier load_classifier(const std::filesystem::path& path) {
  const auto c = load_container(path);
  if (c.kind != "classifier") throw FormatError(path.string() + " holds a " + c.kind + ", not a classifier");
  LoadedClassifier out;
  out.c = Classifier(c.meta.at("model_config").get<ClassifierConfig>());
  load_module_state(*out.c, c.tensors);
  out.c->eval();
  out.config_hash = c.meta.value("config_hash", "");
  out.step = c.meta.value("step", std::int64_t{0});
  out.checkpoint_hash = module_checksum(*out.c);
  return out;
}

Inpainter load_inpainter(const std::filesystem::path& path) {
  const auto c = load_container(path);
  if (c.kind != "inpainter") throw FormatError(path.string() + " holds a " + c.kind + ", not an inpainter");
  Inpainter f(c.meta.at("model_config").get<InpainterConfig>());
  load_module_state(*f, c.tensors);
  f->eval();
  return f;
}

}  // namespace gssl
