#include "gssl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "gssl/error.hpp"
#include "gssl/image.hpp"
#include "gssl/rng.hpp"

namespace gssl {

int pooled_grid_side(std::int64_t channels, std::int64_t height, std::int64_t width, std::int64_t target_units) {
  if (channels <= 0 || target_units <= 0) throw ConfigError("channels and target units must be positive");
  auto s = static_cast<std::int64_t>(std::floor(std::sqrt(static_cast<double>(target_units) / static_cast<double>(channels))));
  while ((s + 1) * (s + 1) * channels <= target_units) ++s;
  while (s > 1 && s * s * channels > target_units) --s;
  s = std::min({s, height, width});
  return static_cast<int>(std::max<std::int64_t>(s, 1));
}

FeatureMatrix extract_features(Classifier& c, const torch::Tensor& images, const std::string& stage,
                               std::int64_t target_units, std::int64_t batch_size) {
  check_batch(images, "feature images");
  const auto names = c->stage_names();
  if (std::find(names.begin(), names.end(), stage) == names.end()) throw ConfigError("unknown stage '" + stage + "'");
  const bool was_training = c->is_training();
  c->eval();
  torch::NoGradGuard no_grad;
  FeatureMatrix out;
  out.stage = stage;
  out.target_units = target_units;
  std::vector<torch::Tensor> rows;
  for (std::int64_t i = 0; i < images.size(0); i += batch_size) {
    const auto map = c->features(images.narrow(0, i, std::min(batch_size, images.size(0) - i)), stage);
    out.grid = pooled_grid_side(map.size(1), map.size(2), map.size(3), target_units);
    rows.push_back(torch::adaptive_avg_pool2d(map, {out.grid, out.grid}).flatten(1));
  }
  c->train(was_training);
  if (rows.empty()) {
    const auto map = c->features(torch::zeros({1, images.size(1), images.size(2), images.size(3)}), stage);
    out.grid = pooled_grid_side(map.size(1), map.size(2), map.size(3), target_units);
    out.data = torch::empty({0, map.size(1) * out.grid * out.grid});
  } else {
    out.data = torch::cat(rows).contiguous();
  }
  return out;
}

Standardizer Standardizer::fit(const torch::Tensor& features) {
  if (features.dim() != 2 || features.size(0) == 0) throw ShapeError("standardizer needs a non-empty [N, D] matrix");
  const auto x = features.to(torch::kFloat64);
  Standardizer s;
  s.mean = x.mean(0);
  auto sd = (x - s.mean).pow(2).mean(0).sqrt();
  s.scale = torch::where(sd > 1e-12, sd, torch::ones_like(sd));
  return s;
}

torch::Tensor Standardizer::apply(const torch::Tensor& features) const {
  return ((features.to(torch::kFloat64) - mean) / scale).to(features.scalar_type());
}

double ProbeSchedule::lr_at(int epoch) const {
  if (lrs.size() != milestones.size() + 1) throw ConfigError("probe schedule needs one more rate than milestones");
  std::size_t phase = 0;
  while (phase < milestones.size() && epoch >= milestones[phase]) ++phase;
  return lrs[phase];
}

void to_json(nlohmann::json& j, const ProbeSchedule& s) {
  j = {{"epochs", s.epochs},
       {"milestones", s.milestones},
       {"lrs", s.lrs},
       {"momentum", s.momentum},
       {"batch_size", s.batch_size},
       {"weight_decay", s.weight_decay},
       {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, ProbeSchedule& s) {
  s.epochs = j.value("epochs", s.epochs);
  s.milestones = j.value("milestones", s.milestones);
  s.lrs = j.value("lrs", s.lrs);
  s.momentum = j.value("momentum", s.momentum);
  s.batch_size = j.value("batch_size", s.batch_size);
  s.weight_decay = j.value("weight_decay", s.weight_decay);
  s.seed = j.value("seed", s.seed);
}

ProbeResult train_linear_probe(const torch::Tensor& train_features, const torch::Tensor& train_labels,
                               const torch::Tensor& test_features, const torch::Tensor& test_labels,
                               const ProbeSchedule& schedule) {
  if (train_features.dim() != 2 || test_features.dim() != 2 || train_features.size(1) != test_features.size(1)) {
    throw ShapeError("probe features must be [N, D] with matching D");
  }
  if (train_features.size(0) != train_labels.size(0) || test_features.size(0) != test_labels.size(0)) {
    throw ShapeError("one label per feature row required");
  }
  const auto labels = train_labels.to(torch::kInt64);
  if (labels.numel() == 0 || std::get<0>(torch::_unique(labels)).numel() < 2) {
    throw ConfigError("linear probe needs at least two classes");
  }
  const auto classes = std::max(labels.max().item<std::int64_t>(),
                                test_labels.numel() ? test_labels.max().item<std::int64_t>() : 0) + 1;
  const auto standardizer = Standardizer::fit(train_features);
  const auto x_train = standardizer.apply(train_features.detach()).to(torch::kFloat32);
  const auto x_test = standardizer.apply(test_features.detach()).to(torch::kFloat32);

  auto weight = torch::zeros({classes, x_train.size(1)}, torch::requires_grad());
  auto bias = torch::zeros({classes}, torch::requires_grad());
  torch::optim::SGD opt({weight, bias}, torch::optim::SGDOptions(schedule.lr_at(0))
                                            .momentum(schedule.momentum)
                                            .weight_decay(schedule.weight_decay));
  Rng rng(schedule.seed);
  ProbeResult result;
  const auto n = x_train.size(0);
  for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
    for (auto& g : opt.param_groups()) static_cast<torch::optim::SGDOptions&>(g.options()).lr(schedule.lr_at(epoch));
    const auto order = torch::tensor(rng.permutation(n), torch::kInt64);
    double loss_sum = 0;
    std::int64_t correct = 0;
    for (std::int64_t i = 0; i < n; i += schedule.batch_size) {
      const auto idx = order.narrow(0, i, std::min<std::int64_t>(schedule.batch_size, n - i));
      const auto logits = torch::addmm(bias, x_train.index_select(0, idx), weight.t());
      const auto y = labels.index_select(0, idx);
      auto loss = torch::nn::functional::cross_entropy(logits, y);
      opt.zero_grad();
      loss.backward();
      opt.step();
      loss_sum += loss.item<double>() * static_cast<double>(idx.size(0));
      correct += logits.argmax(1).eq(y).sum().item<std::int64_t>();
    }
    result.train_loss.push_back(loss_sum / static_cast<double>(n));
    result.train_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(n));
  }
  torch::NoGradGuard no_grad;
  if (x_test.size(0) > 0) {
    const auto pred = torch::addmm(bias, x_test, weight.t()).argmax(1);
    result.accuracy = pred.eq(test_labels.to(torch::kInt64)).to(torch::kFloat64).mean().item<double>();
  }
  return result;
}

torch::Tensor knn_loocv_predictions(const torch::Tensor& features, const torch::Tensor& labels, int k) {
  if (k <= 0) throw ConfigError("k must be positive");
  if (features.dim() != 2 || features.size(0) != labels.size(0)) throw ShapeError("features must be [N, D] with N labels");
  const auto n = features.size(0);
  if (n <= k + 1) throw ConfigError("kNN needs more than k + 1 points");
  auto x = Standardizer::fit(features).apply(features.to(torch::kFloat64));
  const auto norms = x.norm(2, 1, true);
  x = x / torch::where(norms > 0, norms, torch::ones_like(norms));
  auto sim = torch::mm(x, x.t());
  // The self-match outranks everything, including exact duplicates.
  sim.fill_diagonal_(std::numeric_limits<double>::infinity());
  const auto y = labels.to(torch::kInt64).contiguous();
  const auto* yp = y.data_ptr<std::int64_t>();
  const auto s = sim.contiguous();
  const auto* sp = s.data_ptr<double>();

  std::vector<std::int64_t> predictions(static_cast<std::size_t>(n));
  std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const double* row = sp + i * n;
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + k + 1, idx.end(), [row](std::int64_t a, std::int64_t b) {
      return row[a] != row[b] ? row[a] > row[b] : a < b;
    });
    std::map<std::int64_t, int> votes;
    for (int r = 1; r <= k; ++r) ++votes[yp[idx[static_cast<std::size_t>(r)]]];
    int best = 0;
    for (const auto& [label, count] : votes) best = std::max(best, count);
    for (int r = 1; r <= k; ++r) {
      const auto label = yp[idx[static_cast<std::size_t>(r)]];
      if (votes[label] == best) {
        predictions[static_cast<std::size_t>(i)] = label;
        break;
      }
    }
  }
  return torch::tensor(predictions, torch::kInt64);
}

double knn_loocv(const torch::Tensor& features, const torch::Tensor& labels, int k) {
  return knn_loocv_predictions(features, labels, k).eq(labels.to(torch::kInt64)).to(torch::kFloat64).mean().item<double>();
}

torch::Tensor five_crop_features(Classifier& c, const torch::Tensor& images, const std::string& stage, int crop,
                                 std::int64_t target_units) {
  check_batch(images, "five-crop images");
  const auto h = images.size(2), w = images.size(3);
  if (crop <= 0 || crop > h || crop > w) throw ConfigError("image smaller than the crop");
  const std::array<std::array<std::int64_t, 2>, 5> corners = {
      {{0, 0}, {0, w - crop}, {h - crop, 0}, {h - crop, w - crop}, {(h - crop) / 2, (w - crop) / 2}}};
  std::vector<torch::Tensor> parts;
  for (const auto& [top, left] : corners) {
    const auto view = images.narrow(2, top, crop).narrow(3, left, crop).contiguous();
    parts.push_back(extract_features(c, view, stage, target_units).data);
  }
  return torch::cat(parts, 1);
}

torch::Tensor retrieve(const torch::Tensor& queries, const torch::Tensor& gallery, std::int64_t topk) {
  const auto q2 = queries.dim() == 1 ? queries.unsqueeze(0) : queries;
  if (q2.dim() != 2 || gallery.dim() != 2 || q2.size(1) != gallery.size(1)) {
    throw ShapeError("queries and gallery must be [*, D] with matching D");
  }
  const auto g = gallery.size(0);
  if (topk <= 0 || topk > g) throw ConfigError("topk must lie in [1, gallery size]");
  auto normalize_rows = [](const torch::Tensor& m) {
    auto x = m.to(torch::kFloat64);
    const auto norms = x.norm(2, 1, true);
    return x / torch::where(norms > 0, norms, torch::ones_like(norms));
  };
  const auto sim = torch::mm(normalize_rows(q2), normalize_rows(gallery).t()).contiguous();
  const auto* sp = sim.data_ptr<double>();
  auto out = torch::empty({q2.size(0), topk}, torch::kInt64);
  auto* op = out.data_ptr<std::int64_t>();
  std::vector<std::int64_t> idx(static_cast<std::size_t>(g));
  for (std::int64_t q = 0; q < q2.size(0); ++q) {
    const double* row = sp + q * g;
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + topk, idx.end(), [row](std::int64_t a, std::int64_t b) {
      return row[a] != row[b] ? row[a] > row[b] : a < b;
    });
    std::copy(idx.begin(), idx.begin() + topk, op + q * topk);
  }
  return out;
}

}  // namespace gssl
