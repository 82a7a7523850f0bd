#include "gssl/losses.hpp"

#include <array>

#include "gssl/error.hpp"

namespace gssl {

namespace {

struct EnabledColumns {
  torch::Tensor columns;                      // enabled label indices
  std::array<std::int64_t, kNumTransforms> position;  // label -> column, -1 if disabled
};

EnabledColumns enabled_columns(const std::vector<TransformLabel>& enabled) {
  if (enabled.empty()) throw ConfigError("no enabled transform classes");
  EnabledColumns out;
  out.position.fill(-1);
  std::vector<std::int64_t> cols;
  for (auto label : enabled) {
    out.position[static_cast<std::size_t>(to_index(label))] = static_cast<std::int64_t>(cols.size());
    cols.push_back(to_index(label));
  }
  out.columns = torch::tensor(cols, torch::kInt64);
  return out;
}

}  // namespace

torch::Tensor ssl_cross_entropy(const torch::Tensor& logits, const torch::Tensor& labels,
                                const std::vector<TransformLabel>& enabled) {
  if (logits.dim() != 2 || logits.size(1) != kNumTransforms) {
    throw ShapeError("ssl logits must be [M, 6]");
  }
  if (labels.dim() != 1 || labels.size(0) != logits.size(0) || logits.size(0) == 0) {
    throw ShapeError("ssl labels must be a non-empty [M] tensor matching the logits");
  }
  const auto cols = enabled_columns(enabled);
  const auto lab = labels.to(torch::kInt64).contiguous();
  std::vector<std::int64_t> target(static_cast<std::size_t>(lab.size(0)));
  const auto* l = lab.data_ptr<std::int64_t>();
  for (std::size_t i = 0; i < target.size(); ++i) {
    const auto y = l[i];
    if (y < 0 || y >= kNumTransforms || cols.position[static_cast<std::size_t>(y)] < 0) {
      throw ConfigError("label " + std::to_string(y) + " is not an enabled transform");
    }
    target[i] = cols.position[static_cast<std::size_t>(y)];
  }
  const auto sub = logits.index_select(1, cols.columns);
  return torch::nll_loss(torch::log_softmax(sub, 1), torch::tensor(target, torch::kInt64));
}

torch::Tensor predict_enabled(const torch::Tensor& logits,
                              const std::vector<TransformLabel>& enabled) {
  const auto cols = enabled_columns(enabled);
  return cols.columns.index_select(0, logits.index_select(1, cols.columns).argmax(1));
}

torch::Tensor hinge_d_loss(const torch::Tensor& real_scores, const torch::Tensor& fake_scores) {
  return torch::relu(1.0 - real_scores).mean() + torch::relu(1.0 + fake_scores).mean();
}

torch::Tensor hinge_g_loss(const torch::Tensor& fake_scores) { return -fake_scores.mean(); }

torch::Tensor border_loss(const torch::Tensor& inpainted, const torch::Tensor& original,
                          const torch::Tensor& mask) {
  if (inpainted.sizes() != original.sizes()) throw ShapeError("border loss shape mismatch");
  const auto ring = (1.0 - mask).to(inpainted.scalar_type()).expand_as(inpainted);
  const auto count = ring.sum();
  if (count.item<double>() == 0.0) return torch::zeros({}, inpainted.options());
  return ((inpainted - original).pow(2) * ring).sum() / count;
}

torch::Tensor autoencode_loss(const torch::Tensor& reconstructed, const torch::Tensor& original) {
  return (reconstructed - original).pow(2).mean();
}

}  // namespace gssl
