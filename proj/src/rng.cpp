#include "gssl/rng.hpp"

#include <algorithm>
#include <numeric>

namespace gssl {

double Rng::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(engine_);
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  std::uniform_int_distribution<std::int64_t> dist(lo, hi);
  return dist(engine_);
}

bool Rng::bernoulli(double p) {
  std::bernoulli_distribution dist(p);
  return dist(engine_);
}

double Rng::normal() {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

torch::Tensor Rng::normal_tensor(at::IntArrayRef shape) {
  auto out = torch::empty(shape, torch::kFloat32);
  auto* data = out.data_ptr<float>();
  std::normal_distribution<double> dist(0.0, 1.0);
  for (std::int64_t i = 0; i < out.numel(); ++i) data[i] = static_cast<float>(dist(engine_));
  return out;
}

std::vector<std::int64_t> Rng::permutation(std::int64_t n) {
  std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  // Fisher-Yates with our own draws; std::shuffle's algorithm is unspecified.
  for (std::int64_t i = n - 1; i > 0; --i) {
    auto j = uniform_int(0, i);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  return idx;
}

Rng Rng::split() { return Rng(engine_()); }

}  // namespace gssl
