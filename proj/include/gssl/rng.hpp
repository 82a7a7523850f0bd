#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <torch/torch.h>

namespace gssl {

// A seeded random stream. Every stochastic operation takes one by reference;
// workers never share a stream, so equal seeds give bit-identical outputs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double uniform(double lo, double hi);
  // Inclusive on both ends.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p);
  double normal();

  // float32 tensor of i.i.d. standard normal draws.
  torch::Tensor normal_tensor(at::IntArrayRef shape);

  // Random permutation of 0..n-1.
  std::vector<std::int64_t> permutation(std::int64_t n);

  // Independent child stream; advances this stream by one draw.
  Rng split();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gssl
