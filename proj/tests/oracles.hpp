#pragma once

// Reference computations written with plain loops, independent of the
// library code paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include <torch/torch.h>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix to_matrix(const torch::Tensor& t) {
  const auto x = t.to(torch::kFloat64).contiguous();
  const auto* p = x.data_ptr<double>();
  const auto rows = static_cast<std::size_t>(x.size(0)), cols = static_cast<std::size_t>(x.size(1));
  Matrix m(rows, std::vector<double>(cols));
  for (std::size_t i = 0; i < rows; ++i) std::copy(p + i * cols, p + (i + 1) * cols, m[i].begin());
  return m;
}

inline std::vector<std::int64_t> to_vector(const torch::Tensor& t) {
  const auto x = t.to(torch::kInt64).contiguous();
  return {x.data_ptr<std::int64_t>(), x.data_ptr<std::int64_t>() + x.numel()};
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  const double na = aa > 0 ? std::sqrt(aa) : 1.0, nb = bb > 0 ? std::sqrt(bb) : 1.0;
  return ab / (na * nb);
}

// Leave-one-out kNN: standardize each column, rank every other point by
// cosine similarity (ties by index), vote, and break vote ties toward the
// label met first in rank order.
inline std::vector<std::int64_t> knn_loocv(const torch::Tensor& features, const std::vector<std::int64_t>& labels,
                                           int k) {
  auto x = to_matrix(features);
  const std::size_t n = x.size(), d = x[0].size();
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0;
    for (std::size_t i = 0; i < n; ++i) mean += x[i][j] / static_cast<double>(n);
    double var = 0;
    for (std::size_t i = 0; i < n; ++i) var += (x[i][j] - mean) * (x[i][j] - mean) / static_cast<double>(n);
    const double sd = var > 1e-24 ? std::sqrt(var) : 1.0;
    for (std::size_t i = 0; i < n; ++i) x[i][j] = (x[i][j] - mean) / sd;
  }
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) ranked.emplace_back(cosine(x[i], x[j]), j);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::map<std::int64_t, int> votes;
    for (int r = 0; r < k; ++r) ++votes[labels[ranked[static_cast<std::size_t>(r)].second]];
    int best = 0;
    for (const auto& [_, v] : votes) best = std::max(best, v);
    for (int r = 0; r < k; ++r) {
      const auto label = labels[ranked[static_cast<std::size_t>(r)].second];
      if (votes[label] == best) {
        out.push_back(label);
        break;
      }
    }
  }
  return out;
}

// Largest singular value by 50 power iterations in double precision.
inline double power_sigma(const torch::Tensor& w) {
  const auto m = to_matrix(w.reshape({w.size(0), -1}));
  std::vector<double> v(m[0].size(), 1.0), u(m.size());
  double sigma = 0.0;
  for (int it = 0; it < 50; ++it) {
    for (std::size_t i = 0; i < m.size(); ++i) u[i] = std::inner_product(m[i].begin(), m[i].end(), v.begin(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = 0; j < v.size(); ++j) v[j] += m[i][j] * u[i];
    }
    const double nv = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    for (auto& x : v) x /= nv;
  }
  for (std::size_t i = 0; i < m.size(); ++i) u[i] = std::inner_product(m[i].begin(), m[i].end(), v.begin(), 0.0);
  sigma = std::sqrt(std::inner_product(u.begin(), u.end(), u.begin(), 0.0));
  return sigma;
}

// Bilinear lookup of channel c at (x, y) with coordinates clamped to the
// image rectangle. img is [C, H, W].
inline double bilinear(const torch::Tensor& img, int c, double x, double y) {
  const int h = static_cast<int>(img.size(1)), w = static_cast<int>(img.size(2));
  x = std::clamp(x, 0.0, w - 1.0);
  y = std::clamp(y, 0.0, h - 1.0);
  const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0, fy = y - y0;
  auto at = [&](int yy, int xx) { return img[c][yy][xx].item<double>(); };
  return (1 - fy) * ((1 - fx) * at(y0, x0) + fx * at(y0, x1)) + fy * ((1 - fx) * at(y1, x0) + fx * at(y1, x1));
}

}  // namespace oracle
