#include "gssl/warp.hpp"

#include <algorithm>
#include <cmath>

#include "gssl/error.hpp"
#include "gssl/image.hpp"
#include "gssl/spline.hpp"

namespace gssl {

double default_max_offset(int width) { return width / 10.0; }

int control_coordinate(int i, int grid_m, int extent) {
  return static_cast<int>(std::lround(static_cast<double>(i) * (extent - 1) / (grid_m - 1)));
}

WarpSpec sample_warp_spec(int height, int width, int grid_m, std::optional<double> max_offset,
                          Rng& rng, int spline_order) {
  if (grid_m < 2) throw ConfigError("warp grid needs at least 2 points per axis");
  if (height < grid_m || width < grid_m) throw ConfigError("warp grid denser than the image");
  const double d = max_offset.value_or(default_max_offset(width));
  if (d < 0.0) throw ConfigError("warp displacement bound must be non-negative");

  WarpSpec spec;
  spec.height = height;
  spec.width = width;
  spec.grid_m = grid_m;
  spec.max_offset = d;
  spec.spline_order = spline_order;
  for (int gy = 0; gy < grid_m; ++gy) {
    for (int gx = 0; gx < grid_m; ++gx) {
      spec.control_points.push_back({static_cast<double>(control_coordinate(gx, grid_m, width)),
                                     static_cast<double>(control_coordinate(gy, grid_m, height))});
      if (d == 0.0) {
        spec.offsets.push_back({0.0, 0.0});
      } else {
        const double dx = rng.uniform(-d, d);
        const double dy = rng.uniform(-d, d);
        spec.offsets.push_back({dx, dy});
      }
    }
  }
  return spec;
}

WarpField densify(const WarpSpec& spec) {
  const auto n = static_cast<Eigen::Index>(spec.control_points.size());
  if (n == 0 || spec.offsets.size() != spec.control_points.size()) {
    throw ConfigError("warp spec has no control points or mismatched offsets");
  }
  auto flow = torch::zeros({spec.height, spec.width, 2}, torch::kFloat32);
  const bool all_zero = std::all_of(spec.offsets.begin(), spec.offsets.end(),
                                    [](const auto& o) { return o[0] == 0.0 && o[1] == 0.0; });
  if (all_zero) return WarpField{flow};

  Points2 centers(n, 2);
  Points2 values(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    centers(i, 0) = spec.control_points[static_cast<std::size_t>(i)][0];
    centers(i, 1) = spec.control_points[static_cast<std::size_t>(i)][1];
    values(i, 0) = spec.offsets[static_cast<std::size_t>(i)][0];
    values(i, 1) = spec.offsets[static_cast<std::size_t>(i)][1];
  }
  const auto spline = PolyharmonicSpline::fit(centers, values, spec.spline_order);

  Points2 queries(static_cast<Eigen::Index>(spec.height) * spec.width, 2);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const auto q = static_cast<Eigen::Index>(y) * spec.width + x;
      queries(q, 0) = x;
      queries(q, 1) = y;
    }
  }
  const Points2 dense = spline.evaluate(queries);
  auto* out = flow.data_ptr<float>();
  for (Eigen::Index q = 0; q < dense.rows(); ++q) {
    out[2 * q] = static_cast<float>(dense(q, 0));
    out[2 * q + 1] = static_cast<float>(dense(q, 1));
  }
  return WarpField{flow};
}

namespace {

// Bilinear footprint of one clamped source coordinate.
template <typename T>
struct Tap {
  std::int64_t x0, x1, y0, y1;
  T ax, ay;
  bool x_free, y_free;  // coordinate not clamped, derivative passes through
};

template <typename T>
Tap<T> make_tap(std::int64_t x, std::int64_t y, T fx, T fy, std::int64_t width,
                std::int64_t height) {
  const T max_x = static_cast<T>(width - 1);
  const T max_y = static_cast<T>(height - 1);
  const T raw_x = static_cast<T>(x) + fx;
  const T raw_y = static_cast<T>(y) + fy;
  const T sx = std::clamp(raw_x, T(0), max_x);
  const T sy = std::clamp(raw_y, T(0), max_y);
  Tap<T> tap;
  tap.x0 = static_cast<std::int64_t>(std::floor(sx));
  tap.y0 = static_cast<std::int64_t>(std::floor(sy));
  tap.x1 = std::min(tap.x0 + 1, width - 1);
  tap.y1 = std::min(tap.y0 + 1, height - 1);
  tap.ax = sx - static_cast<T>(tap.x0);
  tap.ay = sy - static_cast<T>(tap.y0);
  tap.x_free = raw_x > T(0) && raw_x < max_x;
  tap.y_free = raw_y > T(0) && raw_y < max_y;
  return tap;
}

void check_warp_args(const torch::Tensor& image, const torch::Tensor& flow) {
  check_image(image, "warp image");
  if (flow.dim() != 3 || flow.size(2) != 2 || flow.size(0) != image.size(1) ||
      flow.size(1) != image.size(2)) {
    throw ShapeError("warp field must be [H,W,2] matching the image");
  }
}

template <typename T>
torch::Tensor warp_forward_impl(const torch::Tensor& image, const torch::Tensor& flow) {
  const auto img = image.contiguous();
  const auto fl = flow.to(img.scalar_type()).contiguous();
  const auto channels = img.size(0), height = img.size(1), width = img.size(2);
  auto out = torch::empty_like(img);
  const T* src = img.data_ptr<T>();
  const T* f = fl.data_ptr<T>();
  T* dst = out.data_ptr<T>();
  const auto plane = height * width;
  for (std::int64_t y = 0; y < height; ++y) {
    for (std::int64_t x = 0; x < width; ++x) {
      const auto p = y * width + x;
      const auto tap = make_tap<T>(x, y, f[2 * p], f[2 * p + 1], width, height);
      for (std::int64_t c = 0; c < channels; ++c) {
        const T* s = src + c * plane;
        const T top = (T(1) - tap.ax) * s[tap.y0 * width + tap.x0] + tap.ax * s[tap.y0 * width + tap.x1];
        const T bottom = (T(1) - tap.ax) * s[tap.y1 * width + tap.x0] + tap.ax * s[tap.y1 * width + tap.x1];
        dst[c * plane + p] = (T(1) - tap.ay) * top + tap.ay * bottom;
      }
    }
  }
  return out;
}

template <typename T>
WarpGradients warp_backward_impl(const torch::Tensor& image, const torch::Tensor& flow,
                                 const torch::Tensor& grad_output) {
  const auto img = image.contiguous();
  const auto fl = flow.to(img.scalar_type()).contiguous();
  const auto go = grad_output.to(img.scalar_type()).contiguous();
  const auto channels = img.size(0), height = img.size(1), width = img.size(2);
  auto grad_img = torch::zeros_like(img);
  auto grad_flow = torch::zeros({height, width, 2}, img.options());
  const T* src = img.data_ptr<T>();
  const T* f = fl.data_ptr<T>();
  const T* g = go.data_ptr<T>();
  T* gi = grad_img.data_ptr<T>();
  T* gf = grad_flow.data_ptr<T>();
  const auto plane = height * width;
  for (std::int64_t y = 0; y < height; ++y) {
    for (std::int64_t x = 0; x < width; ++x) {
      const auto p = y * width + x;
      const auto tap = make_tap<T>(x, y, f[2 * p], f[2 * p + 1], width, height);
      T dfx = 0, dfy = 0;
      for (std::int64_t c = 0; c < channels; ++c) {
        const T* s = src + c * plane;
        T* gs = gi + c * plane;
        const T up = g[c * plane + p];
        const T v00 = s[tap.y0 * width + tap.x0], v01 = s[tap.y0 * width + tap.x1];
        const T v10 = s[tap.y1 * width + tap.x0], v11 = s[tap.y1 * width + tap.x1];
        gs[tap.y0 * width + tap.x0] += up * (T(1) - tap.ax) * (T(1) - tap.ay);
        gs[tap.y0 * width + tap.x1] += up * tap.ax * (T(1) - tap.ay);
        gs[tap.y1 * width + tap.x0] += up * (T(1) - tap.ax) * tap.ay;
        gs[tap.y1 * width + tap.x1] += up * tap.ax * tap.ay;
        dfx += up * ((T(1) - tap.ay) * (v01 - v00) + tap.ay * (v11 - v10));
        dfy += up * ((T(1) - tap.ax) * (v10 - v00) + tap.ax * (v11 - v01));
      }
      gf[2 * p] = tap.x_free ? dfx : T(0);
      gf[2 * p + 1] = tap.y_free ? dfy : T(0);
    }
  }
  return {grad_img, grad_flow};
}

class WarpFunction : public torch::autograd::Function<WarpFunction> {
 public:
  static torch::Tensor forward(torch::autograd::AutogradContext* ctx, const torch::Tensor& image,
                               const torch::Tensor& flow) {
    ctx->save_for_backward({image, flow});
    return warp(image, flow);
  }

  static torch::autograd::tensor_list backward(torch::autograd::AutogradContext* ctx,
                                               torch::autograd::tensor_list grads) {
    const auto saved = ctx->get_saved_variables();
    auto g = warp_backward(saved[0], saved[1], grads[0]);
    return {g.image, g.flow.to(saved[1].scalar_type())};
  }
};

}  // namespace

torch::Tensor warp(const torch::Tensor& image, const torch::Tensor& flow) {
  check_warp_args(image, flow);
  torch::NoGradGuard no_grad;
  switch (image.scalar_type()) {
    case torch::kFloat32: return warp_forward_impl<float>(image, flow);
    case torch::kFloat64: return warp_forward_impl<double>(image, flow);
    default: throw ShapeError("warp supports float32 and float64 images");
  }
}

torch::Tensor warp(const torch::Tensor& image, const WarpField& field) {
  return warp(image, field.flow);
}

WarpGradients warp_backward(const torch::Tensor& image, const torch::Tensor& flow,
                            const torch::Tensor& grad_output) {
  check_warp_args(image, flow);
  if (grad_output.sizes() != image.sizes()) throw ShapeError("warp gradient shape mismatch");
  torch::NoGradGuard no_grad;
  switch (image.scalar_type()) {
    case torch::kFloat32: return warp_backward_impl<float>(image, flow, grad_output);
    case torch::kFloat64: return warp_backward_impl<double>(image, flow, grad_output);
    default: throw ShapeError("warp supports float32 and float64 images");
  }
}

torch::Tensor warp_autograd(const torch::Tensor& image, const torch::Tensor& flow) {
  return WarpFunction::apply(image, flow);
}

}  // namespace gssl
