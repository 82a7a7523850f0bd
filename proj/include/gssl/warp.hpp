#pragma once

#include <array>
#include <optional>
#include <vector>

#include <torch/torch.h>

#include "gssl/rng.hpp"

namespace gssl {

// Parameters of one random spline warp. Control points sit on a grid_m x grid_m
// lattice of pixel centers spanning the image, corners included. Each point's
// offset (dx, dy) is the displacement at which the output pixel samples the
// input there.
struct WarpSpec {
  int height = 0;
  int width = 0;
  int grid_m = 4;
  double max_offset = 0.0;
  int spline_order = 2;
  // (x, y) pixel coordinates, row-major over the lattice.
  std::vector<std::array<double, 2>> control_points;
  std::vector<std::array<double, 2>> offsets;
};

// Dense per-pixel displacement, float32 [H, W, 2] holding (dx, dy).
struct WarpField {
  torch::Tensor flow;
  int height() const { return static_cast<int>(flow.size(0)); }
  int width() const { return static_cast<int>(flow.size(1)); }
};

// One tenth of the image width.
double default_max_offset(int width);

// Lattice coordinate i of m along an axis of `extent` pixels (rounded to a
// pixel center, 0 and extent-1 at the ends).
int control_coordinate(int i, int grid_m, int extent);

// Offsets are i.i.d. uniform on [-d, d]^2. `max_offset` defaults to
// default_max_offset(width). Throws ConfigError for grid_m < 2 or d < 0.
WarpSpec sample_warp_spec(int height, int width, int grid_m, std::optional<double> max_offset,
                          Rng& rng, int spline_order = 2);

// Spline-interpolates the control offsets to every pixel.
WarpField densify(const WarpSpec& spec);

// Backward warping with bilinear sampling: out(p) = img(p + flow(p)), source
// coordinates clamped to the image rectangle. Works on [C,H,W] float32 or
// float64 images; integer displacements reproduce pixels exactly.
torch::Tensor warp(const torch::Tensor& image, const WarpField& field);
torch::Tensor warp(const torch::Tensor& image, const torch::Tensor& flow);

struct WarpGradients {
  torch::Tensor image;  // same shape as the image
  torch::Tensor flow;   // [H, W, 2]
};

// Vector-Jacobian product of warp() for an upstream gradient [C,H,W]. The
// derivative with respect to a clamped source coordinate is zero.
WarpGradients warp_backward(const torch::Tensor& image, const torch::Tensor& flow,
                            const torch::Tensor& grad_output);

// warp() recorded on the autograd tape, differentiable in both arguments.
torch::Tensor warp_autograd(const torch::Tensor& image, const torch::Tensor& flow);

}  // namespace gssl
