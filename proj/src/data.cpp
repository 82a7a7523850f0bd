#include "gssl/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <numeric>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "gssl/container.hpp"
#include "gssl/error.hpp"
#include "gssl/image.hpp"
#include "gssl/rotate.hpp"

namespace gssl {

torch::Tensor normalize(const torch::Tensor& hwc_u8) {
  if (hwc_u8.dim() != 3 || hwc_u8.size(2) != 3 || hwc_u8.scalar_type() != torch::kUInt8) {
    throw ShapeError("normalize expects uint8 [H, W, 3]");
  }
  return (hwc_u8.permute({2, 0, 1}).to(torch::kFloat32) / 127.5f - 1.0f).contiguous();
}

torch::Tensor denormalize(const torch::Tensor& chw) {
  check_image(chw);
  return ((chw.detach().to(torch::kFloat32) + 1.0f) * 127.5f)
      .round()
      .clamp(0, 255)
      .to(torch::kUInt8)
      .permute({1, 2, 0})
      .contiguous();
}

void to_json(nlohmann::json& j, const AugmentFlags& f) {
  j = {{"random_crop", f.random_crop},
       {"crop_size", f.crop_size},
       {"horizontal_flip", f.horizontal_flip},
       {"flip_probability", f.flip_probability}};
}

void from_json(const nlohmann::json& j, AugmentFlags& f) {
  f.random_crop = j.value("random_crop", f.random_crop);
  f.crop_size = j.value("crop_size", f.crop_size);
  f.horizontal_flip = j.value("horizontal_flip", f.horizontal_flip);
  f.flip_probability = j.value("flip_probability", f.flip_probability);
}

torch::Tensor horizontal_flip(const torch::Tensor& image) { return image.flip({-1}); }

torch::Tensor center_crop(const torch::Tensor& image, int size) {
  check_image(image);
  const auto h = image.size(1), w = image.size(2);
  if (size <= 0 || size > h || size > w) throw ConfigError("center crop larger than the image");
  return image.narrow(1, (h - size) / 2, size).narrow(2, (w - size) / 2, size).clone();
}

torch::Tensor augment(const torch::Tensor& image, const AugmentFlags& flags, Rng& rng) {
  check_image(image);
  auto out = image;
  if (flags.random_crop) {
    const auto h = image.size(1), w = image.size(2);
    if (flags.crop_size <= 0 || flags.crop_size > h || flags.crop_size > w) {
      throw ConfigError("crop size must lie in [1, image size]");
    }
    const auto top = rng.uniform_int(0, h - flags.crop_size);
    const auto left = rng.uniform_int(0, w - flags.crop_size);
    out = out.narrow(1, top, flags.crop_size).narrow(2, left, flags.crop_size);
  }
  if (flags.horizontal_flip && rng.bernoulli(flags.flip_probability)) out = horizontal_flip(out);
  return out.clone();
}

void to_json(nlohmann::json& j, const DatasetSpec& s) {
  j = {{"source", s.source},
       {"split", s.split},
       {"size", s.size},
       {"image_size", s.image_size},
       {"num_classes", s.num_classes},
       {"texture_amplitude", s.texture_amplitude},
       {"position_jitter", s.position_jitter},
       {"part_jitter", s.part_jitter},
       {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, DatasetSpec& s) {
  s.source = j.value("source", s.source);
  s.split = j.value("split", s.split);
  s.size = j.value("size", s.size);
  s.image_size = j.value("image_size", s.image_size);
  s.num_classes = j.value("num_classes", s.num_classes);
  s.texture_amplitude = j.value("texture_amplitude", s.texture_amplitude);
  s.position_jitter = j.value("position_jitter", s.position_jitter);
  s.part_jitter = j.value("part_jitter", s.part_jitter);
  s.seed = j.value("seed", s.seed);
}

namespace {

// ---------------------------------------------------------------------------
// Rendering on an H x W x 3 float canvas with anti-aliased signed-distance
// coverage.

using Color = std::array<float, 3>;

struct Canvas {
  int h, w;
  std::vector<float> px;
  Canvas(int height, int width) : h(height), w(width), px(static_cast<std::size_t>(height * width * 3), 0.f) {}
  float* at(int y, int x) { return &px[static_cast<std::size_t>((y * w + x) * 3)]; }

  // Blends `color` wherever sdf(x, y) < 0, with a one pixel soft edge.
  template <typename Sdf>
  void paint(const Sdf& sdf, const Color& color, double opacity = 1.0) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double a = std::clamp(0.5 - sdf(x + 0.5, y + 0.5), 0.0, 1.0) * opacity;
        if (a <= 0) continue;
        float* p = at(y, x);
        for (int c = 0; c < 3; ++c) p[c] = static_cast<float>((1 - a) * p[c] + a * color[c]);
      }
    }
  }

  torch::Tensor to_tensor() const {
    auto t = torch::from_blob(const_cast<float*>(px.data()), {h, w, 3}, torch::kFloat32);
    return t.permute({2, 0, 1}).clamp(-1.f, 1.f).contiguous();
  }
};

auto disc(double cx, double cy, double r) {
  return [=](double x, double y) { return std::hypot(x - cx, y - cy) - r; };
}

auto ellipse(double cx, double cy, double rx, double ry) {
  // Scaled-distance approximation; accurate enough for soft edges.
  return [=](double x, double y) {
    const double k = std::hypot((x - cx) / rx, (y - cy) / ry);
    return (k - 1.0) * std::min(rx, ry);
  };
}

auto ring(double cx, double cy, double r, double thickness) {
  return [=](double x, double y) { return std::abs(std::hypot(x - cx, y - cy) - r) - thickness / 2; };
}

auto segment(double x0, double y0, double x1, double y1, double thickness) {
  return [=](double x, double y) {
    const double dx = x1 - x0, dy = y1 - y0;
    const double t = std::clamp(((x - x0) * dx + (y - y0) * dy) / (dx * dx + dy * dy), 0.0, 1.0);
    return std::hypot(x - x0 - t * dx, y - y0 - t * dy) - thickness / 2;
  };
}

// Smoothed Gaussian noise with the given standard deviation.
std::vector<float> texture(int h, int w, double amplitude, double blur, Rng& rng) {
  cv::Mat noise(h, w, CV_32F);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) noise.at<float>(y, x) = static_cast<float>(rng.normal());
  }
  if (blur > 0) cv::GaussianBlur(noise, noise, cv::Size(0, 0), blur, blur, cv::BORDER_REFLECT);
  cv::Scalar mean, stddev;
  cv::meanStdDev(noise, mean, stddev);
  const double scale = stddev[0] > 0 ? amplitude / stddev[0] : 0.0;
  std::vector<float> out(static_cast<std::size_t>(h * w));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out[static_cast<std::size_t>(y * w + x)] = static_cast<float>((noise.at<float>(y, x) - mean[0]) * scale);
    }
  }
  return out;
}

Color random_color(Rng& rng, double brightness) {
  Color c;
  for (auto& v : c) v = static_cast<float>(std::clamp(brightness + rng.uniform(-0.3, 0.3), -1.0, 1.0));
  return c;
}

// ---------------------------------------------------------------------------
// Generic variant.

constexpr std::array<double, 3> kRadii = {0.24, 0.34, 0.46};

std::array<double, 2> rotate_point(double x, double y, int k, bool mirror) {
  if (mirror) x = -x;
  for (int i = 0; i < k; ++i) {
    // 90 degrees counter-clockwise in image coordinates (y down).
    const double nx = y, ny = -x;
    x = nx;
    y = ny;
  }
  return {x, y};
}

DiscLayout transformed(const DiscLayout& l, int k, bool mirror) {
  DiscLayout out;
  for (const auto& p : l.parts) {
    const auto q = rotate_point(p[0], p[1], k, mirror);
    out.parts.push_back({q[0], q[1], p[2]});
  }
  return out;
}

DiscLayout centered(DiscLayout l) {
  double mx = 0, my = 0;
  for (const auto& p : l.parts) {
    mx += p[0];
    my += p[1];
  }
  mx /= static_cast<double>(l.parts.size());
  my /= static_cast<double>(l.parts.size());
  for (auto& p : l.parts) {
    p[0] -= mx;
    p[1] -= my;
  }
  return l;
}

// RMS distance under the best part matching; radii mismatches count double.
double layout_distance(const DiscLayout& a_raw, const DiscLayout& b_raw) {
  const auto a = centered(a_raw), b = centered(b_raw);
  if (a.parts.size() != b.parts.size()) return std::numeric_limits<double>::infinity();
  std::vector<std::size_t> perm(a.parts.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      const auto& p = a.parts[i];
      const auto& q = b.parts[perm[i]];
      s += (p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]) + 4 * (p[2] - q[2]) * (p[2] - q[2]);
    }
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best / static_cast<double>(a.parts.size()));
}

constexpr double kMinLayoutDistance = 0.25;

void render_generic(Canvas& canvas, const DiscLayout& layout, const SyntheticOrientedSpec& spec, Rng& rng) {
  const int n = canvas.h;
  const double bg = rng.uniform(-0.5, 0.5);
  const auto tex = texture(n, n, spec.texture_amplitude, spec.texture_blur, rng);
  const Color tint = {static_cast<float>(rng.uniform(-0.15, 0.15)), static_cast<float>(rng.uniform(-0.15, 0.15)),
                      static_cast<float>(rng.uniform(-0.15, 0.15))};
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      float* p = canvas.at(y, x);
      for (int c = 0; c < 3; ++c) p[c] = static_cast<float>(bg + tint[c] + tex[static_cast<std::size_t>(y * n + x)]);
    }
  }
  const bool mirror = rng.bernoulli(0.5);
  const double scale = n * 0.3 * rng.uniform(0.85, 1.1);
  const double cx = n / 2.0 + rng.uniform(-spec.position_jitter, spec.position_jitter);
  const double cy = n / 2.0 + rng.uniform(-spec.position_jitter, spec.position_jitter);
  const double brightness = bg > 0 ? rng.uniform(-0.8, -0.3) : rng.uniform(0.3, 0.8);
  for (const auto& part : transformed(layout, 0, mirror).parts) {
    const double px = cx + part[0] * scale + rng.uniform(-spec.part_jitter, spec.part_jitter);
    const double py = cy + part[1] * scale + rng.uniform(-spec.part_jitter, spec.part_jitter);
    const double r = part[2] * scale * rng.uniform(0.9, 1.1);
    canvas.paint(disc(px, py, r), random_color(rng, brightness));
  }
}

// ---------------------------------------------------------------------------
// Face variant: attributes are glasses, mouth shape and hair length, in that
// bit order of the class index.

void render_face(Canvas& canvas, int label, const SyntheticOrientedSpec& spec, Rng& rng) {
  const int n = canvas.h;
  const bool glasses = (label & 1) != 0;
  const bool open_mouth = (label & 2) != 0;
  const bool long_hair = (label & 4) != 0;

  // Light from above: every region darkens downwards.
  const double light = rng.uniform(1.0, 1.4);
  auto shade = [&](int y) { return light * (0.5 - (y + 0.5) / n); };

  const double bg = rng.uniform(-0.4, 0.2);
  const auto tex = texture(n, n, spec.texture_amplitude, spec.texture_blur, rng);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      float* p = canvas.at(y, x);
      for (int c = 0; c < 3; ++c) p[c] = static_cast<float>(bg + tex[static_cast<std::size_t>(y * n + x)]);
    }
  }

  const double s = n / 36.0 * rng.uniform(0.92, 1.08);
  const double cx = n / 2.0 + rng.uniform(-spec.position_jitter, spec.position_jitter) * 0.6;
  const double cy = n / 2.0 + 1.5 * s + rng.uniform(-spec.position_jitter, spec.position_jitter) * 0.6;
  const Color hair = random_color(rng, rng.uniform(-0.9, -0.5));
  const Color skin = {static_cast<float>(rng.uniform(0.2, 0.7)), static_cast<float>(rng.uniform(0.0, 0.4)),
                      static_cast<float>(rng.uniform(-0.2, 0.2))};
  const double fx = 9.5 * s, fy = 12.0 * s;

  // Hair behind the head; long hair reaches the shoulders.
  const double hair_bottom = long_hair ? cy + 12 * s : cy - 2 * s;
  const double strand_phase = rng.uniform(0, 6.3);
  canvas.paint(
      [&](double x, double y) {
        const double head = std::hypot((x - cx) / (fx + 2 * s), (y - cy + 2 * s) / (fy + 1.5 * s)) - 1.0;
        const double cut = y - hair_bottom;
        return std::max(head * fx, cut);
      },
      hair);
  // Vertical strands.
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double head = std::hypot((x - cx) / (fx + 2 * s), (y - cy + 2 * s) / (fy + 1.5 * s));
      if (head > 1.0 || y > hair_bottom) continue;
      float* p = canvas.at(y, x);
      const double streak = 0.12 * std::sin(2.1 * x / s + strand_phase);
      for (int c = 0; c < 3; ++c) p[c] += static_cast<float>(streak);
    }
  }
  canvas.paint(ellipse(cx, cy, fx, fy), skin);
  // Fringe on the forehead.
  canvas.paint(
      [&](double x, double y) {
        return std::max(std::hypot((x - cx) / fx, (y - cy) / fy) - 1.0, (y - (cy - 7.5 * s)) / fy) * fx;
      },
      hair);

  const double eye_dy = -2.0 * s, eye_dx = rng.uniform(3.6, 4.4) * s;
  const Color white = {0.9f, 0.9f, 0.9f};
  const Color dark = random_color(rng, -0.85);
  for (int side : {-1, 1}) {
    const double ex = cx + side * eye_dx, ey = cy + eye_dy;
    canvas.paint(ellipse(ex, ey, 1.9 * s, 1.1 * s), white);
    canvas.paint(disc(ex, ey + 0.1 * s, 0.9 * s), dark);
    // Brow above the eye, tilted towards the temples.
    canvas.paint(segment(ex - 1.9 * s, ey - 2.1 * s + side * 0.4 * s, ex + 1.9 * s, ey - 2.1 * s - side * 0.4 * s, 0.9 * s),
                 hair);
    if (glasses) canvas.paint(ring(ex, ey, 2.7 * s, 0.7 * s), dark);
  }
  if (glasses) canvas.paint(segment(cx - eye_dx + 2.7 * s, cy + eye_dy, cx + eye_dx - 2.7 * s, cy + eye_dy, 0.6 * s), dark);

  // Nose with a shadow beneath.
  Color nose_shadow = skin;
  for (auto& v : nose_shadow) v -= 0.35f;
  canvas.paint(segment(cx, cy - 0.5 * s, cx, cy + 2.5 * s, 0.9 * s), nose_shadow, 0.6);
  canvas.paint(ellipse(cx, cy + 3.0 * s, 1.6 * s, 0.7 * s), nose_shadow);

  const Color lips = {static_cast<float>(rng.uniform(0.3, 0.7)), -0.6f, -0.5f};
  const double my = cy + 6.5 * s;
  if (open_mouth) {
    canvas.paint(ellipse(cx, my, 2.6 * s, 1.6 * s), lips);
    canvas.paint(ellipse(cx, my + 0.2 * s, 1.8 * s, 0.8 * s), dark);
  } else {
    // Smile: arc bending upwards at the corners.
    canvas.paint(
        [&](double x, double y) {
          const double t = (x - cx) / (3.0 * s);
          if (std::abs(t) > 1) return std::hypot(std::abs(x - cx) - 3.0 * s, y - (my - 1.2 * s)) - 0.6 * s;
          return std::abs(y - (my - 1.2 * s * t * t)) - 0.6 * s;
        },
        lips);
  }

  for (int y = 0; y < n; ++y) {
    const double d = shade(y);
    for (int x = 0; x < n; ++x) {
      float* p = canvas.at(y, x);
      for (int c = 0; c < 3; ++c) p[c] += static_cast<float>(d);
    }
  }
  if (rng.bernoulli(0.5)) {
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n / 2; ++x) std::swap_ranges(canvas.at(y, x), canvas.at(y, x) + 3, canvas.at(y, n - 1 - x));
    }
  }
}

std::string synthetic_name(SyntheticVariant v) { return v == SyntheticVariant::kGeneric ? "generic" : "face"; }

}  // namespace

std::vector<DiscLayout> generic_layouts(int num_classes, int parts) {
  if (num_classes < 1 || parts < 3 || parts > 7) throw ConfigError("generic layouts need >= 1 class and 3..7 parts");
  Rng rng(0x9e3779b97f4a7c15ULL ^ (static_cast<std::uint64_t>(num_classes) << 8) ^ static_cast<std::uint64_t>(parts));
  std::vector<DiscLayout> layouts;
  int attempts = 0;
  while (static_cast<int>(layouts.size()) < num_classes) {
    if (++attempts > 100000) throw ConfigError("could not place distinct generic layouts");
    DiscLayout l;
    int tries = 0;
    while (static_cast<int>(l.parts.size()) < parts && tries++ < 1000) {
      const double r = kRadii[static_cast<std::size_t>(rng.uniform_int(0, 2))];
      const double x = rng.uniform(-1 + r, 1 - r), y = rng.uniform(-1 + r, 1 - r);
      bool ok = true;
      for (const auto& q : l.parts) ok = ok && std::hypot(x - q[0], y - q[1]) > 0.95 * (r + q[2]);
      if (ok) l.parts.push_back({x, y, r});
    }
    if (static_cast<int>(l.parts.size()) < parts) continue;
    auto candidate = layouts;
    candidate.push_back(l);
    if (layout_rotation_margin(candidate) >= kMinLayoutDistance) layouts.push_back(l);
  }
  return layouts;
}

double layout_rotation_margin(const std::vector<DiscLayout>& layouts) {
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < layouts.size(); ++a) {
    for (std::size_t b = 0; b < layouts.size(); ++b) {
      for (int k = 0; k < 4; ++k) {
        for (bool mirror : {false, true}) {
          // Upright samples of one class (either mirror image) only need to
          // differ from other classes.
          if (k == 0 && a == b) continue;
          const auto d = layout_distance(layouts[a], transformed(layouts[b], k, mirror));
          margin = std::min(margin, d);
        }
      }
    }
  }
  return margin;
}

Dataset gen_synthetic_oriented(const SyntheticOrientedSpec& spec, Rng& rng) {
  if (spec.num_classes < 1) throw ConfigError("num_classes must be positive");
  if (spec.size < 0) throw ConfigError("size must be non-negative");
  if (spec.image_size < 8) throw ConfigError("synthetic images must be at least 8 pixels");
  std::vector<DiscLayout> layouts;
  if (spec.variant == SyntheticVariant::kGeneric) {
    layouts = generic_layouts(spec.num_classes, spec.parts);
  } else if (spec.num_classes != 2 && spec.num_classes != 4 && spec.num_classes != 8) {
    throw ConfigError("the face variant has 2, 4 or 8 classes");
  }
  Dataset ds;
  ds.num_classes = spec.num_classes;
  ds.source = "synthetic:" + synthetic_name(spec.variant);
  for (int k = 0; k < spec.num_classes; ++k) ds.class_names.push_back("class" + std::to_string(k));
  const auto order = rng.permutation(spec.size);
  std::vector<torch::Tensor> images(static_cast<std::size_t>(spec.size));
  std::vector<std::int64_t> labels(static_cast<std::size_t>(spec.size));
  for (std::int64_t i = 0; i < spec.size; ++i) {
    const int label = static_cast<int>(i % spec.num_classes);
    Canvas canvas(spec.image_size, spec.image_size);
    if (spec.variant == SyntheticVariant::kGeneric) {
      render_generic(canvas, layouts[static_cast<std::size_t>(label)], spec, rng);
    } else {
      render_face(canvas, label, spec, rng);
    }
    const auto slot = static_cast<std::size_t>(order[static_cast<std::size_t>(i)]);
    images[slot] = canvas.to_tensor();
    labels[slot] = label;
  }
  ds.images = spec.size > 0 ? torch::stack(images)
                            : torch::empty({0, 3, spec.image_size, spec.image_size}, torch::kFloat32);
  ds.labels = torch::tensor(labels, torch::kInt64);
  return ds;
}

namespace {

Dataset load_directory(const DatasetSpec& spec) {
  namespace fs = std::filesystem;
  Dataset ds;
  ds.source = spec.source;
  std::vector<fs::path> class_dirs;
  std::vector<fs::path> loose;
  for (const auto& entry : fs::directory_iterator(spec.source)) {
    if (entry.is_directory()) class_dirs.push_back(entry.path());
    else if (entry.is_regular_file()) loose.push_back(entry.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end());
  std::sort(loose.begin(), loose.end());
  std::vector<std::pair<fs::path, std::int64_t>> files;
  if (class_dirs.empty()) {
    if (!loose.empty()) ds.class_names.push_back("unlabeled");
    for (const auto& f : loose) files.emplace_back(f, 0);
  } else {
    for (std::size_t k = 0; k < class_dirs.size(); ++k) {
      ds.class_names.push_back(class_dirs[k].filename().string());
      std::vector<fs::path> inner;
      for (const auto& entry : fs::directory_iterator(class_dirs[k])) {
        if (entry.is_regular_file()) inner.push_back(entry.path());
      }
      std::sort(inner.begin(), inner.end());
      for (const auto& f : inner) files.emplace_back(f, static_cast<std::int64_t>(k));
    }
  }
  ds.num_classes = static_cast<int>(ds.class_names.size());
  std::vector<torch::Tensor> images;
  std::vector<std::int64_t> labels;
  for (const auto& [path, label] : files) {
    cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) {
      std::cerr << "warning: skipping undecodable file " << path << "\n";
      ++ds.skipped;
      continue;
    }
    if (spec.image_size > 0 && (bgr.rows != spec.image_size || bgr.cols != spec.image_size)) {
      cv::resize(bgr, bgr, cv::Size(spec.image_size, spec.image_size), 0, 0, cv::INTER_AREA);
    }
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    auto hwc = torch::from_blob(rgb.data, {rgb.rows, rgb.cols, 3}, torch::kUInt8).clone();
    if (!images.empty() && hwc.sizes() != images.front().permute({1, 2, 0}).sizes()) {
      throw ShapeError("images in " + spec.source + " differ in size; set image_size to resize");
    }
    images.push_back(normalize(hwc));
    labels.push_back(label);
  }
  if (images.empty()) {
    std::cerr << "note: " << spec.source << " holds 0 decodable images\n";
    const int side = std::max(spec.image_size, 0);
    ds.images = torch::empty({0, 3, side, side}, torch::kFloat32);
  } else {
    ds.images = torch::stack(images);
  }
  ds.labels = torch::tensor(labels, torch::kInt64);
  return ds;
}

Dataset load_archive(const DatasetSpec& spec) {
  const auto c = load_container(spec.source);
  if (c.kind != "dataset") throw FormatError(spec.source + " is a " + c.kind + " container, not a dataset");
  Dataset ds;
  ds.images = c.tensors.at("images");
  ds.labels = c.tensors.at("labels");
  ds.num_classes = c.meta.at("num_classes").get<int>();
  ds.class_names = c.meta.value("class_names", std::vector<std::string>{});
  ds.source = spec.source;
  return ds;
}

std::uint64_t split_salt(const std::string& split) {
  if (split == "unlabeled") return 0x11;
  if (split == "train") return 0x22;
  if (split == "test") return 0x33;
  throw ConfigError("split must be unlabeled, train or test");
}

}  // namespace

Dataset load_dataset(const DatasetSpec& spec) {
  constexpr std::string_view kSynthetic = "synthetic:";
  if (spec.source.starts_with(kSynthetic)) {
    const auto name = spec.source.substr(kSynthetic.size());
    SyntheticOrientedSpec s;
    if (name == "generic") s.variant = SyntheticVariant::kGeneric;
    else if (name == "face") s.variant = SyntheticVariant::kFace;
    else throw ConfigError("unknown synthetic dataset '" + name + "'");
    s.num_classes = spec.num_classes;
    s.size = spec.size;
    s.image_size = spec.image_size;
    if (spec.texture_amplitude >= 0.0) {
      s.texture_amplitude = spec.texture_amplitude;
    } else if (s.variant == SyntheticVariant::kFace) {
      s.texture_amplitude = 0.05;
    }
    s.position_jitter = spec.position_jitter;
    s.part_jitter = spec.part_jitter;
    Rng rng(spec.seed * 0x100000001b3ULL + split_salt(spec.split));
    return gen_synthetic_oriented(s, rng);
  }
  if (!std::filesystem::exists(spec.source)) throw ConfigError("dataset source " + spec.source + " does not exist");
  if (std::filesystem::is_directory(spec.source)) return load_directory(spec);
  return load_archive(spec);
}

void save_dataset_archive(const std::filesystem::path& path, const Dataset& dataset) {
  Container c;
  c.kind = "dataset";
  c.meta = {{"num_classes", dataset.num_classes}, {"class_names", dataset.class_names}, {"source", dataset.source}};
  c.tensors["images"] = dataset.images.to(torch::kFloat32);
  c.tensors["labels"] = dataset.labels.to(torch::kInt64);
  save_container(path, c);
}

double patch_orientation_accuracy(const torch::Tensor& images, int patch, int patches_per_image, Rng& rng) {
  check_batch(images, "orientation images");
  const auto n = images.size(0);
  if (n < 2) throw ShapeError("need at least two images");
  const int side = static_cast<int>(images.size(2));
  if (images.size(3) != side || patch > side) throw ShapeError("square images at least one patch wide required");
  auto crop = [&](const torch::Tensor& img) {
    const auto top = rng.uniform_int(0, side - patch), left = rng.uniform_int(0, side - patch);
    auto p = img.narrow(1, top, patch).narrow(2, left, patch).reshape({-1});
    return p - p.mean();
  };
  std::vector<torch::Tensor> ref, query;
  std::vector<std::int64_t> ref_label, query_label;
  for (std::int64_t i = 0; i < n; ++i) {
    const bool is_ref = i < n / 2;
    for (int j = 0; j < patches_per_image; ++j) {
      if (is_ref) {
        for (int k = 0; k < 4; ++k) {
          ref.push_back(crop(rotate(images[i], k)));
          ref_label.push_back(k);
        }
      } else {
        const int k = static_cast<int>(rng.uniform_int(0, 3));
        query.push_back(crop(rotate(images[i], k)));
        query_label.push_back(k);
      }
    }
  }
  const auto r = torch::stack(ref), q = torch::stack(query);
  const auto nearest = torch::cdist(q, r).argmin(1);
  const auto predicted = torch::tensor(ref_label, torch::kInt64).index_select(0, nearest);
  return predicted.eq(torch::tensor(query_label, torch::kInt64)).to(torch::kFloat64).mean().item<double>();
}

}  // namespace gssl
