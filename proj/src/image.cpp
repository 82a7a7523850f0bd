#include "gssl/image.hpp"

#include <string>

#include "gssl/error.hpp"

namespace gssl {

TransformLabel label_from_index(std::int64_t index) {
  if (index < 0 || index >= kNumTransforms) {
    throw ConfigError("transform label out of range: " + std::to_string(index));
  }
  return static_cast<TransformLabel>(index);
}

void check_image(const torch::Tensor& image, std::string_view what) {
  if (!image.defined() || image.dim() != 3) {
    throw ShapeError(std::string(what) + ": expected a [C,H,W] tensor");
  }
  if (!image.is_floating_point()) throw ShapeError(std::string(what) + ": expected floating point");
}

void check_batch(const torch::Tensor& batch, std::string_view what) {
  if (!batch.defined() || batch.dim() != 4) {
    throw ShapeError(std::string(what) + ": expected a [N,C,H,W] tensor");
  }
  if (!batch.is_floating_point()) throw ShapeError(std::string(what) + ": expected floating point");
}

}  // namespace gssl

namespace gssl {

TransformSet TransformSet::parse(std::string_view csv) {
  TransformSet set{false, false, false};
  bool any = false;
  std::size_t start = 0;
  while (start <= csv.size()) {
    auto end = csv.find(',', start);
    if (end == std::string_view::npos) end = csv.size();
    auto token = csv.substr(start, end - start);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (token == "rot") {
      set.rotation = true;
    } else if (token == "warp") {
      set.warp = true;
    } else if (token == "lci") {
      set.inpaint = true;
    } else if (!token.empty()) {
      throw ConfigError("unknown transform '" + std::string(token) + "' (expected rot, warp, lci)");
    }
    any = any || !token.empty();
    start = end + 1;
  }
  if (!any) throw ConfigError("transform set must not be empty");
  return set;
}

std::string TransformSet::to_string() const {
  std::string out;
  auto add = [&out](const char* name) {
    if (!out.empty()) out += ',';
    out += name;
  };
  if (rotation) add("rot");
  if (warp) add("warp");
  if (inpaint) add("lci");
  return out;
}

bool TransformSet::contains(TransformLabel label) const {
  switch (label) {
    case TransformLabel::kIdentity: return true;
    case TransformLabel::kRot90:
    case TransformLabel::kRot180:
    case TransformLabel::kRot270: return rotation;
    case TransformLabel::kWarp: return warp;
    case TransformLabel::kInpaint: return inpaint;
  }
  return false;
}

std::vector<TransformLabel> TransformSet::labels() const {
  std::vector<TransformLabel> out;
  for (int i = 0; i < kNumTransforms; ++i) {
    if (contains(static_cast<TransformLabel>(i))) out.push_back(static_cast<TransformLabel>(i));
  }
  return out;
}

}  // namespace gssl
