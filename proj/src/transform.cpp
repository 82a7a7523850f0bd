#include "gssl/transform.hpp"

#include "gssl/error.hpp"
#include "gssl/rotate.hpp"

namespace gssl {

InpaintResult inpaint_window(const torch::Tensor& image, const PatchSpec& spec,
                             const PatchMap& inpainter, Rng& rng) {
  if (!inpainter) throw ConfigError("inpainting requires an inpainter");
  InpaintResult result;
  result.original = extract_patch(image, spec);
  result.corrupted = corrupt_patch(result.original, make_mask(spec.size, spec.border), rng);
  result.inpainted = inpainter(result.corrupted.unsqueeze(0)).squeeze(0);
  result.image = paste_patch(image, result.inpainted, spec);
  return result;
}

TransformResult apply_transform_traced(const torch::Tensor& image, TransformLabel label,
                                       TransformContext& ctx) {
  check_image(image);
  TransformResult result;
  result.trace.label = label;
  switch (label) {
    case TransformLabel::kIdentity:
      result.image = image.clone();
      break;
    case TransformLabel::kRot90:
    case TransformLabel::kRot180:
    case TransformLabel::kRot270:
      result.image = rotate(image, static_cast<int>(to_index(label)));
      break;
    case TransformLabel::kWarp: {
      if (ctx.rng == nullptr) throw ConfigError("warp requires an rng");
      auto spec = sample_warp_spec(static_cast<int>(image.size(1)), static_cast<int>(image.size(2)),
                                   ctx.warp_grid, ctx.warp_max_offset, *ctx.rng, ctx.spline_order);
      result.image = warp(image, densify(spec));
      result.trace.warp = std::move(spec);
      break;
    }
    case TransformLabel::kInpaint: {
      if (!ctx.inpainter) throw ConfigError("label 5 (LCI) requires an inpainter");
      if (ctx.rng == nullptr) throw ConfigError("inpainting requires an rng");
      const auto spec = sample_patch_spec(static_cast<int>(image.size(1)),
                                          static_cast<int>(image.size(2)), ctx.patch_size,
                                          ctx.border, *ctx.rng);
      auto inpainted = inpaint_window(image, spec, ctx.inpainter, *ctx.rng);
      result.image = inpainted.image;
      result.trace.patch = spec;
      result.trace.inpainted = inpainted.inpainted;
      break;
    }
  }
  return result;
}

torch::Tensor apply_transform(const torch::Tensor& image, TransformLabel label,
                              TransformContext& ctx) {
  return apply_transform_traced(image, label, ctx).image;
}

torch::Tensor replay_transform(const torch::Tensor& source, const TransformTrace& trace) {
  switch (trace.label) {
    case TransformLabel::kIdentity:
      return source.clone();
    case TransformLabel::kRot90:
    case TransformLabel::kRot180:
    case TransformLabel::kRot270:
      return rotate(source, static_cast<int>(to_index(trace.label)));
    case TransformLabel::kWarp:
      if (!trace.warp) throw ConfigError("warp trace without a spec");
      return warp(source, densify(*trace.warp));
    case TransformLabel::kInpaint:
      if (!trace.patch || !trace.inpainted.defined()) throw ConfigError("LCI trace incomplete");
      return paste_patch(source, trace.inpainted, *trace.patch);
  }
  throw ConfigError("unknown transform label");
}

}  // namespace gssl
