#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "gssl/nets.hpp"
#include "gssl/patch.hpp"
#include "gssl/rng.hpp"
#include "gssl/transform.hpp"

namespace gssl {

struct LciConfig {
  int patch_size = 16;
  int border = 2;
  double lambda_border = 50.0;
  double lambda_ae = 50.0;
  // Weight of the -L_SSL term that pits F against the classifier; 0 removes it.
  double lambda_adversarial = 1.0;
  double d_lr = 2e-4;
  double f_lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  // Updates per minibatch, applied in the order D, F, C.
  int d_steps = 1;
  int f_steps = 1;
  int c_steps = 1;
  double width = 1.0;  // channel multiplier for F and D
  bool extra_depth = false;
};
void to_json(nlohmann::json& j, const LciConfig& c);
void from_json(const nlohmann::json& j, LciConfig& c);

// One minibatch of limited context inpainting, records i = 0..N-1.
struct LciBatch {
  torch::Tensor sources;    // x_i, [N,C,H,W]
  std::vector<PatchSpec> specs;
  torch::Tensor mask;       // m, [P,P]
  torch::Tensor originals;  // e_i, [N,C,P,P]
  torch::Tensor corrupted;  // e_i * (1-m) + z * m
  torch::Tensor inpainted;  // r_i (no gradient)
  torch::Tensor composed;   // T5 o x_i (no gradient)
  std::vector<std::int64_t> partners;  // pair partner j of record i
  // The classifier minibatch these records belong to and the row of each
  // record in it. When set, the adversarial term scores the records inside
  // that batch so batch statistics match the classifier's own step.
  torch::Tensor classifier_batch;
  std::vector<std::int64_t> classifier_rows;

  std::int64_t size() const { return static_cast<std::int64_t>(specs.size()); }
};

// Inpainter handle that runs F without recording gradients.
PatchMap no_grad_map(Inpainter& inpainter);

// Draws a window, noise and a pair partner per source and inpaints with `f`.
LciBatch make_lci_batch(const torch::Tensor& sources, const PatchMap& f, const LciConfig& config,
                        Rng& rng);

// Pastes patch i into image i at specs[i]; differentiable.
torch::Tensor paste_patches(const torch::Tensor& images, const torch::Tensor& patches,
                            const std::vector<PatchSpec>& specs);

// Channel-concatenated (a_i, a_partner(i)) pairs, [N, 2C, P, P].
torch::Tensor make_pairs(const torch::Tensor& patches, const std::vector<std::int64_t>& partners);

// r_i = F(corrupted_i), e.g. for a trained inpainter.
torch::Tensor inpaint(Inpainter& inpainter, const torch::Tensor& corrupted);

struct InpainterLossWeights {
  double border = 50.0;
  double autoencode = 50.0;
  double adversarial = 1.0;
};

struct InpainterLoss {
  torch::Tensor total;
  torch::Tensor gan;          // -mean D(fake pairs)
  torch::Tensor border;       // mean |(r - e)(1 - m)|^2 over the ring
  torch::Tensor autoencode;   // mean |F(e) - e|^2
  torch::Tensor adversarial;  // cross entropy of C on the composed images (label 5)
};

// L_inp,AE = hinge G + w_border * border + w_ae * autoencode - w_adv * L_SSL,
// where L_SSL is the classifier's loss on this batch's LCI images. With a null
// classifier the last term is dropped. Recomputes r_i so the loss is
// differentiable in F.
InpainterLoss inpainter_loss(Inpainter& inpainter, const LciBatch& batch,
                             Discriminator& discriminator, Classifier* classifier,
                             const InpainterLossWeights& weights,
                             const std::vector<TransformLabel>& enabled);

// One hinge-loss update of D on real pairs (e_i, e_j) against fake pairs
// (r_i, r_j). Real and fake pairs go through a single forward so the spectral
// norm advances one power iteration per step. Returns the D loss.
double discriminator_step(Discriminator& discriminator, const LciBatch& batch,
                          torch::optim::Optimizer& optimizer);

// Values of the loss terms after one update of F; C and D are left untouched,
// buffers included.
struct InpainterStepResult {
  double total = 0, gan = 0, border = 0, autoencode = 0, adversarial = 0;
};
InpainterStepResult inpainter_step(Inpainter& inpainter, const LciBatch& batch,
                                   Discriminator& discriminator, Classifier* classifier,
                                   torch::optim::Optimizer& optimizer,
                                   const InpainterLossWeights& weights,
                                   const std::vector<TransformLabel>& enabled);

// A random patch of a selected image replaced by its plain autoencoding F(e).
struct Substitution {
  PatchSpec spec;
  torch::Tensor patch;  // F(e_i), [C,P,P]
};

struct SubstituteResult {
  torch::Tensor images;
  std::vector<std::optional<Substitution>> records;  // one per input image
  std::int64_t count() const;
};

// Replaces a random window in exactly round(fraction * N) images, chosen at
// random, with F applied to the uncorrupted window.
SubstituteResult autoencoded_substitute(const torch::Tensor& images, const PatchMap& f,
                                        double fraction, int patch_size, int border, Rng& rng);

// Sets requires_grad off for a module's parameters for the guard's lifetime.
class FreezeParameters {
 public:
  explicit FreezeParameters(torch::nn::Module& module);
  ~FreezeParameters();
  FreezeParameters(const FreezeParameters&) = delete;
  FreezeParameters& operator=(const FreezeParameters&) = delete;

 private:
  std::vector<torch::Tensor> params_;
  std::vector<bool> previous_;
};

}  // namespace gssl
