// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset; `--report FILE` also writes the summary there.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "gssl/classifier.hpp"
#include "gssl/cli.hpp"
#include "gssl/container.hpp"
#include "gssl/data.hpp"
#include "gssl/eval.hpp"
#include "gssl/lci.hpp"
#include "gssl/losses.hpp"
#include "gssl/pretrain.hpp"
#include "gssl/transform.hpp"
#include "gssl/warp.hpp"
#include "oracles.hpp"

using namespace gssl;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 3) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

std::string pct(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << 100.0 * v;
  return s.str();
}

// ---------------------------------------------------------------------------
// Property criteria

Outcome spline_exactness() {
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto spec = sample_warp_spec(64, 64, 4, std::nullopt, rng);
    if (std::abs(spec.max_offset - 6.4) > 1e-12) return {false, "default d is " + fmt(spec.max_offset)};
    const auto flow = densify(spec).flow.to(torch::kFloat64);
    for (std::size_t k = 0; k < spec.control_points.size(); ++k) {
      const auto x = static_cast<std::int64_t>(spec.control_points[k][0]);
      const auto y = static_cast<std::int64_t>(spec.control_points[k][1]);
      worst = std::max(worst, std::abs(flow[y][x][0].item<double>() - spec.offsets[k][0]));
      worst = std::max(worst, std::abs(flow[y][x][1].item<double>() - spec.offsets[k][1]));
    }
  }
  return {worst < 1e-4, "max deviation " + fmt(worst) + " (tol 1e-4) over 100 specs, m=4, d=6.4, 64x64"};
}

Outcome warp_identity() {
  Rng rng(102);
  int exact = 0;
  for (int i = 0; i < 50; ++i) {
    const auto img = rng.normal_tensor({3, 64, 64}).clamp(-1, 1);
    const auto spec = sample_warp_spec(64, 64, 4, 0.0, rng);
    exact += torch::equal(warp(img, densify(spec)), img) ? 1 : 0;
  }
  return {exact == 50, std::to_string(exact) + "/50 images reproduced bit-exact with d=0"};
}

Outcome lci_locality() {
  torch::manual_seed(103);
  Inpainter f(InpainterConfig{.channels = 3, .patch_size = 16, .width = 0.25});
  f->eval();
  Rng rng(104);
  TransformContext ctx;
  ctx.rng = &rng;
  ctx.patch_size = 16;
  ctx.inpainter = no_grad_map(f);
  int exact = 0;
  for (int i = 0; i < 1000; ++i) {
    const int h = static_cast<int>(rng.uniform_int(16, 64)), w = static_cast<int>(rng.uniform_int(16, 64));
    ctx.border = static_cast<int>(rng.uniform_int(1, 4));
    const auto img = rng.normal_tensor({3, h, w}).clamp(-1, 1);
    const auto out = apply_transform_traced(img, TransformLabel::kInpaint, ctx);
    const auto& s = *out.trace.patch;
    auto inside = torch::zeros({h, w}, torch::kBool);
    inside.narrow(0, s.top, s.size).narrow(1, s.left, s.size).fill_(true);
    const auto outside = inside.logical_not().expand({3, h, w});
    exact += torch::equal(out.image.masked_select(outside), img.masked_select(outside)) ? 1 : 0;
  }
  return {exact == 1000, std::to_string(exact) + "/1000 (image, window) pairs identical outside the window"};
}

Outcome loss_algebra() {
  const auto all = TransformSet::parse("rot,warp,lci").labels();
  const auto labels = torch::tensor({0, 1, 2, 3, 4, 5, 5, 0}, torch::kInt64);
  const double ce = ssl_cross_entropy(torch::zeros({8, 6}), labels, all).item<double>();
  const double ce_err = std::abs(ce - std::log(6.0));
  const auto one = torch::ones({5}), zero = torch::zeros({5});
  const double d_margin = hinge_d_loss(one, -one).item<double>();
  const double d_zero = hinge_d_loss(zero, zero).item<double>();
  const double g_zero = hinge_g_loss(zero).item<double>() + 0.0;
  const bool ok = ce_err < 1e-6 && d_margin == 0.0 && d_zero == 2.0 && g_zero == 0.0;
  return {ok, "|CE - ln 6| = " + fmt(ce_err) + "; D(1,-1) = " + fmt(d_margin) + "; D(0,0) = " + fmt(d_zero) +
                  "; G(0) = " + fmt(g_zero)};
}

Outcome knn_equivalence() {
  Rng rng(105);
  int agree = 0;
  int cases = 0;
  for (int dataset = 0; dataset < 20; ++dataset) {
    const int n = static_cast<int>(rng.uniform_int(60, 300));
    const int dims = static_cast<int>(rng.uniform_int(4, 32));
    const int classes = static_cast<int>(rng.uniform_int(2, 8));
    torch::manual_seed(1000 + dataset);
    const auto centers = torch::randn({classes, dims}) * rng.uniform(0.5, 2.0);
    auto labels = torch::randint(classes, {n}, torch::kInt64);
    auto x = centers.index_select(0, labels) + torch::randn({n, dims});
    if (dataset == 0) {
      // Exact duplicates sharing their original's label.
      x.narrow(0, n / 2, n / 3).copy_(x.narrow(0, 0, n / 3));
      labels.narrow(0, n / 2, n / 3).copy_(labels.narrow(0, 0, n / 3));
    }
    const auto y = oracle::to_vector(labels);
    for (int k : {1, 5, 20}) {
      ++cases;
      agree += oracle::to_vector(knn_loocv_predictions(x, labels, k)) == oracle::knn_loocv(x, y, k) ? 1 : 0;
    }
  }
  return {agree == cases, std::to_string(agree) + "/" + std::to_string(cases) +
                              " (dataset, k) cases label-for-label equal to the double-loop oracle"};
}

Outcome warp_gradients() {
  Rng rng(106);
  const int side = 16;
  const auto img = rng.normal_tensor({3, side, side}).clamp(-1, 1).to(torch::kFloat64);
  auto flow = torch::empty({side, side, 2}, torch::kFloat64);
  auto off_lattice = [&](double base) {
    double t = std::clamp(base + rng.uniform(-2.5, 2.5), 0.3, side - 1.3);
    if (std::abs(t - std::round(t)) < 0.05) t += 0.1;
    return t;
  };
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      flow[y][x][0] = off_lattice(x) - x;
      flow[y][x][1] = off_lattice(y) - y;
    }
  }
  const auto upstream = torch::full({3, side, side}, 1.0 / (3.0 * side * side), torch::kFloat64);
  const auto analytic = warp_backward(img, flow, upstream).flow;
  const double h = 1e-6;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto y = rng.uniform_int(0, side - 1), x = rng.uniform_int(0, side - 1), k = rng.uniform_int(0, 1);
    auto plus = flow.clone(), minus = flow.clone();
    plus[y][x][k] += h;
    minus[y][x][k] -= h;
    const double fd = (warp(img, plus).mean().item<double>() - warp(img, minus).mean().item<double>()) / (2 * h);
    const double an = analytic[y][x][k].item<double>();
    worst = std::max(worst, std::abs(an - fd) / std::max(std::abs(fd), 1e-10));
  }
  return {worst < 1e-3, "max relative error " + fmt(worst) + " (tol 1e-3) at 100 non-integer sample points"};
}

Outcome isolation() {
  SyntheticOrientedSpec spec;
  spec.size = 64;
  Rng data_rng(107);
  const auto data = gen_synthetic_oriented(spec, data_rng);
  PretrainConfig config;
  config.lci.width = 0.25;
  config.classifier_width = 0.5;
  config.train.seed = 108;
  auto b = make_bundle(config, 3, 32);
  Rng rng(109);
  const auto sources = augment_batch(data.images.narrow(0, 0, 16), config.augment, rng);
  const auto batch = build_batch(sources, config.train, config.lci, &b.f, rng);
  const auto enabled = config.train.transforms.labels();
  const InpainterLossWeights weights{config.lci.lambda_border, config.lci.lambda_ae, config.lci.lambda_adversarial};

  struct Sums {
    std::string c, f, d;
  };
  auto sums = [&] { return Sums{module_checksum(*b.c), module_checksum(*b.f), module_checksum(*b.d)}; };
  std::vector<std::string> failures;
  auto expect = [&](const std::string& step, const Sums& before, const Sums& after, bool c, bool f, bool d) {
    if ((before.c != after.c) != c) failures.push_back(step + (c ? " left C unchanged" : " changed C"));
    if ((before.f != after.f) != f) failures.push_back(step + (f ? " left F unchanged" : " changed F"));
    if ((before.d != after.d) != d) failures.push_back(step + (d ? " left D unchanged" : " changed D"));
  };

  auto s0 = sums();
  discriminator_step(b.d, *batch.lci, *b.d_opt);
  auto s1 = sums();
  expect("discriminator_step", s0, s1, false, false, true);
  inpainter_step(b.f, *batch.lci, b.d, &b.c, *b.f_opt, weights, enabled);
  auto s2 = sums();
  expect("inpainter_step", s1, s2, false, true, false);
  classifier_step(b.c, batch, *b.c_opt, 1e-3, enabled);
  auto s3 = sums();
  expect("classifier_step", s2, s3, true, false, false);
  const auto train = extract_features(b.c, data.images.narrow(0, 0, 48).narrow(2, 2, 32).narrow(3, 2, 32), "conv3");
  const auto test = extract_features(b.c, data.images.narrow(0, 48, 16).narrow(2, 2, 32).narrow(3, 2, 32), "conv3");
  ProbeSchedule schedule;
  schedule.epochs = 3;
  train_linear_probe(train.data, data.labels.narrow(0, 0, 48), test.data, data.labels.narrow(0, 48, 16), schedule);
  auto s4 = sums();
  expect("probe training", s3, s4, false, false, false);
  std::string detail = failures.empty() ? "each step changed only its own network; probing changed none" : "";
  for (const auto& f : failures) detail += f + "; ";
  return {failures.empty(), detail};
}

Outcome determinism() {
  const auto root = std::filesystem::temp_directory_path() / "gssl_acceptance_determinism";
  std::filesystem::remove_all(root);
  std::filesystem::create_directories(root);
  std::ofstream(root / "config.json") << R"({
    "dataset": {"size": 256},
    "seed": 11,
    "pretrain": {"train": {"epochs": 2, "transforms": "rot,warp,lci", "confusion_interval": 4},
                 "lci": {"width": 0.5}}
  })";
  std::string logs[2];
  for (int run = 0; run < 2; ++run) {
    auto rc = resolve_config({{"config", (root / "config.json").string()}, {"out", (root / std::to_string(run)).string()}});
    cmd_pretrain(rc);
    std::ifstream in(root / std::to_string(run) / "metrics.jsonl", std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    logs[run] = s.str();
  }
  std::size_t lines = 0;
  for (char ch : logs[0]) lines += ch == '\n' ? 1 : 0;
  std::filesystem::remove_all(root);
  const bool same = !logs[0].empty() && logs[0] == logs[1];
  return {same, std::string(same ? "byte-identical" : "different") + " metric logs (" + std::to_string(lines) +
                    " records, " + std::to_string(logs[0].size()) + " bytes)"};
}

// ---------------------------------------------------------------------------
// Desk-scale trend criteria.
//
// Every trend run pretrains the desk classifier on 2000 unlabeled synthetic
// images (36 px, random 32 px crops and flips) for twelve epochs and scores a
// linear probe on frozen conv5 features of 500 labeled training images,
// evaluated on 500 held-out images. Seeds change the network initialization
// and the data order; the datasets stay fixed.

constexpr int kDeskEpochs = 12;
constexpr const char* kProbeStage = "conv5";

struct DeskData {
  Dataset unlabeled, train, test;
};

SyntheticOrientedSpec desk_spec(const std::string& variant) {
  SyntheticOrientedSpec s;
  if (variant == "face") {
    s.variant = SyntheticVariant::kFace;
    s.num_classes = 8;
    s.texture_amplitude = 0.05;
  } else {
    s.variant = SyntheticVariant::kGeneric;
    s.num_classes = 10;
    s.texture_amplitude = 0.02;
    s.position_jitter = 5.0;
    s.part_jitter = 1.5;
  }
  return s;
}

const DeskData& desk_data(const std::string& variant) {
  static std::map<std::string, DeskData> cache;
  auto it = cache.find(variant);
  if (it != cache.end()) return it->second;
  auto spec = desk_spec(variant);
  DeskData d;
  spec.size = 2000;
  Rng r1(7001);
  d.unlabeled = gen_synthetic_oriented(spec, r1);
  spec.size = 500;
  Rng r2(7002);
  d.train = gen_synthetic_oriented(spec, r2);
  Rng r3(7003);
  d.test = gen_synthetic_oriented(spec, r3);
  return cache.emplace(variant, std::move(d)).first->second;
}

struct DeskRun {
  std::string variant = "generic";
  std::string transforms = "lci";  // "random" = untrained network
  std::uint64_t seed = 0;
  int patch_size = 16;
  bool substitution = true;  // autoencoded-window substitution and its AE loss
  bool adversarial = true;   // the -L_SSL term in F's objective

  std::string key() const {
    std::ostringstream s;
    s << variant << "/" << transforms << "/s" << seed << "/P" << patch_size << (substitution ? "" : "/noAE")
      << (adversarial ? "" : "/noAdv");
    return s.str();
  }
};

PretrainConfig desk_config(const DeskRun& r) {
  PretrainConfig c;
  c.train.transforms = TransformSet::parse(r.transforms == "random" ? "rot" : r.transforms);
  c.train.epochs = r.transforms == "random" ? 0 : kDeskEpochs;
  c.train.seed = r.seed;
  c.train.lr_start = 1e-3;
  c.train.lr_end = 1e-6;
  c.lci.patch_size = r.patch_size;
  c.lci.f_lr = 1e-3;
  c.lci.d_lr = 1e-3;
  c.lci.width = 0.5;
  if (!r.substitution) {
    c.train.ae_substitute_fraction = 0.0;
    c.lci.lambda_ae = 0.0;
  }
  if (!r.adversarial) c.lci.lambda_adversarial = 0.0;
  return c;
}

double desk_probe(const DeskRun& r) {
  static std::map<std::string, double> cache;
  if (auto it = cache.find(r.key()); it != cache.end()) return it->second;
  const auto start = std::chrono::steady_clock::now();
  const auto& data = desk_data(r.variant);
  const auto config = desk_config(r);
  auto bundle = make_bundle(config, 3, 32);
  if (config.train.epochs > 0) pretrain(bundle, data.unlabeled, config);
  auto crop = [](const torch::Tensor& x) { return x.narrow(2, 2, 32).narrow(3, 2, 32).contiguous(); };
  const auto train = extract_features(bundle.c, crop(data.train.images), kProbeStage);
  const auto test = extract_features(bundle.c, crop(data.test.images), kProbeStage);
  ProbeSchedule schedule;
  schedule.seed = r.seed;
  const double acc = train_linear_probe(train.data, data.train.labels, test.data, data.test.labels, schedule).accuracy;
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << "    " << std::left << std::setw(34) << r.key() << " probe " << pct(acc) << "%  (" << fmt(seconds, 4)
            << " s)" << std::endl;
  cache[r.key()] = acc;
  return acc;
}

constexpr std::uint64_t kSeeds[] = {0, 1, 2};

double seed_mean(DeskRun r) {
  double sum = 0.0;
  for (auto s : kSeeds) {
    r.seed = s;
    sum += desk_probe(r);
  }
  return sum / 3.0;
}

Outcome patch_size_trend() {
  const int sizes[] = {8, 16, 24};  // P/4, P/2, 3P/4 of the 32 px input
  std::map<int, std::vector<double>> acc;
  for (auto s : kSeeds) {
    for (int p : sizes) acc[p].push_back(desk_probe({.transforms = "lci", .seed = s, .patch_size = p}));
  }
  int ordered_small = 0, ordered_large = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    ordered_small += acc[8][i] <= acc[16][i] ? 1 : 0;
    ordered_large += acc[16][i] <= acc[24][i] ? 1 : 0;
  }
  std::string detail;
  for (int p : sizes) {
    detail += "P=" + std::to_string(p) + ": " + pct(acc[p][0]) + "/" + pct(acc[p][1]) + "/" + pct(acc[p][2]) + "  ";
  }
  detail += "| seeds ordered 8<=16: " + std::to_string(ordered_small) + "/3, 16<=24: " + std::to_string(ordered_large) + "/3";
  return {ordered_small >= 2 && ordered_large >= 2, detail};
}

Outcome transform_table_trend() {
  const double random = seed_mean({.transforms = "random"});
  const double rot = seed_mean({.transforms = "rot"});
  const double warp_only = seed_mean({.transforms = "warp"});
  const double lci = seed_mean({.transforms = "lci"});
  const double full = seed_mean({.transforms = "rot,warp,lci"});
  const double best_single = std::max({rot, warp_only, lci});
  const double worst_single = std::min({rot, warp_only, lci});
  const bool ok = random < worst_single && best_single < full && full - random >= 0.05;
  return {ok, "seed means: random " + pct(random) + ", rot " + pct(rot) + ", warp " + pct(warp_only) + ", lci " +
                  pct(lci) + ", rot+warp+lci " + pct(full) + " | margin full-random " + pct(full - random) +
                  " points (need >= 5.0)"};
}

Outcome face_failure_mode() {
  const double rot = seed_mean({.variant = "face", .transforms = "rot"});
  const double lci = seed_mean({.variant = "face", .transforms = "lci"});
  const double random = seed_mean({.variant = "face", .transforms = "random"});
  return {rot <= lci, "face seed means: rot " + pct(rot) + ", lci " + pct(lci) + " (random " + pct(random) + ")"};
}

Outcome shortcut_ablation() {
  int ae_lower = 0, adv_lower = 0;
  std::string detail;
  for (auto s : kSeeds) {
    const double full = desk_probe({.transforms = "lci", .seed = s});
    const double no_ae = desk_probe({.transforms = "lci", .seed = s, .substitution = false});
    const double no_adv = desk_probe({.transforms = "lci", .seed = s, .adversarial = false});
    ae_lower += no_ae < full ? 1 : 0;
    adv_lower += no_adv < full ? 1 : 0;
    detail += "seed " + std::to_string(s) + ": full " + pct(full) + ", no AE " + pct(no_ae) + ", no adv " +
              pct(no_adv) + "  ";
  }
  detail += "| lower without AE: " + std::to_string(ae_lower) + "/3, without adversarial term: " +
            std::to_string(adv_lower) + "/3";
  return {ae_lower >= 2 && adv_lower >= 2, detail};
}

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  torch::set_num_threads(1);
  const std::vector<Criterion> criteria = {
      {1, "spline exactness", 10, spline_exactness},
      {2, "warp identity", 5, warp_identity},
      {3, "LCI locality", 30, lci_locality},
      {4, "loss algebra", 1, loss_algebra},
      {5, "kNN oracle equivalence", 60, knn_equivalence},
      {6, "warp gradient check", 30, warp_gradients},
      {7, "isolation contracts", 60, isolation},
      {8, "patch-size trend", 2 * 3600, patch_size_trend},
      {9, "transform-subset trend", 3 * 3600, transform_table_trend},
      {10, "face failure mode", 2 * 3600, face_failure_mode},
      {11, "shortcut-prevention ablation", 3 * 3600, shortcut_ablation},
      {12, "determinism", 20 * 60, determinism},
  };
  std::set<int> selected;
  std::string report_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--report" && i + 1 < argc) {
      report_path = argv[++i];
    } else {
      selected.insert(std::stoi(arg));
    }
  }

  int failed = 0;
  std::vector<std::string> summary;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    std::cout << "C" << c.id << " " << c.name << " ..." << std::endl;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.limit_seconds;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::ostringstream line;
    line << (pass ? "PASS" : "FAIL") << "  C" << c.id << " " << c.name << ": " << o.detail << " [" << fmt(seconds, 4)
         << " s, limit " << fmt(c.limit_seconds, 6) << " s" << (in_time ? "" : ", OVER TIME") << "]";
    std::cout << line.str() << std::endl;
    summary.push_back(line.str());
  }
  std::ostringstream report;
  report << "=== acceptance summary ===\n";
  for (const auto& s : summary) report << s << "\n";
  report << (failed == 0 ? std::string("all criteria passed")
                         : std::to_string(failed) + (failed == 1 ? " criterion" : " criteria") + " failed")
         << "\n";
  std::cout << "\n" << report.str() << std::flush;
  if (!report_path.empty()) std::ofstream(report_path) << report.str();
  return failed == 0 ? 0 : 1;
}
