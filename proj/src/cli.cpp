#include "gssl/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gssl/container.hpp"
#include "gssl/error.hpp"
#include "gssl/transform.hpp"
#include "gssl/viz.hpp"

namespace gssl {

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

template <typename T>
T parse_number(const std::string& flag, const std::string& text) {
  try {
    std::size_t used = 0;
    T value;
    if constexpr (std::is_same_v<T, std::uint64_t>) value = std::stoull(text, &used);
    else value = static_cast<T>(std::stoll(text, &used));
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ConfigError("--" + flag + " expects an integer, got '" + text + "'");
  }
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  localtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y%m%d-%H%M%S");
  return s.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
}

// Center crop of every image when `crop` is set.
torch::Tensor eval_view(const torch::Tensor& images, int crop) {
  if (crop <= 0 || images.size(0) == 0) return images;
  if (crop > images.size(2) || crop > images.size(3)) throw ConfigError("eval_crop exceeds the image size");
  return images.narrow(2, (images.size(2) - crop) / 2, crop).narrow(3, (images.size(3) - crop) / 2, crop).contiguous();
}

// Warns when the config.json beside a checkpoint records a different hash.
void warn_on_hash_mismatch(const std::filesystem::path& checkpoint, const std::string& checkpoint_config_hash) {
  const auto sibling = checkpoint.parent_path() / "config.json";
  if (!std::filesystem::exists(sibling)) return;
  try {
    std::ifstream in(sibling);
    const auto j = nlohmann::json::parse(in);
    const auto recorded = j.value("config_hash", std::string());
    if (!recorded.empty() && recorded != checkpoint_config_hash) {
      std::cerr << "warning: " << checkpoint << " has config hash " << checkpoint_config_hash << " but "
                << sibling << " records " << recorded << "\n";
    }
  } catch (const nlohmann::json::exception&) {
    std::cerr << "warning: unreadable " << sibling << "\n";
  }
}

std::filesystem::path output_dir(const RunConfig& c, const std::string& command) {
  return c.out.empty() ? std::filesystem::path("runs") / (command + "-" + timestamp()) : std::filesystem::path(c.out);
}

std::string subset_dir_name(const std::string& subset) {
  std::string s = subset;
  std::replace(s.begin(), s.end(), ',', '+');
  return s;
}

}  // namespace

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = {{"dataset", c.dataset},
       {"probe_train", c.probe_train},
       {"probe_test", c.probe_test},
       {"pretrain", c.pretrain},
       {"probe", c.probe},
       {"stages", c.stages},
       {"k_list", c.k_list},
       {"target_units", c.target_units},
       {"eval_crop", c.eval_crop},
       {"include_random", c.include_random},
       {"checkpoint", c.checkpoint},
       {"viz_mode", c.viz_mode},
       {"topk", c.topk},
       {"num_queries", c.num_queries},
       {"ablate", c.ablate},
       {"out", c.out},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  if (j.contains("dataset")) from_json(j.at("dataset"), c.dataset);
  if (j.contains("probe_train")) from_json(j.at("probe_train"), c.probe_train);
  if (j.contains("probe_test")) from_json(j.at("probe_test"), c.probe_test);
  if (j.contains("pretrain")) from_json(j.at("pretrain"), c.pretrain);
  if (j.contains("probe")) from_json(j.at("probe"), c.probe);
  c.stages = j.value("stages", c.stages);
  c.k_list = j.value("k_list", c.k_list);
  c.target_units = j.value("target_units", c.target_units);
  c.eval_crop = j.value("eval_crop", c.eval_crop);
  c.include_random = j.value("include_random", c.include_random);
  c.checkpoint = j.value("checkpoint", c.checkpoint);
  c.viz_mode = j.value("viz_mode", c.viz_mode);
  c.topk = j.value("topk", c.topk);
  c.num_queries = j.value("num_queries", c.num_queries);
  c.ablate = j.value("ablate", c.ablate);
  c.out = j.value("out", c.out);
  c.seed = j.value("seed", c.seed);
  c.pretrain.train.seed = c.seed;
  c.probe.seed = c.seed;
}

void validate(const RunConfig& c) {
  validate(c.pretrain.train);
  make_mask(c.pretrain.lci.patch_size, c.pretrain.lci.border);
  if (c.pretrain.lci.patch_size % 4 != 0) throw ConfigError("patch_size must be a multiple of 4");
  if (c.pretrain.lci.d_steps < 0 || c.pretrain.lci.f_steps < 0 || c.pretrain.lci.c_steps < 1) {
    throw ConfigError("update_ratio needs non-negative D and F steps and at least one C step");
  }
  if (c.stages.empty()) throw ConfigError("stages must not be empty");
  if (c.k_list.empty()) throw ConfigError("k list must not be empty");
  for (int k : c.k_list) {
    if (k <= 0) throw ConfigError("k values must be positive");
  }
  if (c.target_units <= 0) throw ConfigError("target_units must be positive");
  for (const auto* d : {&c.dataset, &c.probe_train, &c.probe_test}) {
    if (d->position_jitter < 0 || d->part_jitter < 0) throw ConfigError("dataset jitter must be non-negative");
  }
  if (c.viz_mode != "filters" && c.viz_mode != "lci_examples" && c.viz_mode != "retrieval") {
    throw ConfigError("viz mode must be filters, lci_examples or retrieval, got '" + c.viz_mode + "'");
  }
  if (c.topk < 1 || c.num_queries < 1) throw ConfigError("topk and num_queries must be positive");
  if (c.probe.lrs.size() != c.probe.milestones.size() + 1) {
    throw ConfigError("probe schedule needs one more rate than milestones");
  }
}

ResolvedConfig resolve_config(const FlagValues& flags) {
  nlohmann::json merged = RunConfig{};
  nlohmann::json file_patch = nlohmann::json::object();
  if (const auto it = flags.find("config"); it != flags.end()) {
    std::ifstream in(it->second);
    if (!in) throw ConfigError("cannot read config file " + it->second);
    try {
      file_patch = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file " + it->second + ": " + e.what());
    }
    // Accept a config.json written by a previous run.
    if (file_patch.contains("config") && file_patch.contains("config_hash")) file_patch = file_patch.at("config");
  }

  nlohmann::json flag_patch = nlohmann::json::object();
  for (const auto& [name, value] : flags) {
    if (name == "config") continue;
    if (name == "transforms") {
      TransformSet::parse(value);
      flag_patch["pretrain"]["train"]["transforms"] = value;
    } else if (name == "dataset") {
      for (const char* key : {"dataset", "probe_train", "probe_test"}) flag_patch[key]["source"] = value;
    } else if (name == "seed") {
      flag_patch["seed"] = parse_number<std::uint64_t>(name, value);
    } else if (name == "epochs") {
      flag_patch["pretrain"]["train"]["epochs"] = parse_number<int>(name, value);
    } else if (name == "patch-size") {
      flag_patch["pretrain"]["lci"]["patch_size"] = parse_number<int>(name, value);
    } else if (name == "border") {
      flag_patch["pretrain"]["lci"]["border_b"] = parse_number<int>(name, value);
    } else if (name == "out") {
      flag_patch["out"] = value;
    } else if (name == "stages") {
      flag_patch["stages"] = split_csv(value);
    } else if (name == "k") {
      std::vector<int> ks;
      for (const auto& k : split_csv(value)) ks.push_back(parse_number<int>(name, k));
      flag_patch["k_list"] = ks;
    } else if (name == "checkpoint") {
      flag_patch["checkpoint"] = value;
    } else if (name == "mode") {
      flag_patch["viz_mode"] = value;
    } else if (name == "ablate") {
      flag_patch["ablate"] = true;
    } else if (name == "random-baseline") {
      flag_patch["include_random"] = true;
    } else {
      throw ConfigError("unknown flag --" + name);
    }
  }

  merged.merge_patch(file_patch);
  merged.merge_patch(flag_patch);
  ResolvedConfig rc;
  try {
    rc.config = merged.get<RunConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  validate(rc.config);
  rc.merged = rc.config;  // normalized: derived fields filled in
  rc.sources = nlohmann::json::object();
  // flatten() maps an empty object to {"": null}.
  const auto file_keys = file_patch.empty() ? nlohmann::json::object() : file_patch.flatten();
  const auto flag_keys = flag_patch.empty() ? nlohmann::json::object() : flag_patch.flatten();
  for (const auto& [key, _] : file_keys.items()) rc.sources[key] = "file";
  for (const auto& [key, _] : flag_keys.items()) rc.sources[key] = "flag";
  auto hashed = rc.merged;
  hashed.erase("out");
  rc.hash = config_hash(hashed);
  return rc;
}

void write_config(const std::filesystem::path& dir, const ResolvedConfig& rc) {
  std::filesystem::create_directories(dir);
  write_text(dir / "config.json",
             nlohmann::json{{"config", rc.merged}, {"sources", rc.sources}, {"config_hash", rc.hash}}.dump(2) + "\n");
}

const std::vector<std::string>& ablation_subsets() {
  static const std::vector<std::string> subsets = {"warp", "lci", "rot", "warp,lci", "rot,warp", "rot,lci", "rot,warp,lci"};
  return subsets;
}

namespace {

PretrainOutcome pretrain_one(const ResolvedConfig& rc, const Dataset& data, const std::filesystem::path& dir) {
  const auto& cfg = rc.config.pretrain;
  const int input_size = cfg.augment.random_crop ? cfg.augment.crop_size : static_cast<int>(data.images.size(2));
  auto bundle = make_bundle(cfg, static_cast<int>(data.images.size(1)), input_size);
  write_config(dir, rc);

  std::ofstream metrics(dir / "metrics.jsonl", std::ios::trunc);
  if (!metrics) throw FormatError("cannot write metrics log in " + dir.string());
  metrics << nlohmann::json{{"type", "run"},
                            {"config_hash", rc.hash},
                            {"dataset", data.source},
                            {"images", data.size()},
                            {"skipped", data.skipped}}
                 .dump()
          << "\n";
  PretrainHooks hooks;
  hooks.metrics = &metrics;
  hooks.diagnostics = dir / "divergence.json";
  hooks.checkpoint = [&](const ModelBundle& b) {
    save_bundle(dir / ("step_" + std::to_string(b.step)), const_cast<ModelBundle&>(b), rc.hash);
  };
  PretrainOutcome outcome;
  outcome.dir = dir;
  outcome.summary = pretrain(bundle, data, cfg, hooks);
  save_bundle(dir, bundle, rc.hash);

  if (data.size() > 0) {
    Rng rng(rc.config.seed + 17);
    TransformContext ctx;
    ctx.rng = &rng;
    ctx.warp_grid = cfg.train.warp_grid;
    ctx.warp_max_offset = cfg.train.warp_max_offset;
    ctx.spline_order = cfg.train.spline_order;
    ctx.patch_size = cfg.lci.patch_size;
    ctx.border = cfg.lci.border;
    if (bundle.has_inpainter()) {
      bundle.f->eval();
      ctx.inpainter = no_grad_map(bundle.f);
    }
    const auto source = center_crop(data.images[0], input_size);
    std::vector<torch::Tensor> tiles;
    for (auto y : cfg.train.transforms.labels()) tiles.push_back(apply_transform(source, y, ctx).detach());
    save_png(dir / "transform_examples.png", image_grid(tiles, static_cast<int>(tiles.size())).image, 4);
  }
  return outcome;
}

}  // namespace

std::vector<PretrainOutcome> cmd_pretrain(const ResolvedConfig& rc) {
  const auto dir = output_dir(rc.config, "pretrain");
  const auto data = load_dataset(rc.config.dataset);
  if (data.size() == 0) throw ConfigError("pretraining dataset is empty");
  std::vector<PretrainOutcome> out;
  if (!rc.config.ablate) {
    out.push_back(pretrain_one(rc, data, dir));
    return out;
  }
  for (const auto& subset : ablation_subsets()) {
    auto row = rc;
    row.config.pretrain.train.transforms = TransformSet::parse(subset);
    row.config.ablate = false;
    row.merged = row.config;
    auto hashed = row.merged;
    hashed.erase("out");
    row.hash = config_hash(hashed);
    row.sources["/pretrain/train/transforms"] = "ablate";
    out.push_back(pretrain_one(row, data, dir / subset_dir_name(subset)));
  }
  auto random = rc;
  random.config.pretrain.train.epochs = 0;
  random.config.ablate = false;
  random.merged = random.config;
  auto hashed = random.merged;
  hashed.erase("out");
  random.hash = config_hash(hashed);
  out.push_back(pretrain_one(random, data, dir / "random"));
  return out;
}

std::vector<ProbeRow> cmd_probe(const ResolvedConfig& rc) {
  const auto& c = rc.config;
  if (c.checkpoint.empty()) throw ConfigError("probe needs --checkpoint");
  auto loaded = load_classifier(c.checkpoint);
  warn_on_hash_mismatch(c.checkpoint, loaded.config_hash);
  const auto names = loaded.c->stage_names();
  for (const auto& s : c.stages) {
    if (std::find(names.begin(), names.end(), s) == names.end()) {
      throw ConfigError("checkpoint has no stage '" + s + "'");
    }
  }
  const auto train = load_dataset(c.probe_train);
  const auto test = load_dataset(c.probe_test);
  const auto x_train = eval_view(train.images, c.eval_crop);
  const auto x_test = eval_view(test.images, c.eval_crop);

  std::vector<std::pair<std::string, Classifier>> inits;
  if (c.include_random) {
    torch::manual_seed(c.seed);
    inits.emplace_back("random", Classifier(loaded.c->config()));
  }
  inits.emplace_back("checkpoint", loaded.c);

  const auto dir = output_dir(c, "probe");
  write_config(dir, rc);
  std::vector<ProbeRow> rows;
  std::ostringstream table, jsonl;
  table << "# config_hash " << rc.hash << " checkpoint_hash " << loaded.checkpoint_hash << "\n";
  table << std::left << std::setw(12) << "init";
  for (const auto& s : c.stages) table << std::setw(10) << s;
  table << "\n";
  for (auto& [name, model] : inits) {
    ProbeRow row;
    row.init = name;
    table << std::setw(12) << name;
    for (const auto& stage : c.stages) {
      const auto f_train = extract_features(model, x_train, stage, c.target_units);
      const auto f_test = extract_features(model, x_test, stage, c.target_units);
      auto result = train_linear_probe(f_train.data, train.labels, f_test.data, test.labels, c.probe);
      result.stage = stage;
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(1) << 100.0 * result.accuracy << "%";
      table << std::setw(10) << cell.str();
      jsonl << nlohmann::json{{"type", "probe"},
                              {"init", name},
                              {"stage", stage},
                              {"accuracy", result.accuracy},
                              {"grid", f_train.grid},
                              {"dims", f_train.data.size(1)},
                              {"config_hash", rc.hash},
                              {"checkpoint_hash", loaded.checkpoint_hash},
                              {"checkpoint_config_hash", loaded.config_hash}}
                   .dump()
            << "\n";
      row.results.push_back(std::move(result));
    }
    table << "\n";
    rows.push_back(std::move(row));
  }
  write_text(dir / "report.txt", table.str());
  write_text(dir / "report.jsonl", jsonl.str());
  std::cout << table.str();
  return rows;
}

std::vector<KnnPoint> cmd_knn(const ResolvedConfig& rc) {
  const auto& c = rc.config;
  if (c.checkpoint.empty()) throw ConfigError("knn needs --checkpoint");
  auto loaded = load_classifier(c.checkpoint);
  warn_on_hash_mismatch(c.checkpoint, loaded.config_hash);
  const auto data = load_dataset(c.dataset);
  for (int k : c.k_list) {
    if (k + 1 >= data.size()) {
      throw ConfigError("k = " + std::to_string(k) + " needs more than " + std::to_string(k + 1) + " images");
    }
  }
  const auto& stage = c.stages.back();
  const int crop = c.eval_crop > 0 ? c.eval_crop : static_cast<int>(data.images.size(2));
  const auto features = five_crop_features(loaded.c, data.images, stage, crop, c.target_units);

  const auto dir = output_dir(c, "knn");
  write_config(dir, rc);
  std::vector<KnnPoint> series;
  std::ostringstream table, jsonl, plot;
  table << "# config_hash " << rc.hash << " checkpoint_hash " << loaded.checkpoint_hash << " stage " << stage << "\n";
  table << "k    accuracy\n";
  for (int k : c.k_list) {
    const double acc = knn_loocv(features, data.labels, k);
    series.push_back({k, acc});
    table << std::left << std::setw(5) << k << std::fixed << std::setprecision(4) << acc << "\n";
    jsonl << nlohmann::json{{"type", "knn"}, {"k", k}, {"accuracy", acc}, {"stage", stage},
                            {"config_hash", rc.hash}, {"checkpoint_hash", loaded.checkpoint_hash}}
                 .dump()
          << "\n";
    plot << k << " " << std::setprecision(17) << acc << "\n";
  }
  write_text(dir / "knn_report.txt", table.str());
  write_text(dir / "knn_report.jsonl", jsonl.str());
  write_text(dir / "knn_series.txt", plot.str());
  std::cout << table.str();
  return series;
}

std::filesystem::path cmd_viz(const ResolvedConfig& rc) {
  const auto& c = rc.config;
  if (c.checkpoint.empty()) throw ConfigError("viz needs --checkpoint");
  auto loaded = load_classifier(c.checkpoint);
  warn_on_hash_mismatch(c.checkpoint, loaded.config_hash);
  const auto dir = output_dir(c, "viz");

  if (c.viz_mode == "filters") {
    const auto grid = filter_grid(loaded.c->first_layer_weight());
    write_config(dir, rc);
    save_png(dir / "filters.png", grid.image, 8);
    return dir / "filters.png";
  }

  const auto data = load_dataset(c.dataset);
  const auto images = eval_view(data.images, c.eval_crop);
  if (c.viz_mode == "lci_examples") {
    const auto f_path = std::filesystem::path(c.checkpoint).parent_path() / "inpainter.ckpt";
    if (!std::filesystem::exists(f_path)) throw ConfigError("no inpainter checkpoint beside " + c.checkpoint);
    const auto f_container = load_container(f_path);
    if (f_container.meta.value("config_hash", std::string()) != loaded.config_hash) {
      std::cerr << "warning: inpainter and classifier checkpoints carry different config hashes\n";
    }
    auto f = load_inpainter(f_path);
    Rng rng(c.seed + 29);
    const PatchMap fmap = no_grad_map(f);
    std::vector<torch::Tensor> tiles;
    const auto count = std::min<std::int64_t>(8, images.size(0));
    if (count == 0) throw ConfigError("dataset is empty");
    for (std::int64_t i = 0; i < count; ++i) {
      const auto spec = sample_patch_spec(static_cast<int>(images.size(2)), static_cast<int>(images.size(3)),
                                          f->config().patch_size, c.pretrain.lci.border, rng);
      const auto result = inpaint_window(images[i], spec, fmap, rng);
      tiles.push_back(images[i]);
      tiles.push_back(outline_window(result.image, spec));
    }
    write_config(dir, rc);
    save_png(dir / "lci_examples.png", image_grid(tiles, 4, 2).image, 4);
    return dir / "lci_examples.png";
  }

  // retrieval: queries from the held-out split, gallery from the dataset.
  const auto queries_ds = load_dataset(c.probe_test);
  const auto queries = eval_view(queries_ds.images, c.eval_crop);
  const auto nq = std::min<std::int64_t>(c.num_queries, queries.size(0));
  if (nq == 0 || images.size(0) < c.topk) throw ConfigError("not enough images for retrieval");
  const auto& stage = c.stages.back();
  const auto gallery = extract_features(loaded.c, images, stage, c.target_units).data;
  const auto query_features = extract_features(loaded.c, queries.narrow(0, 0, nq), stage, c.target_units).data;
  const auto standardizer = Standardizer::fit(gallery);
  const auto ranked = retrieve(standardizer.apply(query_features), standardizer.apply(gallery), c.topk);
  std::vector<torch::Tensor> tiles;
  for (std::int64_t q = 0; q < nq; ++q) {
    tiles.push_back(queries[q]);
    for (std::int64_t r = 0; r < c.topk; ++r) tiles.push_back(images[ranked[q][r].item<std::int64_t>()]);
  }
  write_config(dir, rc);
  save_png(dir / "retrieval.png", image_grid(tiles, c.topk + 1, 2).image, 3);
  return dir / "retrieval.png";
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Self-supervised pretraining by discriminating global image transformations"};
  app.require_subcommand(1);
  FlagValues flags;
  auto add_value = [&flags](CLI::App* sub, const char* name, const char* help) {
    sub->add_option_function<std::string>(
        std::string("--") + name, [&flags, name](const std::string& v) { flags[name] = v; }, help);
  };
  auto add_common = [&add_value](CLI::App* sub) {
    add_value(sub, "config", "JSON config file; flags override its values");
    add_value(sub, "dataset", "synthetic:generic, synthetic:face, an image directory or a dataset archive");
    add_value(sub, "seed", "master seed");
    add_value(sub, "out", "output directory (default runs/<command>-<timestamp>)");
  };
  auto* pretrain_cmd = app.add_subcommand("pretrain", "train C (and F, D when LCI is enabled)");
  add_common(pretrain_cmd);
  add_value(pretrain_cmd, "transforms", "comma list from rot, warp, lci");
  add_value(pretrain_cmd, "epochs", "passes over the pretraining set");
  add_value(pretrain_cmd, "patch-size", "LCI window side in pixels");
  add_value(pretrain_cmd, "border", "LCI preserved border in pixels");
  pretrain_cmd->add_flag_callback("--ablate", [&flags] { flags["ablate"] = "1"; },
                                  "run every transform subset plus a random baseline");
  auto* probe_cmd = app.add_subcommand("probe", "linear probes on frozen features");
  auto* knn_cmd = app.add_subcommand("knn", "leave-one-out kNN accuracy for several k");
  auto* viz_cmd = app.add_subcommand("viz", "filters, LCI examples or retrieval strips");
  for (auto* sub : {probe_cmd, knn_cmd, viz_cmd}) {
    add_common(sub);
    add_value(sub, "checkpoint", "classifier checkpoint written by pretrain");
    add_value(sub, "stages", "comma list of stages, e.g. conv1,conv5");
  }
  probe_cmd->add_flag_callback("--random-baseline", [&flags] { flags["random-baseline"] = "1"; },
                               "add a randomly initialized network as a row");
  add_value(knn_cmd, "k", "comma list of neighbor counts");
  add_value(viz_cmd, "mode", "filters, lci_examples or retrieval");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    torch::set_num_threads(1);
    const auto rc = resolve_config(flags);
    if (pretrain_cmd->parsed()) {
      for (const auto& o : cmd_pretrain(rc)) {
        std::cout << o.dir.string() << ": " << o.summary.steps << " steps, final transform accuracy "
                  << o.summary.final_epoch_mean_accuracy << "\n";
      }
    } else if (probe_cmd->parsed()) {
      cmd_probe(rc);
    } else if (knn_cmd->parsed()) {
      cmd_knn(rc);
    } else if (viz_cmd->parsed()) {
      std::cout << cmd_viz(rc).string() << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace gssl
