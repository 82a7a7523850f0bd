#include <doctest.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "gssl/cli.hpp"
#include "gssl/container.hpp"
#include "gssl/error.hpp"
#include "gssl/viz.hpp"

using namespace gssl;

namespace {

const std::filesystem::path kRoot = std::filesystem::temp_directory_path() / "gssl_cli_test";

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "gssl");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string read(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// A config small enough for a few seconds per command.
std::filesystem::path tiny_config() {
  std::filesystem::create_directories(kRoot);
  const auto path = kRoot / "tiny.json";
  std::ofstream(path) << R"({
    "dataset": {"size": 48},
    "probe_train": {"size": 40, "split": "train"},
    "probe_test": {"size": 24, "split": "test"},
    "probe": {"epochs": 2},
    "pretrain": {"train": {"epochs": 1, "batch_size": 16}, "lci": {"width": 0.25}, "classifier_width": 0.5}
  })";
  return path;
}

struct CaptureStderr {
  std::stringstream text;
  std::streambuf* old;
  CaptureStderr() : old(std::cerr.rdbuf(text.rdbuf())) {}
  ~CaptureStderr() { std::cerr.rdbuf(old); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("shipped configs resolve") {
  for (const char* name : {"desk_generic.json", "desk_face.json"}) {
    const auto path = std::filesystem::path(GSSL_SOURCE_DIR) / "configs" / name;
    const auto rc = resolve_config({{"config", path.string()}});
    CHECK(rc.config.pretrain.train.epochs == 12);
    CHECK(rc.config.probe_train.split == "train");
    CHECK(rc.config.probe_test.split == "test");
    CHECK(rc.sources.at("/pretrain/lci/width") == "file");
  }
  const auto generic = resolve_config(
      {{"config", (std::filesystem::path(GSSL_SOURCE_DIR) / "configs" / "desk_generic.json").string()}});
  CHECK(generic.config.dataset.texture_amplitude == 0.02);
  CHECK(generic.config.probe_test.num_classes == 10);
}

TEST_CASE("config precedence and hashing") {
  const auto file = kRoot / "precedence.json";
  std::filesystem::create_directories(kRoot);
  std::ofstream(file) << R"({"seed": 5, "pretrain": {"train": {"epochs": 3}, "lci": {"patch_size": 12}}})";
  const auto from_file = resolve_config({{"config", file.string()}});
  CHECK(from_file.config.seed == 5);
  CHECK(from_file.config.pretrain.train.epochs == 3);
  CHECK(from_file.config.pretrain.train.seed == 5);
  CHECK(from_file.sources.at("/seed") == "file");

  const auto flagged = resolve_config({{"config", file.string()}, {"epochs", "7"}, {"transforms", "rot"}});
  CHECK(flagged.config.pretrain.train.epochs == 7);
  CHECK(flagged.config.pretrain.lci.patch_size == 12);
  CHECK(flagged.config.pretrain.train.transforms == TransformSet::parse("rot"));
  CHECK(flagged.sources.at("/pretrain/train/epochs") == "flag");
  CHECK(flagged.merged.at("pretrain").at("train").at("epochs") == 7);

  const auto defaults = resolve_config({});
  CHECK(defaults.sources.empty());
  CHECK(defaults.config.pretrain.lci.patch_size == 16);
  CHECK(defaults.config.probe_train.split == "train");
  CHECK(defaults.config.probe_test.split == "test");
  CHECK(resolve_config({{"out", "/tmp/elsewhere"}}).hash == defaults.hash);
  CHECK(resolve_config({{"seed", "1"}}).hash != defaults.hash);

  CHECK_THROWS_AS(resolve_config({{"epochs", "three"}}), ConfigError);
  CHECK_THROWS_AS(resolve_config({{"transforms", "rot,zoom"}}), ConfigError);
  CHECK_THROWS_AS(resolve_config({{"patch-size", "10"}}), ConfigError);
  CHECK_THROWS_AS(resolve_config({{"border", "9"}}), ConfigError);
  CHECK_THROWS_AS(resolve_config({{"config", (kRoot / "absent.json").string()}}), ConfigError);
  CHECK(ablation_subsets().size() == 7);
}

TEST_CASE("commands") {
  const auto config = tiny_config().string();
  const auto run_dir = kRoot / "pretrain";
  std::filesystem::remove_all(run_dir);
  REQUIRE(run({"pretrain", "--config", config, "--transforms", "rot,warp,lci", "--out", run_dir.string()}) == 0);
  for (const char* f : {"classifier.ckpt", "inpainter.ckpt", "discriminator.ckpt", "metrics.jsonl", "config.json",
                        "transform_examples.png"}) {
    CHECK(std::filesystem::exists(run_dir / f));
  }
  const auto recorded = nlohmann::json::parse(read(run_dir / "config.json"));
  const auto ckpt = load_container(run_dir / "classifier.ckpt");
  CHECK(ckpt.meta.at("config_hash") == recorded.at("config_hash"));
  // Every enabled class shows up in the logged confusion matrix.
  std::istringstream log(read(run_dir / "metrics.jsonl"));
  std::string line;
  nlohmann::json confusion;
  while (std::getline(log, line)) {
    const auto r = nlohmann::json::parse(line);
    if (r.at("type") == "confusion") confusion = r.at("matrix");
  }
  REQUIRE(confusion.size() == 6);
  for (int y = 0; y < 6; ++y) {
    long row = 0;
    for (const auto& v : confusion[y]) row += v.get<long>();
    CHECK(row > 0);
  }

  const auto ckpt_path = (run_dir / "classifier.ckpt").string();
  const auto probe_dir = kRoot / "probe";
  REQUIRE(run({"probe", "--config", config, "--checkpoint", ckpt_path, "--random-baseline", "--out",
               probe_dir.string()}) == 0);
  const auto report = read(probe_dir / "report.txt");
  CHECK(report.find("checkpoint_hash " + module_checksum(*load_classifier(ckpt_path).c)) != std::string::npos);
  CHECK(report.find("config_hash") != std::string::npos);
  CHECK(report.find("random") != std::string::npos);
  CHECK(report.find("conv5") != std::string::npos);
  std::istringstream rows(read(probe_dir / "report.jsonl"));
  int records = 0;
  while (std::getline(rows, line)) ++records;
  CHECK(records == 10);

  const auto knn_dir = kRoot / "knn";
  REQUIRE(run({"knn", "--config", config, "--checkpoint", ckpt_path, "--k", "1,5,10,20", "--out", knn_dir.string()}) == 0);
  const auto rc = resolve_config({{"config", config}});
  auto loaded = load_classifier(ckpt_path);
  const auto data = load_dataset(rc.config.dataset);
  const auto features = five_crop_features(loaded.c, data.images, "conv5", 32);
  std::istringstream series(read(knn_dir / "knn_series.txt"));
  int count = 0;
  for (int expect_k : {1, 5, 10, 20}) {
    int k = 0;
    double acc = 0.0;
    REQUIRE(static_cast<bool>(series >> k >> acc));
    CHECK(k == expect_k);
    CHECK(acc == knn_loocv(features, data.labels, k));
    ++count;
  }
  CHECK(count == 4);
  CHECK(run({"knn", "--config", config, "--checkpoint", ckpt_path, "--k", "47", "--out", knn_dir.string()}) == 2);

  for (const char* mode : {"filters", "lci_examples", "retrieval"}) {
    const auto out = kRoot / (std::string("viz_") + mode);
    CHECK(run({"viz", "--config", config, "--checkpoint", ckpt_path, "--mode", mode, "--out", out.string()}) == 0);
    CHECK(std::filesystem::exists(out / (std::string(mode) + ".png")));
  }
  CHECK(run({"viz", "--checkpoint", ckpt_path, "--mode", "saliency"}) == 2);
  CHECK(filter_grid(loaded.c->first_layer_weight()).tiles == loaded.c->first_layer_weight().size(0));
  CHECK(filter_grid(torch::randn({96, 3, 11, 11})).tiles == 96);

  // Stage names the checkpoint lacks are rejected before any work.
  CHECK(run({"probe", "--config", config, "--checkpoint", ckpt_path, "--stages", "conv1,fc9"}) == 2);
  CHECK(run({"probe", "--config", config, "--checkpoint", (kRoot / "nothing.ckpt").string()}) == 3);
  CHECK(run({"pretrain", "--bogus"}) != 0);

  // A checkpoint whose neighbouring config records a different hash warns.
  auto edited = recorded;
  edited["config_hash"] = "0000000000000000";
  std::ofstream(run_dir / "config.json") << edited.dump();
  {
    CaptureStderr capture;
    CHECK(run({"probe", "--config", config, "--checkpoint", ckpt_path, "--stages", "conv1", "--out",
               (kRoot / "probe2").string()}) == 0);
    CHECK(capture.text.str().find("warning") != std::string::npos);
  }
  std::filesystem::remove_all(kRoot);
}

TEST_CASE("pretraining reruns give identical logs") {
  const auto config = tiny_config().string();
  for (const char* name : {"a", "b"}) {
    REQUIRE(run({"pretrain", "--config", config, "--transforms", "rot,lci", "--seed", "3", "--out",
                 (kRoot / name).string()}) == 0);
  }
  CHECK(read(kRoot / "a" / "metrics.jsonl") == read(kRoot / "b" / "metrics.jsonl"));
  std::filesystem::remove_all(kRoot);
}

}
