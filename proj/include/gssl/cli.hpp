#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gssl/data.hpp"
#include "gssl/eval.hpp"
#include "gssl/pretrain.hpp"

namespace gssl {

// Merged settings of one command.
struct RunConfig {
  DatasetSpec dataset;      // pretraining data; also the kNN and retrieval set
  DatasetSpec probe_train{.split = "train", .size = 1000};  // labeled splits for linear probes
  DatasetSpec probe_test{.split = "test", .size = 1000};
  PretrainConfig pretrain;
  ProbeSchedule probe;
  std::vector<std::string> stages = {"conv1", "conv2", "conv3", "conv4", "conv5"};
  std::vector<int> k_list = {1, 5, 10, 20, 50};
  std::int64_t target_units = kDefaultTargetUnits;
  int eval_crop = 32;  // center crop applied before feature extraction; 0 = none
  bool include_random = false;  // probe: add a randomly initialized row
  std::string checkpoint;       // classifier checkpoint for probe, knn and viz
  std::string viz_mode = "filters";
  int topk = 8;
  int num_queries = 6;
  bool ablate = false;  // pretrain: run the whole transform-subset grid
  std::string out;      // default: runs/<command>-<timestamp>
  std::uint64_t seed = 0;
};
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);
void validate(const RunConfig& c);

// Command line values that override the config file, keyed by flag name
// without dashes: config, transforms, dataset, seed, epochs, patch-size,
// border, out, stages, k, checkpoint, mode, ablate, random-baseline.
using FlagValues = std::map<std::string, std::string>;

struct ResolvedConfig {
  RunConfig config;
  nlohmann::json merged;   // the effective configuration
  nlohmann::json sources;  // per changed key: "file" or "flag"; absent = default
  std::string hash;
};
// defaults < config file < flags. Throws ConfigError on invalid values.
ResolvedConfig resolve_config(const FlagValues& flags);

// Writes {config, sources, config_hash} to dir/config.json.
void write_config(const std::filesystem::path& dir, const ResolvedConfig& rc);

struct PretrainOutcome {
  std::filesystem::path dir;
  PretrainSummary summary;
};
// Checkpoints, metrics.jsonl, config.json and transform_examples.png under
// out/ (or out/<subset>/ per ablation row).
std::vector<PretrainOutcome> cmd_pretrain(const ResolvedConfig& rc);

struct ProbeRow {
  std::string init;  // "checkpoint" or "random"
  std::vector<ProbeResult> results;
};
// report.txt (table: rows = init, columns = stages) and report.jsonl.
std::vector<ProbeRow> cmd_probe(const ResolvedConfig& rc);

struct KnnPoint {
  int k = 0;
  double accuracy = 0.0;
};
// knn_report.txt, knn_report.jsonl and knn_series.txt ("k accuracy" lines).
std::vector<KnnPoint> cmd_knn(const ResolvedConfig& rc);

// filters.png, lci_examples.png or retrieval.png. Returns the written file.
std::filesystem::path cmd_viz(const ResolvedConfig& rc);

// The transform subsets of the ablation grid, as --transforms values, in
// order; the randomly initialized baseline row is added separately.
const std::vector<std::string>& ablation_subsets();

// Entry point used by the executable: parses argv with the subcommands
// pretrain, probe, knn and viz. Returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace gssl
