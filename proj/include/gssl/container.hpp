#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

namespace gssl {

// File layout:
//   8-byte magic "GSSLCONT", uint32 format version, uint64 header length,
//   JSON header, then the raw little-endian tensor bytes back to back.
// The header holds {"kind", "meta", "tensors": [{name, dtype, shape, offset,
// bytes}]}. Tensors may be float32, float64, int64 or uint8.
inline constexpr std::uint32_t kContainerVersion = 1;

struct Container {
  std::string kind;
  nlohmann::json meta = nlohmann::json::object();
  std::map<std::string, torch::Tensor> tensors;
};

void save_container(const std::filesystem::path& path, const Container& container);
// Throws FormatError for bad magic, unknown versions or truncated files.
Container load_container(const std::filesystem::path& path);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

// Hash of the canonical (key-sorted, compact) JSON dump.
std::string config_hash(const nlohmann::json& config);

// Hash over every named parameter and buffer: names, shapes and bytes.
std::string module_checksum(const torch::nn::Module& module);

// Named parameters and buffers, keyed "param:<name>" / "buffer:<name>".
std::map<std::string, torch::Tensor> module_state(const torch::nn::Module& module);
// Copies a saved state into `module`; throws FormatError on missing names or
// shape mismatches.
void load_module_state(torch::nn::Module& module, const std::map<std::string, torch::Tensor>& state);

}  // namespace gssl
