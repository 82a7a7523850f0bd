#include "gssl/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "gssl/error.hpp"

namespace gssl {

static_assert(std::endian::native == std::endian::little, "containers assume a little-endian host");

namespace {

constexpr char kMagic[8] = {'G', 'S', 'S', 'L', 'C', 'O', 'N', 'T'};

std::string dtype_name(torch::ScalarType t) {
  switch (t) {
    case torch::kFloat32: return "float32";
    case torch::kFloat64: return "float64";
    case torch::kInt64: return "int64";
    case torch::kUInt8: return "uint8";
    default: throw FormatError(std::string("unsupported tensor dtype ") + c10::toString(t));
  }
}

torch::ScalarType dtype_from(const std::string& name) {
  if (name == "float32") return torch::kFloat32;
  if (name == "float64") return torch::kFloat64;
  if (name == "int64") return torch::kInt64;
  if (name == "uint8") return torch::kUInt8;
  throw FormatError("unknown tensor dtype '" + name + "'");
}

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw FormatError("truncated container header");
  return value;
}

}  // namespace

void save_container(const std::filesystem::path& path, const Container& container) {
  nlohmann::json header;
  header["kind"] = container.kind;
  header["meta"] = container.meta;
  header["tensors"] = nlohmann::json::array();
  std::vector<torch::Tensor> blobs;
  std::uint64_t offset = 0;
  for (const auto& [name, tensor] : container.tensors) {
    auto t = tensor.detach().to(torch::kCPU).contiguous();
    const auto bytes = static_cast<std::uint64_t>(t.numel() * t.element_size());
    header["tensors"].push_back({{"name", name},
                                 {"dtype", dtype_name(t.scalar_type())},
                                 {"shape", t.sizes().vec()},
                                 {"offset", offset},
                                 {"bytes", bytes}});
    offset += bytes;
    blobs.push_back(std::move(t));
  }
  const auto text = header.dump();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kContainerVersion);
  write_pod(out, static_cast<std::uint64_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : blobs) {
    out.write(static_cast<const char*>(t.data_ptr()), static_cast<std::streamsize>(t.numel() * t.element_size()));
  }
  if (!out) throw FormatError("write failed for " + path.string());
}

Container load_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError(path.string() + " is not a container file");
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kContainerVersion) {
    throw FormatError("unsupported container version " + std::to_string(version));
  }
  const auto header_size = read_pod<std::uint64_t>(in);
  std::string text(header_size, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_size))) throw FormatError("truncated container header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("corrupt container header: ") + e.what());
  }
  const auto data_start = in.tellg();
  Container c;
  c.kind = header.at("kind").get<std::string>();
  c.meta = header.value("meta", nlohmann::json::object());
  for (const auto& entry : header.at("tensors")) {
    const auto shape = entry.at("shape").get<std::vector<std::int64_t>>();
    auto t = torch::empty(shape, torch::TensorOptions().dtype(dtype_from(entry.at("dtype").get<std::string>())));
    const auto bytes = entry.at("bytes").get<std::uint64_t>();
    if (bytes != static_cast<std::uint64_t>(t.numel() * t.element_size())) {
      throw FormatError("size mismatch for tensor " + entry.at("name").get<std::string>());
    }
    in.seekg(data_start + static_cast<std::streamoff>(entry.at("offset").get<std::uint64_t>()));
    if (!in.read(static_cast<char*>(t.data_ptr()), static_cast<std::streamsize>(bytes))) {
      throw FormatError("truncated data for tensor " + entry.at("name").get<std::string>());
    }
    c.tensors.emplace(entry.at("name").get<std::string>(), std::move(t));
  }
  return c;
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
  auto h = seed;
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << value;
  return s.str();
}

std::string config_hash(const nlohmann::json& config) {
  const auto text = config.dump();
  return hex64(fnv1a64(text.data(), text.size()));
}

std::map<std::string, torch::Tensor> module_state(const torch::nn::Module& module) {
  std::map<std::string, torch::Tensor> state;
  for (const auto& p : module.named_parameters()) state.emplace("param:" + p.key(), p.value());
  for (const auto& b : module.named_buffers()) state.emplace("buffer:" + b.key(), b.value());
  return state;
}

std::string module_checksum(const torch::nn::Module& module) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [name, tensor] : module_state(module)) {
    h = fnv1a64(name.data(), name.size(), h);
    const auto t = tensor.detach().contiguous();
    for (auto s : t.sizes()) h = fnv1a64(&s, sizeof(s), h);
    h = fnv1a64(t.data_ptr(), static_cast<std::size_t>(t.numel() * t.element_size()), h);
  }
  return hex64(h);
}

void load_module_state(torch::nn::Module& module, const std::map<std::string, torch::Tensor>& state) {
  torch::NoGradGuard no_grad;
  for (auto& [name, target] : module_state(module)) {
    const auto it = state.find(name);
    if (it == state.end()) throw FormatError("checkpoint lacks " + name);
    if (it->second.sizes() != target.sizes()) throw FormatError("shape mismatch for " + name);
    target.copy_(it->second);
  }
}

}  // namespace gssl
