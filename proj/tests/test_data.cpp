#include <doctest.h>

#include <fstream>

#include "gssl/container.hpp"
#include "gssl/data.hpp"
#include "gssl/error.hpp"
#include "gssl/rotate.hpp"
#include "gssl/viz.hpp"

using namespace gssl;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("normalization") {
  const auto u8 = torch::arange(0, 256, torch::kInt64).to(torch::kUInt8).repeat({3}).reshape({16, 16, 3});
  const auto x = normalize(u8);
  CHECK(x.sizes() == torch::IntArrayRef({3, 16, 16}));
  CHECK(x.min().item<float>() == -1.0f);
  CHECK(x.max().item<float>() == 1.0f);
  CHECK(torch::equal(denormalize(x), u8));
  const auto back = normalize(denormalize(x));
  CHECK((back - x).abs().max().item<float>() <= 1.0f / 255.0f);
  CHECK(denormalize(torch::full({3, 1, 1}, 3.0f)).max().item<int>() == 255);
}

TEST_CASE("augmentation") {
  Rng rng(1);
  const auto img = rng.normal_tensor({3, 36, 36});
  CHECK(torch::equal(augment(img, AugmentFlags{}, rng), img));
  CHECK(torch::equal(horizontal_flip(horizontal_flip(img)), img));
  AugmentFlags forced{.random_crop = false, .crop_size = 0, .horizontal_flip = true, .flip_probability = 1.0};
  CHECK(torch::equal(augment(augment(img, forced, rng), forced, rng), img));
  AugmentFlags crop{.random_crop = true, .crop_size = 32};
  const auto c = augment(img, crop, rng);
  CHECK(c.sizes() == torch::IntArrayRef({3, 32, 32}));
  CHECK(torch::equal(center_crop(img, 32), img.narrow(1, 2, 32).narrow(2, 2, 32)));
  crop.crop_size = 40;
  CHECK_THROWS_AS(augment(img, crop, rng), ConfigError);
}

TEST_CASE("synthetic generic set") {
  SyntheticOrientedSpec spec;
  spec.num_classes = 8;
  spec.size = 803;
  Rng rng(2);
  const auto data = gen_synthetic_oriented(spec, rng);
  CHECK(data.images.sizes() == torch::IntArrayRef({803, 3, 36, 36}));
  CHECK(data.images.min().item<float>() >= -1.0f);
  CHECK(data.images.max().item<float>() <= 1.0f);
  const auto counts = torch::bincount(data.labels);
  CHECK(counts.max().item<std::int64_t>() - counts.min().item<std::int64_t>() <= 1);
  CHECK(counts.sum().item<std::int64_t>() == 803);

  // No rotated or mirrored-and-rotated layout coincides with a valid one.
  CHECK(layout_rotation_margin(generic_layouts(8, 5)) > 0.2);
  CHECK(layout_rotation_margin(generic_layouts(12, 5)) > 0.2);

  Rng again(2);
  CHECK(torch::equal(gen_synthetic_oriented(spec, again).images, data.images));
}

TEST_CASE("face patches reveal the orientation") {
  SyntheticOrientedSpec spec;
  spec.variant = SyntheticVariant::kFace;
  spec.size = 600;
  spec.texture_amplitude = 0.05;
  Rng rng(3);
  const auto faces = gen_synthetic_oriented(spec, rng);
  CHECK(faces.num_classes == 8);
  Rng probe(4);
  const double face_acc = patch_orientation_accuracy(faces.images, 8, 8, probe);
  MESSAGE("face 8x8 patch orientation accuracy " << face_acc);
  CHECK(face_acc > 0.9);

  SyntheticOrientedSpec g;
  g.size = 600;
  Rng rng2(5);
  const auto generic = gen_synthetic_oriented(g, rng2);
  Rng probe2(6);
  const double generic_acc = patch_orientation_accuracy(generic.images, 8, 8, probe2);
  MESSAGE("generic 8x8 patch orientation accuracy " << generic_acc);
  CHECK(generic_acc < 0.5);
}

TEST_CASE("synthetic specs") {
  DatasetSpec spec;
  spec.size = 50;
  const auto a = load_dataset(spec);
  CHECK(torch::equal(a.images, load_dataset(spec).images));
  spec.split = "test";
  CHECK_FALSE(torch::equal(a.images, load_dataset(spec).images));
  DatasetSpec harder = spec;
  harder.texture_amplitude = 0.02;
  harder.position_jitter = 5.0;
  harder.part_jitter = 1.5;
  CHECK_FALSE(torch::equal(load_dataset(spec).images, load_dataset(harder).images));
  const auto round_trip = nlohmann::json(harder).get<DatasetSpec>();
  CHECK(round_trip.texture_amplitude == 0.02);
  CHECK(round_trip.position_jitter == 5.0);
  CHECK(round_trip.part_jitter == 1.5);
  spec.source = "synthetic:cars";
  CHECK_THROWS_AS(load_dataset(spec), ConfigError);
  spec.source = "/nonexistent/path";
  CHECK_THROWS_AS(load_dataset(spec), ConfigError);
}

TEST_CASE("directory datasets") {
  const auto empty = fresh_dir("gssl_empty_ds");
  DatasetSpec spec;
  spec.source = empty.string();
  const auto none = load_dataset(spec);
  CHECK(none.size() == 0);
  CHECK(none.skipped == 0);

  const auto root = fresh_dir("gssl_dir_ds");
  Rng rng(7);
  for (const char* cls : {"cat", "dog"}) {
    std::filesystem::create_directories(root / cls);
    for (int i = 0; i < 3; ++i) {
      save_png(root / cls / ("img" + std::to_string(i) + ".png"), rng.normal_tensor({3, 20, 20}).clamp(-1, 1));
    }
  }
  std::ofstream(root / "dog" / "broken.png") << "not an image";
  spec.source = root.string();
  spec.image_size = 16;
  const auto ds = load_dataset(spec);
  CHECK(ds.size() == 6);
  CHECK(ds.skipped == 1);
  CHECK(ds.num_classes == 2);
  CHECK(ds.class_names == std::vector<std::string>{"cat", "dog"});
  CHECK(ds.images.sizes() == torch::IntArrayRef({6, 3, 16, 16}));
  CHECK(ds.images.abs().max().item<float>() <= 1.0f);
  CHECK(ds[4].second == 1);

  const auto archive = root / "set.gssl";
  save_dataset_archive(archive, ds);
  spec.source = archive.string();
  const auto back = load_dataset(spec);
  CHECK(torch::equal(back.images, ds.images));
  CHECK(torch::equal(back.labels, ds.labels));
  CHECK(back.class_names == ds.class_names);
  std::filesystem::remove_all(root);
  std::filesystem::remove_all(empty);
}

TEST_CASE("containers") {
  const auto dir = fresh_dir("gssl_container");
  Container c;
  c.kind = "test";
  c.meta = {{"a", 1}, {"b", "two"}};
  c.tensors["f32"] = torch::randn({3, 4});
  c.tensors["f64"] = torch::randn({2}, torch::kFloat64);
  c.tensors["i64"] = torch::arange(5, torch::kInt64);
  c.tensors["u8"] = torch::arange(7, torch::kInt64).to(torch::kUInt8);
  c.tensors["scalar"] = torch::tensor(2.5f);
  save_container(dir / "c.gssl", c);
  const auto back = load_container(dir / "c.gssl");
  CHECK(back.kind == "test");
  CHECK(back.meta == c.meta);
  REQUIRE(back.tensors.size() == c.tensors.size());
  for (const auto& [name, t] : c.tensors) CHECK(torch::equal(back.tensors.at(name), t));

  std::ofstream(dir / "bad.gssl") << "NOTACONTAINER";
  CHECK_THROWS_AS(load_container(dir / "bad.gssl"), FormatError);
  {
    std::ifstream in(dir / "c.gssl", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    std::ofstream(dir / "short.gssl", std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  }
  CHECK_THROWS_AS(load_container(dir / "short.gssl"), FormatError);
  CHECK_THROWS_AS(load_container(dir / "missing.gssl"), FormatError);

  // FNV-1a reference values.
  CHECK(fnv1a64("", 0) == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
  CHECK(config_hash(nlohmann::json{{"x", 1}, {"y", 2}}) == config_hash(nlohmann::json::parse(R"({"y":2,"x":1})")));
  std::filesystem::remove_all(dir);
}

}
