#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "gssl/classifier.hpp"
#include "gssl/data.hpp"
#include "gssl/error.hpp"
#include "gssl/eval.hpp"
#include "gssl/rotate.hpp"
#include "oracles.hpp"

using namespace gssl;

using oracle::cosine;
using oracle::to_matrix;
using oracle::to_vector;

TEST_SUITE("eval") {

TEST_CASE("pooling grid") {
  CHECK(pooled_grid_side(256, 13, 13, 9216) == 6);
  CHECK(pooled_grid_side(96, 55, 55, 9216) == 9);
  CHECK(pooled_grid_side(384, 13, 13, 9216) == 4);
  CHECK(pooled_grid_side(64, 4, 4, 9216) == 4);
  CHECK(pooled_grid_side(20000, 4, 4, 9216) == 1);
}

TEST_CASE("feature extraction") {
  torch::manual_seed(0);
  Classifier c(desk_classifier_config(0.5));
  const auto zeros = torch::zeros({3, 3, 32, 32});
  const auto a = extract_features(c, zeros, "conv3");
  const auto b = extract_features(c, zeros, "conv3");
  CHECK(torch::equal(a.data, b.data));
  CHECK(torch::equal(a.data[0], a.data[2]));
  CHECK(a.data.size(1) == pooled_grid_side(c->features(zeros, "conv3").size(1), 8, 8, kDefaultTargetUnits) *
                               pooled_grid_side(c->features(zeros, "conv3").size(1), 8, 8, kDefaultTargetUnits) *
                               c->features(zeros, "conv3").size(1));
  CHECK_THROWS_AS(extract_features(c, zeros, "conv7"), ConfigError);

  // A briefly trained rotation classifier is not rotation invariant.
  SyntheticOrientedSpec spec;
  spec.size = 32;
  spec.image_size = 32;
  Rng rng(1);
  const auto data = gen_synthetic_oriented(spec, rng);
  TrainConfig config;
  config.transforms = TransformSet::parse("rot");
  auto opt = make_classifier_optimizer(c, config);
  for (int step = 0; step < 10; ++step) {
    const auto batch = build_batch(data.images, config, LciConfig{}, nullptr, rng);
    classifier_step(c, batch, opt, 1e-3, config.transforms.labels());
  }
  const auto x = data.images.narrow(0, 0, 4);
  const auto fx = extract_features(c, x, "conv5").data;
  const auto fr = extract_features(c, rotate(x, 1), "conv5").data;
  CHECK((fx - fr).abs().max().item<float>() > 1e-3f);
}

TEST_CASE("linear probe") {
  ProbeSchedule schedule;
  CHECK(schedule.lr_at(0) == 0.1);
  CHECK(schedule.lr_at(5) == 0.01);
  CHECK(schedule.lr_at(30) == 0.002);
  CHECK(schedule.lr_at(64) == 0.0004);

  torch::manual_seed(2);
  auto x = torch::randn({200, 10});
  auto y = (x.select(1, 0) + 0.5 * x.select(1, 3) > 0).to(torch::kInt64);
  x.select(1, 0).add_(torch::where(y == 1, 2.0, -2.0));
  schedule.epochs = 10;
  const auto result = train_linear_probe(x.narrow(0, 0, 150), y.narrow(0, 0, 150), x.narrow(0, 150, 50),
                                         y.narrow(0, 150, 50), schedule);
  CHECK(result.accuracy == 1.0);
  CHECK(result.train_loss.size() == 10);
  CHECK_THROWS_AS(train_linear_probe(x, torch::zeros({200}, torch::kInt64), x, y, schedule), ConfigError);
}

TEST_CASE("knn on separated clusters") {
  torch::manual_seed(3);
  auto x = torch::randn({40, 5});
  auto y = torch::zeros({40}, torch::kInt64);
  y.narrow(0, 20, 20).fill_(1);
  x.narrow(0, 0, 20).add_(50.0f);
  x.narrow(0, 20, 20).sub_(50.0f);
  CHECK(knn_loocv(x, y, 1) == 1.0);
  CHECK_THROWS_AS(knn_loocv(x, y, 39), ConfigError);
}

TEST_CASE("knn matches the double-loop oracle") {
  Rng rng(4);
  for (int dataset = 0; dataset < 6; ++dataset) {
    const int n = dataset == 0 ? 200 : static_cast<int>(rng.uniform_int(60, 200));
    const int classes = static_cast<int>(rng.uniform_int(2, 6));
    torch::manual_seed(100 + dataset);
    const auto centers = torch::randn({classes, 8}) * 1.5;
    auto labels = torch::randint(classes, {n}, torch::kInt64);
    auto x = centers.index_select(0, labels) + torch::randn({n, 8});
    if (dataset == 5) {
      // Exact duplicates, each sharing its original's label.
      x.narrow(0, n / 2, n / 4).copy_(x.narrow(0, 0, n / 4));
      labels.narrow(0, n / 2, n / 4).copy_(labels.narrow(0, 0, n / 4));
    }
    for (int k : {1, 5, 20}) {
      const auto got = to_vector(knn_loocv_predictions(x, labels, k));
      CHECK(got == oracle::knn_loocv(x, to_vector(labels), k));
    }
  }
}

TEST_CASE("retrieval") {
  torch::manual_seed(5);
  const auto gallery = torch::randn({500, 12}, torch::kFloat64);
  const auto queries = torch::randn({7, 12}, torch::kFloat64);
  const auto ranked = retrieve(queries, gallery, 20);
  const auto g = to_matrix(gallery), q = to_matrix(queries);
  for (std::size_t i = 0; i < q.size(); ++i) {
    std::vector<std::int64_t> order(500);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> sim(500);
    for (std::size_t j = 0; j < 500; ++j) sim[j] = cosine(q[i], g[j]);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return sim[a] > sim[b]; });
    order.resize(20);
    CHECK(to_vector(ranked[static_cast<std::int64_t>(i)]) == order);
  }
  CHECK(retrieve(gallery[37], gallery, 1)[0][0].item<std::int64_t>() == 37);

  auto flat = torch::randn({10, 4});
  flat.select(1, 3).zero_();
  const auto orth = torch::tensor({{0.0f, 0.0f, 0.0f, 1.0f}});
  CHECK(to_vector(retrieve(orth, flat, 10)[0]) == std::vector<std::int64_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK_THROWS_AS(retrieve(orth, flat, 11), ConfigError);
}

TEST_CASE("five crops") {
  torch::manual_seed(6);
  Classifier c(desk_classifier_config(0.5));
  auto images = torch::rand({2, 3, 40, 40}) * 2 - 1;
  const auto single = extract_features(c, images.narrow(2, 4, 32).narrow(3, 4, 32).contiguous(), "conv4").data;
  const auto five = five_crop_features(c, images, "conv4", 32);
  CHECK(five.size(1) == 5 * single.size(1));
  CHECK(torch::equal(five.narrow(1, 4 * single.size(1), single.size(1)), single));
  CHECK(torch::equal(five, five_crop_features(c, images, "conv4", 32)));
  const auto uniform = five_crop_features(c, torch::full({1, 3, 40, 40}, 0.3f), "conv4", 32);
  const auto d = single.size(1);
  for (int k = 1; k < 5; ++k) CHECK(torch::equal(uniform.narrow(1, k * d, d), uniform.narrow(1, 0, d)));
  CHECK_THROWS_AS(five_crop_features(c, images, "conv4", 48), ConfigError);
}

}
