#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sggv/common/error.hpp"
#include "sggv/common/parallel.hpp"
#include "sggv/nn/checkpoint.hpp"
#include "sggv/nn/network.hpp"
#include "support.hpp"

using namespace sggv;
using namespace sggv::nn;

namespace {

double max_relative_error(const GradientVector<double>& a, const GradientVector<double>& b) {
  double worst = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double scale = std::max({std::abs(a[k]), std::abs(b[k]), 1e-6});
    worst = std::max(worst, std::abs(a[k] - b[k]) / scale);
  }
  return worst;
}

}  // namespace

TEST_CASE("default architecture layout") {
  const auto arch = Architecture::default_classifier({3, 32, 32}, 3);
  CHECK(arch.descriptor() ==
        "in:3x32x32|conv:3x3x8/s1/p1|relu|maxpool:2/s2|conv:3x3x16/s1/p1|relu|maxpool:2/s2|"
        "flatten|dense:3");
  // 8*3*9+8 + 16*8*9+16 + 3*1024+3
  CHECK(arch.parameter_count() == 4467);
  CHECK(Architecture::parse(arch.descriptor()) == arch);
  CHECK(Architecture::parse(arch.descriptor()).parameter_count() == 4467);
}

TEST_CASE("architecture chain-check") {
  CHECK_THROWS_AS(Architecture({3, 8, 8}, {Dense{3}}, 3), ConfigError);
  CHECK_THROWS_AS(Architecture({3, 8, 8}, {Flatten{}, Dense{4}}, 3), ConfigError);
  CHECK_THROWS_AS(Architecture({1, 4, 4}, {Conv{5, 5, 2, 1, 0}, Flatten{}, Dense{2}}, 2),
                  ConfigError);
  CHECK_THROWS_AS(Architecture({1, 4, 4}, {Flatten{}, MaxPool{2, 2}, Dense{2}}, 2), ConfigError);
  CHECK_THROWS_AS(Architecture::parse("in:3x8x8|bogus|dense:3"), ConfigError);
}

TEST_CASE("He init variance") {
  // 16 x 3 x 5 x 5 = 1200 conv weights, fan-in 75: target variance 2/75.
  const Architecture arch({3, 8, 8}, {Conv{5, 5, 16, 1, 0}, Flatten{}, Dense{2}}, 2);
  const auto m = init_params<double>(arch, 3);
  const auto& lp = arch.plan()[0];
  double mean = 0, var = 0;
  for (std::size_t i = 0; i < lp.weight_count; ++i) mean += m.params[lp.weight_offset + i];
  mean /= lp.weight_count;
  for (std::size_t i = 0; i < lp.weight_count; ++i) {
    const double d = m.params[lp.weight_offset + i] - mean;
    var += d * d;
  }
  var /= lp.weight_count - 1;
  const double target = 2.0 / 75.0;
  CHECK(var >= 0.5 * target);
  CHECK(var <= 2.0 * target);
  for (std::size_t i = 0; i < lp.bias_count; ++i) CHECK(m.params[lp.bias_offset + i] == 0.0);
  CHECK(init_params<double>(arch, 3) == m);
  CHECK(init_params<double>(arch, 4).params != m.params);
}

TEST_CASE("dense forward by hand") {
  const Architecture arch({2, 1, 1}, {Flatten{}, Dense{2}}, 2);
  ModelState<double> m(arch);
  m.params = {2, 1, 0, -1, 0.1, 0.2};  // W row-major, then bias
  Batch<double> b;
  b.channels = 2;
  b.height = b.width = 1;
  b.images = {0.5, 0.25};
  b.labels = {0};
  const auto r = forward(m, b);
  CHECK(r.logit(0, 0) == doctest::Approx(1.35).epsilon(1e-15));
  CHECK(r.logit(0, 1) == doctest::Approx(-0.05).epsilon(1e-15));
  CHECK(predict(m, b) == std::vector<int>{0});
}

TEST_CASE("softmax cross-entropy of equal logits is log C") {
  const auto arch = Architecture::default_classifier({3, 16, 16}, 3);
  ModelState<double> m(arch);  // all-zero parameters
  Rng rng(1);
  const auto b = test::random_batch(arch, 4, rng);
  CHECK(loss(m, b) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
  // Ties go to the lowest class index.
  CHECK(predict(m, b) == std::vector<int>(4, 0));
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(11);
  const std::vector<Architecture> archs = {
      Architecture({2, 6, 6}, {Conv{3, 3, 3, 1, 1}, ReLU{}, MaxPool{2, 2}, Flatten{}, Dense{3}},
                   3),
      Architecture({1, 7, 7}, {Conv{3, 3, 2, 2, 0}, ReLU{}, Flatten{}, Dense{4}, ReLU{}, Dense{2}},
                   2),
      Architecture({3, 8, 8}, {Conv{3, 3, 4, 1, 1}, ReLU{}, MaxPool{2, 2}, Conv{3, 3, 4, 1, 1},
                               ReLU{}, MaxPool{2, 2}, Flatten{}, Dense{3}},
                   3),
  };
  for (std::size_t i = 0; i < archs.size(); ++i) {
    CAPTURE(i);
    auto m = init_params<double>(archs[i], 100 + i);
    for (auto& p : m.params) p += uniform(rng, -0.05, 0.05);  // non-zero biases too
    const auto b = test::random_batch(archs[i], 3, rng);
    const auto analytic = loss_and_grad(m, b).grad;
    const auto numeric = finite_diff_grad(m, b, 1e-5);
    CHECK(max_relative_error(analytic, numeric) <= 1e-4);
  }
}

TEST_CASE("loss_and_grad does not depend on the thread count") {
  const auto arch = Architecture::default_classifier({3, 16, 16}, 3);
  const auto m = init_params<double>(arch, 5);
  Rng rng(2);
  const auto b = test::random_batch(arch, 7, rng);
  const int saved = max_threads();
  set_max_threads(1);
  const auto one = loss_and_grad(m, b);
  set_max_threads(3);
  const auto three = loss_and_grad(m, b);
  set_max_threads(saved);
  CHECK(one.loss == three.loss);
  CHECK(one.grad == three.grad);
}

TEST_CASE("float and double agree") {
  const auto arch = Architecture::default_classifier({3, 16, 16}, 3);
  const auto md = init_params<double>(arch, 9);
  const auto mf = init_params<float>(arch, 9);
  Rng rng(4);
  const auto bd = test::random_batch<double>(arch, 4, rng);
  Batch<float> bf;
  bf.channels = bd.channels;
  bf.height = bd.height;
  bf.width = bd.width;
  bf.labels = bd.labels;
  for (double v : bd.images) bf.images.push_back(static_cast<float>(v));
  const auto gd = loss_and_grad(md, bd);
  const auto gf = loss_and_grad(mf, bf);
  CHECK(gf.loss == doctest::Approx(gd.loss).epsilon(1e-4));
  for (std::size_t k = 0; k < gd.grad.size(); ++k)
    REQUIRE(std::abs(gf.grad[k] - gd.grad[k]) <= 1e-4 + 1e-3 * std::abs(gd.grad[k]));
}

TEST_CASE("non-finite parameters raise NumericalError") {
  const auto arch = Architecture::linear_classifier({1, 4, 4}, 2);
  auto m = init_params<double>(arch, 1);
  m.params[0] = std::nan("");
  Rng rng(3);
  const auto b = test::random_batch(arch, 2, rng);
  CHECK_THROWS_AS(loss_and_grad(m, b), NumericalError);
}

TEST_CASE("batch validation") {
  const auto arch = Architecture::linear_classifier({1, 4, 4}, 2);
  const ModelState<double> m(arch);
  Rng rng(3);
  auto b = test::random_batch(arch, 2, rng);
  auto bad = b;
  bad.labels[1] = 2;
  CHECK_THROWS_AS(loss(m, bad), InputError);
  bad = b;
  bad.images[0] = 1.5;
  CHECK_THROWS_AS(loss(m, bad), InputError);
  bad = b;
  bad.height = 5;
  CHECK_THROWS_AS(loss(m, bad), InputError);
  bad = b;
  bad.images.clear();
  bad.labels.clear();
  CHECK_THROWS_AS(loss(m, bad), InputError);
}

TEST_CASE("Adam first step by hand") {
  const Architecture arch({1, 1, 1}, {Flatten{}, Dense{1}}, 1);
  ModelState<double> m(arch);
  m.params = {1.0, -2.0};
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.weight_decay = 0.0;
  const std::vector<double> g = {0.5, -0.25};
  adam_step(m, std::span<const double>(g), cfg);
  // After one step the bias-corrected moments are g and g^2, so each
  // parameter moves by lr * g / (|g| + eps).
  CHECK(m.params[0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-15));
  CHECK(m.params[1] == doctest::Approx(-2.0 + 0.1 * 0.25 / (0.25 + 1e-8)).epsilon(1e-15));
  CHECK(m.first_moment[0] == doctest::Approx(0.05));
  CHECK(m.second_moment[0] == doctest::Approx(0.001 * 0.25));
  CHECK(m.step == 1);

  // Second step with weight decay: g' = g + wd * theta.
  cfg.weight_decay = 0.1;
  const double theta = m.params[0];
  const double g2 = 0.5 + 0.1 * theta;
  const double m1 = 0.9 * 0.05 + 0.1 * g2;
  const double v1 = 0.999 * 0.00025 + 0.001 * g2 * g2;
  const double mhat = m1 / (1 - 0.81), vhat = v1 / (1 - 0.999 * 0.999);
  adam_step(m, std::span<const double>(g), cfg);
  CHECK(m.params[0] == doctest::Approx(theta - 0.1 * mhat / (std::sqrt(vhat) + 1e-8)).epsilon(1e-13));
  CHECK(m.step == 2);
}

TEST_CASE("Adam rejects a gradient of the wrong length") {
  const Architecture arch({1, 1, 1}, {Flatten{}, Dense{1}}, 1);
  ModelState<double> m(arch);
  const std::vector<double> g = {1.0};
  CHECK_THROWS_AS(adam_step(m, std::span<const double>(g), AdamConfig{}), InputError);
}

TEST_CASE("flatten and unflatten round trip") {
  const auto arch = Architecture::default_classifier({3, 16, 16}, 4);
  const auto m = init_params<double>(arch, 8);
  const auto layers = unflatten<double>(arch, m.params);
  REQUIRE(layers.size() == arch.layer_count());
  CHECK(layers[0].weights.size() == 8 * 3 * 9);
  CHECK(layers[1].weights.empty());
  CHECK(flatten<double>(arch, layers) == m.params);
}

TEST_CASE("checkpoint round trip and rejection") {
  const auto arch = Architecture::default_classifier({3, 16, 16}, 3);
  auto m = init_params<double>(arch, 21);
  Rng rng(2);
  const auto b = test::random_batch(arch, 2, rng);
  AdamConfig cfg;
  adam_step(m, loss_and_grad(m, b).grad.span(), cfg);

  std::ostringstream os;
  write_checkpoint(os, m);
  const std::string bytes = os.str();
  CHECK(bytes.substr(0, 4) == "SGGV");
  CHECK(bytes.size() == 4 + 2 + 4 + arch.descriptor().size() + 8 + 3 * 8 * m.parameter_count() + 8);
  {
    std::istringstream is(bytes);
    CHECK(read_checkpoint<double>(is) == m);
  }
  {
    std::string bad = bytes;
    bad[0] = 'X';
    std::istringstream is(bad);
    CHECK_THROWS_AS(read_checkpoint<double>(is), LoadError);
  }
  {
    std::string bad = bytes;
    bad[4] = 2;  // version
    std::istringstream is(bad);
    CHECK_THROWS_AS(read_checkpoint<double>(is), LoadError);
  }
  {
    std::istringstream is(bytes.substr(0, bytes.size() - 5));
    CHECK_THROWS_AS(read_checkpoint<double>(is), LoadError);
  }
  {
    // Loading into float keeps the values to float precision.
    std::istringstream is(bytes);
    const auto mf = read_checkpoint<float>(is);
    CHECK(mf.params[7] == static_cast<float>(m.params[7]));
  }
}
