#include <doctest.h>

#include <cmath>

#include "sggv/agg/reference.hpp"
#include "sggv/common/error.hpp"
#include "support.hpp"

using namespace sggv;
using namespace sggv::agg;
using test::bundle_of;

TEST_CASE("tau range and default") {
  CHECK(valid_tau_range(9) == std::pair{5, 9});
  CHECK(valid_tau_range(6) == std::pair{4, 6});
  CHECK(valid_tau_range(3) == std::pair{2, 3});
  CHECK(valid_tau_range(1) == std::pair{1, 1});
  CHECK(default_tau(9) == 6);
  CHECK(default_tau(6) == 4);
  CHECK(default_tau(3) == 2);
  CHECK(default_tau(4) == 3);
}

TEST_CASE("invalid tau names the valid range") {
  try {
    validate_strategy(Sggv{4}, 9);
    FAIL("tau 4 accepted for L = 9");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("5..9") != std::string::npos);
  }
  CHECK_THROWS_AS(validate_strategy(Sggv{10}, 9), ConfigError);
  CHECK_NOTHROW(validate_strategy(Sggv{5}, 9));
  CHECK_THROWS_AS(validate_strategy(AgrRand{-1.0}, 3), ConfigError);
}

TEST_CASE("deep_all sums") {
  const auto b = bundle_of({{1, -2, 0.5}, {3, 1, 0}});
  const auto o = deep_all(b);
  CHECK(o.combined.values == std::vector<double>{4, -1, 0.5});
  CHECK(o.retained_proportion == 1.0);
}

TEST_CASE("agr_sum keeps dimensions without opposite signs") {
  const auto b = bundle_of({{1, 1, 0, -1, 0}, {2, -1, 0, -2, 0}, {0, 5, 3, 0, 0}});
  const auto o = agr_sum(b);
  CHECK(o.combined.values == std::vector<double>{3, 0, 3, -3, 0});
  CHECK(o.retained == std::vector<std::uint8_t>{1, 0, 1, 1, 1});
  CHECK(o.retained_proportion == doctest::Approx(0.8));
}

TEST_CASE("sggv voting by hand") {
  // L = 3, tau = 2.
  const auto b = bundle_of({{1, 1, -1, 0, 2}, {2, -1, -2, 0, 0}, {-1, 0, -3, 0, 0}});
  const auto o = sggv_vote(b, 2);
  CHECK(o.combined.values == std::vector<double>{3, 0, -6, 0, 0});
  CHECK(o.retained == std::vector<std::uint8_t>{1, 0, 1, 0, 0});
  CHECK(o.retained_proportion == doctest::Approx(0.4));

  // The literal rule fires the negative branch whenever m <= L - tau, which
  // also keeps (as zero sum) dimensions with a single positive entry.
  const auto lit = sggv_vote(b, 2, VoteRule::Literal);
  CHECK(lit.combined.values == std::vector<double>{3, -1, -6, 0, 0});
  CHECK(lit.retained == std::vector<std::uint8_t>{1, 1, 1, 1, 1});
}

TEST_CASE("pcgrad hand example") {
  const auto b = bundle_of({{1, 1}, {-1, 0}});
  const auto o = pcgrad(b, nullptr);
  CHECK(o.combined.values == std::vector<double>{-0.5, 1.5});
  CHECK(o.retained_proportion == 1.0);
}

TEST_CASE("pcgrad skips zero-norm gradients") {
  const auto b = bundle_of({{1, 2}, {0, 0}});
  CHECK(pcgrad(b, nullptr).combined.values == std::vector<double>{1, 2});
}

TEST_CASE("agr_rand without conflicts equals agr_sum and draws nothing") {
  const auto b = bundle_of({{1, 0, -2}, {3, 0, -1}});
  Rng rng(5), untouched(5);
  const auto o = agr_rand(b, AgrRand{}, rng);
  CHECK(o.combined == agr_sum(b).combined);
  CHECK(rng == untouched);
}

TEST_CASE("agr_rand noise statistics") {
  // Every dimension conflicts; fixed sigma 2 gives N(0, 4) draws.
  const std::size_t k = 200000;
  agg::GradientBundle<double> b;
  b.grads.emplace_back(std::vector<double>(k, 1.0));
  b.grads.emplace_back(std::vector<double>(k, -1.0));
  b.tags = {{0, InputKind::Raw}, {1, InputKind::Raw}};
  Rng rng(9);
  const auto o = agr_rand(b, AgrRand{2.0, SigmaPolicy::Fixed}, rng);
  double mean = 0, sq = 0;
  for (double v : o.combined.values) mean += v;
  mean /= k;
  for (double v : o.combined.values) sq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sq / (k - 1));
  // Standard error of the mean is 2 / sqrt(k) ~ 0.0045.
  CHECK(std::abs(mean) < 0.03);
  CHECK(sd == doctest::Approx(2.0).epsilon(0.02));
  CHECK(o.retained_proportion == 0.0);

  // Relative policy scales by the mean absolute entry (here 1).
  Rng rng2(9);
  const auto rel = agr_rand(b, AgrRand{2.0, SigmaPolicy::Relative}, rng2);
  CHECK(rel.combined == o.combined);
}

TEST_CASE("sign agreement rate") {
  const auto b = bundle_of({{1, -1, 0}, {1, 1, 0}});
  CHECK(sign_agreement_rate(b) == doctest::Approx(2.0 / 3.0));
  CHECK(sign_agreement_rate(bundle_of({{1, -1}})) == 1.0);
  // Three gradients, one dimension, signs (+, +, -): one agreeing pair of three.
  CHECK(sign_agreement_rate(bundle_of({{1}, {2}, {-1}})) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("bundle validation") {
  auto b = bundle_of({{1, 2}, {3}});
  CHECK_THROWS_AS(deep_all(b), InputError);
  b = bundle_of({{1, 2}, {3, 4}});
  b.tags[1] = b.tags[0];
  CHECK_THROWS_AS(agr_sum(b), InputError);
  CHECK_THROWS_AS(deep_all(GradientBundle<double>{}), InputError);
}

TEST_CASE("kernels match the serial reference bitwise") {
  Rng rng(42);
  for (std::size_t l : {1u, 2u, 3u, 6u, 9u}) {
    for (std::size_t k : {1u, 17u, 1000u}) {
      for (int trial = 0; trial < 10; ++trial) {
        const auto b = test::random_bundle(l, k, rng, 0.2);
        CHECK(deep_all(b).combined == reference::deep_all(b).combined);
        const auto as = agr_sum(b), as_ref = reference::agr_sum(b);
        CHECK(as.combined == as_ref.combined);
        CHECK(as.retained == as_ref.retained);
        const auto [lo, hi] = valid_tau_range(l);
        for (int tau = lo; tau <= hi; ++tau) {
          for (auto rule : {VoteRule::Strict, VoteRule::Literal}) {
            const auto v = sggv_vote(b, tau, rule), v_ref = reference::sggv_vote(b, tau, rule);
            REQUIRE(v.combined == v_ref.combined);
            REQUIRE(v.retained == v_ref.retained);
            REQUIRE(v.retained_proportion == v_ref.retained_proportion);
          }
        }
        Rng r1(trial), r2(trial);
        CHECK(agr_rand(b, AgrRand{}, r1).combined == reference::agr_rand(b, AgrRand{}, r2).combined);
        CHECK(r1 == r2);
      }
    }
  }
}

TEST_CASE("pcgrad matches the reference up to summation order") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto b = test::random_bundle(2 + trial % 5, 300, rng);
    Rng s1(trial), s2(trial);
    const auto o = pcgrad(b, &s1), ref = reference::pcgrad(b, &s2);
    for (std::size_t k = 0; k < b.dimension(); ++k)
      REQUIRE(o.combined[k] == doctest::Approx(ref.combined[k]).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("aggregate dispatches on the strategy") {
  Rng rng(1);
  const auto b = test::random_bundle(3, 50, rng);
  Rng r(2);
  CHECK(aggregate(b, Strategy{DeepAll{}}, r).combined == deep_all(b).combined);
  CHECK(aggregate(b, Strategy{AgrSum{}}, r).combined == agr_sum(b).combined);
  CHECK(aggregate(b, Strategy{Sggv{2}}, r).combined == sggv_vote(b, 2).combined);
  CHECK(aggregate(b, Strategy{PCGrad{false}}, r).combined == pcgrad(b, nullptr).combined);
  CHECK(strategy_name(Strategy{Sggv{2}}) == "sggv");
  CHECK(strategy_name(Strategy{AgrRand{}}) == "agr_rand");
}

TEST_CASE("float bundles") {
  GradientBundle<float> b;
  b.grads.emplace_back(std::vector<float>{1.f, -1.f});
  b.grads.emplace_back(std::vector<float>{2.f, 1.f});
  b.tags = {{0, InputKind::Raw}, {0, InputKind::Shape}};
  CHECK(agr_sum(b).combined.values == std::vector<float>{3.f, 0.f});
  CHECK(sggv_vote(b, 2).combined.values == std::vector<float>{3.f, 0.f});
}
