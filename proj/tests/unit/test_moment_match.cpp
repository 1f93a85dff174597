#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "revpref/moment_match.hpp"

using namespace revpref;

TEST_CASE("forward map basics") {
  for (std::size_t n : {2, 3, 5, 10})
    for (double k : {0.5, 2.0, 10.0}) CHECK(marginal_positive_prob(0.0, k, n) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(marginal_positive_prob(0.5, 2.0, 4) > marginal_positive_prob(-0.5, 2.0, 4));
  CHECK_THROWS_AS(marginal_positive_prob(1.1, 2.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(marginal_positive_prob(0.1, 2.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(marginal_positive_prob(0.1, 0.0, 3), std::invalid_argument);
}

TEST_CASE("n = 3 closed form") {
  // P(u_i > 0) for n = 3 reduces to (e^{k m} ... ) only at mu_i = +-1:
  // P = (1 - e^{-k}) / (1 - e^{-2k}) = 1 / (1 + e^{-k}) for mu = e_i.
  for (double k : {0.5, 3.0, 12.0})
    CHECK(marginal_positive_prob(1.0, k, 3) == doctest::Approx(1.0 / (1.0 + std::exp(-k))).epsilon(1e-8));
}

TEST_CASE("forward map vs sampling frequency") {
  Rng rng(31);
  const VmfSampler s({{0.8, 0.6, 0.0}, 5.0});
  const int N = 1'000'000;
  int pos = 0;
  for (int k = 0; k < N; ++k) pos += s(rng)[0] > 0.0;
  const double p = marginal_positive_prob(0.8, 5.0, 3);
  CHECK(std::abs(pos / double(N) - p) <= 3.0 * std::sqrt(p * (1 - p) / N));
}

TEST_CASE("antipodal symmetry and strict monotonicity") {
  for (std::size_t n : {2, 3, 5, 10})
    for (double k : {1.0, 5.0, 10.0}) {
      for (double m : {0.1, 0.45, 0.9, 1.0})
        CHECK(std::abs(marginal_positive_prob(m, k, n) + marginal_positive_prob(-m, k, n) - 1.0) <= 1e-7);
      const auto table = MarginalTable::build(n, k, 41);
      CHECK_NOTHROW(table.check_monotone());
    }
}

TEST_CASE("inversion") {
  CHECK(invert_marginal(0.5, 3.0, 4) == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(invert_marginal(1.0, 3.0, 4) == 1.0);
  CHECK(invert_marginal(0.0, 3.0, 4) == -1.0);
  for (double m : {-0.9, -0.3, 0.3, 0.7})
    CHECK(std::abs(invert_marginal(marginal_positive_prob(m, 3.0, 5), 3.0, 5) - m) <= 1e-6);
  CHECK_THROWS_AS(invert_marginal(1.5, 3.0, 4), std::invalid_argument);
}

TEST_CASE("table CSV round trip and interpolation") {
  const auto t = MarginalTable::build(3, 2.0, 11);
  std::stringstream ss;
  t.write_csv(ss);
  const auto back = MarginalTable::read_csv(ss, 3, 2.0);
  CHECK(back.mu == t.mu);
  CHECK(back.p == t.p);
  CHECK(t.interpolate(0.0) == doctest::Approx(0.5).epsilon(1e-8));
  std::stringstream bad("x,y\n");
  CHECK_THROWS(MarginalTable::read_csv(bad, 3, 2.0));
}

TEST_CASE("designs") {
  const auto d = design_full(3);
  CHECK(d.a == std::vector<double>{1, 1, 1});
  CHECK(d.b == 3.0);
  CHECK(design_full(1).a == std::vector<double>{1});
  CHECK(observe(std::vector<double>{0.6, -0.8}, design_full(2).a, design_full(2).b).x == std::vector<double>{1, 0});

  const auto six = design_budgeted(6, 2.0);
  REQUIRE(six.size() == 3);
  CHECK(six[0].block == std::vector<std::size_t>{0, 1});
  CHECK(six[2].block == std::vector<std::size_t>{4, 5});
  CHECK(six[1].a == std::vector<double>{kExcludedPrice, kExcludedPrice, 1, 1, kExcludedPrice, kExcludedPrice});

  const auto five = design_budgeted(5, 2.0);
  REQUIRE(five.size() == 3);
  CHECK(five[2].block == std::vector<std::size_t>{4});

  const auto one = design_budgeted(3, 3.0);
  REQUIRE(one.size() == 1);
  CHECK(one[0].a == design_full(3).a);
  CHECK_THROWS_AS(design_budgeted(3, 0.5), std::invalid_argument);

  // within-block signs are revealed once b >= block size
  Rng rng(2);
  for (int k = 0; k < 200; ++k) {
    const auto u = uniform_on_sphere(6, rng);
    const auto& blk = six[k % 3];
    const auto x = observe(u, blk.a, 2.0 + uniform01(rng)).x;
    for (std::size_t i : blk.block) CHECK((x[i] > 0.0) == (u[i] > 0.0));
  }
}

TEST_CASE("estimate_mu edge cases") {
  std::vector<DesignedObservation> data;
  data.push_back({{{1, 0}, {1, 1}, 2}, {0, 1}});
  data.push_back({{{0, 1}, {1, 1}, 2}, {0, 1}});
  const auto est = estimate_mu(data, 3.0, 2);
  CHECK(est.degenerate);
  CHECK(est.mu == std::vector<double>{1.0, 0.0});

  std::vector<DesignedObservation> partial{{{{1, 0, 0}, {1, 1e9, 1e9}, 1}, {0}}};
  CHECK_THROWS_AS(estimate_mu(partial, 3.0, 3), std::invalid_argument);
}

TEST_CASE("estimation from designed data") {
  Rng rng(12);
  const VmfParams truth{{0.48, -0.6, 0.64}, 5.0};
  const auto data = simulate_design_full(truth, 20000, rng);
  const auto est = estimate_mu(data, 5.0, 3);
  CHECK_FALSE(est.degenerate);
  double err = 0.0;
  for (std::size_t i = 0; i < 3; ++i) err += (est.mu[i] - truth.mu[i]) * (est.mu[i] - truth.mu[i]);
  CHECK(std::sqrt(err) <= 0.1);

  const VmfParams six{{0.3, -0.2, 0.5, 0.1, -0.6, 0.5}, 6.0};
  VmfParams unit = six;
  normalize(unit.mu);
  const auto bdata = simulate_design_budgeted(unit, 30000, 2.0, 6.0, rng);
  const auto best = estimate_mu(bdata, 6.0, 6);
  err = 0.0;
  for (std::size_t i = 0; i < 6; ++i) err += (best.mu[i] - unit.mu[i]) * (best.mu[i] - unit.mu[i]);
  CHECK(std::sqrt(err) <= 0.15);
}
