#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "revpref/rng.hpp"
#include "revpref/stats.hpp"

using namespace revpref;

TEST_CASE("mean and stderr") {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const auto e = mean_and_stderr(xs);
  CHECK(e.mean == 2.5);
  CHECK(e.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(proportion(3, 4).mean == 0.75);
  CHECK_THROWS(proportion(0, 0));
}

TEST_CASE("spearman") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  CHECK(spearman_rho(x, std::vector<double>{2, 4, 6, 8, 100}) == doctest::Approx(1.0));
  CHECK(spearman_rho(x, std::vector<double>{5, 4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(spearman_rho(x, std::vector<double>{1, 1, 2, 2, 3}) == doctest::Approx(0.9486833));
  // perfect order among n = 5: one of 120 permutations
  CHECK(spearman_pvalue_greater(x, x) == doctest::Approx(1.0 / 120.0));
  const std::vector<double> ten{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(spearman_pvalue_greater(ten, ten) == doctest::Approx(1.0 / 3628800.0));
}

TEST_CASE("KS") {
  Rng rng(1);
  std::vector<double> u;
  for (int k = 0; k < 20000; ++k) u.push_back(uniform01(rng));
  const auto cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  CHECK(ks_pvalue(ks_statistic(u, cdf), u.size()) > 0.001);
  for (auto& v : u) v = v * v;
  CHECK(ks_pvalue(ks_statistic(u, cdf), u.size()) < 1e-6);
  // 1.36/sqrt(n) is the classical 5% point
  CHECK(ks_pvalue(1.358 / std::sqrt(1e6), 1000000) == doctest::Approx(0.05).epsilon(0.01));
}
