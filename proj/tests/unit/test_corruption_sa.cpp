#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "revpref/corruption_sa.hpp"
#include "revpref/evaluation.hpp"

using namespace revpref;

namespace {

std::vector<ConsistencySet> clean_data(const std::vector<double>& u, std::size_t t, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ConsistencySet> sets;
  for (std::size_t k = 0; k < t; ++k) {
    const auto pb = draw_ab(AbLaw::kUniform, u.size(), rng);
    sets.push_back(build_set(observe(u, pb.a, pb.b)));
  }
  return sets;
}

}  // namespace

TEST_CASE("default margin") {
  CHECK(default_gamma(5, 10000) == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(default_gamma(1, 1) == 0.25);
  CHECK(default_gamma(3, 256) == doctest::Approx(1.0 / 144.0).epsilon(1e-12));
  CHECK_THROWS_AS(default_gamma(0, 5), std::invalid_argument);
}

TEST_CASE("acceptance rule") {
  CHECK(sa_acceptance(2.0, 1.0) == 1.0);
  CHECK(sa_acceptance(-2.0, 1.0) == doctest::Approx(0.1353352832).epsilon(1e-9));
  CHECK(sa_acceptance(-1.0, 1e-6) < 1e-300);
  CHECK(sa_acceptance(-1.0, 0.0) == 0.0);
}

TEST_CASE("temperature schedule is exact") {
  SaConfig cfg;
  cfg.eta0 = 2.0;
  cfg.reduction = 0.5;
  cfg.interval = 3;
  CHECK(temperature_at(cfg, 0) == 2.0);
  CHECK(temperature_at(cfg, 2) == 2.0);
  CHECK(temperature_at(cfg, 3) == 1.0);
  CHECK(temperature_at(cfg, 7) == 0.5);

  const std::vector<double> u{0.6, 0.8};
  const auto sets = clean_data(u, 20, 1);
  cfg.iterations = 40;
  const auto res = run_sa(sets, 2, cfg, 5);
  for (std::size_t k = 0; k < res.trace.size(); ++k)
    CHECK(res.trace[k].eta == cfg.eta0 * std::pow(cfg.reduction, static_cast<double>(k / cfg.interval)));
}

TEST_CASE("config validation") {
  SaConfig cfg;
  cfg.reduction = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.interval = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.eta0 = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("K = 0 returns the random start") {
  const std::vector<double> u{0.0, 0.6, 0.8};
  const auto sets = clean_data(u, 30, 2);
  SaConfig cfg;
  cfg.iterations = 0;
  const auto res = run_sa(sets, 3, cfg, 9);
  CHECK(res.trace.size() == 1);
  CHECK(res.objective == count_consistent(sets, res.u_hat, cfg.gamma));
  Rng rng(9);
  CHECK(res.u_hat == uniform_on_sphere(3, rng));
}

TEST_CASE("invariants along a run") {
  const std::vector<double> u{0.48, 0.6, 0.64};
  const auto sets = clean_data(u, 100, 3);
  SaConfig cfg;
  cfg.iterations = 500;
  cfg.gamma = default_gamma(3, sets.size());
  Rng rng(6);
  auto state = init_sa(sets, 3, cfg, rng);
  std::size_t prev_best = state.best_objective;
  for (std::size_t k = 0; k < cfg.iterations; ++k) {
    sa_step(state, sets, cfg, rng);
    CHECK(state.objective == count_consistent(sets, state.u, cfg.gamma));
    CHECK(state.best_objective >= state.objective);
    CHECK(state.best_objective >= prev_best);
    CHECK(state.best_objective == count_consistent(sets, state.best_u, cfg.gamma));
    CHECK(state.objective <= sets.size());
    CHECK(norm2(state.u) == doctest::Approx(1.0).epsilon(1e-12));
    prev_best = state.best_objective;
  }
  CHECK(count_consistent(sets, u, 0.0) == sets.size());

  const auto a = run_sa(sets, 3, cfg, 11);
  const auto b = run_sa(sets, 3, cfg, 11);
  CHECK(a.u_hat == b.u_hat);
  CHECK(norm2(a.u_hat) == doctest::Approx(1.0).epsilon(1e-9));

  SaConfig last = cfg;
  last.return_last = true;
  const auto c = run_sa(sets, 3, last, 11);
  CHECK(c.u_hat == c.final_state.u);
  CHECK(a.u_hat == a.final_state.best_u);
}

TEST_CASE("trace CSV") {
  const auto sets = clean_data({1.0, 0.0}, 5, 4);
  SaConfig cfg;
  cfg.iterations = 3;
  std::ostringstream os;
  write_sa_trace_csv(os, run_sa(sets, 2, cfg, 1));
  CHECK(os.str().rfind("step,objective,best_objective,eta,accepted\n0,", 0) == 0);
}
