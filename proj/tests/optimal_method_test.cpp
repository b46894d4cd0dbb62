#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tensoropt/optimal_method.hpp"
#include "tensoropt/problems.hpp"
#include "tensoropt/reference.hpp"
#include "tensoropt/restart.hpp"

using namespace tensoropt;

TEST_CASE("acceptance ratio arithmetic") {
  // p=1: rho = 4 M_1 / L, independent of the step norm.
  CHECK(acceptance_ratio(0.0, 8.0, 1, 1.0) == doctest::Approx(0.5));
  CHECK(acceptance_ratio(3.7, 8.0, 1, 1.0) == doctest::Approx(0.5));
  // p=3, M_p=6, |h|=1: rho = 2*4*6/(6 L).
  CHECK(acceptance_ratio(1.0, 8.0, 3, 6.0) == doctest::Approx(1.0));
  CHECK(acceptance_ratio(1.0, 20.0, 3, 6.0) == doctest::Approx(0.4));
}

TEST_CASE("probe on a quadratic with p=1 has state-independent rho") {
  QuadraticProblem quad(3);
  MethodConfig cfg;
  cfg.p = 1;
  HpeState fresh;
  fresh.u = Vector::Ones(3);
  fresh.y = Vector::Ones(3);
  HpeState warm = fresh;
  warm.A = 2.0;
  warm.y = Vector::Constant(3, 0.25);
  for (double L : {2.0, 4.0, 8.0}) {
    const double expected = 4.0 * 1.0 / L;
    CHECK(probe(quad, fresh, L, cfg).rho == doctest::Approx(expected));
    CHECK(probe(quad, warm, L, cfg).rho == doctest::Approx(expected));
  }
}

TEST_CASE("probe rho decreases across the L grid (regression fixture)") {
  // Recorded once from a 2-iteration warmup on the n=m=3 instance.
  HardFamilyProblem hf(3, 3, 3);
  MethodConfig cfg;
  cfg.p = 3;
  StopCriteria stop;
  stop.max_iters = 2;
  RunTrace warmup = run_optimal(hf, Vector::Zero(3), stop, cfg);
  REQUIRE(warmup.records.size() == 2);
  HpeState state;
  state.k = 2;
  state.A = warmup.records.back().A_next;
  state.y = warmup.records.back().y_next;
  state.u = warmup.records.back().u_next;

  const double expected[] = {5.3786353639575717, 2.0506671317289151,
                             0.58268315779654578, 0.1099395226399542,
                             0.015917121269707856};
  const double grid[] = {1, 2, 4, 8, 16};
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 5; ++i) {
    const double rho = probe(hf, state, grid[i], cfg).rho;
    CHECK(rho == doctest::Approx(expected[i]).epsilon(1e-9));
    CHECK(rho < prev);
    prev = rho;
  }
}

TEST_CASE("find_L") {
  SUBCASE("p=1 accepts the first probe at L = 8 M_1") {
    QuadraticProblem quad(3);
    MethodConfig cfg;
    cfg.p = 1;
    cfg.line_search.L_init = 8.0;
    HpeState state;
    state.u = Vector::Ones(3);
    state.y = Vector::Ones(3);
    auto res = find_L(quad, state, cfg, cfg.line_search.L_init);
    CHECK(res.outcome == LineSearchOutcome::Accepted);
    CHECK(res.record.probes == 1);
    CHECK(res.record.rho == doctest::Approx(0.5));
  }
  SUBCASE("p=1 accepts in one probe anywhere inside the window") {
    QuadraticProblem quad(3);
    MethodConfig cfg;
    cfg.p = 1;
    HpeState state;
    state.u = Vector::Ones(3);
    state.y = Vector::Ones(3);
    for (double L : {4.0, 5.0, 6.5, 8.0}) {
      auto res = find_L(quad, state, cfg, L);
      CHECK(res.record.probes <= 2);
      CHECK(res.record.rho >= 0.5);
      CHECK(res.record.rho <= 1.0);
    }
  }
  SUBCASE("vanishing gradient at the center is reported as convergence") {
    QuadraticProblem quad(3);
    MethodConfig cfg;
    cfg.p = 1;
    HpeState state;
    state.u = Vector::Zero(3);
    state.y = Vector::Zero(3);
    auto res = find_L(quad, state, cfg, 1.0);
    CHECK(res.outcome == LineSearchOutcome::ConvergedAtCenter);
  }
  SUBCASE("a starved probe budget raises LineSearchExhausted") {
    HardFamilyProblem hf(4, 4, 3);
    MethodConfig cfg;
    cfg.p = 3;
    cfg.line_search.max_probes = 4;
    HpeState state;
    state.u = Vector::Zero(4);
    state.y = Vector::Zero(4);
    // warm L nine decades off: four shrink probes cannot reach the window
    CHECK_THROWS_AS(find_L(hf, state, cfg, 1e9), LineSearchExhausted);
  }
}

TEST_CASE("run on a quadratic satisfies the gap and growth shapes") {
  QuadraticProblem quad(10);
  Vector x0 = Vector::Ones(10);
  MethodConfig cfg;
  cfg.p = 1;
  cfg.line_search.L_init = 8.0;
  StopCriteria stop;
  stop.max_iters = 60;
  RunTrace tr = run_optimal(quad, x0, stop, cfg, 0.0);
  const double R2 = x0.squaredNorm();
  const double c1 = constant_c(1);
  for (std::size_t i = 0; i < tr.records.size(); ++i) {
    const auto& rec = tr.records[i];
    const int N = int(i) + 1;
    CHECK(rec.f_y <= R2 / (2 * rec.A_next) * (1 + 1e-8));
    CHECK(rec.A_next >= double(N) * N / (c1 * 1.0) * (1 - 1e-9));
  }
}

TEST_CASE("run from a stationary start returns immediately") {
  QuadraticProblem quad(4);
  MethodConfig cfg;
  cfg.p = 1;
  StopCriteria stop;
  stop.max_iters = 10;
  RunTrace tr = run_optimal(quad, Vector::Zero(4), stop, cfg);
  CHECK(tr.records.empty());
  CHECK(tr.status == RunStatus::ConvergedAtCenter);
}

TEST_CASE("hard family n=m=5: window, rate and certificate over 50 iters") {
  HardFamilyProblem hf(5, 5, 3);
  ReferenceOptions ropt;
  ropt.p = 3;
  auto ref = compute_reference(hf, Vector::Zero(5), ropt);
  MethodConfig cfg;
  cfg.p = 3;
  StopCriteria stop;
  stop.max_iters = 50;
  RunTrace tr = run_optimal(hf, Vector::Zero(5), stop, cfg, ref.f_star);

  for (const auto& rec : tr.records) {
    CHECK(!rec.relaxed);
    CHECK(rec.rho >= 0.5);
    CHECK(rec.rho <= 1.0);
  }
  const double R = (tr.x0 - ref.x_star).norm();
  auto rate = check_rate(tr, 3, hf.lipschitz_bound(3), R, ref.f_star,
                         constant_c(3));
  CHECK(rate.passed);
  CHECK(rate.worst_rate_margin >= 0);
  CHECK(rate.worst_growth_margin >= 0);
}

TEST_CASE("gap target reached within 100 iterations on the n=m=5 instance") {
  HardFamilyProblem hf(5, 5, 3);
  ReferenceOptions ropt;
  ropt.p = 3;
  auto ref = compute_reference(hf, Vector::Zero(5), ropt);
  MethodConfig cfg;
  cfg.p = 3;
  StopCriteria stop;
  stop.max_iters = 100;
  stop.target_gap = 1e-10;
  RunTrace tr = run_optimal(hf, Vector::Zero(5), stop, cfg, ref.f_star);
  CHECK(tr.status == RunStatus::ReachedTarget);
  CHECK(tr.records.size() <= 100);
  CHECK(normalized_gap(tr.records.back().f_y, ref.f_star) <= 1e-10);
}

TEST_CASE("warm start keeps the probe count low") {
  HardFamilyProblem hf(10, 10, 3);
  MethodConfig cfg;
  cfg.p = 3;
  StopCriteria stop;
  stop.max_iters = 40;
  RunTrace tr = run_optimal(hf, Vector::Zero(10), stop, cfg);
  std::vector<int> probes;
  for (std::size_t i = 3; i < tr.records.size(); ++i)
    probes.push_back(tr.records[i].probes);
  REQUIRE(!probes.empty());
  std::sort(probes.begin(), probes.end());
  const int median = probes[probes.size() / 2];
  CHECK(median <= 6);
}
