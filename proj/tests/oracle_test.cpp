#include <doctest.h>

#include <cmath>

#include "tensoropt/problems.hpp"
#include "test_support.hpp"

using namespace tensoropt;

TEST_CASE("taylor model of a quadratic is exact") {
  // f(x) = x^2 in 1-D: bundle at x=1, model at y=3 with p=2, M=0 gives f(3).
  QuadraticProblem f(Vector::Constant(1, 2.0));
  Vector x(1);
  x << 1.0;
  auto b = evaluate(f, x, 2);
  Vector y(1);
  y << 3.0;
  CHECK(taylor_model_value(b, y, 2, 0.0) == doctest::Approx(9.0).epsilon(1e-12));
  // gradient of the exact model is f'(3) = 6
  CHECK(taylor_model_gradient(b, y, 2, 0.0)[0] ==
        doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("taylor model at the center returns the bundle data") {
  auto problem = synth_logreg(6, 30, 9);
  SplitMix64 rng(3);
  Vector x = rng.vector_symmetric(6);
  auto b = evaluate(*problem, x, 3);
  for (int p = 1; p <= 3; ++p) {
    CHECK(taylor_model_value(b, x, p, 7.0) == doctest::Approx(b.value));
    CHECK((taylor_model_gradient(b, x, p, 7.0) - b.gradient).norm() == 0.0);
  }
}

TEST_CASE("cubic taylor model of x^4/4 at x=1") {
  // Symbolic coefficients at x=1: f=1/4, f'=1, f''=3, f'''=6.
  // Model at y=2 (h=1), M=0: 1/4 + 1 + 3/2 + 1 = 3.75.
  PowerProblem f(1, 4);
  Vector x(1);
  x << 1.0;
  auto b = evaluate(f, x, 3);
  Vector y(1);
  y << 2.0;
  CHECK(taylor_model_value(b, y, 3, 0.0) ==
        doctest::Approx(3.75).epsilon(1e-12));

  // With M=6 the regularizer gradient adds (M/3!) h^3 = 1: 1+3+3+1 = 8.
  // Cross-checked against central differences of the model value below.
  const double g = taylor_model_gradient(b, y, 3, 6.0)[0];
  CHECK(g == doctest::Approx(8.0).epsilon(1e-12));
  auto model = [&](const Vector& v) { return taylor_model_value(b, v, 3, 6.0); };
  CHECK(g == doctest::Approx(testsupport::central_diff(model, y, 0, 1e-6))
                 .epsilon(1e-8));
}

TEST_CASE("model gradient matches finite differences of the model value") {
  HardFamilyProblem hf(4, 4, 3);
  SplitMix64 rng(11);
  Vector x = rng.vector_symmetric(4);
  auto b = evaluate(hf, x, 3);
  Vector y = rng.vector_symmetric(4);
  for (int p = 1; p <= 3; ++p) {
    const double M = 5.0;
    Vector g = taylor_model_gradient(b, y, p, M);
    auto model = [&](const Vector& v) { return taylor_model_value(b, v, p, M); };
    for (int i = 0; i < 4; ++i) {
      const double fd = testsupport::central_diff(model, y, i, 1e-6);
      CHECK(std::abs(g[i] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("polynomial exactness: model with matching degree reproduces f") {
  SUBCASE("quadratic with p=2") {
    QuadraticProblem f(Vector::LinSpaced(5, 1.0, 3.0));
    SplitMix64 rng(17);
    Vector x = rng.vector_symmetric(5);
    auto b = evaluate(f, x, 2);
    for (int trial = 0; trial < 20; ++trial) {
      Vector y = 3.0 * rng.vector_symmetric(5);
      const double exact = evaluate(f, y, 1).value;
      CHECK(taylor_model_value(b, y, 2, 0.0) ==
            doctest::Approx(exact).epsilon(1e-10));
    }
  }
  SUBCASE("cubic branch of |t|^3/3 with p=3") {
    // x^3/3 on the positive half-line is a cubic polynomial there.
    PowerProblem f(1, 3);
    Vector x(1);
    x << 2.0;
    auto b = evaluate(f, x, 3);
    SplitMix64 rng(18);
    for (int trial = 0; trial < 20; ++trial) {
      Vector y(1);
      y << 0.5 + 3.5 * rng.next_unit();
      const double exact = evaluate(f, y, 1).value;
      CHECK(taylor_model_value(b, y, 3, 0.0) ==
            doctest::Approx(exact).epsilon(1e-10));
    }
  }
}

TEST_CASE("eval validates order and finiteness") {
  QuadraticProblem f(3);
  CHECK_THROWS_AS(evaluate(f, Vector::Zero(3), 4), UnsupportedOrder);
  CHECK_THROWS_AS(evaluate(f, Vector::Zero(3), 0), UnsupportedOrder);
  Vector bad = Vector::Zero(3);
  bad[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(evaluate(f, bad, 1), NonFinite);
}

TEST_CASE("spec eval examples") {
  SUBCASE("logistic at zero") {
    auto lg = synth_logreg(10, 100, 42);
    auto b = evaluate(*lg, Vector::Zero(10), 1);
    CHECK(b.value == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  }
  SUBCASE("hard family at zero and at ones") {
    HardFamilyProblem hf(2, 2, 3);
    auto b0 = evaluate(hf, Vector::Zero(2), 1);
    CHECK(b0.value == 0.0);
    CHECK(b0.gradient[0] == -1.0);
    CHECK(b0.gradient[1] == 0.0);

    Vector ones = Vector::Ones(2);
    auto b1 = evaluate(hf, ones, 1);
    CHECK(b1.value == doctest::Approx(-0.75).epsilon(1e-14));
    CHECK(b1.gradient[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(b1.gradient[1] == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("derivative bundle invariants") {
  auto lg = synth_logreg(8, 40, 5);
  SplitMix64 rng(23);
  Vector x = rng.vector_symmetric(8);
  auto b = evaluate(*lg, x, 3);

  SUBCASE("hessian symmetric") {
    CHECK((b.hessian - b.hessian.transpose()).cwiseAbs().maxCoeff() <=
          1e-12 * std::max(1.0, b.hessian.cwiseAbs().maxCoeff()));
  }
  SUBCASE("third_dir homogeneous of degree 2") {
    Vector h = rng.vector_symmetric(8);
    for (double t : {0.5, 2.0, -3.0}) {
      Vector lhs = b.third_dir(t * h);
      Vector rhs = t * t * b.third_dir(h);
      CHECK((lhs - rhs).norm() <= 1e-10 * std::max(1.0, rhs.norm()));
    }
  }
}

TEST_CASE("finite difference report across problems") {
  SUBCASE("quadratic hessian at machine scale") {
    QuadraticProblem f(6);
    SplitMix64 rng(31);
    auto rep = finite_diff_report(f, rng.vector_symmetric(6), 2, 1e-5);
    CHECK(rep.hessian_vec_rel_err <= 1e-10);
  }
  SUBCASE("logistic synthetic n=10 d=100") {
    auto lg = synth_logreg(10, 100, 42);
    SplitMix64 rng(37);
    auto rep = finite_diff_report(*lg, rng.vector_symmetric(10), 3, 1e-5);
    CHECK(rep.gradient_rel_err <= 1e-5);
    CHECK(rep.hessian_vec_rel_err <= 1e-4);
    CHECK(rep.third_dir_rel_err <= 1e-4);
  }
  SUBCASE("hard family n=m=5") {
    HardFamilyProblem hf(5, 5, 3);
    SplitMix64 rng(41);
    auto rep = finite_diff_report(hf, rng.vector_symmetric(5), 3, 1e-5);
    CHECK(rep.gradient_rel_err <= 1e-5);
    CHECK(rep.hessian_vec_rel_err <= 1e-4);
    CHECK(rep.third_dir_rel_err <= 1e-4);
  }
}

TEST_CASE("oracle derivatives vs central differences at random points") {
  // 100 points per problem, the module-level tolerance contract.
  struct Case {
    const Problem* problem;
    int order;
  };
  HardFamilyProblem hf(5, 3, 3);
  QuadraticProblem quad(5);
  PowerProblem quartic(5, 4);
  auto lg = synth_logreg(5, 25, 77);
  std::vector<Case> cases = {
      {&hf, 3}, {&quad, 3}, {&quartic, 3}, {lg.get(), 3}};

  SplitMix64 rng(101);
  for (const auto& c : cases) {
    double worst_g = 0, worst_h = 0, worst_t = 0;
    for (int i = 0; i < 25; ++i) {
      Vector x = rng.vector_symmetric(c.problem->dimension());
      auto rep = finite_diff_report(*c.problem, x, c.order, 1e-5,
                                    rng.next_u64(), 2);
      worst_g = std::max(worst_g, rep.gradient_rel_err);
      worst_h = std::max(worst_h, rep.hessian_vec_rel_err);
      worst_t = std::max(worst_t, rep.third_dir_rel_err);
    }
    CHECK(worst_g <= 1e-5);
    CHECK(worst_h <= 1e-4);
    CHECK(worst_t <= 1e-4);
  }
}
