#include "tensoropt/hpe.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <sstream>

namespace tensoropt {

Coefficients step_coefficients(double A, double L) {
  if (!(L > 0)) throw ConfigError("coefficient step requires L > 0");
  if (A < 0) throw ConfigError("A must be non-negative");
  const double invL = 1.0 / L;
  Coefficients c;
  c.a = 0.5 * (invL + std::sqrt(invL * invL + 4.0 * A * invL));
  c.A_next = A + c.a;
  assert(std::abs(L * c.a * c.a - c.A_next) <= 1e-12 * c.A_next);
  return c;
}

Vector interpolate_x(const HpeState& state, double a, double A_next) {
  if (!(A_next > 0)) throw ConfigError("interpolation requires A_next > 0");
  if (state.A == 0.0) return state.u;
  return (state.A / A_next) * state.y + (a / A_next) * state.u;
}

Vector extragradient_update(const HpeState& state, double a,
                            const Vector& grad_y_next) {
  if (!grad_y_next.allFinite()) throw NonFinite("non-finite gradient");
  return state.u - a * grad_y_next;
}

TheoryReport check_theory(const RunTrace& trace, const Vector& x_star,
                          double f_star, double tol) {
  TheoryReport rep;
  const double R2 = (trace.x0 - x_star).squaredNorm();

  // Allowance for inexact tensor steps, grown with the prefix length.
  double max_res = 0.0;
  double max_step = 0.0;

  double step_sum = 0.0;  // sum A_k L_{k-1} |y^k - x^{k-1}|^2
  double inv_sqrt_sum = 0.0;

  auto record_violation = [&](const std::string& what, int k, double slack) {
    if (rep.passed) {
      std::ostringstream os;
      os << what << " violated at iteration " << k << " (slack " << slack
         << ")";
      rep.first_failure = os.str();
      rep.passed = false;
    }
    rep.worst_violation = std::min(rep.worst_violation, slack);
  };

  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const IterationRecord& rec = trace.records[i];
    const int N = int(i) + 1;
    max_res = std::max(max_res, rec.model_grad_norm);
    max_step = std::max(max_step, rec.step_norm);
    const double allowance =
        N * max_res * max_step * std::max(1.0, std::sqrt(R2));

    step_sum += rec.A_next * rec.L * rec.step_norm * rec.step_norm;
    inv_sqrt_sum += 1.0 / std::sqrt(rec.L);

    const double gap = rec.f_y - f_star;
    const double u_dist2 = (rec.u_next - x_star).squaredNorm();

    const double lhs_energy = 0.5 * u_dist2 + rec.A_next * gap + 0.25 * step_sum;
    const double energy_slack =
        0.5 * R2 * (1 + tol) + allowance - lhs_energy;
    if (energy_slack < 0) record_violation("energy inequality", N, energy_slack);

    const double gap_slack = R2 / (2 * rec.A_next) * (1 + tol) +
                             allowance - gap;
    if (gap_slack < 0) record_violation("gap bound", N, gap_slack);

    const double radius_slack =
        std::sqrt(R2) * (1 + tol) + allowance - std::sqrt(u_dist2);
    if (radius_slack < 0) record_violation("radius bound", N, radius_slack);

    const double step_sum_slack = 2 * R2 * (1 + tol) + allowance - step_sum;
    if (step_sum_slack < 0)
      record_violation("weighted step-sum bound", N, step_sum_slack);

    const double growth_lower = 0.25 * inv_sqrt_sum * inv_sqrt_sum;
    const double growth_slack = rec.A_next - growth_lower * (1 - tol);
    if (growth_slack < 0)
      record_violation("coefficient growth", N, growth_slack);

    rep.energy_slacks.push_back(energy_slack);
    rep.step_sum_slacks.push_back(step_sum_slack);
    rep.growth_slacks.push_back(growth_slack);

    if (i + 1 == trace.records.size()) {
      rep.energy_slack = energy_slack;
      rep.gap_slack = gap_slack;
      rep.radius_slack = radius_slack;
      rep.step_sum_slack = step_sum_slack;
      rep.growth_slack = growth_slack;
    }
  }
  return rep;
}

void assert_theory(const RunTrace& trace, const Vector& x_star, double f_star,
                   double tol) {
  TheoryReport rep = check_theory(trace, x_star, f_star, tol);
  if (!rep.passed) throw TheoryViolation(rep.first_failure);
}

RateReport check_rate(const RunTrace& trace, int p, double M_p, double R,
                      double f_star, double c) {
  RateReport rep;
  rep.worst_rate_margin = std::numeric_limits<double>::infinity();
  rep.worst_growth_margin = std::numeric_limits<double>::infinity();
  double fact = 1.0;
  for (int i = 2; i <= p; ++i) fact *= i;
  const double exponent = 0.5 * (3 * p + 1);
  const double theta = fact / (4.0 * (p + 1) * M_p);

  auto fail = [&](const std::string& what, int k) {
    if (rep.passed) {
      rep.first_failure = what + " violated at iteration " + std::to_string(k);
      rep.passed = false;
    }
  };

  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const IterationRecord& rec = trace.records[i];
    const int N = int(i) + 1;

    const double gap = rec.f_y - f_star;
    const double rate_bound =
        c * M_p * std::pow(R, p + 1) / std::pow(double(N), exponent);
    if (gap > 0) {
      const double margin = rate_bound / gap - 1.0;
      rep.worst_rate_margin = std::min(rep.worst_rate_margin, margin);
      if (margin < 0) fail("objective rate bound", N);
    }

    const double growth_bound =
        std::pow(double(N), exponent) / (c * M_p * std::pow(R, p - 1));
    const double growth_margin = rec.A_next / growth_bound - 1.0;
    rep.worst_growth_margin = std::min(rep.worst_growth_margin, growth_margin);
    if (growth_margin < 0) fail("coefficient growth bound", N);

    if (!rec.relaxed && (rec.rho < 0.5 - 1e-12 || rec.rho > 1.0 + 1e-12))
      fail("acceptance window", N);

    // theta follows from rho >= 1/2, so relaxed acceptances are exempt
    if (!rec.relaxed &&
        std::pow(rec.step_norm, p - 1) / rec.L < theta * (1 - 1e-9))
      fail("theta bound", N);

    const double admission =
        0.5 * rec.L * rec.step_norm * (rec.relaxed ? 1.1 : 1.0);
    if (rec.cert_grad_norm > admission + rec.model_grad_norm + 1e-12)
      fail("admission certificate", N);
  }
  return rep;
}

}  // namespace tensoropt
