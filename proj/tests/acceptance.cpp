// Acceptance suite: runs every contract the library ships with at its stated
// tolerance and prints one PASS/FAIL line per criterion. Exit code is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <cstdarg>
#include <vector>
#include <algorithm>
#include <fstream>

#include "tensoropt/baselines.hpp"
#include "tensoropt/problems.hpp"
#include "tensoropt/reference.hpp"
#include "tensoropt/restart.hpp"
#include "tensoropt/run_config.hpp"
#include "test_support.hpp"

using namespace tensoropt;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int criterion, const std::string& what, bool pass,
            const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL",
              criterion, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* format, ...) {
  char buf[256];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// Line-search statistics pooled across every optimal-method run below.
struct WindowStats {
  long total = 0;
  long in_window = 0;
  long relaxed = 0;
  std::vector<int> probes_after_warmup;

  void absorb(const RunTrace& trace) {
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
      const auto& rec = trace.records[i];
      ++total;
      if (rec.relaxed) ++relaxed;
      else if (rec.rho >= 0.5 && rec.rho <= 1.0) ++in_window;
      if (i >= 3) probes_after_warmup.push_back(rec.probes);
    }
  }
};

WindowStats window_stats;

}  // namespace

int main() {
  const auto suite_start = Clock::now();

  // ---- criteria 1 and 2: rate and growth bounds on hard family n=m=5 ----
  {
    const auto t0 = Clock::now();
    HardFamilyProblem hf(5, 5, 3);
    const double mp = hf.lipschitz_bound(3);
    ReferenceOptions ropt;
    ropt.p = 3;
    const ReferenceSolution ref = compute_reference(hf, Vector::Zero(5), ropt);

    MethodConfig cfg;
    cfg.p = 3;
    StopCriteria stop;
    stop.max_iters = 50;
    RunTrace run = run_optimal(hf, Vector::Zero(5), stop, cfg, ref.f_star);
    window_stats.absorb(run);

    const double R = (run.x0 - ref.x_star).norm();
    const double c = constant_c(3);
    const RateReport rate = check_rate(run, 3, mp, R, ref.f_star, c);
    const double elapsed = seconds_since(t0);

    report(1, "worst-case rate bound, hard family n=m=5, N in [1,50]",
           run.records.size() == 50 && rate.worst_rate_margin >= 0 &&
               elapsed < 60.0,
           fmt("worst margin %.2e, %.1f s", rate.worst_rate_margin, elapsed));
    report(2, "polynomial coefficient growth on the same run",
           rate.worst_growth_margin >= 0,
           fmt("worst margin %.2e", rate.worst_growth_margin));
  }

  // ---- criterion 3: HPE inequalities on three problems ----
  {
    const auto t0 = Clock::now();
    bool all = true;
    std::ostringstream detail;

    {
      QuadraticProblem quad(20);
      MethodConfig cfg;
      cfg.p = 1;
      cfg.line_search.L_init = 8.0;
      StopCriteria stop;
      stop.max_iters = 60;
      RunTrace run = run_optimal(quad, Vector::Ones(20), stop, cfg, 0.0);
      window_stats.absorb(run);
      const auto rep = check_theory(run, Vector::Zero(20), 0.0, 1e-8);
      all = all && rep.passed;
      detail << "quadratic " << (rep.passed ? "ok" : "VIOLATED");
    }
    {
      HardFamilyProblem hf(5, 5, 3);
      ReferenceOptions ropt;
      ropt.p = 3;
      const ReferenceSolution ref =
          compute_reference(hf, Vector::Zero(5), ropt);
      MethodConfig cfg;
      cfg.p = 3;
      StopCriteria stop;
      stop.max_iters = 50;
      RunTrace run = run_optimal(hf, Vector::Zero(5), stop, cfg, ref.f_star);
      window_stats.absorb(run);
      const auto rep = check_theory(run, ref.x_star, ref.f_star, 1e-8);
      all = all && rep.passed;
      detail << ", hard " << (rep.passed ? "ok" : "VIOLATED");
    }
    {
      auto lg = synth_logreg(10, 100, 42);
      MethodConfig cfg;
      cfg.p = 3;
      // reference point: a much longer run of the same method
      StopCriteria long_stop;
      long_stop.max_iters = 250;
      RunTrace ref_run = run_optimal(*lg, Vector::Zero(10), long_stop, cfg);
      const Vector x_ref = ref_run.records.back().y_next;
      const double f_ref = ref_run.records.back().f_y;

      StopCriteria stop;
      stop.max_iters = 50;
      RunTrace run = run_optimal(*lg, Vector::Zero(10), stop, cfg, f_ref);
      window_stats.absorb(run);
      const auto rep = check_theory(run, x_ref, f_ref, 1e-8);
      all = all && rep.passed;
      detail << ", logistic " << (rep.passed ? "ok" : "VIOLATED");
    }
    report(3, "extragradient energy inequalities on three problems", all,
           detail.str() + fmt(", %.1f s", seconds_since(t0)));
  }

  // ---- criterion 5 first (it feeds the window stats of criterion 4) ----
  int crit5_optimal_iters = 0;
  long crit5_accel_iters = 0;
  bool crit5_pass = false;
  double crit5_elapsed = 0;
  {
    const auto t0 = Clock::now();
    HardFamilyProblem hf(10, 10, 3);
    ReferenceOptions ropt;
    ropt.p = 3;
    const ReferenceSolution ref = compute_reference(hf, Vector::Zero(10), ropt);

    MethodConfig cfg;
    cfg.p = 3;
    StopCriteria stop;
    stop.max_iters = 2000;
    stop.target_gap = 1e-10;
    RunTrace opt = run_optimal(hf, Vector::Zero(10), stop, cfg, ref.f_star);
    window_stats.absorb(opt);
    crit5_optimal_iters = int(opt.records.size());

    BaselineConfig bc;
    bc.p = 3;
    bc.max_iters = 300000;
    bc.target_gap = 1e-10;
    RunTrace acc = run_accelerated(hf, Vector::Zero(10), bc, ref.f_star);
    crit5_accel_iters = long(acc.records.size());
    const bool accel_reached = acc.status == RunStatus::ReachedTarget;

    crit5_elapsed = seconds_since(t0);
    crit5_pass = opt.status == RunStatus::ReachedTarget &&
                 10 * crit5_optimal_iters <= crit5_accel_iters &&
                 accel_reached && crit5_elapsed < 300.0;
  }

  // ---- criterion 4: line-search window statistics ----
  {
    const double frac_relaxed =
        window_stats.total ? double(window_stats.relaxed) / window_stats.total
                           : 0.0;
    const double frac_in =
        window_stats.total ? double(window_stats.in_window) / window_stats.total
                           : 0.0;
    std::vector<int> probes = window_stats.probes_after_warmup;
    std::sort(probes.begin(), probes.end());
    const int median =
        probes.empty() ? 0 : probes[probes.size() / 2];
    report(4, "line-search window: rho in [1/2,1] on >= 99% of iterations",
           frac_in >= 0.99 && frac_relaxed <= 0.01 && median <= 6,
           fmt("in-window %.2f%%, relaxed %.2f%%, median probes %d",
               100 * frac_in, 100 * frac_relaxed, median));
  }

  report(5, "optimal method >= 10x fewer iterations than accelerated (n=m=10)",
         crit5_pass,
         fmt("optimal %d vs accelerated %ld, %.1f s", crit5_optimal_iters,
             crit5_accel_iters, crit5_elapsed));

  // ---- criterion 6: restart halving on the separable quartic ----
  {
    const auto t0 = Clock::now();
    PowerProblem quartic(5, 4);
    ReferenceOptions ropt;
    ropt.p = 3;
    const ReferenceSolution ref =
        compute_reference(quartic, Vector::Ones(5), ropt);

    const double sigma =
        estimate_sigma_q(quartic, 4, PairSampler{2024, 1.0}, 2000);
    Vector z0 = Vector::Ones(5);
    const double delta0 =
        (evaluate(quartic, z0, 1).value - ref.f_star) * 1.01;

    RestartConfig rc;
    rc.method.p = 3;
    rc.q = 4;
    rc.sigma_q = sigma;
    rc.epsilon = delta0 * std::exp2(-16.0);
    const RestartTrace tr = run_restarted(quartic, z0, delta0, rc, ref.f_star);
    const RestartReport rep = check_restart(tr, ref.x_star, ref.f_star);

    bool constant_budget = true;
    for (const auto& st : tr.stages)
      constant_budget = constant_budget && st.budget == tr.stages[0].budget;

    report(6, "restart halving over 16 stages, constant N_k, step budget",
           tr.stages.size() == 16 && rep.halving_ok && rep.distance_ok &&
               rep.cumulative_ok && constant_budget,
           fmt("sigma_4 %.4f, N_k %d, steps %d <= bound %.1f, %.1f s", sigma,
               tr.stages.empty() ? 0 : tr.stages[0].budget,
               rep.cumulative_steps, rep.cumulative_bound,
               seconds_since(t0)));
  }

  // ---- criterion 7: subproblem correctness ----
  {
    const auto t0 = Clock::now();
    SplitMix64 rng(7007);
    bool p1_ok = true, p2_ok = true, p3_ok = true;
    double p2_worst = 0.0, p3_worst = 0.0;

    // p=1 closed form, 200 random bundles with prox terms
    for (int i = 0; i < 200; ++i) {
      const int n = 2 + int(rng.next_u64() % 6);
      DerivativeBundle b;
      b.center = rng.vector_symmetric(n);
      b.value = rng.next_symmetric();
      b.gradient = 3.0 * rng.vector_symmetric(n);
      b.order = 1;
      TensorStepConfig cfg;
      cfg.p = 1;
      cfg.M = 0.5 + rng.next_unit() * 5;
      cfg.prox_coefficient = rng.next_unit() * 3;
      Vector z = rng.vector_symmetric(n);
      if (cfg.prox_coefficient > 0) cfg.prox_center = z;
      const TensorStepResult r = step_p1(b, cfg);
      for (int j = 0; j < n; ++j) {
        const long double g =
            (long double)(b.gradient[j]) +
            (long double)(cfg.prox_coefficient) * (b.center[j] - z[j]);
        const long double expect =
            b.center[j] - g / ((long double)(cfg.M) + cfg.prox_coefficient);
        p1_ok = p1_ok && std::abs(double(expect) - r.y[j]) <=
                             1e-14 * std::max(1.0, std::abs(double(expect)));
      }
    }

    // p=2 secular solve vs value-only grid refinement, 200 instances
    for (int i = 0; i < 200; ++i) {
      const int n = i < 150 ? 2 : 5;
      Matrix A(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) A(r, c) = rng.next_symmetric();
      DerivativeBundle b;
      b.center = Vector::Zero(n);
      b.value = 0.0;
      b.gradient = rng.vector_symmetric(n);
      b.hessian = A.transpose() * A + 0.1 * Matrix::Identity(n, n);
      b.order = 2;
      const double M = 1.0;
      TensorStepConfig cfg;
      cfg.p = 2;
      cfg.M = M;
      const TensorStepResult r = step_p2(b, cfg);

      auto model = [&](const Vector& h) {
        return b.gradient.dot(h) + 0.5 * h.dot(b.hessian * h) +
               M / 6.0 * std::pow(h.norm(), 3);
      };
      const double r0 = std::sqrt(2 * b.gradient.norm() / M) * 1.05 + 1e-9;
      const Vector h_star = testsupport::grid_refine(
          model, Vector::Zero(n), r0, 7, n == 2 ? 60 : 45);
      const double err = (r.y - h_star).norm();
      p2_worst = std::max(p2_worst, err);
      p2_ok = p2_ok && err <= 1e-6;
    }

    // p=3 residual certificates on 200 hard-family instances
    {
      HardFamilyProblem hf(5, 5, 3);
      const double M = 3 * hf.lipschitz_bound(3);
      for (int i = 0; i < 200; ++i) {
        Vector x = rng.vector_symmetric(5);
        TensorStepConfig cfg;
        cfg.p = 3;
        cfg.M = M;
        cfg.inner_tol = 1e-9;
        cfg.inner_max_iters = 300;
        const TensorStepResult r = step_p3(hf, x, cfg);
        p3_worst = std::max(p3_worst, r.model_grad_norm);
        p3_ok = p3_ok && r.model_grad_norm <= 1e-9;
      }
    }

    report(7, "subproblem solvers: p=1 exact, p=2 vs grid oracle, p=3 residual",
           p1_ok && p2_ok && p3_ok,
           fmt("p2 worst |dy| %.1e, p3 worst residual %.1e, %.1f s", p2_worst,
               p3_worst, seconds_since(t0)));
  }

  // ---- criterion 8: oracle correctness and Lipschitz bounds ----
  {
    const auto t0 = Clock::now();
    SplitMix64 rng(8008);
    bool fd_ok = true;

    HardFamilyProblem hf(5, 5, 3);
    QuadraticProblem quad(8);
    PowerProblem quartic(6, 4);
    auto lg = synth_logreg(5, 30, 99);
    const Problem* problems[] = {&hf, &quad, &quartic, lg.get()};
    for (const Problem* prob : problems) {
      for (int i = 0; i < 100; ++i) {
        Vector x = rng.vector_symmetric(prob->dimension());
        const auto rep =
            finite_diff_report(*prob, x, prob->max_order(), 1e-5,
                               rng.next_u64(), 2);
        fd_ok = fd_ok && rep.gradient_rel_err <= 1e-5 &&
                rep.hessian_vec_rel_err <= 1e-4 &&
                rep.third_dir_rel_err <= 1e-4;
      }
    }

    // Lipschitz bounds via directional probes on 10^4 pairs, spread over
    // the problem/order roster.
    bool lip_ok = true;
    double lip_worst_ratio = 0.0;
    auto sample_pairs = [&](const Problem& prob, int p, int count) {
      const double bound = prob.lipschitz_bound(p);
      const int n = prob.dimension();
      for (int i = 0; i < count; ++i) {
        Vector x = rng.vector_symmetric(n);
        Vector y = rng.vector_symmetric(n);
        const double dist = (x - y).norm();
        if (dist < 1e-9) continue;
        double diff = 0.0;
        if (p == 1) {
          diff = (evaluate(prob, x, 1).gradient - evaluate(prob, y, 1).gradient)
                     .norm();
        } else if (p == 2) {
          Vector v = rng.vector_symmetric(n);
          v.normalize();
          diff = ((evaluate(prob, x, 2).hessian -
                   evaluate(prob, y, 2).hessian) *
                  v)
                     .norm();
        } else {
          Vector h = rng.vector_symmetric(n);
          h.normalize();
          diff = (evaluate(prob, x, 3).third_dir(h) -
                  evaluate(prob, y, 3).third_dir(h))
                     .norm();
        }
        const double ratio = diff / (bound * dist);
        lip_worst_ratio = std::max(lip_worst_ratio, ratio);
        lip_ok = lip_ok && ratio <= 1 + 1e-6;
      }
    };
    sample_pairs(hf, 3, 2500);
    sample_pairs(*lg, 2, 2500);
    sample_pairs(*lg, 3, 2500);
    sample_pairs(quartic, 3, 1500);
    sample_pairs(quad, 1, 1000);

    report(8, "oracle derivatives vs finite differences; Lipschitz bounds",
           fd_ok && lip_ok,
           fmt("worst bound utilization %.3f, %.1f s", lip_worst_ratio,
               seconds_since(t0)));
  }

  // ---- criterion 9: plain vs accelerated for the first m iterations ----
  {
    const auto t0 = Clock::now();
    HardFamilyProblem hf(20, 10, 3);
    BaselineConfig bc;
    bc.p = 3;
    bc.max_iters = 10;
    const RunTrace plain = run_plain(hf, Vector::Zero(20), bc);
    const RunTrace accel = run_accelerated(hf, Vector::Zero(20), bc);
    bool lead = plain.records.size() == 10 && accel.records.size() == 10;
    for (int k = 0; lead && k < 10; ++k)
      lead = plain.records[k].f_y <= accel.records[k].f_y + 1e-12;
    report(9, "plain tensor method leads accelerated for k <= m (n=20, m=10)",
           lead, fmt("%.1f s", seconds_since(t0)));
  }

  // ---- criterion 10: constant table ----
  {
    const double c1 = constant_c(1);
    const double c2 = constant_c(2);
    const double c3 = constant_c(3);
    const double e1 = 32.0;
    const double e2 = double(exp2l(31.0L / 4.0L) * 3.0L / 2.0L);
    const double e3 = double(8192.0L * 4.0L / 6.0L);
    const bool pass = std::abs(c1 - e1) <= 1e-9 * e1 &&
                      std::abs(c2 - e2) <= 1e-9 * e2 &&
                      std::abs(c3 - e3) <= 1e-9 * e3;
    report(10, "constant table c(p) for p = 1,2,3", pass,
           fmt("c = 32, %.2f, %.3f", c2, c3));
  }

  // ---- criterion 11: determinism and persistence ----
  {
    const auto t0 = Clock::now();
    auto render = []() {
      auto lg = synth_logreg(8, 60, 13);
      MethodConfig cfg;
      cfg.p = 3;
      StopCriteria stop;
      stop.max_iters = 20;
      RunTrace tr = run_optimal(*lg, Vector::Zero(8), stop, cfg);
      std::ostringstream os;
      for (const auto& row : to_trace_records(tr, std::nullopt)) {
        TraceRecord masked = row;
        masked.time_sec = 0.0;
        os << trace_csv_line(masked) << '\n';
      }
      return os.str();
    };
    const bool deterministic = render() == render();

    auto lg = synth_logreg(7, 50, 77);
    const std::string path = "/tmp/tensoropt_accept_roundtrip.libsvm";
    write_libsvm(*lg, path);
    auto back = load_libsvm(path);
    const std::string path2 = path + ".2";
    write_libsvm(*back, path2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    const bool lossless = s1.str() == s2.str() && back->sample_count() == 50 &&
                          back->dimension() == 7 &&
                          back->features() == lg->features() &&
                          back->labels() == lg->labels();

    report(11, "determinism (time column excluded) and libsvm round trip",
           deterministic && lossless, fmt("%.1f s", seconds_since(t0)));
  }

  std::printf("%d/11 criteria passed in %.1f s\n", 11 - failures,
              seconds_since(suite_start));
  return failures;
}
