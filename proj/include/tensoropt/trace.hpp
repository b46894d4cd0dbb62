#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tensoropt/core.hpp"

namespace tensoropt {

/// One accepted iteration of the extragradient loop, with the points needed
/// by the theory checker. Index k is 0-based: the record holds the step that
/// produced y^{k+1} from x^k.
struct IterationRecord {
  int k = 0;
  double L = 0.0;       // accepted L_k
  double a = 0.0;       // a_{k+1}
  double A_next = 0.0;  // A_{k+1}
  int probes = 0;
  double rho = 0.0;
  bool relaxed = false;  // accepted outside [1/2,1] under the fallback window
  Vector x;              // x^k
  Vector y_next;         // y^{k+1}
  Vector u_next;         // u^{k+1}
  double f_y = 0.0;      // f(y^{k+1})
  double grad_norm = 0.0;
  double step_norm = 0.0;        // |y^{k+1} - x^k|
  double model_grad_norm = 0.0;  // inner residual of the tensor step
  double cert_grad_norm = 0.0;   // |grad F_{L,x^k}(y^{k+1})|
  int inner_iters = 0;
  double time_sec = 0.0;
};

enum class RunStatus {
  ReachedTarget,
  MaxIters,
  ConvergedAtCenter,
  WallClock,
};

struct RunTrace {
  Vector x0;  // u^0 = y^0
  std::vector<IterationRecord> records;
  RunStatus status = RunStatus::MaxIters;
};

/// Persisted CSV row. Header is fixed and versioned:
///   k,stage,time_sec,f,gap,grad_norm,A_k,a_k,L_k,rho,probes,inner_iters
/// Row k holds the state after k iterations; the L/a/rho columns describe the
/// step that produced y^k. Missing values (no reference gap, methods without
/// a line search) serialize as empty fields.
struct TraceRecord {
  int k = 0;
  int stage = 0;
  double time_sec = 0.0;
  double f = 0.0;
  std::optional<double> gap;
  double grad_norm = 0.0;
  std::optional<double> A;
  std::optional<double> a;
  std::optional<double> L;
  std::optional<double> rho;
  int probes = 0;
  int inner_iters = 0;
};

extern const char* const kTraceCsvHeader;

std::string trace_csv_line(const TraceRecord& row);
void write_trace_csv(const std::string& path,
                     const std::vector<TraceRecord>& rows);
std::vector<TraceRecord> read_trace_csv(const std::string& path);

/// Normalized optimality gap: (f - f*)/|f*| when |f*| > 1e-12, else absolute.
double normalized_gap(double f, double f_star);

/// Flattens a rich run trace into CSV rows (stage 0 unless told otherwise).
std::vector<TraceRecord> to_trace_records(
    const RunTrace& trace, std::optional<double> f_star, int stage = 0);

/// Incremental CSV writer; rows are flushed as they are appended so a wall
/// clock abort still leaves a readable prefix on disk.
class TraceWriter {
 public:
  explicit TraceWriter(const std::string& path);
  ~TraceWriter();
  void append(const TraceRecord& row);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tensoropt
