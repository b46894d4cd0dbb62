#include "tensoropt/trace.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace tensoropt {

const char* const kTraceCsvHeader =
    "k,stage,time_sec,f,gap,grad_norm,A_k,a_k,L_k,rho,probes,inner_iters";

namespace {

std::string opt_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::optional<double> parse_opt(const std::string& field, int lineno) {
  if (field.empty()) return std::nullopt;
  try {
    return std::stod(field);
  } catch (const std::exception&) {
    throw ParseError("trace line " + std::to_string(lineno) +
                     ": bad number '" + field + "'");
  }
}

char time_buf_fmt[] = "%.6f";

}  // namespace

double normalized_gap(double f, double f_star) {
  const double gap = f - f_star;
  return std::abs(f_star) > 1e-12 ? gap / std::abs(f_star) : gap;
}

std::string trace_csv_line(const TraceRecord& row) {
  char tbuf[32];
  std::snprintf(tbuf, sizeof(tbuf), time_buf_fmt, row.time_sec);
  std::ostringstream os;
  os << row.k << ',' << row.stage << ',' << tbuf << ','
     << format_double(row.f) << ',' << opt_field(row.gap) << ','
     << format_double(row.grad_norm) << ',' << opt_field(row.A) << ','
     << opt_field(row.a) << ',' << opt_field(row.L) << ','
     << opt_field(row.rho) << ',' << row.probes << ',' << row.inner_iters;
  return os.str();
}

void write_trace_csv(const std::string& path,
                     const std::vector<TraceRecord>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << kTraceCsvHeader << '\n';
  for (const auto& r : rows) out << trace_csv_line(r) << '\n';
}

std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trace file " + path);
  std::string line;
  if (!std::getline(in, line) || line != kTraceCsvHeader)
    throw ParseError(path + ": unexpected trace header");
  std::vector<TraceRecord> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    fields.push_back(cur);
    if (fields.size() != 12)
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected 12 fields");
    TraceRecord r;
    r.k = std::stoi(fields[0]);
    r.stage = std::stoi(fields[1]);
    r.time_sec = std::stod(fields[2]);
    r.f = std::stod(fields[3]);
    r.gap = parse_opt(fields[4], lineno);
    r.grad_norm = std::stod(fields[5]);
    r.A = parse_opt(fields[6], lineno);
    r.a = parse_opt(fields[7], lineno);
    r.L = parse_opt(fields[8], lineno);
    r.rho = parse_opt(fields[9], lineno);
    r.probes = std::stoi(fields[10]);
    r.inner_iters = std::stoi(fields[11]);
    rows.push_back(r);
  }
  return rows;
}

std::vector<TraceRecord> to_trace_records(const RunTrace& trace,
                                          std::optional<double> f_star,
                                          int stage) {
  std::vector<TraceRecord> rows;
  rows.reserve(trace.records.size());
  for (const auto& rec : trace.records) {
    TraceRecord row;
    row.k = rec.k + 1;
    row.stage = stage;
    row.time_sec = rec.time_sec;
    row.f = rec.f_y;
    if (f_star) row.gap = normalized_gap(rec.f_y, *f_star);
    row.grad_norm = rec.grad_norm;
    // Methods without a coefficient recurrence or line search leave these
    // fields at zero; persist them as blanks.
    if (rec.A_next > 0) row.A = rec.A_next;
    if (rec.a > 0) row.a = rec.a;
    if (rec.L > 0) row.L = rec.L;
    if (rec.rho > 0) row.rho = rec.rho;
    row.probes = rec.probes;
    row.inner_iters = rec.inner_iters;
    rows.push_back(row);
  }
  return rows;
}

struct TraceWriter::Impl {
  std::ofstream out;
};

TraceWriter::TraceWriter(const std::string& path) : impl_(new Impl) {
  impl_->out.open(path, std::ios::binary);
  if (!impl_->out) throw Error("cannot open " + path + " for writing");
  impl_->out << kTraceCsvHeader << '\n';
  impl_->out.flush();
}

TraceWriter::~TraceWriter() = default;

void TraceWriter::append(const TraceRecord& row) {
  impl_->out << trace_csv_line(row) << '\n';
  impl_->out.flush();
}

}  // namespace tensoropt
