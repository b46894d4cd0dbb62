#include "tensoropt/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace tensoropt {

namespace {

// |t|^k * sign(t), branchless in the sign handling.
inline double signed_pow(double t, int k) {
  double a = std::abs(t);
  double p = std::pow(a, k);
  return t < 0 ? -p : p;
}

inline double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

// phi(t) = ln(1 + exp(-t)), stable for large |t|.
inline double log1pexp_neg(double t) {
  if (t >= 0) return std::log1p(std::exp(-t));
  return -t + std::log1p(std::exp(t));
}

}  // namespace

// ---------------------------------------------------------------------------
// HardFamilyProblem
// ---------------------------------------------------------------------------

HardFamilyProblem::HardFamilyProblem(int n, int m, int p)
    : n_(n), m_(m), p_(p) {
  if (n < 1 || m < 1 || m > n)
    throw ConfigError("hard family requires 1 <= m <= n");
  if (p < 1) throw ConfigError("hard family requires p >= 1");
  op_norm_ = 0.0;
  op_norm_ = operator_norm();
}

Vector HardFamilyProblem::apply_a(const Vector& x) const {
  Vector u = x;
  for (int i = 0; i + 1 < m_; ++i) u[i] = x[i] - x[i + 1];
  return u;
}

Vector HardFamilyProblem::apply_a_t(const Vector& v) const {
  Vector w = v;
  for (int i = m_ - 1; i >= 1; --i) w[i] = v[i] - v[i - 1];
  return w;
}

double HardFamilyProblem::operator_norm() const {
  if (op_norm_ > 0) return op_norm_;
  // Power iteration on A^T A from a deterministic start.
  SplitMix64 rng(1);
  Vector v = rng.vector_symmetric(n_);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 2000; ++it) {
    Vector w = apply_a_t(apply_a(v));
    double next = w.norm();
    w /= next;
    if (std::abs(next - lambda) <= 1e-14 * std::max(1.0, next)) {
      lambda = next;
      break;
    }
    lambda = next;
    v = w;
  }
  return std::sqrt(lambda);
}

DerivativeBundle HardFamilyProblem::eval_impl(const Vector& x,
                                              int order) const {
  DerivativeBundle b;
  b.center = x;
  const Vector u = apply_a(x);

  double eta = 0.0;
  for (int i = 0; i < n_; ++i) eta += std::pow(std::abs(u[i]), p_ + 1);
  b.value = eta / (p_ + 1) - x[0];

  Vector grad_eta(n_);
  for (int i = 0; i < n_; ++i) grad_eta[i] = signed_pow(u[i], p_);
  b.gradient = apply_a_t(grad_eta);
  b.gradient[0] -= 1.0;

  if (order >= 2) {
    // H = A^T diag(p |u|^{p-1}) A; tridiagonal inside the U_m block.
    Vector d(n_);
    for (int i = 0; i < n_; ++i) d[i] = p_ * std::pow(std::abs(u[i]), p_ - 1);
    Matrix H = Matrix::Zero(n_, n_);
    for (int i = 0; i < n_; ++i) {
      H(i, i) += d[i];
      if (i + 1 < m_) {
        H(i, i + 1) -= d[i];
        H(i + 1, i) -= d[i];
        H(i + 1, i + 1) += d[i];
      }
    }
    b.hessian = std::move(H);
  }
  if (order >= 3) {
    const int p = p_;
    const Vector uc = u;
    b.third_dir = [this, p, uc](const Vector& h) {
      Vector ah = apply_a(h);
      Vector t(uc.size());
      for (Eigen::Index i = 0; i < uc.size(); ++i)
        t[i] = p * (p - 1) * signed_pow(uc[i], p - 2) * ah[i] * ah[i];
      return apply_a_t(t);
    };
  }
  return b;
}

double HardFamilyProblem::lipschitz_bound(int p) const {
  if (p != p_)
    throw UnsupportedOrder("hard family with power p=" + std::to_string(p_) +
                           " has a Lipschitz bound only for that order");
  double fact = 1.0;
  for (int i = 2; i <= p_; ++i) fact *= i;
  return fact * std::pow(op_norm_, p_ + 1);
}

double hard_family_lipschitz(int p, int m, int n) {
  HardFamilyProblem probe(n, m, p);
  double fact = 1.0;
  for (int i = 2; i <= p; ++i) fact *= i;
  return fact * std::pow(probe.operator_norm(), p + 1);
}

std::string HardFamilyProblem::fingerprint_json() const {
  std::ostringstream os;
  os << "{\"type\":\"hard_family\",\"n\":" << n_ << ",\"m\":" << m_
     << ",\"p\":" << p_ << "}";
  return os.str();
}

// ---------------------------------------------------------------------------
// LogisticProblem
// ---------------------------------------------------------------------------

LogisticProblem::LogisticProblem(Matrix features, std::vector<int> labels,
                                 std::string source_tag)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      source_tag_(std::move(source_tag)) {
  if (features_.rows() != Eigen::Index(labels_.size()))
    throw ConfigError("label/sample count mismatch");
  for (int y : labels_)
    if (y != 1 && y != -1) throw LabelDomainError("labels must be +-1");
  if (!features_.allFinite()) throw NonFinite("non-finite feature entries");
}

DerivativeBundle LogisticProblem::eval_impl(const Vector& x, int order) const {
  const int d = sample_count();
  const int n = dimension();
  DerivativeBundle b;
  b.center = x;

  Vector margins = features_ * x;  // t_i = y_i <w_i,x> after the sign fold
  for (int i = 0; i < d; ++i) margins[i] *= labels_[i];

  double value = 0.0;
  Vector grad = Vector::Zero(n);
  for (int i = 0; i < d; ++i) {
    const double t = margins[i];
    value += log1pexp_neg(t);
    const double dphi = sigmoid(t) - 1.0;  // phi'(t) = -1/(1+e^t)
    grad += (dphi * labels_[i]) * features_.row(i).transpose();
  }
  b.value = value / d;
  b.gradient = grad / d;

  if (order >= 2) {
    Matrix H = Matrix::Zero(n, n);
    for (int i = 0; i < d; ++i) {
      const double s = sigmoid(margins[i]);
      const double d2 = s * (1.0 - s);
      const Vector wi = features_.row(i).transpose();
      H.selfadjointView<Eigen::Lower>().rankUpdate(wi, d2 / d);
    }
    b.hessian = H.selfadjointView<Eigen::Lower>();
  }
  if (order >= 3) {
    const Matrix& W = features_;
    const std::vector<int>& ys = labels_;
    Vector d3(d);
    for (int i = 0; i < d; ++i) {
      const double s = sigmoid(margins[i]);
      d3[i] = s * (1.0 - s) * (1.0 - 2.0 * s);  // phi'''(t)
    }
    b.third_dir = [&W, &ys, d3, d](const Vector& h) {
      Vector out = Vector::Zero(W.cols());
      for (int i = 0; i < d; ++i) {
        const double wh = W.row(i).dot(h);
        out += (d3[i] * wh * wh * ys[i] / d) * W.row(i).transpose();
      }
      return out;
    };
  }
  return b;
}

double LogisticProblem::lipschitz_bound(int p) const {
  return logreg_lipschitz(*this, p);
}

double logreg_lipschitz(const LogisticProblem& problem, int p) {
  const Matrix& W = problem.features();
  const int d = problem.sample_count();
  double sum = 0.0;
  if (p == 2) {
    for (int i = 0; i < d; ++i) sum += std::pow(W.row(i).norm(), 3);
    return sum / (6.0 * std::sqrt(3.0) * d);
  }
  if (p == 3) {
    for (int i = 0; i < d; ++i) sum += std::pow(W.row(i).norm(), 4);
    return sum / (8.0 * d);
  }
  if (p == 1) {
    // sup phi'' = 1/4.
    for (int i = 0; i < d; ++i) sum += W.row(i).squaredNorm();
    return sum / (4.0 * d);
  }
  throw UnsupportedOrder("logistic Lipschitz bound available for p in {1,2,3}");
}

std::string LogisticProblem::fingerprint_json() const {
  std::ostringstream os;
  os << "{\"type\":\"logistic\",\"n\":" << dimension()
     << ",\"d\":" << sample_count() << ",\"source\":\"" << source_tag_
     << "\"}";
  return os.str();
}

std::unique_ptr<LogisticProblem> synth_logreg(int n, int d,
                                              std::uint64_t seed) {
  if (n < 1 || d < 1) throw ConfigError("synthetic logistic needs n,d >= 1");
  SplitMix64 rng(seed);
  Vector x_hat = rng.vector_symmetric(n);
  Matrix W(d, n);
  std::vector<int> labels(d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < n; ++j) W(i, j) = rng.next_symmetric();
    const double margin = W.row(i).dot(x_hat);
    labels[i] = margin < 0 ? -1 : 1;  // ties go to +1
  }
  std::ostringstream tag;
  tag << "synth:seed=" << seed;
  return std::make_unique<LogisticProblem>(std::move(W), std::move(labels),
                                           tag.str());
}

// ---------------------------------------------------------------------------
// libsvm text format
// ---------------------------------------------------------------------------

std::unique_ptr<LogisticProblem> load_libsvm(const std::string& path,
                                             Dataset* info, int n_override) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);

  struct Row {
    double label;
    std::vector<std::pair<int, double>> entries;
  };
  std::vector<Row> rows;
  std::set<double> label_values;
  int max_index = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Row row;
    if (!(ls >> row.label))
      throw ParseError(path + ":" + std::to_string(lineno) + ": missing label");
    std::string tok;
    int prev_index = 0;
    while (ls >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": expected idx:val, got '" + tok + "'");
      int idx = 0;
      double val = 0;
      try {
        idx = std::stoi(tok.substr(0, colon));
        val = std::stod(tok.substr(colon + 1));
      } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": malformed entry '" + tok + "'");
      }
      if (idx < 1)
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": indices are 1-based");
      if (idx <= prev_index)
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": indices must be ascending");
      prev_index = idx;
      max_index = std::max(max_index, idx);
      row.entries.emplace_back(idx, val);
    }
    label_values.insert(row.label);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": no samples");
  if (label_values.size() > 2)
    throw LabelDomainError(path + ": more than two label values");

  // Map the observed label domain onto {-1,+1}.
  std::string mapping;
  auto map_label = [&](double v) -> int {
    if (label_values == std::set<double>{-1.0, 1.0} ||
        label_values == std::set<double>{-1.0} ||
        label_values == std::set<double>{1.0}) {
      mapping = "identity";
      return v < 0 ? -1 : 1;
    }
    if (label_values == std::set<double>{0.0, 1.0} ||
        label_values == std::set<double>{0.0}) {
      mapping = "0->-1,1->+1";
      return v == 0.0 ? -1 : 1;
    }
    if (label_values == std::set<double>{1.0, 2.0} ||
        label_values == std::set<double>{2.0}) {
      mapping = "1->+1,2->-1";
      return v == 2.0 ? -1 : 1;
    }
    throw LabelDomainError(path + ": unsupported label domain");
  };

  const int d = int(rows.size());
  const int n = n_override > 0 ? n_override : max_index;
  if (n < max_index)
    throw ParseError(path + ": dimension override smaller than max index");
  Matrix W = Matrix::Zero(d, n);
  std::vector<int> labels(d);
  for (int i = 0; i < d; ++i) {
    labels[i] = map_label(rows[i].label);
    for (auto& [idx, val] : rows[i].entries) W(i, idx - 1) = val;
  }

  if (info) {
    info->name = path;
    info->path = path;
    info->d = d;
    info->n = n;
    info->sha256 = sha256_file(path);
    info->label_mapping = mapping;
  }
  return std::make_unique<LogisticProblem>(std::move(W), std::move(labels),
                                           "file:" + sha256_file(path));
}

void write_libsvm(const LogisticProblem& problem, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  const Matrix& W = problem.features();
  for (int i = 0; i < problem.sample_count(); ++i) {
    out << (problem.labels()[i] > 0 ? "+1" : "-1");
    for (int j = 0; j < problem.dimension(); ++j) {
      if (W(i, j) != 0.0)
        out << ' ' << (j + 1) << ':' << format_double(W(i, j));
    }
    out << '\n';
  }
}

std::string dataset_manifest_json(const Dataset& info) {
  std::ostringstream os;
  os << "{\n"
     << "  \"name\": \"" << info.name << "\",\n"
     << "  \"path\": \"" << info.path << "\",\n"
     << "  \"sha256\": \"" << info.sha256 << "\",\n"
     << "  \"d\": " << info.d << ",\n"
     << "  \"n\": " << info.n << ",\n"
     << "  \"label_mapping\": \"" << info.label_mapping << "\"\n"
     << "}\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// QuadraticProblem
// ---------------------------------------------------------------------------

QuadraticProblem::QuadraticProblem(Vector diag) : diag_(std::move(diag)) {
  if (diag_.size() < 1 || diag_.minCoeff() <= 0)
    throw ConfigError("quadratic diagonal must be positive");
}

DerivativeBundle QuadraticProblem::eval_impl(const Vector& x,
                                             int order) const {
  DerivativeBundle b;
  b.center = x;
  b.value = 0.5 * x.dot(diag_.cwiseProduct(x));
  b.gradient = diag_.cwiseProduct(x);
  if (order >= 2) b.hessian = diag_.asDiagonal();
  if (order >= 3) {
    const int n = int(diag_.size());
    b.third_dir = [n](const Vector&) { return Vector::Zero(n); };
  }
  return b;
}

double QuadraticProblem::lipschitz_bound(int p) const {
  if (p == 1) return diag_.maxCoeff();
  return 1.0;
}

std::string QuadraticProblem::fingerprint_json() const {
  std::ostringstream os;
  os << "{\"type\":\"quadratic\",\"diag\":[";
  for (Eigen::Index i = 0; i < diag_.size(); ++i) {
    if (i) os << ',';
    os << format_double(diag_[i]);
  }
  os << "]}";
  return os.str();
}

// ---------------------------------------------------------------------------
// PowerProblem
// ---------------------------------------------------------------------------

PowerProblem::PowerProblem(int n, int degree) : n_(n), degree_(degree) {
  if (n < 1 || degree < 3) throw ConfigError("power problem needs degree >= 3");
}

DerivativeBundle PowerProblem::eval_impl(const Vector& x, int order) const {
  DerivativeBundle b;
  b.center = x;
  const int r = degree_;
  double v = 0.0;
  for (int i = 0; i < n_; ++i) v += std::pow(std::abs(x[i]), r);
  b.value = v / r;
  Vector g(n_);
  for (int i = 0; i < n_; ++i) g[i] = signed_pow(x[i], r - 1);
  b.gradient = g;
  if (order >= 2) {
    Vector d(n_);
    for (int i = 0; i < n_; ++i)
      d[i] = (r - 1) * std::pow(std::abs(x[i]), r - 2);
    b.hessian = d.asDiagonal();
  }
  if (order >= 3) {
    Vector c(n_);
    for (int i = 0; i < n_; ++i)
      c[i] = (r - 1) * (r - 2) * signed_pow(x[i], r - 3);
    b.third_dir = [c](const Vector& h) {
      return Vector(c.cwiseProduct(h.cwiseProduct(h)));
    };
  }
  return b;
}

double PowerProblem::lipschitz_bound(int p) const {
  if (p != degree_ - 1)
    throw UnsupportedOrder("power objective of degree " +
                           std::to_string(degree_) +
                           " has a global bound only for p = degree-1");
  double fact = 1.0;
  for (int i = 2; i <= p; ++i) fact *= i;
  return fact;  // p-th derivative of |t|^{p+1}/(p+1) is p! t
}

std::string PowerProblem::fingerprint_json() const {
  std::ostringstream os;
  os << "{\"type\":\"power\",\"n\":" << n_ << ",\"degree\":" << degree_ << "}";
  return os.str();
}

// ---------------------------------------------------------------------------
// ProxShiftedProblem
// ---------------------------------------------------------------------------

ProxShiftedProblem::ProxShiftedProblem(const Problem& base, double L, Vector z)
    : base_(base), L_(L), z_(std::move(z)) {
  if (L < 0) throw ConfigError("prox coefficient must be >= 0");
  if (z_.size() != base.dimension()) throw ConfigError("prox center dimension");
}

DerivativeBundle ProxShiftedProblem::eval_impl(const Vector& x,
                                               int order) const {
  DerivativeBundle b = base_.eval_impl(x, order);
  const Vector dz = x - z_;
  b.value += 0.5 * L_ * dz.squaredNorm();
  b.gradient += L_ * dz;
  if (order >= 2) b.hessian += L_ * Matrix::Identity(dimension(), dimension());
  return b;
}

double ProxShiftedProblem::lipschitz_bound(int p) const {
  if (p == 1) return base_.lipschitz_bound(1) + L_;
  return base_.lipschitz_bound(p);
}

std::string ProxShiftedProblem::fingerprint_json() const {
  std::ostringstream os;
  os << "{\"type\":\"prox\",\"L\":" << format_double(L_)
     << ",\"base\":" << base_.fingerprint_json() << "}";
  return os.str();
}

}  // namespace tensoropt
