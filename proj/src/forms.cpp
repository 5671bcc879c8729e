#include "calibra/forms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "calibra/error.hpp"

namespace calibra {

long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

const std::vector<std::vector<int>>& increasing_tuples(int n, int k) {
  static std::map<std::pair<int, int>, std::vector<std::vector<int>>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(n, k);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<std::vector<int>> out;
  std::vector<int> t(k);
  for (int i = 0; i < k; ++i) t[i] = i;
  if (k == 0) {
    out.push_back({});
  } else if (k <= n) {
    while (true) {
      out.push_back(t);
      int i = k - 1;
      while (i >= 0 && t[i] == n - k + i) --i;
      if (i < 0) break;
      ++t[i];
      for (int j = i + 1; j < k; ++j) t[j] = t[j - 1] + 1;
    }
  }
  return cache.emplace(key, std::move(out)).first->second;
}

int tuple_rank(int n, int k, const int* idx) {
  // Lexicographic rank: count tuples that precede by choosing a smaller
  // element at some position.
  long rank = 0;
  int prev = -1;
  for (int i = 0; i < k; ++i) {
    for (int v = prev + 1; v < idx[i]; ++v) rank += binomial(n - v - 1, k - i - 1);
    prev = idx[i];
  }
  return static_cast<int>(rank);
}

int sort_sign(std::vector<int>& idx) {
  int sign = 1;
  for (size_t i = 1; i < idx.size(); ++i)
    for (size_t j = i; j > 0 && idx[j] < idx[j - 1]; --j) {
      std::swap(idx[j], idx[j - 1]);
      sign = -sign;
    }
  for (size_t i = 1; i < idx.size(); ++i)
    if (idx[i] == idx[i - 1]) return 0;
  return sign;
}

AlternatingForm::AlternatingForm(int n, int degree)
    : n_(n), k_(degree), c_(binomial(n, degree), 0.0) {
  if (degree < 0 || degree > n)
    throw DegreeMismatchError("form degree must lie between 0 and the dimension");
}

const std::vector<int>& AlternatingForm::tuple(int rank) const {
  return increasing_tuples(n_, k_)[rank];
}

double AlternatingForm::component(std::vector<int> idx) const {
  if (static_cast<int>(idx.size()) != k_)
    throw DegreeMismatchError("component index count does not match form degree");
  const int s = sort_sign(idx);
  if (s == 0) return 0.0;
  return s * c_[tuple_rank(n_, k_, idx.data())];
}

void AlternatingForm::set_component(std::vector<int> idx, double value) {
  const int s = sort_sign(idx);
  if (s == 0) throw DegreeMismatchError("repeated index in form component");
  c_[tuple_rank(n_, k_, idx.data())] = s * value;
}

void AlternatingForm::add_component(std::vector<int> idx, double value) {
  const int s = sort_sign(idx);
  if (s == 0) return;
  c_[tuple_rank(n_, k_, idx.data())] += s * value;
}

double AlternatingForm::operator()(const Eigen::MatrixXd& V) const {
  if (V.rows() != n_ || V.cols() != k_)
    throw DegreeMismatchError("frame shape does not match form degree/dimension");
  if (k_ == 0) return c_[0];
  const auto& tuples = increasing_tuples(n_, k_);
  Eigen::MatrixXd minor(k_, k_);
  double s = 0.0;
  for (size_t r = 0; r < tuples.size(); ++r) {
    if (c_[r] == 0.0) continue;
    for (int i = 0; i < k_; ++i) minor.row(i) = V.row(tuples[r][i]);
    s += c_[r] * minor.determinant();
  }
  return s;
}

AlternatingForm AlternatingForm::wedge(const AlternatingForm& o) const {
  if (o.n_ != n_) throw DegreeMismatchError("wedge of forms on different spaces");
  AlternatingForm out(n_, k_ + o.k_);
  const auto& ta = increasing_tuples(n_, k_);
  const auto& tb = increasing_tuples(n_, o.k_);
  std::vector<int> merged(k_ + o.k_);
  for (size_t ra = 0; ra < ta.size(); ++ra) {
    if (c_[ra] == 0.0) continue;
    for (size_t rb = 0; rb < tb.size(); ++rb) {
      if (o.c_[rb] == 0.0) continue;
      std::copy(ta[ra].begin(), ta[ra].end(), merged.begin());
      std::copy(tb[rb].begin(), tb[rb].end(), merged.begin() + k_);
      out.add_component(merged, c_[ra] * o.c_[rb]);
    }
  }
  return out;
}

AlternatingForm AlternatingForm::interior(const Eigen::VectorXd& u) const {
  if (k_ == 0) throw DegreeMismatchError("interior product with a 0-form");
  AlternatingForm out(n_, k_ - 1);
  const auto& tuples = increasing_tuples(n_, k_);
  for (size_t r = 0; r < tuples.size(); ++r) {
    if (c_[r] == 0.0) continue;
    for (int t = 0; t < k_; ++t) {
      if (u(tuples[r][t]) == 0.0) continue;
      std::vector<int> rest;
      rest.reserve(k_ - 1);
      for (int i = 0; i < k_; ++i)
        if (i != t) rest.push_back(tuples[r][i]);
      const double sgn = (t % 2 == 0) ? 1.0 : -1.0;
      out.c_[tuple_rank(n_, k_ - 1, rest.data())] += sgn * u(tuples[r][t]) * c_[r];
    }
  }
  return out;
}

AlternatingForm& AlternatingForm::operator+=(const AlternatingForm& o) {
  if (o.n_ != n_ || o.k_ != k_) throw DegreeMismatchError("adding mismatched forms");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

AlternatingForm& AlternatingForm::operator-=(const AlternatingForm& o) {
  if (o.n_ != n_ || o.k_ != k_) throw DegreeMismatchError("subtracting mismatched forms");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

AlternatingForm& AlternatingForm::operator*=(double s) {
  for (double& x : c_) x *= s;
  return *this;
}

double AlternatingForm::max_abs() const {
  double m = 0.0;
  for (double x : c_) m = std::max(m, std::abs(x));
  return m;
}

FormField::FormField(int n, int degree)
    : n_(n), k_(degree), c_(binomial(n, degree)) {}

FormField FormField::constant(const AlternatingForm& a) {
  FormField f(a.dim(), a.degree());
  for (int r = 0; r < a.table_size(); ++r)
    f.c_[r] = constant_field(a.dim(), a[r]);
  return f;
}

void FormField::set(std::vector<int> idx, ScalarFieldPtr f) {
  const int s = sort_sign(idx);
  if (s == 0) throw DegreeMismatchError("repeated index in form coefficient");
  if (s < 0) throw DegreeMismatchError("form coefficients must use increasing indices");
  c_[tuple_rank(n_, k_, idx.data())] = std::move(f);
}

AlternatingForm FormField::at(const Eigen::VectorXd& p) const {
  AlternatingForm out(n_, k_);
  for (size_t r = 0; r < c_.size(); ++r)
    if (c_[r]) out[static_cast<int>(r)] = c_[r]->value(p);
  return out;
}

AlternatingForm FormField::exterior_derivative_at(const Eigen::VectorXd& p) const {
  // (d a)_{i0..ik} = sum_t (-1)^t d_{it} a_{i0..^t..ik}
  AlternatingForm out(n_, k_ + 1);
  const auto& tuples = increasing_tuples(n_, k_);
  std::vector<Eigen::VectorXd> grads(c_.size());
  for (size_t r = 0; r < c_.size(); ++r)
    grads[r] = c_[r] ? c_[r]->jet(p).g : Eigen::VectorXd::Zero(n_);
  std::vector<int> ext(k_ + 1);
  for (size_t r = 0; r < tuples.size(); ++r) {
    for (int m = 0; m < n_; ++m) {
      if (grads[r](m) == 0.0) continue;
      ext[0] = m;
      std::copy(tuples[r].begin(), tuples[r].end(), ext.begin() + 1);
      out.add_component(ext, grads[r](m));
    }
  }
  return out;
}

AlternatingForm exterior_derivative_fd(
    const std::function<AlternatingForm(const Eigen::VectorXd&)>& field,
    const Eigen::VectorXd& p, double h) {
  const AlternatingForm probe = field(p);
  const int n = probe.dim(), k = probe.degree();
  AlternatingForm out(n, k + 1);
  const auto& tuples = increasing_tuples(n, k);
  std::vector<int> ext(k + 1);
  for (int m = 0; m < n; ++m) {
    Eigen::VectorXd pp = p, pm = p;
    pp(m) += h;
    pm(m) -= h;
    const AlternatingForm fp = field(pp), fm = field(pm);
    for (size_t r = 0; r < tuples.size(); ++r) {
      const double d = (fp[static_cast<int>(r)] - fm[static_cast<int>(r)]) / (2.0 * h);
      if (d == 0.0) continue;
      ext[0] = m;
      std::copy(tuples[r].begin(), tuples[r].end(), ext.begin() + 1);
      out.add_component(ext, d);
    }
  }
  return out;
}

double restrict_form(const AlternatingForm& a, const Plane& pl) {
  if (a.degree() != pl.dim())
    throw DegreeMismatchError("form degree does not match plane dimension");
  return a(pl.frame);
}

bool is_calibrated(const AlternatingForm& a, const Plane& pl, double tol) {
  return std::abs(restrict_form(a, pl) - 1.0) <= tol;
}

}  // namespace calibra
