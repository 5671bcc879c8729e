#include "calibra/submanifold.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "calibra/error.hpp"
#include "calibra/geometry.hpp"

namespace calibra {

ImmersedSubmanifold::ImmersedSubmanifold(MetricField ambient, ChartDomain parameter_domain,
                                         std::vector<ScalarFieldPtr> components)
    : ambient_(std::move(ambient)), params_(std::move(parameter_domain)),
      comps_(std::move(components)) {
  if (static_cast<int>(comps_.size()) != ambient_.dim())
    throw Error("parametrization component count must equal the ambient dimension");
  for (const auto& c : comps_)
    if (!c || c->dim() != params_.dim())
      throw Error("parametrization component has wrong arity");
}

ImmersedSubmanifold ImmersedSubmanifold::from_expressions(
    MetricField ambient, ChartDomain parameter_domain,
    const std::vector<std::string>& components) {
  std::vector<std::string> vars;
  for (int i = 1; i <= parameter_domain.dim(); ++i) vars.push_back("u" + std::to_string(i));
  std::vector<ScalarFieldPtr> comps;
  comps.reserve(components.size());
  for (const auto& text : components) comps.push_back(make_field(text, vars));
  return ImmersedSubmanifold(std::move(ambient), std::move(parameter_domain), std::move(comps));
}

Eigen::VectorXd ImmersedSubmanifold::point(const Eigen::VectorXd& u) const {
  Eigen::VectorXd x(ambient_dim());
  for (int a = 0; a < ambient_dim(); ++a) x(a) = comps_[a]->value(u);
  return x;
}

Eigen::MatrixXd ImmersedSubmanifold::differential(const Eigen::VectorXd& u) const {
  Eigen::MatrixXd J(ambient_dim(), dim());
  for (int a = 0; a < ambient_dim(); ++a) J.row(a) = comps_[a]->gradient(u).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-10 * sv(0))
    throw RankDeficientError("immersion differential is rank deficient", u);
  return J;
}

SubmanifoldGeometry ImmersedSubmanifold::geometry(const Eigen::VectorXd& u) const {
  const int k = dim(), n = ambient_dim();
  std::vector<Jet> cj;
  cj.reserve(n);
  Eigen::VectorXd x(n);
  Eigen::MatrixXd J(n, k);
  for (int a = 0; a < n; ++a) {
    cj.push_back(comps_[a]->jet(u));
    x(a) = cj[a].v;
    J.row(a) = cj[a].g.transpose();
  }
  {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-10 * sv(0))
      throw RankDeficientError("immersion differential is rank deficient", u);
  }

  const Eigen::MatrixXd G = ambient_.at(x);
  const Christoffel gamma = christoffel(ambient_, x);

  SubmanifoldGeometry out;
  out.induced = J.transpose() * G * J;
  const Eigen::LLT<Eigen::MatrixXd> hllt(out.induced);
  // Tangential projector wrt g: P v = J h^{-1} J^T G v.
  const Eigen::MatrixXd P = J * hllt.solve(J.transpose() * G);

  out.second.assign(k, std::vector<Eigen::VectorXd>(k));
  out.mean_curvature = Eigen::VectorXd::Zero(n);
  const Eigen::MatrixXd hinv = hllt.solve(Eigen::MatrixXd::Identity(k, k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      Eigen::VectorXd cov(n);  // ambient components of nabla_{d_i} d_j phi
      for (int c = 0; c < n; ++c) {
        double s = cj[c].h(i, j);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) s += gamma[c](a, b) * J(a, i) * J(b, j);
        cov(c) = s;
      }
      out.second[i][j] = cov - P * cov;
      out.mean_curvature += hinv(i, j) * out.second[i][j];
    }
  return out;
}

ScalarFieldPtr ImmersedSubmanifold::pullback(const ScalarFieldPtr& f) const {
  return compose_field(f, comps_);
}

std::pair<double, double> ImmersedSubmanifold::restricted_laplacian(
    const ScalarField& f, const Eigen::VectorXd& u) const {
  const int k = dim(), n = ambient_dim();
  std::vector<Jet> cj;
  cj.reserve(n);
  Eigen::VectorXd x(n);
  Eigen::MatrixXd J(n, k);
  for (int a = 0; a < n; ++a) {
    cj.push_back(comps_[a]->jet(u));
    x(a) = cj[a].v;
    J.row(a) = cj[a].g.transpose();
  }
  const MetricJet mj = ambient_.jet(x);
  const Jet fj = f.jet(x);
  const Jet uf = compose_jet(fj, cj);

  const Eigen::MatrixXd h = J.transpose() * mj.G * J;
  const Eigen::LLT<Eigen::MatrixXd> hllt(h);
  const Eigen::MatrixXd hinv = hllt.solve(Eigen::MatrixXd::Identity(k, k));

  // d_m h_ij assembled from the order-2 parametrization jets and the ambient
  // metric first derivatives.
  std::vector<Eigen::MatrixXd> dh(k, Eigen::MatrixXd::Zero(k, k));
  for (int m = 0; m < k; ++m)
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        double s = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            s += cj[a].h(m, i) * J(b, j) * mj.G(a, b);
            s += J(a, i) * cj[b].h(m, j) * mj.G(a, b);
            for (int c = 0; c < n; ++c)
              s += J(a, i) * J(b, j) * mj.dG[c](a, b) * J(c, m);
          }
        dh[m](i, j) = s;
      }

  double intrinsic = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double corr = 0.0;  // Gamma(h)^l_ij d_l uf
      for (int l = 0; l < k; ++l) {
        double gam = 0.0;
        for (int m = 0; m < k; ++m)
          gam += hinv(l, m) * (dh[i](j, m) + dh[j](i, m) - dh[m](i, j));
        corr += 0.5 * gam * uf.g(l);
      }
      intrinsic += hinv(i, j) * (uf.h(i, j) - corr);
    }

  // Tangential trace of the ambient Hessian through the same frame.
  const Christoffel gamma = christoffel(mj);
  Eigen::MatrixXd Hf = fj.h;
  for (int c = 0; c < n; ++c) Hf -= gamma[c] * fj.g(c);
  const Eigen::MatrixXd Hpulled = J.transpose() * Hf * J;
  const double ambient_trace = (hinv * Hpulled).trace();
  return {intrinsic, ambient_trace};
}

}  // namespace calibra
