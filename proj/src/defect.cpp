#include "calibra/defect.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "calibra/error.hpp"
#include "calibra/geometry.hpp"
#include "calibra/sampling.hpp"

namespace calibra {

DefectResult kahler_psh_defect(const KahlerStructure& k, const ScalarField& f,
                               const Eigen::VectorXd& p, int samples,
                               int refine_iters) {
  if (samples < 64) throw Error("kahler psh defect needs at least 64 samples");
  const int n = k.dim();
  const Eigen::MatrixXd H = hessian(k.metric(), f, p);
  const Eigen::MatrixXd J = k.complex_structure(p);
  const Eigen::MatrixXd G = k.metric().at(p);
  const Eigen::LLT<Eigen::MatrixXd> gllt(G);
  // Levi(X) = X^T A X on the unit g-sphere.
  const Eigen::MatrixXd A = H + J.transpose() * H * J;

  auto gnormalize = [&](Eigen::VectorXd x) {
    return Eigen::VectorXd(x / std::sqrt(x.dot(G * x)));
  };
  auto q = [&](const Eigen::VectorXd& x) { return x.dot(A * x); };

  Eigen::VectorXd best;
  double best_q = 0.0;
  long best_idx = -1;
  long idx = 0;
  auto consider = [&](const Eigen::VectorXd& x) {
    const double val = q(x);
    if (best_idx < 0 || val < best_q) {
      best_q = val;
      best = x;
      best_idx = idx;
    }
    ++idx;
  };
  for (int i = 0; i < n && i < samples; ++i)
    consider(gnormalize(Eigen::VectorXd::Unit(n, i)));
  for (long s = 1; idx < samples; ++s) consider(gnormalize(halton_unit_vector(n, s)));

  // Projected gradient descent on the unit g-sphere.
  double step = 0.1;
  Eigen::VectorXd x = best;
  double val = best_q;
  for (int it = 0; it < refine_iters; ++it) {
    const Eigen::VectorXd grad = 2.0 * gllt.solve(A * x) - 2.0 * val * x;
    if (grad.norm() < 1e-14) break;
    const Eigen::VectorXd cand = gnormalize(x - step * grad);
    const double cv = q(cand);
    if (cv < val) {
      x = cand;
      val = cv;
    } else {
      step *= 0.5;
      if (step < 1e-12) break;
    }
  }

  DefectResult r;
  r.defect = val;
  r.witness_sample = best_idx;
  r.witness.base = p;
  r.witness.frame.resize(n, 2);
  r.witness.frame.col(0) = x;
  r.witness.frame.col(1) = gnormalize(J * x);  // g(JX, X) = omega(X, X) = 0
  return r;
}

namespace {

double assoc_trace(const Eigen::MatrixXd& H, const G2Structure& g2,
                   const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                   Eigen::VectorXd* w_out = nullptr) {
  const Eigen::VectorXd w = g2_cross(u, v, g2);
  if (w_out) *w_out = w;
  return u.dot(H * u) + v.dot(H * v) + w.dot(H * w);
}

}  // namespace

DefectResult g2_psh_defect(const G2Structure& g2, const ScalarField& f,
                           const Eigen::VectorXd& p, int samples,
                           int refine_iters) {
  if (samples < 256) throw Error("g2 psh defect needs at least 256 samples");
  const Eigen::MatrixXd H = f.jet(p).h;  // flat model Hessian

  Eigen::VectorXd bu, bv;
  double best_q = 0.0;
  long best_idx = -1;
  long idx = 0;
  auto consider = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    const double val = assoc_trace(H, g2, u, v);
    if (best_idx < 0 || val < best_q) {
      best_q = val;
      bu = u;
      bv = v;
      best_idx = idx;
    }
    ++idx;
  };
  // Canonical coordinate pairs first so axis-aligned minimizers are hit
  // exactly; then the deterministic isotropic stream.
  for (int i = 0; i < 7 && idx < samples; ++i)
    for (int j = i + 1; j < 7 && idx < samples; ++j)
      consider(Eigen::VectorXd::Unit(7, i), Eigen::VectorXd::Unit(7, j));
  for (long s = 1; idx < samples; ++s) {
    auto [u, v] = halton_orthonormal_pair(7, s);
    consider(u, v);
  }

  // Projected gradient on orthonormal pairs with Gram-Schmidt retraction.
  Eigen::VectorXd u = bu, v = bv;
  double val = best_q;
  double step = 0.1;
  for (int it = 0; it < refine_iters; ++it) {
    const Eigen::VectorXd w = g2_cross(u, v, g2);
    const Eigen::VectorXd Hw = H * w;
    Eigen::VectorXd gu = 2.0 * H * u, gv = 2.0 * H * v;
    for (int i = 0; i < 7; ++i) {
      gu(i) += 2.0 * g2_cross(Eigen::VectorXd::Unit(7, i), v, g2).dot(Hw);
      gv(i) += 2.0 * g2_cross(u, Eigen::VectorXd::Unit(7, i), g2).dot(Hw);
    }
    if (gu.norm() + gv.norm() < 1e-14) break;
    Eigen::VectorXd cu = (u - step * gu).normalized();
    Eigen::VectorXd cv = v - step * gv;
    cv -= cv.dot(cu) * cu;
    if (cv.norm() < 1e-10) {
      step *= 0.5;
      continue;
    }
    cv.normalize();
    const double cval = assoc_trace(H, g2, cu, cv);
    if (cval < val) {
      u = cu;
      v = cv;
      val = cval;
    } else {
      step *= 0.5;
      if (step < 1e-12) break;
    }
  }

  DefectResult r;
  r.defect = val;
  r.witness_sample = best_idx;
  r.witness.base = p;
  r.witness.frame.resize(7, 3);
  Eigen::VectorXd w;
  assoc_trace(H, g2, u, v, &w);
  r.witness.frame.col(0) = u;
  r.witness.frame.col(1) = v;
  r.witness.frame.col(2) = w;
  return r;
}

double p_plane_psh_defect(const MetricField& g, const ScalarField& f,
                          const Eigen::VectorXd& p, int plane_dim) {
  const int n = g.dim();
  if (plane_dim < 1 || plane_dim > n)
    throw Error("plane dimension out of range for p-plane defect");
  const Eigen::MatrixXd H = hessian(g, f, p);
  const Eigen::MatrixXd G = g.at(p);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(H, G);
  double s = 0.0;
  for (int i = 0; i < plane_dim; ++i) s += es.eigenvalues()(i);
  return s;
}

}  // namespace calibra
