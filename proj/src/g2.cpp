#include "calibra/g2.hpp"

#include <cmath>

#include "calibra/error.hpp"

namespace calibra {

G2Structure G2Structure::standard() {
  G2Structure g2;
  g2.phi = AlternatingForm(7, 3);
  // Index shorthand uses 1-based axis labels; the table below is 0-based.
  g2.phi.set_component({0, 1, 2}, 1.0);   // 123
  g2.phi.set_component({0, 3, 4}, 1.0);   // 145
  g2.phi.set_component({0, 5, 6}, 1.0);   // 167
  g2.phi.set_component({1, 3, 5}, 1.0);   // 246
  g2.phi.set_component({1, 4, 6}, -1.0);  // -257
  g2.phi.set_component({2, 3, 6}, -1.0);  // -347
  g2.phi.set_component({2, 4, 5}, -1.0);  // -356
  g2.psi = AlternatingForm(7, 4);
  g2.psi.set_component({3, 4, 5, 6}, 1.0);   // 4567
  g2.psi.set_component({1, 2, 3, 4}, 1.0);   // 2345
  g2.psi.set_component({1, 2, 5, 6}, 1.0);   // 2367
  g2.psi.set_component({0, 2, 3, 5}, -1.0);  // -1346
  g2.psi.set_component({0, 2, 4, 6}, 1.0);   // +1357
  g2.psi.set_component({0, 1, 3, 6}, -1.0);  // -1247
  g2.psi.set_component({0, 1, 4, 5}, -1.0);  // -1256
  return g2;
}

Eigen::VectorXd g2_cross(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                         const G2Structure& g2) {
  if (u.size() != 7 || v.size() != 7)
    throw DegreeMismatchError("g2 cross product needs 7-vectors");
  // <w, e_x> = phi(u, v, e_x); expanding the determinant for each table
  // monomial (a,b,c) contributes to the a, b and c slots only.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(7);
  for (int r = 0; r < g2.phi.table_size(); ++r) {
    const double s = g2.phi[r];
    if (s == 0.0) continue;
    const auto& t = g2.phi.tuple(r);
    const int a = t[0], b = t[1], c = t[2];
    w(a) += s * (u(b) * v(c) - u(c) * v(b));
    w(b) += s * (u(c) * v(a) - u(a) * v(c));
    w(c) += s * (u(a) * v(b) - u(b) * v(a));
  }
  return w;
}

double coassociative_residual(const Plane& pl, const G2Structure& g2) {
  if (pl.dim() != 4 || pl.frame.rows() != 7)
    throw DegreeMismatchError("coassociative test needs a 4-plane in R^7");
  double worst = 0.0;
  Eigen::MatrixXd triple(7, 3);
  for (int skip = 0; skip < 4; ++skip) {
    int c = 0;
    for (int i = 0; i < 4; ++i)
      if (i != skip) triple.col(c++) = pl.frame.col(i);
    worst = std::max(worst, std::abs(g2.phi(triple)));
  }
  return worst;
}

bool coassociative_test(const Plane& pl, const G2Structure& g2, double tol) {
  return coassociative_residual(pl, g2) <= tol;
}

AlternatingForm hphi_form(const G2Structure& g2, const ScalarField& f,
                          const Eigen::VectorXd& p) {
  if (f.dim() != 7) throw DegreeMismatchError("hphi form needs a field on R^7");
  const Eigen::MatrixXd H = f.jet(p).h;  // flat model: Hess = coordinate Hessian
  AlternatingForm T(7, 3);
  const auto& tuples = increasing_tuples(7, 3);
  for (size_t r = 0; r < tuples.size(); ++r) {
    const int a = tuples[r][0], b = tuples[r][1], c = tuples[r][2];
    double s = 0.0;
    for (int i = 0; i < 7; ++i) {
      s += H(a, i) * g2.phi.component({i, b, c});
      s -= H(b, i) * g2.phi.component({i, a, c});
      s += H(c, i) * g2.phi.component({i, a, b});
    }
    T[static_cast<int>(r)] = s;
  }
  return T;
}

}  // namespace calibra
