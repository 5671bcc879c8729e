#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "calibra/defect.hpp"
#include "calibra/error.hpp"
#include "calibra/expr.hpp"
#include "calibra/forms.hpp"
#include "calibra/g2.hpp"
#include "calibra/scalar_field.hpp"

using namespace calibra;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd basis(int n, int i) {
  VectorXd e = VectorXd::Zero(n);
  e(i) = 1.0;
  return e;
}

MatrixXd cols(std::initializer_list<VectorXd> vs) {
  MatrixXd m(vs.begin()->size(), vs.size());
  int j = 0;
  for (const auto& v : vs) m.col(j++) = v;
  return m;
}

Plane span(std::initializer_list<int> idx, int n = 7) {
  Plane pl;
  pl.base = VectorXd::Zero(n);
  pl.frame = MatrixXd::Zero(n, idx.size());
  int j = 0;
  for (int i : idx) pl.frame(i, j++) = 1.0;
  return pl;
}

VectorXd gaussian(std::mt19937& rng, int n) {
  std::normal_distribution<double> g;
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

// Orthonormal pair by Gram-Schmidt on two Gaussian draws.
std::pair<VectorXd, VectorXd> random_pair(std::mt19937& rng, int n) {
  VectorXd u = gaussian(rng, n).normalized();
  VectorXd v = gaussian(rng, n);
  v -= u.dot(v) * u;
  v.normalize();
  return {u, v};
}

MatrixXd random_frame(std::mt19937& rng, int n, int k) {
  MatrixXd a(n, k);
  for (int j = 0; j < k; ++j) a.col(j) = gaussian(rng, n);
  Eigen::HouseholderQR<MatrixXd> qr(a);
  return qr.householderQ() * MatrixXd::Identity(n, k);
}

// Largest principal angle between the column spans.
double subspace_angle(const MatrixXd& a, const MatrixXd& b) {
  Eigen::HouseholderQR<MatrixXd> qa(a), qb(b);
  MatrixXd ua = qa.householderQ() * MatrixXd::Identity(a.rows(), a.cols());
  MatrixXd ub = qb.householderQ() * MatrixXd::Identity(b.rows(), b.cols());
  Eigen::JacobiSVD<MatrixXd> svd(ua.transpose() * ub);
  double c = svd.singularValues().minCoeff();
  return std::acos(std::clamp(c, -1.0, 1.0));
}

// Random polynomial of degree <= 3 in seven variables, assembled as an
// expression string so the whole parser/jet pipeline is exercised.
ScalarFieldPtr random_cubic(std::mt19937& rng) {
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_int_distribution<int> var(1, 7);
  std::ostringstream s;
  for (int t = 0; t < 10; ++t) {
    if (t) s << " + ";
    s << format_double(coeff(rng)) << "*x" << var(rng);
    int extra = t % 3;  // mix of degrees 1..3
    for (int d = 0; d < extra; ++d) s << "*x" << var(rng);
  }
  return make_field(s.str(), 7);
}

}  // namespace

TEST_CASE("increasing tuple tables and ranks") {
  CHECK(binomial(7, 3) == 35);
  CHECK(binomial(7, 4) == 35);
  CHECK(binomial(4, 2) == 6);

  const auto& t73 = increasing_tuples(7, 3);
  REQUIRE(t73.size() == 35);
  CHECK(t73.front() == std::vector<int>{0, 1, 2});
  CHECK(t73.back() == std::vector<int>{4, 5, 6});
  for (int r = 0; r < 35; ++r) CHECK(tuple_rank(7, 3, t73[r].data()) == r);

  std::vector<int> idx{2, 0, 1};
  CHECK(sort_sign(idx) == 1);
  CHECK(idx == std::vector<int>{0, 1, 2});
  idx = {1, 0};
  CHECK(sort_sign(idx) == -1);
  idx = {3, 1, 3};
  CHECK(sort_sign(idx) == 0);
}

TEST_CASE("signed component access") {
  AlternatingForm a(4, 2);
  a.set_component({1, 3}, 2.0);
  CHECK(a.component({1, 3}) == 2.0);
  CHECK(a.component({3, 1}) == -2.0);
  CHECK(a.component({2, 2}) == 0.0);
  a.add_component({3, 1}, 0.5);
  CHECK(a.component({1, 3}) == 1.5);

  // dx1^dx2 on basis columns, both orientations
  AlternatingForm w(3, 2);
  w.set_component({0, 1}, 1.0);
  CHECK(w(cols({basis(3, 0), basis(3, 1)})) == doctest::Approx(1.0));
  CHECK(w(cols({basis(3, 1), basis(3, 0)})) == doctest::Approx(-1.0));
  CHECK(w(cols({basis(3, 0), basis(3, 0) + basis(3, 1)})) == doctest::Approx(1.0));
}

TEST_CASE("evaluation is alternating and linear in each slot") {
  std::mt19937 rng(11);
  AlternatingForm a(5, 3);
  for (int r = 0; r < a.table_size(); ++r) a[r] = gaussian(rng, 1)(0);

  for (int trial = 0; trial < 30; ++trial) {
    MatrixXd v(5, 3);
    for (int j = 0; j < 3; ++j) v.col(j) = gaussian(rng, 5);
    double base = a(v);

    MatrixXd swapped = v;
    swapped.col(0).swap(swapped.col(2));
    CHECK(a(swapped) == doctest::Approx(-base).epsilon(1e-12));

    // repeated column kills the value
    MatrixXd rep = v;
    rep.col(1) = rep.col(0);
    CHECK(std::abs(a(rep)) < 1e-12);

    VectorXd w = gaussian(rng, 5);
    double lam = 0.73;
    MatrixXd shifted = v;
    shifted.col(1) += lam * w;
    MatrixXd only_w = v;
    only_w.col(1) = w;
    CHECK(a(shifted) == doctest::Approx(base + lam * a(only_w)).epsilon(1e-10));
  }
}

TEST_CASE("wedge product algebra") {
  AlternatingForm dx(3, 1), dy(3, 1), dz(3, 1);
  dx.set_component({0}, 1.0);
  dy.set_component({1}, 1.0);
  dz.set_component({2}, 1.0);

  auto dxy = dx.wedge(dy);
  CHECK(dxy.component({0, 1}) == 1.0);
  CHECK(dxy.component({0, 2}) == 0.0);
  auto vol = dxy.wedge(dz);
  CHECK(vol.table_size() == 1);
  CHECK(vol[0] == 1.0);

  CHECK(dx.wedge(dx).max_abs() == 0.0);
  CHECK((dx.wedge(dy) + dy.wedge(dx)).max_abs() == 0.0);

  // associativity on random 1-forms in R^5
  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    AlternatingForm a(5, 1), b(5, 1), c(5, 1);
    for (int i = 0; i < 5; ++i) {
      a[i] = gaussian(rng, 1)(0);
      b[i] = gaussian(rng, 1)(0);
      c[i] = gaussian(rng, 1)(0);
    }
    auto left = a.wedge(b).wedge(c);
    auto right = a.wedge(b.wedge(c));
    CHECK((left - right).max_abs() < 1e-12);
  }
}

TEST_CASE("interior product and Leibniz rule") {
  AlternatingForm w(3, 2);
  w.set_component({0, 1}, 1.0);
  auto iw = w.interior(basis(3, 0));
  CHECK(iw.degree() == 1);
  CHECK(iw.component({1}) == 1.0);
  CHECK(iw.component({0}) == 0.0);
  CHECK(iw.component({2}) == 0.0);

  std::mt19937 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    AlternatingForm a(5, 3);
    for (int r = 0; r < a.table_size(); ++r) a[r] = gaussian(rng, 1)(0);
    VectorXd u = gaussian(rng, 5);

    // u interior u interior a = 0
    CHECK(a.interior(u).interior(u).max_abs() < 1e-12);

    // interior against evaluation: (u . a)(v, w) = a(u, v, w)
    VectorXd v = gaussian(rng, 5), x = gaussian(rng, 5);
    CHECK(a.interior(u)(cols({v, x})) == doctest::Approx(a(cols({u, v, x}))).epsilon(1e-12));

    // Leibniz for 1-forms: u . (b ^ c) = b(u) c - c(u) b
    AlternatingForm b(5, 1), c(5, 1);
    for (int i = 0; i < 5; ++i) {
      b[i] = gaussian(rng, 1)(0);
      c[i] = gaussian(rng, 1)(0);
    }
    auto lhs = b.wedge(c).interior(u);
    auto rhs = c * b(u) - b * c(u);
    CHECK((lhs - rhs).max_abs() < 1e-12);
  }
}

TEST_CASE("standard G2 forms have the expected coefficient tables") {
  auto g2 = G2Structure::standard();
  CHECK(g2.phi.dim() == 7);
  CHECK(g2.phi.degree() == 3);
  CHECK(g2.psi.degree() == 4);

  CHECK(g2.phi.component({0, 1, 2}) == 1.0);
  CHECK(g2.phi.component({0, 3, 4}) == 1.0);
  CHECK(g2.phi.component({0, 5, 6}) == 1.0);
  CHECK(g2.phi.component({1, 3, 5}) == 1.0);
  CHECK(g2.phi.component({1, 4, 6}) == -1.0);
  CHECK(g2.phi.component({2, 3, 6}) == -1.0);
  CHECK(g2.phi.component({2, 4, 5}) == -1.0);

  CHECK(g2.psi.component({3, 4, 5, 6}) == 1.0);
  CHECK(g2.psi.component({1, 2, 3, 4}) == 1.0);
  CHECK(g2.psi.component({1, 2, 5, 6}) == 1.0);
  CHECK(g2.psi.component({0, 2, 3, 5}) == -1.0);
  CHECK(g2.psi.component({0, 2, 4, 6}) == 1.0);
  CHECK(g2.psi.component({0, 1, 3, 6}) == -1.0);
  CHECK(g2.psi.component({0, 1, 4, 5}) == -1.0);

  int phi_nonzero = 0, psi_nonzero = 0;
  for (int r = 0; r < g2.phi.table_size(); ++r)
    if (g2.phi[r] != 0.0) ++phi_nonzero;
  for (int r = 0; r < g2.psi.table_size(); ++r)
    if (g2.psi[r] != 0.0) ++psi_nonzero;
  CHECK(phi_nonzero == 7);
  CHECK(psi_nonzero == 7);
}

TEST_CASE("phi wedge psi is seven times the volume form") {
  auto g2 = G2Structure::standard();
  auto w = g2.phi.wedge(g2.psi);
  REQUIRE(w.table_size() == 1);
  CHECK(w[0] == 7.0);
}

TEST_CASE("restriction to coordinate planes and calibration flags") {
  auto g2 = G2Structure::standard();

  CHECK(restrict_form(g2.phi, span({0, 1, 2})) == doctest::Approx(1.0));
  CHECK(is_calibrated(g2.phi, span({0, 1, 2}), 1e-12));
  CHECK(restrict_form(g2.phi, span({3, 4, 5})) == doctest::Approx(0.0));
  CHECK(!is_calibrated(g2.phi, span({3, 4, 5}), 1e-12));

  CHECK(restrict_form(g2.psi, span({3, 4, 5, 6})) == doctest::Approx(1.0));
  CHECK(is_calibrated(g2.psi, span({3, 4, 5, 6}), 1e-12));

  // reversing orientation flips the sign
  Plane rev = span({3, 4, 5, 6});
  rev.frame.col(0).swap(rev.frame.col(1));
  CHECK(restrict_form(g2.psi, rev) == doctest::Approx(-1.0));
  CHECK(!is_calibrated(g2.psi, rev, 1e-12));

  CHECK_THROWS_AS(restrict_form(g2.phi, span({0, 1, 2, 3})), DegreeMismatchError);
}

TEST_CASE("g2 cross product on basis vectors") {
  auto g2 = G2Structure::standard();
  CHECK((g2_cross(basis(7, 0), basis(7, 1), g2) - basis(7, 2)).norm() == 0.0);
  CHECK((g2_cross(basis(7, 3), basis(7, 4), g2) - basis(7, 0)).norm() == 0.0);
  CHECK((g2_cross(basis(7, 4), basis(7, 6), g2) + basis(7, 1)).norm() == 0.0);
  // antisymmetry
  CHECK((g2_cross(basis(7, 1), basis(7, 0), g2) + basis(7, 2)).norm() == 0.0);
}

TEST_CASE("cross product planes are calibrated by phi") {
  auto g2 = G2Structure::standard();
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    auto [u, v] = random_pair(rng, 7);
    VectorXd w = g2_cross(u, v, g2);
    CHECK(std::abs(w.norm() - 1.0) < 1e-12);
    CHECK(std::abs(w.dot(u)) < 1e-12);
    CHECK(std::abs(w.dot(v)) < 1e-12);
    Plane pl;
    pl.base = VectorXd::Zero(7);
    pl.frame = cols({u, v, w});
    CHECK(std::abs(restrict_form(g2.phi, pl) - 1.0) < 1e-9);
  }
}

TEST_CASE("phi has comass one over random 3-planes") {
  auto g2 = G2Structure::standard();
  std::mt19937 rng(99);
  double worst = -2.0;
  for (int trial = 0; trial < 100000; ++trial) {
    Plane pl;
    pl.base = VectorXd::Zero(7);
    pl.frame = random_frame(rng, 7, 3);
    double val = restrict_form(g2.phi, pl);
    worst = std::max(worst, std::abs(val));
    if (val > 1.0 + 1e-9) FAIL("comass bound violated: ", val);
  }
  CHECK(worst <= 1.0 + 1e-9);
  CHECK(worst > 0.5);  // the sample should get reasonably close to a calibrated plane
}

TEST_CASE("coassociative coordinate planes and a G2 rotation image") {
  auto g2 = G2Structure::standard();
  CHECK(coassociative_test(span({3, 4, 5, 6}), g2, 1e-12));
  CHECK(coassociative_residual(span({3, 4, 5, 6}), g2) == 0.0);
  CHECK(!coassociative_test(span({0, 1, 2, 3}), g2, 1e-12));

  // rotation by alpha in the (e4,e5)-plane and -alpha in (e6,e7) preserves
  // phi, so it must carry coassociative planes to coassociative planes
  for (double alpha : {0.3, 1.1, 2.9}) {
    MatrixXd rot = MatrixXd::Identity(7, 7);
    rot(3, 3) = std::cos(alpha);
    rot(3, 4) = -std::sin(alpha);
    rot(4, 3) = std::sin(alpha);
    rot(4, 4) = std::cos(alpha);
    rot(5, 5) = std::cos(alpha);
    rot(5, 6) = std::sin(alpha);
    rot(6, 5) = -std::sin(alpha);
    rot(6, 6) = std::cos(alpha);
    Plane pl = span({3, 4, 5, 6});
    pl.frame = rot * pl.frame;
    CHECK(coassociative_residual(pl, g2) < 1e-12);
    CHECK(coassociative_test(pl, g2, 1e-9));
  }
}

TEST_CASE("form fields differentiate exactly") {
  // alpha = x dy on R^2: d(alpha) = dx^dy
  FormField a(2, 1);
  a.set({1}, make_field("x", 2));
  auto da = a.exterior_derivative_at(Eigen::Vector2d(0.3, -1.2));
  CHECK(da.component({0, 1}) == doctest::Approx(1.0));

  // mixed coefficients on R^3 against hand-computed curl at (1,2,3)
  FormField b(3, 1);
  b.set({0}, make_field("x^2*y", 3));
  b.set({1}, make_field("x*z", 3));
  b.set({2}, make_field("y*z^2", 3));
  auto db = b.exterior_derivative_at(Eigen::Vector3d(1.0, 2.0, 3.0));
  CHECK(db.component({0, 1}) == doctest::Approx(3.0 - 1.0));
  CHECK(db.component({0, 2}) == doctest::Approx(0.0));
  CHECK(db.component({1, 2}) == doctest::Approx(9.0 - 1.0));

  // d of an exact 1-form vanishes
  FormField df(2, 1);
  df.set({0}, make_field("2*x*y^3", 2));
  df.set({1}, make_field("3*x^2*y^2", 2));
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Vector2d p(unif(rng), unif(rng));
    CHECK(df.exterior_derivative_at(p).max_abs() < 1e-12);
  }

  // finite-difference route agrees with the exact one
  auto fd = exterior_derivative_fd(
      [&](const VectorXd& p) { return b.at(p); }, Eigen::Vector3d(1.0, 2.0, 3.0), 1e-5);
  CHECK((fd - db).max_abs() < 1e-8);
}

TEST_CASE("hphi of quadratic model fields") {
  auto g2 = G2Structure::standard();
  VectorXd p = VectorXd::Zero(7);

  auto half_sq = make_field(
      "(x1^2+x2^2+x3^2+x4^2+x5^2+x6^2+x7^2)/2", 7);
  auto t = hphi_form(g2, *half_sq, p);
  CHECK((t - g2.phi * 3.0).max_abs() < 1e-14);

  auto linear = make_field("x1 + 2*x2 - x7", 7);
  CHECK(hphi_form(g2, *linear, p).max_abs() == 0.0);

  auto one_dir = make_field("x1^2/2", 7);
  auto t1 = hphi_form(g2, *one_dir, p);
  CHECK(restrict_form(t1, span({0, 1, 2})) == doctest::Approx(1.0));
  CHECK(restrict_form(t1, span({1, 3, 5})) == doctest::Approx(0.0));
}

TEST_CASE("hphi restricts to the plane trace of the Hessian") {
  auto g2 = G2Structure::standard();
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(-1.5, 1.5);
  for (int field_trial = 0; field_trial < 10; ++field_trial) {
    auto f = random_cubic(rng);
    VectorXd p(7);
    for (int i = 0; i < 7; ++i) p(i) = unif(rng);
    auto t = hphi_form(g2, *f, p);
    MatrixXd hess = f->jet(p).h;
    for (int plane_trial = 0; plane_trial < 10; ++plane_trial) {
      auto [u, v] = random_pair(rng, 7);
      VectorXd w = g2_cross(u, v, g2);
      Plane pl;
      pl.base = p;
      pl.frame = cols({u, v, w});
      double trace = u.dot(hess * u) + v.dot(hess * v) + w.dot(hess * w);
      CHECK(restrict_form(t, pl) == doctest::Approx(trace).epsilon(1e-7));
    }
  }
}

TEST_CASE("hphi agrees with the finite-difference exterior derivative of grad f interior phi") {
  auto g2 = G2Structure::standard();
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto f = random_cubic(rng);
  VectorXd p(7);
  for (int i = 0; i < 7; ++i) p(i) = unif(rng);

  auto contraction = [&](const VectorXd& x) {
    VectorXd grad = f->jet(x).g;
    return g2.phi.interior(grad);
  };
  auto fd = exterior_derivative_fd(contraction, p, 1e-4);
  auto exact = hphi_form(g2, *f, p);
  CHECK((fd - exact).max_abs() < 1e-6);
}

TEST_CASE("g2 psh defect of model quadratics") {
  auto g2 = G2Structure::standard();
  VectorXd p = VectorXd::Zero(7);

  auto convex = make_field("x1^2+x2^2+x3^2+x4^2+x5^2+x6^2+x7^2", 7);
  auto r1 = g2_psh_defect(g2, *convex, p, 512);
  CHECK(r1.defect == doctest::Approx(6.0).epsilon(1e-9));

  auto linear = make_field("x1 - 3*x5", 7);
  auto r2 = g2_psh_defect(g2, *linear, p, 512);
  CHECK(std::abs(r2.defect) < 1e-12);

  auto saddle = make_field("x1^2 - x4^2", 7);
  auto r3 = g2_psh_defect(g2, *saddle, p, 512);
  CHECK(r3.defect == doctest::Approx(-2.0).epsilon(1e-7));

  // the minimizer is the coordinate associative plane span{e2,e4,e6}
  MatrixXd expected(7, 3);
  expected.setZero();
  expected(1, 0) = expected(3, 1) = expected(5, 2) = 1.0;
  CHECK(subspace_angle(r3.witness.frame, expected) < 1e-6);

  // witness value matches the reported defect
  MatrixXd hess = saddle->jet(p).h;
  double witness_trace = 0.0;
  for (int j = 0; j < 3; ++j)
    witness_trace += r3.witness.frame.col(j).dot(hess * r3.witness.frame.col(j));
  CHECK(witness_trace == doctest::Approx(r3.defect).epsilon(1e-10));

  // brute-force oracle over a separate random stream cannot beat it by much
  std::mt19937 rng(4242);
  double oracle = 1e300;
  for (int trial = 0; trial < 20000; ++trial) {
    auto [u, v] = random_pair(rng, 7);
    VectorXd w = g2_cross(u, v, g2);
    double trace = u.dot(hess * u) + v.dot(hess * v) + w.dot(hess * w);
    oracle = std::min(oracle, trace);
  }
  CHECK(r3.defect <= oracle + 1e-6);
  CHECK(oracle >= -2.0 - 1e-9);
}

TEST_CASE("convex fields have nonnegative g2 defect") {
  auto g2 = G2Structure::standard();
  VectorXd p = VectorXd::Zero(7);
  std::mt19937 rng(55);
  for (int trial = 0; trial < 5; ++trial) {
    MatrixXd a(7, 7);
    for (int i = 0; i < 7; ++i) a.row(i) = gaussian(rng, 7).transpose();
    MatrixXd m = a.transpose() * a;  // positive semidefinite
    auto f = lambda_field(7, [m](const VectorXd& x) {
      Jet j = Jet::constant(7, x.dot(m * x));
      j.g = 2.0 * m * x;
      j.h = 2.0 * m;
      return j;
    });
    auto r = g2_psh_defect(g2, *f, p, 256);
    CHECK(r.defect >= -1e-8);
  }
}

TEST_CASE("p-plane defect from the generalized eigenproblem") {
  auto g = MetricField::euclidean(2);
  auto f = make_field("2*x^2 - y^2", 2);
  VectorXd p = Eigen::Vector2d(0.4, -0.7);
  CHECK(p_plane_psh_defect(g, *f, p, 1) == doctest::Approx(-2.0));
  CHECK(p_plane_psh_defect(g, *f, p, 2) == doctest::Approx(2.0));

  auto g3 = MetricField::euclidean(3);
  auto f3 = make_field("-x1^2/2 + x2^2 + 3*x3^2/2", 3);
  VectorXd p3 = VectorXd::Zero(3);
  CHECK(p_plane_psh_defect(g3, *f3, p3, 2) == doctest::Approx(1.0));

  // non-Euclidean metric: eigenvalues are taken in a g-orthonormal frame
  auto gd = MetricField::diagonal(ChartDomain::cube(2, 10.0), {"4", "1"});
  auto fr = make_field("x^2 + y^2", 2);
  CHECK(p_plane_psh_defect(gd, *fr, Eigen::Vector2d(0.1, 0.2), 1) ==
        doctest::Approx(0.5));
}
