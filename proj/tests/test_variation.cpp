#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "calibra/error.hpp"
#include "calibra/forms.hpp"
#include "calibra/kahler.hpp"
#include "calibra/submersion.hpp"
#include "calibra/variation.hpp"

#include "submersion_catalog.hpp"

using namespace calibra;
using namespace calibra_tests;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd pt(std::initializer_list<double> v) {
  VectorXd x(v.size());
  int i = 0;
  for (double c : v) x(i++) = c;
  return x;
}

double terms_sum(const VariationReport& rep) {
  double s = 0.0;
  for (const auto& kv : rep.terms) s += kv.second;
  return s;
}

// Gradient and Hessian of the warp factor of the warped_circle fixture.
VectorXd warp_grad(const VectorXd& b) {
  return pt({0.3 * std::cos(b(0)) * std::cos(b(1)), -0.3 * std::sin(b(0)) * std::sin(b(1))});
}
double warp_hess(const VectorXd& b, const VectorXd& x) {
  const double s = std::sin(b(0)), c = std::cos(b(0));
  const double t = std::sin(b(1)), u = std::cos(b(1));
  MatrixXd H(2, 2);
  H << -0.3 * s * u, -0.3 * c * t, -0.3 * c * t, -0.3 * s * u;
  return x.dot(H * x);
}

}  // namespace

TEST_CASE("fibre variation moves fibres along the base geodesic") {
  const FibreVariation var(polar_submersion(), pt({1.5}), pt({1.0}));

  CHECK(var.base_at(0.0)(0) == 1.5);
  // Flat 1d base: the geodesic is linear motion in the radius.
  CHECK(var.base_at(0.25)(0) == doctest::Approx(1.75).epsilon(1e-12));
  CHECK(var.base_at(-0.25)(0) == doctest::Approx(1.25).epsilon(1e-12));

  // The t = 0 slice of the family is the starting fibre itself.
  const auto fib = var.submersion().fibre(pt({1.5}));
  for (double y : {0.3, 2.0, 5.5}) {
    const VectorXd a = var.submersion().fibre_point(var.base_at(0.0), pt({y}));
    CHECK((a - fib.point(pt({y}))).norm() < 1e-12);
  }

  // Z is the horizontal lift of the radial direction.
  const VectorXd z = var.variation_field(pt({2.0}));
  CHECK(z(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(z(1)) < 1e-12);
  const VectorXd p = var.submersion().fibre_point(pt({1.5}), pt({2.0}));
  const auto sp = split(var.submersion(), p, z);
  CHECK(sp.vertical.norm() < 1e-12);

  CHECK_THROWS_AS(FibreVariation(polar_submersion(), pt({1.5, 0.0}), pt({1.0})), ConfigError);
  CHECK_THROWS_AS(FibreVariation(polar_submersion(), pt({1.5}), pt({1.0, 0.0})), ConfigError);
}

TEST_CASE("catalog parametrizations move fibre points horizontally") {
  std::mt19937 rng(411);
  for (const auto& entry : submersion_catalog()) {
    CAPTURE(entry.name);
    const VectorXd b0 = 0.5 * (entry.b_lo + entry.b_hi);
    VectorXd x = VectorXd::Zero(entry.rs.base_dim());
    x(0) = 0.8;
    if (x.size() > 1) x(1) = -0.45;
    const FibreVariation var(entry.rs, b0, x);
    for (int s = 0; s < 3; ++s) {
      const VectorXd y = sample_fibre_coord(entry.rs, rng);
      CHECK(var.parametrization_defect(y) < 1e-10);
      // With a horizontal parametrization the family velocity is exactly Z.
      CHECK((var.family_velocity(y) - var.variation_field(y)).norm() < 1e-10);
    }
  }
}

TEST_CASE("first variation reproduces the closed-form volume derivatives") {
  // Circles of radius r grow at rate 2 pi whatever r is.
  for (double r : {0.8, 1.5, 4.0}) {
    const FibreVariation var(polar_submersion(), pt({r}), pt({1.0}));
    CHECK(first_variation(var, {256}) == doctest::Approx(2.0 * M_PI).epsilon(1e-10));
  }

  // Latitude circles: d/dtheta (2 pi sin theta) = 2 pi cos theta.
  const FibreVariation eq(s2_latitude_submersion(), pt({M_PI / 2.0}), pt({1.0}));
  CHECK(std::abs(first_variation(eq, {256})) < 1e-10);
  const FibreVariation tilted(s2_latitude_submersion(), pt({1.0}), pt({1.0}));
  CHECK(first_variation(tilted, {256}) ==
        doctest::Approx(2.0 * M_PI * std::cos(1.0)).epsilon(1e-10));

  // Warped circle bundle: Vol = 2 pi w(b), so dVol = 2 pi grad(w) . x.
  const VectorXd b0 = pt({0.3, -0.2});
  const VectorXd x = pt({0.7, 0.4});
  const FibreVariation wv(warped_circle_submersion(), b0, x);
  CHECK(first_variation(wv, {256}) ==
        doctest::Approx(2.0 * M_PI * warp_grad(b0).dot(x)).epsilon(1e-9));

  // Totally geodesic torus fibres do not move the volume at all.
  const FibreVariation tv(t7_submersion(), pt({1.0, 1.0, 1.0}), pt({1.0, -0.5, 0.25}));
  CHECK(std::abs(first_variation(tv, {8, 8, 8, 8})) < 1e-12);
}

TEST_CASE("first variation vanishes exactly at the minimal fibres") {
  struct Probe {
    std::string name;
    RiemannianSubmersion rs;
    VectorXd b0, x;
  };
  std::vector<Probe> probes;
  probes.push_back({"polar", polar_submersion(), pt({2.0}), pt({1.0})});
  probes.push_back({"cylinder", cylinder_submersion(), pt({0.7}), pt({1.0})});
  probes.push_back({"s2 equator", s2_latitude_submersion(), pt({M_PI / 2.0}), pt({1.0})});
  probes.push_back({"s2 tilted", s2_latitude_submersion(), pt({1.0}), pt({1.0})});
  probes.push_back({"rev waist", rev_surface_submersion(), pt({0.0}), pt({1.0})});
  probes.push_back({"rev side", rev_surface_submersion(), pt({0.7}), pt({1.0})});
  probes.push_back({"flat_t2", flat_t2_submersion(), pt({1.0}), pt({1.0})});
  probes.push_back({"warped", warped_circle_submersion(), pt({0.3, -0.2}), pt({0.7, 0.4})});
  probes.push_back(
      {"hyperbolic", hyperbolic_cylinder_submersion(), pt({0.5, 2.0}), pt({0.7, 0.4})});

  for (const auto& probe : probes) {
    CAPTURE(probe.name);
    const FibreVariation var(probe.rs, probe.b0, probe.x);
    const double dv = first_variation(var, {64});
    const VectorXd ymid = pt({M_PI});
    const auto geo = fibre_geometry(probe.rs, probe.b0, ymid);
    if (geo.is_minimal)
      CHECK(std::abs(dv) < 1e-8);
    else
      CHECK(std::abs(dv) > 1e-3);
  }
}

TEST_CASE("volume profile oracle reproduces the classical profiles") {
  const FibreVariation radial(polar_submersion(), pt({1.5}), pt({1.0}));
  auto [d1, d2] = volume_profile_fd(radial, 1e-3, {64});
  CHECK(d1 == doctest::Approx(2.0 * M_PI).epsilon(1e-9));
  CHECK(std::abs(d2) < 1e-5);

  const FibreVariation eq(s2_latitude_submersion(), pt({M_PI / 2.0}), pt({1.0}));
  auto [s1, s2] = volume_profile_fd(eq, 1e-3, {64});
  CHECK(std::abs(s1) < 1e-6);
  CHECK(s2 == doctest::Approx(-2.0 * M_PI).epsilon(1e-4));

  const FibreVariation flat(flat_t2_submersion(), pt({1.0}), pt({1.0}));
  auto [f1, f2] = volume_profile_fd(flat, 1e-3, {64});
  CHECK(std::abs(f1) < 1e-10);
  CHECK(std::abs(f2) < 1e-8);

  CHECK_THROWS_AS(volume_profile_fd(radial, 0.0, {64}), ConfigError);
}

TEST_CASE("second variation at the equator is minus the fibre volume") {
  const FibreVariation var(s2_latitude_submersion(), pt({M_PI / 2.0}), pt({1.0}));
  const VariationReport rep = second_variation_riemannian(var, {256});

  // Only the ambient curvature term survives: integrand -K = -1.
  CHECK(rep.terms.at("curvature") == doctest::Approx(-2.0 * M_PI).epsilon(1e-9));
  CHECK(std::abs(rep.terms.at("ii_sq")) < 1e-9);
  CHECK(std::abs(rep.terms.at("h_z_sq")) < 1e-9);
  CHECK(std::abs(rep.terms.at("div_tan")) < 1e-8);
  CHECK(std::abs(rep.terms.at("h_accel")) < 1e-10);
  CHECK(std::abs(rep.terms.at("dz_perp_sq")) < 1e-9);
  CHECK(rep.second_analytic == doctest::Approx(-2.0 * M_PI).epsilon(1e-9));
  CHECK(rep.second_fd == doctest::Approx(-2.0 * M_PI).epsilon(1e-4));
  CHECK(std::abs(rep.second_analytic - rep.second_fd) < 1e-4);
  CHECK(std::abs(rep.first) < 1e-8);
}

TEST_CASE("radial circles cancel termwise to a linear volume") {
  const double r = 1.5;
  const FibreVariation var(polar_submersion(), pt({r}), pt({1.0}));
  const VariationReport rep = second_variation_riemannian(var, {256});

  // The squared second fundamental form and (H, Z)^2 carry -1/r^2 and +1/r^2
  // per unit length and cancel exactly; everything else is flat-space zero.
  CHECK(rep.terms.at("ii_sq") == doctest::Approx(-2.0 * M_PI / r).epsilon(1e-9));
  CHECK(rep.terms.at("h_z_sq") == doctest::Approx(2.0 * M_PI / r).epsilon(1e-9));
  CHECK(std::abs(rep.terms.at("curvature")) < 1e-9);
  CHECK(std::abs(rep.second_analytic) < 1e-8);
  CHECK(std::abs(rep.second_fd) < 1e-5);
  CHECK(rep.first == doctest::Approx(2.0 * M_PI).epsilon(1e-10));
}

TEST_CASE("torus fibres in the flat seven-torus have vanishing second variation") {
  const FibreVariation var(t7_submersion(), pt({1.0, 1.0, 1.0}), pt({1.0, -0.5, 0.25}));
  const VariationReport rep = second_variation_riemannian(var, {8, 8, 8, 8});
  for (const auto& kv : rep.terms) {
    CAPTURE(kv.first);
    CHECK(std::abs(kv.second) < 1e-9);
  }
  CHECK(std::abs(rep.second_analytic) < 1e-9);
  CHECK(std::abs(rep.second_fd) < 1e-6);
  CHECK(std::abs(rep.first) < 1e-12);
}

TEST_CASE("catenoid waist: negative curvature makes the volume strictly convex") {
  const FibreVariation var(rev_surface_submersion(), pt({0.0}), pt({1.0}));
  const VariationReport rep = second_variation_riemannian(var, {256});
  // Vol(t) = 2 pi sqrt(1 + t^2), so the second derivative at the waist is
  // 2 pi, all of it coming from -K = +1 at u = 0.
  CHECK(rep.terms.at("curvature") == doctest::Approx(2.0 * M_PI).epsilon(1e-9));
  CHECK(std::abs(rep.terms.at("ii_sq")) < 1e-9);
  CHECK(rep.second_analytic == doctest::Approx(2.0 * M_PI).epsilon(1e-8));
  CHECK(rep.second_fd == doctest::Approx(2.0 * M_PI).epsilon(1e-4));
  CHECK(std::abs(rep.first) < 1e-10);
}

TEST_CASE("warped circle bundle matches the Hessian of the fibre length") {
  const VectorXd b0 = pt({0.3, -0.2});
  const VectorXd x = pt({0.7, 0.4});
  const FibreVariation var(warped_circle_submersion(), b0, x);
  const VariationReport rep = second_variation_riemannian(var, {256});

  const double expected = 2.0 * M_PI * warp_hess(b0, x);
  // The mixed-plane curvature of the warped metric integrates to exactly the
  // Hessian of w; the II and (H, Z)^2 terms cancel as in the polar case.
  CHECK(rep.terms.at("curvature") == doctest::Approx(expected).epsilon(1e-8));
  CHECK(rep.terms.at("ii_sq") == doctest::Approx(-rep.terms.at("h_z_sq")).epsilon(1e-9));
  CHECK(rep.second_analytic == doctest::Approx(expected).epsilon(1e-7));
  CHECK(std::abs(rep.second_analytic - rep.second_fd) < 1e-4);
  CHECK(rep.first == doctest::Approx(2.0 * M_PI * warp_grad(b0).dot(x)).epsilon(1e-9));
}

TEST_CASE("circle factors over the hyperbolic plane are volume-flat") {
  const FibreVariation var(hyperbolic_cylinder_submersion(), pt({0.5, 2.0}), pt({0.7, 0.4}));
  const VariationReport rep = second_variation_riemannian(var, {64});
  for (const auto& kv : rep.terms) {
    CAPTURE(kv.first);
    CHECK(std::abs(kv.second) < 1e-8);
  }
  CHECK(std::abs(rep.second_analytic) < 1e-8);
  CHECK(std::abs(rep.second_fd) < 1e-6);
}

TEST_CASE("analytic and finite-difference second variations agree on the catalog") {
  struct Probe {
    std::string name;
    RiemannianSubmersion rs;
    VectorXd b0, x;
    std::vector<int> grid;
  };
  std::vector<Probe> probes;
  probes.push_back({"polar", polar_submersion(), pt({2.0}), pt({1.0}), {64}});
  probes.push_back({"cylinder", cylinder_submersion(), pt({0.7}), pt({1.0}), {64}});
  probes.push_back(
      {"s2 generic", s2_latitude_submersion(), pt({1.0}), pt({1.0}), {64}});
  probes.push_back({"rev", rev_surface_submersion(), pt({0.5}), pt({1.0}), {64}});
  probes.push_back({"flat_t2", flat_t2_submersion(), pt({1.0}), pt({1.0}), {64}});
  probes.push_back(
      {"warped", warped_circle_submersion(), pt({0.3, -0.2}), pt({0.7, 0.4}), {64}});
  probes.push_back({"hyperbolic", hyperbolic_cylinder_submersion(), pt({0.5, 2.0}),
                    pt({0.7, 0.4}), {64}});
  probes.push_back({"t7", t7_submersion(), pt({1.0, 1.0, 1.0}), pt({1.0, -0.5, 0.25}),
                    {8, 8, 8, 8}});

  for (const auto& probe : probes) {
    CAPTURE(probe.name);
    const FibreVariation var(probe.rs, probe.b0, probe.x);
    const VariationReport rep = second_variation_riemannian(var, probe.grid);
    CHECK(std::abs(rep.second_analytic - rep.second_fd) <
          std::max(1e-4, 1e-3 * std::abs(rep.second_fd)));
    CHECK(rep.fd_richardson_gap < 1e-3 * (1.0 + std::abs(rep.second_fd)));
    // Bookkeeping: the published total is the sum of the breakdown, exactly.
    CHECK(rep.second_analytic == terms_sum(rep));
  }
}

TEST_CASE("second variation is nonnegative on flat totally geodesic scenarios") {
  struct Probe {
    std::string name;
    RiemannianSubmersion rs;
    VectorXd b0, x;
    std::vector<int> grid;
  };
  std::vector<Probe> probes;
  probes.push_back({"cylinder", cylinder_submersion(), pt({0.7}), pt({1.0}), {64}});
  probes.push_back({"flat_t2", flat_t2_submersion(), pt({1.0}), pt({1.0}), {64}});
  probes.push_back({"t7", t7_submersion(), pt({1.0, 1.0, 1.0}), pt({1.0, 0.0, 0.0}),
                    {8, 8, 8, 8}});
  for (const auto& probe : probes) {
    CAPTURE(probe.name);
    const FibreVariation var(probe.rs, probe.b0, probe.x);
    CHECK(second_variation_riemannian(var, probe.grid).second_analytic >= -1e-8);
  }
}

TEST_CASE("Kahler second variation at the equator is pure Ricci") {
  const auto rs = s2_latitude_submersion();
  const auto ks = KahlerStructure::surface(rs.total());
  const FibreVariation var(rs, pt({M_PI / 2.0}), pt({1.0}));
  const VariationReport rep = second_variation_kahler(var, ks, {256});

  // zeta = omega(Z, .) is parallel along the equator, so the Hodge term dies
  // on the grid; Ric = g leaves -Vol.
  CHECK(std::abs(rep.terms.at("hodge")) < 1e-8);
  CHECK(rep.terms.at("ricci") == doctest::Approx(-2.0 * M_PI).epsilon(1e-9));
  CHECK(rep.second_analytic == doctest::Approx(-2.0 * M_PI).epsilon(1e-9));
  CHECK(rep.second_fd == doctest::Approx(-2.0 * M_PI).epsilon(1e-4));
  CHECK(std::abs(rep.first) < 1e-8);

  const VariationReport riem = second_variation_riemannian(var, {256});
  CHECK(std::abs(rep.second_analytic - riem.second_analytic) < 1e-5);
}

TEST_CASE("flat torus Kahler variation vanishes") {
  const auto rs = flat_t2_submersion();
  const auto ks = KahlerStructure::surface(rs.total());
  const FibreVariation var(rs, pt({1.0}), pt({1.0}));
  const VariationReport rep = second_variation_kahler(var, ks, {64});
  CHECK(std::abs(rep.terms.at("hodge")) < 1e-10);
  CHECK(std::abs(rep.terms.at("ricci")) < 1e-10);
  CHECK(std::abs(rep.second_analytic) < 1e-10);
  CHECK(std::abs(rep.second_fd) < 1e-8);
  CHECK(rep.second_analytic >= -1e-8);

  const VariationReport riem = second_variation_riemannian(var, {64});
  CHECK(std::abs(rep.second_analytic - riem.second_analytic) < 1e-5);
}

TEST_CASE("Kahler variation preconditions are enforced") {
  // Non-minimal latitude circle.
  {
    const auto rs = s2_latitude_submersion();
    const FibreVariation var(rs, pt({1.0}), pt({1.0}));
    CHECK_THROWS_AS(second_variation_kahler(var, KahlerStructure::surface(rs.total()), {64}),
                    HypothesisViolatedError);
  }

  // Dimension mismatch between the structure and the total space.
  {
    const FibreVariation var(warped_circle_submersion(), pt({0.3, -0.2}), pt({1.0, 0.0}));
    CHECK_THROWS_AS(second_variation_kahler(var, KahlerStructure::flat_cn(1), {64}),
                    ConfigError);
  }

  // Flat C^2 torus, coordinates (x1, y1, x2, y2).  The z2 coordinate line is
  // a complex curve, as far from Lagrangian as it gets.
  auto dom4 = ChartDomain(Eigen::VectorXd::Zero(4), Eigen::VectorXd::Constant(4, 2.0 * M_PI));
  for (int i = 0; i < 4; ++i) dom4.set_periodic(i);
  const auto total = MetricField::euclidean(4, dom4);
  auto dom2 = ChartDomain(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(2, 2.0 * M_PI));
  dom2.set_periodic(0);
  dom2.set_periodic(1);
  const auto base = MetricField::euclidean(2, dom2);
  const auto ks = KahlerStructure::flat_cn(2, dom4);
  {
    const auto rs = RiemannianSubmersion::from_expressions(
        total, base, {"x1", "x2"}, {"b1", "b2", "y1", "y2"}, dom2);
    const FibreVariation var(rs, pt({1.0, 1.0}), pt({1.0, 0.0}));
    CHECK_THROWS_AS(second_variation_kahler(var, ks, {32, 32}), HypothesisViolatedError);
  }
  // The Lagrangian torus (y1, y2) passes the hypothesis checks but lands on
  // the circle-fibre restriction of the Hodge term.
  {
    const auto rs = RiemannianSubmersion::from_expressions(
        total, base, {"x1", "x3"}, {"b1", "y1", "b2", "y2"}, dom2);
    const FibreVariation var(rs, pt({1.0, 1.0}), pt({1.0, 0.0}));
    CHECK_THROWS_AS(second_variation_kahler(var, ks, {32, 32}), ConfigError);
  }
}

TEST_CASE("coassociative second variation on the flat seven-torus") {
  const FibreVariation var(t7_submersion(), pt({1.0, 1.0, 1.0}), pt({1.0, -0.5, 0.25}));
  const auto g2 = G2Structure::standard();

  const VariationReport zero_tau = second_variation_g2(var, g2, {8, 8, 8, 8});
  CHECK(std::abs(zero_tau.terms.at("torsion_gamma")) < 1e-12);
  CHECK(std::abs(zero_tau.terms.at("ricci")) < 1e-12);
  CHECK(std::abs(zero_tau.second_analytic) < 1e-12);
  CHECK(zero_tau.stokes_residual < 1e-8);
  CHECK(std::abs(zero_tau.second_fd) < 1e-6);
  CHECK(std::abs(zero_tau.first) < 1e-12);
  CHECK(zero_tau.second_analytic == terms_sum(zero_tau));

  // A nonzero constant torsion form: gamma_Z still vanishes because the lift
  // of a flat direction is parallel, and the exact term still integrates to
  // zero.
  AlternatingForm tau(7, 2);
  tau.set_component({0, 1}, 0.7);
  tau.set_component({2, 5}, -0.3);
  tau.set_component({3, 4}, 1.1);
  const VariationReport rep = second_variation_g2(var, g2, tau, {8, 8, 8, 8});
  CHECK(std::abs(rep.terms.at("torsion_gamma")) < 1e-10);
  CHECK(std::abs(rep.second_analytic) < 1e-10);
  CHECK(rep.stokes_residual < 1e-8);
  CHECK(std::abs(rep.second_analytic - rep.second_fd) < 1e-4);
}

TEST_CASE("coassociative preconditions are enforced") {
  const auto g2 = G2Structure::standard();

  // Wrong dimensions.
  {
    const FibreVariation var(s2_latitude_submersion(), pt({1.0}), pt({1.0}));
    CHECK_THROWS_AS(second_variation_g2(var, g2, {64}), ConfigError);
  }
  // Wrong torsion form shape.
  {
    const FibreVariation var(t7_submersion(), pt({1.0, 1.0, 1.0}), pt({1.0, 0.0, 0.0}));
    CHECK_THROWS_AS(second_variation_g2(var, g2, AlternatingForm(7, 3), {8, 8, 8, 8}),
                    ConfigError);
  }
  // Projecting onto (x4, x5, x6) leaves the fibre spanned by e1, e2, e3, e7,
  // which contains the associative (e1, e2, e3): phi does not vanish there.
  {
    auto rs = t7_submersion();
    const auto bad = RiemannianSubmersion::from_expressions(
        rs.total(), rs.base(), {"x4", "x5", "x6"},
        {"y1", "y2", "y3", "b1", "b2", "b3", "y4"}, rs.fibre_domain());
    const FibreVariation var(bad, pt({1.0, 1.0, 1.0}), pt({1.0, 0.0, 0.0}));
    CHECK_THROWS_AS(second_variation_g2(var, g2, {8, 8, 8, 8}), HypothesisViolatedError);
  }
  // A rescaled metric is not the flat G2 model.
  {
    auto dom7 = ChartDomain(Eigen::VectorXd::Zero(7), Eigen::VectorXd::Constant(7, 2.0 * M_PI));
    for (int i = 0; i < 7; ++i) dom7.set_periodic(i);
    const auto total = MetricField::diagonal(dom7, {"2", "1", "1", "1", "1", "1", "1"});
    auto dom3 = ChartDomain(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Constant(3, 2.0 * M_PI));
    for (int i = 0; i < 3; ++i) dom3.set_periodic(i);
    const auto base = MetricField::euclidean(3, dom3);
    auto dom4 = ChartDomain(Eigen::VectorXd::Zero(4), Eigen::VectorXd::Constant(4, 2.0 * M_PI));
    for (int i = 0; i < 4; ++i) dom4.set_periodic(i);
    const auto rs = RiemannianSubmersion::from_expressions(
        total, base, {"x1", "x2", "x3"}, {"b1", "b2", "b3", "y1", "y2", "y3", "y4"}, dom4);
    const FibreVariation var(rs, pt({1.0, 1.0, 1.0}), pt({1.0, 0.0, 0.0}));
    CHECK_THROWS_AS(second_variation_g2(var, g2, {8, 8, 8, 8}), HypothesisViolatedError);
  }
}

TEST_CASE("the finite-difference exterior derivative integrates to zero on a torus") {
  // A genuinely varying 3-form on the T^4 parameter box: its FD exterior
  // derivative is nonzero pointwise but sums to nothing over the closed
  // fibre, which is the mechanism behind the exact-term check.
  auto field = [](const VectorXd& y) {
    AlternatingForm a(4, 3);
    a.set_component({0, 1, 2}, std::sin(y(3)));
    return a;
  };
  const VectorXd probe = pt({1.0, 2.0, 3.0, 0.7});
  const AlternatingForm d = exterior_derivative_fd(field, probe, 1e-3);
  // d(sin(y4) e^012) = -cos(y4) e^0123 after sorting the indices.
  CHECK(d[0] == doctest::Approx(-std::cos(0.7)).epsilon(1e-5));

  double total = 0.0;
  const int n = 8;
  const double step = 2.0 * M_PI / n;
  VectorXd y(4);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int e = 0; e < n; ++e) {
          y << a * step, b * step, c * step, e * step;
          total += exterior_derivative_fd(field, y, 1e-3)[0] * std::pow(step, 4);
        }
  CHECK(std::abs(total) < 1e-10);
}
