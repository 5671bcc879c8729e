#include <doctest.h>

#include "calibra/error.hpp"
#include "calibra/geometry.hpp"
#include "calibra/submanifold.hpp"

#include "field_catalog.hpp"

using namespace calibra;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
VectorXd pt(std::initializer_list<double> v) {
  VectorXd x(v.size());
  int i = 0;
  for (double c : v) x(i++) = c;
  return x;
}

ChartDomain circle_domain() {
  auto d = ChartDomain::box({0.0}, {2.0 * M_PI});
  d.set_periodic(0);
  return d;
}
}  // namespace

TEST_CASE("z-axis line in flat R^3 is totally geodesic") {
  auto line = ImmersedSubmanifold::from_expressions(
      MetricField::euclidean(3), ChartDomain::box({-5.0}, {5.0}), {"0", "0", "u1"});
  auto geo = line.geometry(pt({1.3}));
  CHECK(geo.induced(0, 0) == doctest::Approx(1.0));
  CHECK(geo.second[0][0].norm() < 1e-14);
  CHECK(geo.mean_curvature.norm() < 1e-14);

  auto f = make_field("x^2 + y^2 - z^2", 3);
  auto [intr, ambient] = line.restricted_laplacian(*f, pt({1.3}));
  CHECK(intr == doctest::Approx(-2.0));
  CHECK(ambient == doctest::Approx(-2.0));
  // the ambient Laplacian is +2, so subharmonicity does not restrict
  CHECK(laplacian(line.ambient(), *f, pt({0.0, 0.0, 1.3})) == doctest::Approx(2.0));
}

TEST_CASE("circle of radius R in the flat plane") {
  const double R = 2.5;
  auto circle = ImmersedSubmanifold::from_expressions(
      MetricField::euclidean(2), circle_domain(),
      {calibra::format_double(R) + "*cos(u1)", calibra::format_double(R) + "*sin(u1)"});
  auto geo = circle.geometry(pt({0.4}));
  CHECK(geo.induced(0, 0) == doctest::Approx(R * R));
  CHECK(geo.mean_curvature.norm() == doctest::Approx(1.0 / R));
  // H points inward: at angle t the inward direction is -(cos t, sin t)
  VectorXd inward = -pt({std::cos(0.4), std::sin(0.4)});
  CHECK((geo.mean_curvature - inward / R).norm() < 1e-12);
  // H is g-orthogonal to the tangent direction
  VectorXd tangent = pt({-std::sin(0.4), std::cos(0.4)});
  CHECK(std::abs(geo.mean_curvature.dot(tangent)) < 1e-10);
}

TEST_CASE("restricted laplacian discrepancy equals -H.grad f on the circle") {
  const double R = 3.0;
  auto circle = ImmersedSubmanifold::from_expressions(
      MetricField::euclidean(2), circle_domain(), {"3*cos(u1)", "3*sin(u1)"});
  auto f = make_field("x", 2);
  for (double t : {0.0, 0.7, 2.0, 4.5}) {
    auto [intr, ambient] = circle.restricted_laplacian(*f, pt({t}));
    auto geo = circle.geometry(pt({t}));
    const VectorXd gradf = pt({1.0, 0.0});  // flat metric
    const double hterm = geo.mean_curvature.dot(gradf);
    CHECK(std::abs(ambient - intr - (-hterm)) < 1e-8);
    CHECK(intr == doctest::Approx(-std::cos(t) / R));
  }
}

TEST_CASE("latitude circle on the unit sphere") {
  // ambient: round sphere chart; submanifold: theta = theta0
  for (double theta0 : {M_PI / 3.0, M_PI / 2.0, 2.0}) {
    auto lat = ImmersedSubmanifold::from_expressions(
        calibra_tests::sphere_metric(), circle_domain(),
        {calibra::format_double(theta0), "u1"});
    auto geo = lat.geometry(pt({1.1}));
    const double want = std::abs(std::cos(theta0) / std::sin(theta0));
    const MatrixXd G = lat.ambient().at(pt({theta0, 1.1}));
    const double hlen = std::sqrt(geo.mean_curvature.dot(G * geo.mean_curvature));
    CHECK(hlen == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("equator is minimal and kills f = cos(theta)") {
  auto equator = ImmersedSubmanifold::from_expressions(
      calibra_tests::sphere_metric(), circle_domain(), {"pi/2", "u1"});
  auto f = make_field("cos(x1)", 2);  // the ambient height function z
  auto [intr, ambient] = equator.restricted_laplacian(*f, pt({0.3}));
  CHECK(std::abs(intr) < 1e-12);
  CHECK(std::abs(intr - ambient) < 1e-8);  // minimal: the two traces agree
}

TEST_CASE("rank-deficient parametrization raises") {
  auto degenerate = ImmersedSubmanifold::from_expressions(
      MetricField::euclidean(2), ChartDomain::box({-1.0}, {1.0}), {"u1^2", "0"});
  CHECK_THROWS_AS(degenerate.geometry(pt({0.0})), RankDeficientError);
  CHECK_NOTHROW(degenerate.geometry(pt({0.5})));
}

TEST_CASE("pullback field matches direct substitution") {
  auto circle = ImmersedSubmanifold::from_expressions(
      MetricField::euclidean(2), circle_domain(), {"2*cos(u1)", "2*sin(u1)"});
  auto f = make_field("x*y", 2);
  auto pulled = circle.pullback(f);
  for (double t : {0.1, 1.0, 3.0}) {
    CHECK(pulled->value(pt({t})) ==
          doctest::Approx(4.0 * std::cos(t) * std::sin(t)));
  }
}
