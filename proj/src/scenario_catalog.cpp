#include "calibra/scenario.hpp"

#include <cmath>

#include "calibra/error.hpp"

namespace calibra {

const std::vector<std::string>& paper_tags() {
  static const std::vector<std::string> tags = {
      "P2.1", "P2.2", "L2.1", "P3.1", "T3.1", "P5.1", "P5.2", "C5.1", "P5.4",
      "C6.1", "P7.1", "P7.2", "P7.3", "P7.4", "T8.1", "C8.2", "E2",   "E3",
      "E4",   "E5",   "E6",   "E7",   "S1",   "S3",   "S4",   "S9"};
  return tags;
}

bool known_paper_tag(const std::string& tag) {
  for (const auto& t : paper_tags())
    if (t == tag) return true;
  return false;
}

std::string CheckContext::field_or(const std::string& key,
                                   const std::string& fallback) const {
  if (fields) {
    auto it = fields->find(key);
    if (it != fields->end()) return it->second;
  }
  return fallback;
}

long check_stream(long seed, const std::string& check_name) {
  // FNV-1a over the check name mixed with the seed; the result offsets the
  // low-discrepancy streams so each check samples independently and two runs
  // with the same config agree exactly.
  unsigned long long h = 1469598103934665603ULL;
  for (unsigned char ch : check_name) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  h ^= static_cast<unsigned long long>(seed) * 0x9E3779B97F4A7C15ULL;
  return static_cast<long>(h % 1000003ULL) + 1;
}

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

ChartDomain circle() {
  auto d = ChartDomain::box({0.0}, {2.0 * M_PI});
  d.set_periodic(0);
  return d;
}

ToricProfile profile(const std::string& radius, const std::string& arc, ChartDomain dom) {
  return ToricProfile{radius, arc, std::move(dom)};
}

Scenario polar_scenario() {
  auto total_dom = ChartDomain::box({0.05, 0.0}, {10.0, 2.0 * M_PI});
  total_dom.set_periodic(1);
  auto total = MetricField::diagonal(total_dom, {"1", "r^2"});
  auto base = MetricField::euclidean(1, ChartDomain::box({0.05}, {10.0}));
  auto rs = RiemannianSubmersion::from_expressions(total, base, {"x1"}, {"b1", "y1"},
                                                   circle());
  Scenario s;
  s.id = "polar";
  s.description = "flat plane minus origin in polar coordinates, circle fibres";
  s.submersion = rs;
  s.kahler = KahlerStructure::surface(total);
  s.field = "x1^2";
  s.default_checks = {"hessian_transfer", "radius_hessian", "P3.1",
                      "P7.4",             "first_variation", "second_variation"};
  s.probe_base = vec({1.0});
  s.probe_direction = vec({1.0});
  return s;
}

Scenario cylinder_scenario() {
  auto total_dom = ChartDomain::box({0.05, 0.0}, {40.0, 2.0 * M_PI});
  total_dom.set_periodic(1);
  auto total = MetricField::diagonal(total_dom, {"1/r^2", "1"});
  auto base =
      MetricField::euclidean(1, ChartDomain::box({std::log(0.05)}, {std::log(40.0)}));
  auto rs = RiemannianSubmersion::from_expressions(total, base, {"log(x1)"},
                                                   {"exp(b1)", "y1"}, circle());
  Scenario s;
  s.id = "cylinder";
  s.description = "plane minus origin with the cylinder metric, base t = log r";
  s.submersion = rs;
  s.kahler = KahlerStructure::surface(total);
  s.field = "log(x1)^2";
  s.default_checks = {"hadamard_sup", "hadamard_integral", "P3.1", "P5.1",
                      "P5.2",         "C5.1",              "P7.2", "C6.1"};
  s.probe_base = vec({0.4});
  s.probe_direction = vec({1.0});
  return s;
}

Scenario s2_latitude_scenario() {
  auto total_dom = ChartDomain::box({0.05, 0.0}, {M_PI - 0.05, 2.0 * M_PI});
  total_dom.set_periodic(1);
  auto total = MetricField::diagonal(total_dom, {"1", "sin(x1)^2"});
  auto base = MetricField::euclidean(1, ChartDomain::box({0.05}, {M_PI - 0.05}));
  auto rs = RiemannianSubmersion::from_expressions(total, base, {"x1"}, {"b1", "y1"},
                                                   circle());
  Scenario s;
  s.id = "s2_latitude";
  s.description = "round unit sphere over its polar angle, latitude circle fibres";
  s.submersion = rs;
  s.kahler = KahlerStructure::surface(total);
  s.toric = profile("sin(x)", "1", ChartDomain::box({0.05}, {M_PI - 0.05}));
  s.field = "cos(x1)";
  s.default_checks = {"hessian_transfer", "ricci_two_form", "toric_volume",
                      "second_variation"};
  s.probe_base = vec({M_PI / 2.0});
  s.probe_direction = vec({1.0});
  return s;
}

Scenario rev_surface_scenario() {
  auto total_dom = ChartDomain::box({-1.5, 0.0}, {1.5, 2.0 * M_PI});
  total_dom.set_periodic(1);
  auto total = MetricField::diagonal(total_dom, {"cosh(x1)^2", "cosh(x1)^2"});
  auto base = MetricField::diagonal(ChartDomain::box({-1.5}, {1.5}), {"cosh(x1)^2"});
  auto rs = RiemannianSubmersion::from_expressions(total, base, {"x1"}, {"b1", "y1"},
                                                   circle());
  Scenario s;
  s.id = "rev_surface";
  s.description = "surface of revolution, default profile the embedded catenoid";
  s.submersion = rs;
  s.toric = profile("cosh(x)", "cosh(x)", ChartDomain::box({-1.0}, {1.0}));
  s.field = "x1";
  s.default_checks = {"toric_volume"};
  s.probe_base = vec({0.0});
  s.probe_direction = vec({1.0});
  return s;
}

Scenario flat_cn_scenario() {
  Scenario s;
  s.id = "flat_cn";
  s.description = "flat complex plane, reference point and submanifold checks";
  s.kahler = KahlerStructure::flat_cn(1, ChartDomain::cube(2, 4.0));
  s.field = "x^2 + y^2";
  s.default_checks = {"ricci_two_form", "square_distance"};
  return s;
}

Scenario flat_t2_scenario() {
  auto total_dom = ChartDomain::box({0.0, 0.0}, {2.0 * M_PI, 2.0 * M_PI});
  total_dom.set_periodic(0);
  total_dom.set_periodic(1);
  auto total = MetricField::euclidean(2, total_dom);
  auto base_dom = ChartDomain::box({0.0}, {2.0 * M_PI});
  base_dom.set_periodic(0);
  auto base = MetricField::euclidean(1, base_dom);
  auto rs =
      RiemannianSubmersion::from_expressions(total, base, {"x1"}, {"b1", "y1"}, circle());
  Scenario s;
  s.id = "flat_t2";
  s.description = "flat square torus over its first circle factor";
  s.submersion = rs;
  s.kahler = KahlerStructure::surface(total);
  s.toric = profile("1", "1", base_dom);
  s.field = "2 + cos(x1)*cos(x2)";
  s.default_checks = {"P7.1", "lagrangian_determinant", "toric_volume", "C6.1"};
  s.probe_base = vec({1.0});
  s.probe_direction = vec({1.0});
  return s;
}

Scenario flat_c2_torus_scenario() {
  auto total_dom = ChartDomain::cube(4, 3.0);
  auto total = MetricField::euclidean(4, total_dom);
  auto base = MetricField::euclidean(2, ChartDomain::box({0.3, 0.3}, {2.5, 2.5}));
  auto fibre_dom = ChartDomain::box({0.0, 0.0}, {2.0 * M_PI, 2.0 * M_PI});
  fibre_dom.set_periodic(0);
  fibre_dom.set_periodic(1);
  auto rs = RiemannianSubmersion::from_expressions(
      total, base, {"sqrt(x1^2 + x2^2)", "sqrt(x3^2 + x4^2)"},
      {"b1*cos(y1)", "b1*sin(y1)", "b2*cos(y2)", "b2*sin(y2)"}, fibre_dom);
  Scenario s;
  s.id = "flat_c2_torus";
  s.description = "flat C^2 with the torus orbits at fixed |z1|, |z2|";
  s.submersion = rs;
  s.kahler = KahlerStructure::flat_cn(2, total_dom);
  s.field = "x1^2 + x2^2 + x3^2 + x4^2";
  s.default_checks = {"lagrangian_determinant"};
  s.probe_base = vec({1.0, 1.4});
  s.probe_direction = vec({1.0, 0.0});
  return s;
}

Scenario t7_coassoc_scenario() {
  auto total_dom =
      ChartDomain(Eigen::VectorXd::Zero(7), Eigen::VectorXd::Constant(7, 2.0 * M_PI));
  for (int i = 0; i < 7; ++i) total_dom.set_periodic(i);
  auto total = MetricField::euclidean(7, total_dom);
  auto base_dom =
      ChartDomain(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Constant(3, 2.0 * M_PI));
  for (int i = 0; i < 3; ++i) base_dom.set_periodic(i);
  auto base = MetricField::euclidean(3, base_dom);
  auto fibre_dom =
      ChartDomain(Eigen::VectorXd::Zero(4), Eigen::VectorXd::Constant(4, 2.0 * M_PI));
  for (int i = 0; i < 4; ++i) fibre_dom.set_periodic(i);
  auto rs = RiemannianSubmersion::from_expressions(
      total, base, {"x1", "x2", "x3"},
      {"b1", "b2", "b3", "y1", "y2", "y3", "y4"}, fibre_dom);
  Scenario s;
  s.id = "t7_coassoc";
  s.description = "flat seven-torus over T^3 with coassociative torus fibres";
  s.submersion = rs;
  s.g2 = G2Structure::standard();
  s.field = "cos(x1) + 2";
  s.default_checks = {"P5.4", "P7.3", "C6.1", "second_variation"};
  s.probe_base = vec({1.0, 1.0, 1.0});
  s.probe_direction = vec({1.0, 0.0, 0.0});
  return s;
}

Scenario hyperbola_psh_scenario() {
  Scenario s;
  s.id = "hyperbola_psh";
  s.description = "f = 2x^2 - y^2 on C: PSH, constant on Lagrangian hyperbolae, "
                  "not convex";
  s.kahler = KahlerStructure::flat_cn(1, ChartDomain::cube(2, 4.0));
  s.field = "2*x^2 - y^2";
  s.default_checks = {"psh_defect"};
  return s;
}

}  // namespace

const std::vector<Scenario>& scenario_catalog() {
  static const std::vector<Scenario> catalog = {
      polar_scenario(),       cylinder_scenario(),     s2_latitude_scenario(),
      rev_surface_scenario(), flat_cn_scenario(),      flat_t2_scenario(),
      flat_c2_torus_scenario(), t7_coassoc_scenario(), hyperbola_psh_scenario()};
  return catalog;
}

const Scenario& find_scenario(const std::string& id) {
  for (const auto& s : scenario_catalog())
    if (s.id == id) return s;
  throw ConfigError("unknown scenario '" + id + "'");
}

}  // namespace calibra
