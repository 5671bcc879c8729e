#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "calibra/error.hpp"
#include "calibra/geometry.hpp"
#include "calibra/scalar_field.hpp"
#include "calibra/scenario.hpp"
#include "check_util.hpp"

namespace calibra {

using namespace detail;

namespace {

// One-variable callable with FD/Richardson first and second derivatives.
// Derivatives of the orbit volume are always taken numerically so they stay
// independent of the curvature route through the metric jets.
struct Profile1D {
  Fn f;
  double lo, hi, h0;

  double operator()(double u) const { return f(Eigen::VectorXd::Constant(1, u)); }

  double step(double u) const {
    return std::min(h0, std::min(u - lo, hi - u) / 2.5);
  }
  double d1(double u) const {
    const double h = step(u);
    const auto stencil = [&](double s) {
      return ((*this)(u + s) - (*this)(u - s)) / (2.0 * s);
    };
    return (4.0 * stencil(h) - stencil(2.0 * h)) / 3.0;
  }
  double d2(double u) const {
    const double h = step(u);
    const double v0 = (*this)(u);
    const auto stencil = [&](double s) {
      return ((*this)(u + s) - 2.0 * v0 + (*this)(u - s)) / (s * s);
    };
    return (4.0 * stencil(h) - stencil(2.0 * h)) / 3.0;
  }
};

}  // namespace

void toric_volume_analysis(const CheckContext& c, std::vector<CheckRecord>& out) {
  if (!c.scenario.toric)
    throw ConfigError("scenario '" + c.scenario.id + "' has no toric profile");
  const ToricProfile& tp = *c.scenario.toric;
  const std::string rexpr = c.field_or("profile", tp.radius);
  const std::string aexpr = c.field_or("arc", tp.arc_factor);
  const auto rf = make_field(rexpr, 1);
  const auto af = make_field(aexpr, 1);

  const double lo = tp.domain.lo(0), hi = tp.domain.hi(0);
  const double w = hi - lo;
  const int n = std::max(16, c.grid.empty() ? 512 : c.grid[0]);

  ChartDomain dom2 = ChartDomain::box({lo, 0.0}, {hi, 2.0 * M_PI});
  dom2.set_periodic(1);
  const MetricField surf =
      MetricField::diagonal(dom2, {"(" + aexpr + ")^2", "(" + rexpr + ")^2"});

  const Profile1D vol{
      [rf](const Eigen::VectorXd& u) { return 2.0 * M_PI * rf->value(u); }, lo, hi,
      1e-3 * w};
  const auto point2 = [&](double u) {
    Eigen::VectorXd p(2);
    p << u, 0.3;
    return p;
  };
  const auto arc_jet = [&](double u) { return af->jet(Eigen::VectorXd::Constant(1, u)); };

  // covariant second derivative on the base ([lo,hi], a(u)^2 du^2) of a
  // profile function, for the metrically unit direction
  const auto cov_hess = [&](const Profile1D& F, double u) {
    const Jet a = arc_jet(u);
    return (F.d2(u) - a.g(0) / a.v * F.d1(u)) / (a.v * a.v);
  };

  std::vector<double> us(n), vols(n), dvols(n);
  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  double rmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    us[i] = lo + w * (0.002 + 0.996 * i / (n - 1));
    vols[i] = vol(us[i]);
    dvols[i] = vol.d1(us[i]);
    vmin = std::min(vmin, vols[i]);
    vmax = std::max(vmax, vols[i]);
    rmin = std::min(rmin, vols[i] / (2.0 * M_PI));
  }
  if (rmin <= 1e-12) {
    out.push_back(hypothesis_record("toric_volume", "T8.1", std::max(1e-12, -rmin),
                                    c.tol,
                                    "orbit radius vanishes, the circle action is not free"));
    return;
  }

  // minimal orbits: isolated zeros of Vol' and plateau families
  const double plateau_eps = 1e-9 * std::max(1.0, vmax);
  std::vector<std::pair<double, double>> families;
  std::vector<bool> flat(n);
  for (int i = 0; i < n; ++i) flat[i] = std::abs(dvols[i]) <= plateau_eps;
  for (int i = 0; i < n;) {
    int j = i;
    while (j < n && flat[j]) ++j;
    if (j - i >= 3) families.emplace_back(us[i], us[j - 1]);
    i = std::max(j, i + 1);
  }
  const bool whole_plateau =
      families.size() == 1 && families[0].first == us.front() &&
      families[0].second == us.back();

  std::vector<double> orbits;
  for (int i = 0; i + 1 < n; ++i) {
    if (flat[i] || flat[i + 1]) continue;
    if (dvols[i] * dvols[i + 1] >= 0.0) continue;
    double a = us[i], b = us[i + 1], da = dvols[i];
    for (int it = 0; it < 60 && b - a > 1e-10; ++it) {
      const double m = 0.5 * (a + b), dm = vol.d1(m);
      if (da * dm <= 0.0)
        b = m;
      else {
        a = m;
        da = dm;
      }
    }
    orbits.push_back(0.5 * (a + b));
  }

  {
    double res = 0.0;
    nlohmann::ordered_json fam = nlohmann::ordered_json::array();
    for (const auto& [flo, fhi] : families) {
      fam.push_back({flo, fhi});
      res = std::max(res, std::abs(vol.d1(0.5 * (flo + fhi))) / (2.0 * M_PI));
    }
    std::vector<double> ovols;
    for (double u : orbits) {
      res = std::max(res, std::abs(vol.d1(u)) / (2.0 * M_PI));
      ovols.push_back(vol(u));
    }
    CheckRecord rec = make_record("toric_volume:minimal_orbits", "T8.1", res, c.tol);
    rec.witness["orbits"] = orbits;
    rec.witness["orbit_volumes"] = ovols;
    rec.witness["families"] = std::move(fam);
    rec.witness["whole_domain_plateau"] = whole_plateau;
    rec.witness["volume_range"] = {vmin, vmax};
    rec.witness["endpoint_derivatives"] = {dvols.front(), dvols.back()};
    out.push_back(std::move(rec));
  }

  // at minimal orbits the Ricci curvature of the horizontal direction equals
  // the base Hessian of -log Vol
  std::vector<double> id_points = orbits;
  for (const auto& [flo, fhi] : families) id_points.push_back(0.5 * (flo + fhi));
  const Profile1D neg_log_vol{
      [&vol](const Eigen::VectorXd& u) { return -std::log(vol(u(0))); }, lo, hi,
      1e-3 * w};
  if (id_points.empty()) {
    out.push_back(vacuous_record("toric_volume:ricci_identity", "T8.1", c.tol,
                                 "no minimal orbits detected"));
  } else {
    double res = 0.0;
    nlohmann::ordered_json detail = nlohmann::ordered_json::array();
    for (double u : id_points) {
      const CurvaturePack cp = curvature(surf, point2(u));
      const Jet a = arc_jet(u);
      const double ric = cp.ricci(0, 0) / (a.v * a.v);
      const double hess = cov_hess(neg_log_vol, u);
      res = std::max(res, std::abs(ric - hess));
      nlohmann::ordered_json entry;
      entry["u"] = u;
      entry["ricci"] = ric;
      entry["hessian_neg_log_vol"] = hess;
      detail.push_back(std::move(entry));
    }
    CheckRecord rec = make_record("toric_volume:ricci_identity", "T8.1", res, c.tol);
    rec.witness["points"] = std::move(detail);
    out.push_back(std::move(rec));
  }

  // global identity: scalar curvature of the surface against the base
  // Laplacian of the orbit volume
  {
    std::vector<double> sweep = id_points;
    const int m = 17;
    for (int i = 0; i < m; ++i) sweep.push_back(lo + w * (0.03 + 0.94 * i / (m - 1)));
    double res = 0.0, worst_u = sweep.front();
    for (double u : sweep) {
      const double s = curvature(surf, point2(u)).scalar;
      const double lap = cov_hess(vol, u);
      const double r = std::abs(s + 2.0 * lap / vol(u));
      if (r > res) {
        res = r;
        worst_u = u;
      }
    }
    CheckRecord rec = make_record("toric_volume:scalar_identity", "T8.1", res, c.tol);
    rec.witness["points"] = static_cast<int>(sweep.size());
    rec.witness["worst_u"] = worst_u;
    out.push_back(std::move(rec));
  }

  // sign of the Ricci curvature classifies each isolated minimal orbit
  {
    nlohmann::ordered_json detail = nlohmann::ordered_json::array();
    double res = 0.0;
    double min_margin = std::numeric_limits<double>::infinity();
    int classified = 0;
    for (double u : orbits) {
      const CurvaturePack cp = curvature(surf, point2(u));
      const Jet a = arc_jet(u);
      const double ric = cp.ricci(0, 0) / (a.v * a.v);
      const double hv = cov_hess(vol, u);
      nlohmann::ordered_json entry;
      entry["u"] = u;
      entry["ricci"] = ric;
      entry["fd_hess_vol"] = hv;
      if (ric < -kHypTol) {
        entry["classified"] = "strict_local_min";
        res = std::max(res, -hv);
        min_margin = std::min(min_margin, hv);
        ++classified;
      } else if (ric > kHypTol) {
        entry["classified"] = "strict_local_max";
        res = std::max(res, hv);
        min_margin = std::min(min_margin, -hv);
        ++classified;
      } else {
        entry["classified"] = "degenerate";
      }
      detail.push_back(std::move(entry));
    }
    if (classified == 0) {
      out.push_back(vacuous_record("toric_volume:classification", "C8.2", c.tol,
                                   "no minimal orbit with nonzero Ricci curvature"));
    } else {
      int gmax = 0;
      for (int i = 1; i < n; ++i)
        if (vols[i] > vols[gmax]) gmax = i;
      bool max_is_orbit = false;
      for (double u : orbits) max_is_orbit = max_is_orbit || std::abs(u - us[gmax]) < 2.0 * w / n;
      CheckRecord rec = make_record("toric_volume:classification", "C8.2",
                                    std::max(0.0, res), c.tol);
      rec.witness["orbits"] = std::move(detail);
      rec.witness["min_margin"] = min_margin;
      rec.witness["global_max_u"] = us[gmax];
      rec.witness["global_max_vol"] = vols[gmax];
      rec.witness["global_max_at_boundary"] = gmax == 0 || gmax == n - 1;
      rec.witness["global_max_is_minimal_orbit"] = max_is_orbit;
      out.push_back(std::move(rec));
    }
  }

  // constant volume across the whole family forces a flat surface
  if (!whole_plateau) {
    out.push_back(vacuous_record("toric_volume:ricci_flat", "T8.1", c.tol,
                                 "orbit volume is not constant"));
  } else {
    double res = 0.0;
    const int m = 33;
    for (int i = 0; i < m; ++i) {
      const double u = lo + w * (0.03 + 0.94 * i / (m - 1));
      res = std::max(res, curvature(surf, point2(u)).ricci.cwiseAbs().maxCoeff());
    }
    CheckRecord rec = make_record("toric_volume:ricci_flat", "T8.1", res, c.tol);
    rec.witness["sample_points"] = m;
    out.push_back(std::move(rec));
  }
}

}  // namespace calibra
