#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "calibra/forms.hpp"
#include "calibra/g2.hpp"
#include "calibra/kahler.hpp"
#include "calibra/submersion.hpp"

namespace calibra {

// A one-parameter family of fibres Sigma_t = fibre over b(t), where b(t) is
// the base geodesic through b0 with initial velocity `direction`.  The family
// is realized by the fibre parametrization, iota_t(y) = fibre_param(b(t), y),
// and the variation field is the horizontal lift of b'(t) along the fibre.
class FibreVariation {
 public:
  FibreVariation(RiemannianSubmersion rs, Eigen::VectorXd b0, Eigen::VectorXd direction);

  const RiemannianSubmersion& submersion() const { return rs_; }
  const Eigen::VectorXd& base_point() const { return b0_; }
  const Eigen::VectorXd& direction() const { return x_; }

  // b(t), integrated with the geodesic routine (64 steps regardless of t).
  Eigen::VectorXd base_at(double t) const;

  // Z at the fibre point over y: the horizontal lift of `direction`.
  Eigen::VectorXd variation_field(const Eigen::VectorXd& y) const;

  // d/dt iota_t(y) at t = 0 and its covariant t-derivative, both exact from
  // the parametrization jets and the base geodesic equation.
  Eigen::VectorXd family_velocity(const Eigen::VectorXd& y) const;
  Eigen::VectorXd family_acceleration(const Eigen::VectorXd& y) const;

  // g-norm of the vertical part of the family velocity.  Zero whenever the
  // parametrization moves fibre points horizontally, which makes the family
  // velocity coincide with Z.
  double parametrization_defect(const Eigen::VectorXd& y) const;

 private:
  RiemannianSubmersion rs_;
  Eigen::VectorXd b0_, x_;
};

struct VariationReport {
  double first = 0.0;
  double second_analytic = 0.0;
  double second_fd = 0.0;
  // |FD(h) - FD(2h)| for the second difference; large values mean the FD
  // oracle itself is not converged and the comparison should be distrusted.
  double fd_richardson_gap = 0.0;
  // Integral of the exact term in the coassociative formula (G2 reports
  // only); must vanish on a closed fibre.
  double stokes_residual = 0.0;
  // Named integrals summing exactly to second_analytic.
  std::map<std::string, double> terms;
};

// dVol(Sigma_t)/dt at t = 0 by quadrature of -<H, Z> against the fibre
// volume.  Z is horizontal, hence normal to the fibre, so the tangential
// divergence term of the general first-variation formula drops.
double first_variation(const FibreVariation& v, const std::vector<int>& grid);

// d^2 Vol/dt^2 by the six-term second-variation integrand, reported termwise,
// against a symmetric-difference oracle on t -> Vol(Sigma_t).
VariationReport second_variation_riemannian(const FibreVariation& v,
                                            const std::vector<int>& grid);

// Kahler form of the second variation at a minimal Lagrangian fibre: Hodge
// term (Delta zeta, zeta) with zeta = omega(Z, .) restricted to the fibre,
// minus Ric(Z, Z).  The Hodge Laplacian is computed by centred differences on
// the periodic fibre grid; only circle fibres are supported, which covers
// every catalog scenario with this structure.
VariationReport second_variation_kahler(const FibreVariation& v, const KahlerStructure& k,
                                        const std::vector<int>& grid);

// Coassociative form of the second variation on the flat G2 model: integral
// of tau2 wedge gamma_Z minus Ric(Z, Z), where gamma_Z pairs interior(Z, phi)
// with the tangential derivatives of Z.  The exact term d(i_Z tau2 wedge
// i_Z phi) is integrated over the fibre and must come out below 1e-8.
VariationReport second_variation_g2(const FibreVariation& v, const G2Structure& g2,
                                    const AlternatingForm& tau2, const std::vector<int>& grid);
VariationReport second_variation_g2(const FibreVariation& v, const G2Structure& g2,
                                    const std::vector<int>& grid);

// Symmetric differences of t -> Vol(Sigma_t) = fibre_integral(1, b(t)):
// (first, second) at step t_step.  Axis counts below the quadrature minimum
// of 32 are raised to it.
std::pair<double, double> volume_profile_fd(const FibreVariation& v, double t_step,
                                            const std::vector<int>& grid);

}  // namespace calibra
