#pragma once

#include <Eigen/Dense>

#include "calibra/forms.hpp"
#include "calibra/g2.hpp"
#include "calibra/kahler.hpp"
#include "calibra/metric.hpp"
#include "calibra/scalar_field.hpp"

namespace calibra {

// Result of a Grassmannian trace minimization.  A nonnegative defect
// certifies plurisubharmonicity at the point for the relevant calibration
// class; the witness is the minimizing calibrated plane.
struct DefectResult {
  double defect = 0.0;
  Plane witness;
  long witness_sample = -1;  // index of the winning start in the sample stream
};

// Minimum of the Levi form over complex lines: canonical coordinate
// directions first, then deterministic low-discrepancy unit vectors, then
// projected-gradient refinement from the best start (step halving on
// non-decrease; ties broken by lowest sample index).
DefectResult kahler_psh_defect(const KahlerStructure& k, const ScalarField& f,
                               const Eigen::VectorXd& p, int samples,
                               int refine_iters = 60);

// Minimum of tr_pi Hess(f) over associative 3-planes, parametrized as
// span{u, v, u x v} over orthonormal pairs; same sampling and refinement
// discipline as above.
DefectResult g2_psh_defect(const G2Structure& g2, const ScalarField& f,
                           const Eigen::VectorXd& p, int samples,
                           int refine_iters = 60);

// Sum of the plane_dim smallest eigenvalues of Hess(f) in a g-orthonormal
// frame (exact, via the generalized eigenproblem).
double p_plane_psh_defect(const MetricField& g, const ScalarField& f,
                          const Eigen::VectorXd& p, int plane_dim);

}  // namespace calibra
