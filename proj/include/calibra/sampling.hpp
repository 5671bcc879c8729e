#pragma once

#include <utility>

#include <Eigen/Dense>

namespace calibra {

// Deterministic low-discrepancy streams: Halton radical inverses fed through
// Box-Muller to get isotropic directions.  Everything is a pure function of
// the stream index, so sweeps are reproducible and order-independent.

double radical_inverse(long index, int base);

// Standard normal n-vector for stream element `index` (index >= 1).
Eigen::VectorXd halton_normal(int n, long index);

// Unit vector in R^n.
Eigen::VectorXd halton_unit_vector(int n, long index);

// Orthonormal pair (u, v) wrt the Euclidean inner product.
std::pair<Eigen::VectorXd, Eigen::VectorXd> halton_orthonormal_pair(int n, long index);

}  // namespace calibra
