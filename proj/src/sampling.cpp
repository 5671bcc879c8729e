#include "calibra/sampling.hpp"

#include <cmath>

#include "calibra/error.hpp"

namespace calibra {

namespace {
const int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                       31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
}

double radical_inverse(long index, int base) {
  double inv = 1.0 / base, result = 0.0, frac = inv;
  while (index > 0) {
    result += (index % base) * frac;
    index /= base;
    frac *= inv;
  }
  return result;
}

Eigen::VectorXd halton_normal(int n, long index) {
  if (index < 1) throw Error("halton stream index must be >= 1");
  const int pairs = (n + 1) / 2;
  if (2 * pairs > static_cast<int>(sizeof(kPrimes) / sizeof(kPrimes[0])))
    throw Error("halton stream dimension too large");
  Eigen::VectorXd z(n);
  for (int p = 0; p < pairs; ++p) {
    // u1 in (0,1): radical inverses of positive indices never hit 0, so the
    // logarithm below is safe.
    const double u1 = radical_inverse(index, kPrimes[2 * p]);
    const double u2 = radical_inverse(index, kPrimes[2 * p + 1]);
    const double rho = std::sqrt(-2.0 * std::log(u1));
    z(2 * p) = rho * std::cos(2.0 * M_PI * u2);
    if (2 * p + 1 < n) z(2 * p + 1) = rho * std::sin(2.0 * M_PI * u2);
  }
  return z;
}

Eigen::VectorXd halton_unit_vector(int n, long index) {
  Eigen::VectorXd z = halton_normal(n, index);
  const double nz = z.norm();
  if (nz < 1e-12) return Eigen::VectorXd::Unit(n, 0);
  return z / nz;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> halton_orthonormal_pair(int n, long index) {
  Eigen::VectorXd z = halton_normal(2 * n, index);
  Eigen::VectorXd u = z.head(n), w = z.tail(n);
  u.normalize();
  w -= w.dot(u) * u;
  if (w.norm() < 1e-10) {
    // Degenerate draw: fall back to the first coordinate direction not
    // parallel to u.  Deterministic and vanishingly rare.
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Unit(n, i);
      e -= e.dot(u) * u;
      if (e.norm() > 0.5) {
        w = e;
        break;
      }
    }
  }
  w.normalize();
  return {u, w};
}

}  // namespace calibra
