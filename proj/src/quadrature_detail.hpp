#pragma once

// Grid enumeration and deterministic reduction shared by the fibre
// quadrature and the variation integrals.  Implementation detail only; the
// public contracts live under include/calibra.

#include <algorithm>
#include <functional>
#include <future>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "calibra/chart.hpp"
#include "calibra/error.hpp"

namespace calibra::detail {

// Uniform grid nodes over a box.  Periodic axes drop the duplicate endpoint
// (trapezoid weights collapse to a plain mean); non-periodic axes use cell
// midpoints so evaluation never touches the boundary.
inline std::vector<Eigen::VectorXd> grid_nodes(const ChartDomain& d,
                                               const std::vector<int>& grid) {
  const int k = d.dim();
  if (static_cast<int>(grid.size()) != k)
    throw ConfigError("grid has " + std::to_string(grid.size()) + " counts for a " +
                      std::to_string(k) + "-dimensional box");
  long total = 1;
  for (int c : grid) {
    if (c < 1) throw ConfigError("grid counts must be positive");
    total *= c;
  }
  std::vector<Eigen::VectorXd> nodes;
  nodes.reserve(total);
  Eigen::VectorXd y(k);
  std::vector<int> idx(k, 0);
  for (long t = 0; t < total; ++t) {
    for (int i = 0; i < k; ++i) {
      const double step = d.width(i) / grid[i];
      y(i) = d.lo(i) + (d.periodic[i] ? idx[i] * step : (idx[i] + 0.5) * step);
    }
    nodes.push_back(y);
    for (int i = k - 1; i >= 0; --i) {
      if (++idx[i] < grid[i]) break;
      idx[i] = 0;
    }
  }
  return nodes;
}

inline void require_compact_fibre(const ChartDomain& d, const char* op) {
  for (int i = 0; i < d.dim(); ++i)
    if (!d.periodic[i])
      throw FibreNotCompactError(std::string(op) +
                                 " needs a compact fibre, but fibre coordinate y" +
                                 std::to_string(i + 1) + " is not periodic");
}

// Deterministic pairwise tree reduction; the result does not depend on how
// the values were produced, only on their order.
inline double pairwise_sum(const double* a, size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += a[i];
    return s;
  }
  const size_t half = n / 2;
  return pairwise_sum(a, half) + pairwise_sum(a + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& a) {
  return pairwise_sum(a.data(), a.size());
}

// Run fn over [0, n), splitting across threads.  Workers own disjoint index
// ranges, so anything written at index i matches a serial sweep.
inline void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
  unsigned workers = std::min<unsigned>(std::thread::hardware_concurrency(), 8);
  if (workers < 2 || n < 1024) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const size_t chunk = (n + workers - 1) / workers;
  std::vector<std::future<void>> jobs;
  for (unsigned w = 0; w < workers; ++w) {
    const size_t begin = w * chunk, end = std::min(n, begin + chunk);
    if (begin >= end) break;
    jobs.push_back(std::async(std::launch::async, [&fn, begin, end] {
      for (size_t i = begin; i < end; ++i) fn(i);
    }));
  }
  for (auto& j : jobs) j.get();
}

inline void parallel_fill(size_t n, std::vector<double>& out,
                          const std::function<double(size_t)>& fn) {
  out.resize(n);
  parallel_for(n, [&out, &fn](size_t i) { out[i] = fn(i); });
}

}  // namespace calibra::detail
