#ifndef DHT_COUPLING_HPP_
#define DHT_COUPLING_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include "dht/prob.hpp"

namespace dht {

// Result of the constrained I-projection
//   min D(Q || ref)  s.t.  [Q]_X = qx, [Q]_Y = qy.
struct CouplingResult {
  double value = 0.0;            // nats
  JointDistribution argmin;
  int iterations = 0;
  double residual = 0.0;         // max-norm marginal deviation of argmin
  bool converged = true;
};

inline constexpr double kIpfTol = 1e-10;
inline constexpr int kIpfMaxSweeps = 10000;

// Iterative proportional fitting: alternate exact rescaling of rows to qx and
// columns to qy. Each half-sweep is an I-projection onto one marginal
// constraint; the problem is convex with a unique minimizer for positive ref.
inline CouplingResult d_star(const JointDistribution& ref, const Distribution& qx,
                             const Distribution& qy, double tol = kIpfTol) {
  if (qx.dim() != ref.nx || qy.dim() != ref.ny)
    throw std::invalid_argument("d_star: marginal dimension mismatch");
  const int nx = ref.nx, ny = ref.ny;
  std::vector<double> q(ref.p);
  std::vector<double> rowsum(static_cast<size_t>(nx)), colsum(static_cast<size_t>(ny));

  auto compute_residual = [&]() {
    std::fill(rowsum.begin(), rowsum.end(), 0.0);
    std::fill(colsum.begin(), colsum.end(), 0.0);
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y) {
        double v = q[static_cast<size_t>(x) * ny + y];
        rowsum[static_cast<size_t>(x)] += v;
        colsum[static_cast<size_t>(y)] += v;
      }
    double r = 0.0;
    for (int x = 0; x < nx; ++x) r = std::max(r, std::abs(rowsum[static_cast<size_t>(x)] - qx[x]));
    for (int y = 0; y < ny; ++y) r = std::max(r, std::abs(colsum[static_cast<size_t>(y)] - qy[y]));
    return r;
  };

  CouplingResult res;
  res.converged = false;
  for (int it = 0; it < kIpfMaxSweeps; ++it) {
    for (int x = 0; x < nx; ++x) {
      double s = 0.0;
      for (int y = 0; y < ny; ++y) s += q[static_cast<size_t>(x) * ny + y];
      double scale = s > 0.0 ? qx[x] / s : 0.0;
      for (int y = 0; y < ny; ++y) q[static_cast<size_t>(x) * ny + y] *= scale;
    }
    for (int y = 0; y < ny; ++y) {
      double s = 0.0;
      for (int x = 0; x < nx; ++x) s += q[static_cast<size_t>(x) * ny + y];
      double scale = s > 0.0 ? qy[y] / s : 0.0;
      for (int x = 0; x < nx; ++x) q[static_cast<size_t>(x) * ny + y] *= scale;
    }
    res.iterations = it + 1;
    res.residual = compute_residual();
    if (res.residual <= tol) {
      res.converged = true;
      break;
    }
  }

  double total = 0.0;
  for (double v : q) total += v;
  if (total > kZeroEps && std::abs(total - 1.0) > kZeroEps)
    for (double& v : q) v /= total;
  res.argmin = JointDistribution(nx, ny, std::move(q));
  res.value = kl_divergence_joint(res.argmin, ref);
  return res;
}

// Fast path for the optimal value only: when ref is a product distribution the
// minimizer is qx (x) qy and the value splits into marginal divergences.
inline double d_star_value(const JointDistribution& ref, const Distribution& qx,
                           const Distribution& qy, double tol = kIpfTol) {
  return d_star(ref, qx, qy, tol).value;
}

// Independent oracle for 2x2 references: the coupling polytope is the segment
// Q(0,0) = t with t in [max(0, qx0+qy0-1), min(qx0, qy0)]. Exact-to-step scan,
// coarse bracketing pass followed by a fine pass around the best bracket.
inline double d_star_binary_oracle(const JointDistribution& ref, const Distribution& qx,
                                   const Distribution& qy, double step = 1e-6) {
  if (ref.nx != 2 || ref.ny != 2 || qx.dim() != 2 || qy.dim() != 2)
    throw std::invalid_argument("d_star_binary_oracle: binary alphabets required");
  const double lo = std::max(0.0, qx[0] + qy[0] - 1.0);
  const double hi = std::min(qx[0], qy[0]);
  auto objective = [&](double t) {
    double cell[4] = {t, qx[0] - t, qy[0] - t, qx[1] - (qy[0] - t)};
    double s = 0.0;
    for (int z = 0; z < 4; ++z) {
      double v = std::max(cell[z], 0.0);
      double term = kl_term(v, ref.p[static_cast<size_t>(z)]);
      if (std::isinf(term)) return kInf;
      s += term;
    }
    return s;
  };
  auto scan = [&](double a, double b, double st) {
    double best = kInf, best_t = a;
    long long steps = static_cast<long long>(std::ceil((b - a) / st));
    for (long long k = 0; k <= steps; ++k) {
      double t = std::min(a + static_cast<double>(k) * st, b);
      double v = objective(t);
      if (v < best) {
        best = v;
        best_t = t;
      }
    }
    return std::pair<double, double>(best, best_t);
  };
  const double coarse = std::max(step, 1e-4);
  auto [cv, ct] = scan(lo, hi, coarse);
  if (coarse <= step) return cv;
  auto [fv, ft] = scan(std::max(lo, ct - coarse), std::min(hi, ct + coarse), step);
  return std::min(cv, fv);
}

// min over qy_set of D*(ref; qx, qy). Empty set yields the +inf sentinel.
// With short_circuit_below set, returns the first value found at or below the
// threshold (membership tests only need the comparison, not the exact min).
inline double d_star_to_set(const JointDistribution& ref, const Distribution& qx,
                            const std::vector<Distribution>& qy_set,
                            double short_circuit_below = -kInf, double tol = kIpfTol) {
  double best = kInf;
  for (const auto& qy : qy_set) {
    double v = d_star(ref, qx, qy, tol).value;
    best = std::min(best, v);
    if (best <= short_circuit_below) return best;
  }
  return best;
}

}  // namespace dht

#endif  // DHT_COUPLING_HPP_
