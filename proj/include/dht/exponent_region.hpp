#ifndef DHT_EXPONENT_REGION_HPP_
#define DHT_EXPONENT_REGION_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dht/coupling.hpp"
#include "dht/prob.hpp"
#include "dht/separability.hpp"
#include "dht/simplex_grid.hpp"

namespace dht {

// Sampled boundary of one exponent-region constraint: E1 as a function of E0.
struct RegionBoundary {
  std::vector<std::pair<double, double>> points;  // (e0, e1), nats
  std::string constraint;
  std::string method;
  double uncertainty = 0.0;  // nats, one-sided band per point
};

namespace detail {

inline Distribution geometric_mixture(const Distribution& a, const Distribution& b, double s) {
  std::vector<double> w(static_cast<size_t>(a.dim()));
  double total = 0.0;
  for (int z = 0; z < a.dim(); ++z) {
    w[static_cast<size_t>(z)] = std::pow(a[z], 1.0 - s) * std::pow(b[z], s);
    total += w[static_cast<size_t>(z)];
  }
  for (auto& v : w) v /= total;
  return Distribution(std::move(w));
}

}  // namespace detail

// Optimal local trade-off: inf { D(Q || p_i) : D(Q || p_other) < t }. The
// constrained minimizer lies on the geometric-mixture path between p_i and
// p_other, so a bisection along the path suffices. t = +inf is handled as the
// whole-simplex flag and returns exactly 0.
inline double lambda_curve(const Distribution& p_i, const Distribution& p_other, double t) {
  if (!(t > 0.0)) return kInf;
  if (std::isinf(t)) return 0.0;
  double forward = kl_divergence(p_i, p_other);
  if (forward < t) return 0.0;
  double lo = 0.0, hi = 1.0;  // path parameter: s=0 at p_i, s=1 at p_other
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    double div = kl_divergence(detail::geometric_mixture(p_i, p_other, mid), p_other);
    (div >= t ? lo : hi) = mid;
  }
  Distribution q = detail::geometric_mixture(p_i, p_other, 0.5 * (lo + hi));
  return kl_divergence(q, p_i);
}

// Spec'd entry point: i selects which of (px0, px1) is the divergence target.
inline double lambda_local(const Distribution& px0, const Distribution& px1, int i, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("lambda_local: t must be > 0");
  const Distribution& p_i = (i == 0) ? px0 : px1;
  const Distribution& p_other = (i == 0) ? px1 : px0;
  return lambda_curve(p_i, p_other, t);
}

struct LocalExponentCurve {
  Distribution p0;
  Distribution p1;
  int i = 0;
  double operator()(double t) const { return lambda_local(p0, p1, i, t); }
};

enum class DecoderVariant { psi, psi_bar, psi_asym };

inline const char* to_string(DecoderVariant v) {
  switch (v) {
    case DecoderVariant::psi: return "psi";
    case DecoderVariant::psi_bar: return "psi_bar";
    case DecoderVariant::psi_asym: return "psi_asym";
  }
  return "?";
}

inline int chi(long long k) { return static_cast<int>(k & 1); }

inline int chi_hat(long long k, DecoderVariant v) {
  return v == DecoderVariant::psi_bar ? 1 - chi(k) : chi(k);
}

// A divergence box on one marginal simplex: the intersection of strict balls
// of radius r0 around the H=0 marginal and r1 around the H=1 marginal.
// +inf radius means the whole simplex (no constraint).
struct AxisBox {
  double r0 = kInf;
  double r1 = kInf;
  double radius(int i) const { return i == 0 ? r0 : r1; }
  void set_radius(int i, double v) { (i == 0 ? r0 : r1) = v; }
};

// inf over the box of D(q || p^(i)). The minimizing constraint is the ball
// around the opposite center, so the value is the lambda curve at that
// radius; the same-center radius only decides emptiness.
inline double box_inf(const Distribution& p0, const Distribution& p1, const AxisBox& box,
                      int i) {
  double r_same = box.radius(i), r_other = box.radius(1 - i);
  if (!(r_same > 0.0) || !(r_other > 0.0)) return kInf;  // empty box
  const Distribution& p_i = (i == 0) ? p0 : p1;
  const Distribution& p_o = (i == 0) ? p1 : p0;
  double v = lambda_curve(p_i, p_o, r_other);
  if (v >= r_same) return kInf;  // balls do not intersect
  return v;
}

struct CondIndepChain {
  std::vector<AxisBox> boxes_x;  // boxes_x[k] = Q_X^(k), k = 0..M-1
  std::vector<AxisBox> boxes_y;
  std::vector<double> gamma_x;   // gamma_x[k-1] = gamma_X^(k), k = 1..M
  std::vector<double> gamma_y;
  bool member = false;
};

// Closed recursion for conditionally independent hypotheses: the nested
// decision regions are divergence boxes whose radii follow the alternating
// gamma recursion; membership is decided by the final-step divergence test.
inline CondIndepChain cond_indep_chain(const HypothesisPair& h, double e0, double e1, int mx,
                                       int my, DecoderVariant variant) {
  if (!is_product_form(h))
    throw std::invalid_argument("cond_indep_chain: hypotheses must be in product form");
  if (mx < 1 || my < 1) throw std::invalid_argument("cond_indep_chain: sizes must be >= 1");
  if (variant == DecoderVariant::psi_asym && mx <= my)
    throw std::invalid_argument("cond_indep_chain: psi_asym requires mx > my");
  if (variant != DecoderVariant::psi_asym && mx != my)
    throw std::invalid_argument("cond_indep_chain: psi/psi_bar require mx == my");
  auto [px0, py0] = marginals(h.p0);
  auto [px1, py1] = marginals(h.p1);
  const int m = std::min(mx, my);
  const double e[2] = {e0, e1};

  CondIndepChain chain;
  AxisBox bx, by;
  if (variant == DecoderVariant::psi_asym) bx.r0 = e0;
  chain.boxes_x.push_back(bx);
  chain.boxes_y.push_back(by);
  for (int k = 1; k < m; ++k) {
    int i = chi_hat(k, variant);
    double lam_x = box_inf(px0, px1, bx, i);
    double lam_y = box_inf(py0, py1, by, i);
    double gx = e[i] - lam_y;  // may be -inf when the other chain is empty
    double gy = e[i] - lam_x;
    chain.gamma_x.push_back(gx);
    chain.gamma_y.push_back(gy);
    bx.set_radius(i, std::min(bx.radius(i), gx));
    by.set_radius(i, std::min(by.radius(i), gy));
    chain.boxes_x.push_back(bx);
    chain.boxes_y.push_back(by);
  }
  int i_final = chi_hat(m, variant);
  double lam_x = box_inf(px0, px1, bx, i_final);
  double lam_y = box_inf(py0, py1, by, i_final);
  chain.gamma_x.push_back(e[i_final] - lam_y);
  chain.gamma_y.push_back(e[i_final] - lam_x);
  // gamma_X^(M) + gamma_Y^(M) - E <= 0  <=>  lam_x + lam_y >= E
  chain.member = lam_x + lam_y >= e[i_final] - 1e-12;
  return chain;
}

struct GammaRecursionResult {
  std::vector<double> gamma_x;  // gamma_X^(1..M)
  std::vector<double> gamma_y;
  bool member = false;
};

inline GammaRecursionResult gamma_recursion(const HypothesisPair& h, double e0, double e1,
                                            int m) {
  auto chain = cond_indep_chain(h, e0, e1, m, m, DecoderVariant::psi);
  return {std::move(chain.gamma_x), std::move(chain.gamma_y), chain.member};
}

namespace detail {

// Largest e1 with pred(e1) true, given pred monotone (true below, false
// above). Returns hi_cap when pred holds everywhere below it.
inline double bisect_boundary(const std::function<bool(double)>& pred, double tol,
                              double hi_cap = 64.0) {
  if (!pred(0.0)) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (hi < hi_cap && pred(hi)) {
    lo = hi;
    hi *= 2.0;
  }
  if (hi >= hi_cap && pred(hi)) return hi_cap;
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    (pred(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Default E0 sample grid: n points from just above 0 to the Stein endpoint
// D(P1 || P0) of the instance (the largest E0 with positive boundary E1).
inline std::vector<double> default_e0_samples(const HypothesisPair& h, int n = 50) {
  double stein = kl_divergence_joint(h.p1, h.p0);
  std::vector<double> out;
  for (int k = 1; k <= n; ++k)
    out.push_back(stein * static_cast<double>(k) / static_cast<double>(n));
  return out;
}

inline RegionBoundary region_condindep(const HypothesisPair& h, int m,
                                       const std::vector<DecoderVariant>& decoders,
                                       const std::vector<double>& e0_samples,
                                       double tol = 1e-4) {
  RegionBoundary out;
  out.constraint = "condindep_M" + std::to_string(m);
  out.method = "gamma_recursion";
  out.uncertainty = tol;
  for (double e0 : e0_samples) {
    double best = 0.0;
    for (DecoderVariant v : decoders) {
      int mx = (v == DecoderVariant::psi_asym) ? m + 1 : m;
      auto pred = [&](double e1) { return cond_indep_chain(h, e0, e1, mx, m, v).member; };
      best = std::max(best, detail::bisect_boundary(pred, tol));
    }
    out.points.emplace_back(e0, best);
  }
  return out;
}

// ---- Grid-oracle threshold regions -----------------------------------------

// E[psi_{mx,my}] (or its complement variant) on the discretized simplex:
// boundary per e0 by bisection on the emptiness of the alternating
// restriction of the divergence-ball sets.
inline RegionBoundary region_threshold_grid(DStarCache& cache, int mx, int my, bool bar,
                                            const std::vector<double>& e0_samples,
                                            double tol = 1e-4) {
  RegionBoundary out;
  out.constraint = std::string(bar ? "psi_bar_" : "psi_") + std::to_string(mx) + "x" +
                   std::to_string(my);
  out.method = "grid_recursion_r" + std::to_string(cache.gx().resolution);
  out.uncertainty = 1.0 / cache.gx().resolution;
  for (double e0 : e0_samples) {
    GridSet d0 = divergence_ball_set(cache, 0, e0);
    auto pred = [&](double e1) {
      GridSet d1 = divergence_ball_set(cache, 1, e1);
      if (!d0.disjoint_from(d1)) return false;
      return bar ? threshold_separable(d1, d0, mx, my) : threshold_separable(d0, d1, mx, my);
    };
    out.points.emplace_back(e0, detail::bisect_boundary(pred, tol));
  }
  return out;
}

// One-bit membership through the divergence-box formulation: the decide-1
// region is the box around the H=1 marginals, so (e0, e1) is achievable by
// psi_{2,2} iff D_0(e0) avoids the box B_1(e1) (and symmetrically for the
// complement decoder).
inline RegionBoundary region_onebit_boxes(DStarCache& cache, bool bar,
                                          const std::vector<double>& e0_samples,
                                          double tol = 1e-4) {
  RegionBoundary out;
  out.constraint = bar ? "psi_bar_2x2" : "psi_2x2";
  out.method = "box_formulation_r" + std::to_string(cache.gx().resolution);
  out.uncertainty = 1.0 / cache.gx().resolution;
  auto [px0, py0] = marginals(cache.hypotheses().p0);
  auto [px1, py1] = marginals(cache.hypotheses().p1);
  const Distribution& bx = bar ? px0 : px1;
  const Distribution& by = bar ? py0 : py1;
  const int ball_i = bar ? 1 : 0;  // divergence-ball set that must avoid the box
  // psi tests D_0(e0) against B_1(e1); the complement tests D_1(e1) against B_0(e0)
  for (double e0 : e0_samples) {
    auto pred = [&](double e1) {
      double t_ball = bar ? e1 : e0;
      double t_box = bar ? e0 : e1;
      GridSet ball = divergence_ball_set(cache, ball_i, t_ball);
      for (int xi = 0; xi < ball.nx(); ++xi)
        for (int yi = 0; yi < ball.ny(); ++yi)
          if (ball.at(xi, yi) &&
              kl_divergence(cache.gx().points[static_cast<size_t>(xi)], bx) <
                  t_box - kStrictBuffer &&
              kl_divergence(cache.gy().points[static_cast<size_t>(yi)], by) <
                  t_box - kStrictBuffer)
            return false;
      return true;
    };
    out.points.emplace_back(e0, detail::bisect_boundary(pred, tol));
  }
  return out;
}

inline RegionBoundary pointwise_union(const std::vector<RegionBoundary>& parts,
                                      const std::string& constraint) {
  if (parts.empty()) throw std::invalid_argument("pointwise_union: no parts");
  RegionBoundary out = parts.front();
  out.constraint = constraint;
  for (size_t j = 1; j < parts.size(); ++j) {
    if (parts[j].points.size() != out.points.size())
      throw std::invalid_argument("pointwise_union: sample grids differ");
    for (size_t k = 0; k < out.points.size(); ++k)
      out.points[k].second = std::max(out.points[k].second, parts[j].points[k].second);
    out.uncertainty = std::max(out.uncertainty, parts[j].uncertainty);
  }
  return out;
}

// ---- Baselines -------------------------------------------------------------

enum class Baseline { local_x, local_y, zero_rate, non_distributed };

inline const char* to_string(Baseline b) {
  switch (b) {
    case Baseline::local_x: return "local_x";
    case Baseline::local_y: return "local_y";
    case Baseline::zero_rate: return "zero_rate";
    case Baseline::non_distributed: return "non_distributed";
  }
  return "?";
}

inline RegionBoundary region_baselines(const HypothesisPair& h, Baseline which,
                                       const std::vector<double>& e0_samples,
                                       double tol = 1e-4, int grid_resolution = 200) {
  RegionBoundary out;
  out.constraint = to_string(which);
  out.uncertainty = tol;
  switch (which) {
    case Baseline::local_x:
    case Baseline::local_y: {
      auto [px0, py0] = marginals(h.p0);
      auto [px1, py1] = marginals(h.p1);
      const Distribution& p0 = (which == Baseline::local_x) ? px0 : py0;
      const Distribution& p1 = (which == Baseline::local_x) ? px1 : py1;
      out.method = "lambda_curve";
      for (double e0 : e0_samples)
        out.points.emplace_back(e0, lambda_curve(p1, p0, e0));
      break;
    }
    case Baseline::non_distributed: {
      // Same lambda trade-off evaluated on the flattened joints.
      Distribution j0(std::vector<double>(h.p0.p));
      Distribution j1(std::vector<double>(h.p1.p));
      out.method = "lambda_curve_joint";
      for (double e0 : e0_samples)
        out.points.emplace_back(e0, lambda_curve(j1, j0, e0));
      break;
    }
    case Baseline::zero_rate: {
      // Unlimited messages: achievable iff the divergence-ball sets are
      // disjoint, so the boundary is the smallest D*_1 inside D_0(e0).
      SimplexGrid gx(h.p0.nx, grid_resolution), gy(h.p0.ny, grid_resolution);
      DStarCache cache(h, gx, gy);
      out.method = "grid_disjointness_r" + std::to_string(grid_resolution);
      out.uncertainty = 1.0 / grid_resolution;
      for (double e0 : e0_samples) {
        double best = kInf;
        for (int xi = 0; xi < gx.size(); ++xi)
          for (int yi = 0; yi < gy.size(); ++yi)
            if (cache.get(0, xi, yi) < e0 - kStrictBuffer)
              best = std::min(best, cache.get(1, xi, yi));
        out.points.emplace_back(e0, std::isinf(best) ? 64.0 : best);
      }
      break;
    }
  }
  return out;
}

// ---- Convex programs for the binary two- and three-symbol regions ----------

namespace detail {

struct Interval {
  double lo = 0.0, hi = 0.0;
  bool empty = true;
};

inline double binary_kl(double u, const Distribution& p) {
  return kl_divergence(Distribution{1.0 - u, u}, p);
}

// {u : D((1-u, u) || p) <= t} is an interval around p[1].
inline Interval interval_ball(const Distribution& p, double t) {
  Interval iv;
  if (!(t >= 0.0)) return iv;
  double c = p[1];
  iv.empty = false;
  if (std::isinf(t)) {
    iv.lo = 0.0;
    iv.hi = 1.0;
    return iv;
  }
  auto edge = [&](double a, double b) {
    // KL is monotone from b (center, value <= t) toward a; bisect the crossing.
    if (binary_kl(a, p) <= t) return a;
    double lo = a, hi = b;
    for (int it = 0; it < 80; ++it) {
      double mid = 0.5 * (lo + hi);
      (binary_kl(mid, p) > t ? lo : hi) = mid;
    }
    return hi;
  };
  iv.lo = edge(0.0, c);
  iv.hi = edge(1.0, c);
  if (iv.lo > iv.hi) std::swap(iv.lo, iv.hi);
  return iv;
}

inline double golden_min(const std::function<double(double)>& f, double a, double b,
                         double* argmin = nullptr, double tol = 1e-10) {
  constexpr double phi = 0.6180339887498949;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  double xm = 0.5 * (a + b);
  if (argmin) *argmin = xm;
  return f(xm);
}

// min of the jointly convex D*(ref; qx_u, qy_v) over an interval box, by
// alternating exact line minimizations.
inline double min_dstar_over_box(const JointDistribution& ref, Interval ix, Interval iy,
                                 double stop_below = -kInf) {
  if (ix.empty || iy.empty) return kInf;
  auto value = [&](double u, double v) {
    return d_star(ref, Distribution{1.0 - u, u}, Distribution{1.0 - v, v}).value;
  };
  double u = 0.5 * (ix.lo + ix.hi), v = 0.5 * (iy.lo + iy.hi);
  double best = value(u, v);
  for (int sweep = 0; sweep < 24; ++sweep) {
    double prev = best;
    golden_min([&](double uu) { return value(uu, v); }, ix.lo, ix.hi, &u);
    best = golden_min([&](double vv) { return value(u, vv); }, iy.lo, iy.hi, &v);
    if (best <= stop_below || prev - best < 1e-12) break;
  }
  return best;
}

// Membership of (e0, e1) in E[psi_{2,2}] for binary alphabets: the smallest
// D*_0 over the product of the decide-1 marginal balls must reach e0.
inline bool member_psi22_binary(const HypothesisPair& h, double e0, double e1) {
  auto [px1, py1] = marginals(h.p1);
  Interval ix = interval_ball(px1, e1);
  Interval iy = interval_ball(py1, e1);
  if (e1 <= 0.0) return true;  // empty decide-1 region
  return min_dstar_over_box(h.p0, ix, iy, e0 - 1e-8) >= e0 - 1e-9;
}

// Membership in E[psi_{3,3}] for binary alphabets. The level-2 regions are
// sub-intervals of the level-1 balls cut by the convex constraint
// g(qx) = min over the opposite ball of D*_0 <= e0; membership then requires
// min over the level-2 product of D*_1 >= e1.
inline bool member_psi33_binary(const HypothesisPair& h, double e0, double e1) {
  if (e1 <= 0.0) return true;
  auto [px1, py1] = marginals(h.p1);
  Interval ix1 = interval_ball(px1, e1);
  Interval iy1 = interval_ball(py1, e1);

  auto level2 = [&](const Interval& own, const Interval& other, bool own_is_x) -> Interval {
    auto g = [&](double u) {
      auto inner = [&](double v) {
        Distribution qx = own_is_x ? Distribution{1.0 - u, u} : Distribution{1.0 - v, v};
        Distribution qy = own_is_x ? Distribution{1.0 - v, v} : Distribution{1.0 - u, u};
        return d_star(h.p0, qx, qy).value;
      };
      return golden_min(inner, other.lo, other.hi);
    };
    Interval out;
    if (own.empty || other.empty) return out;
    double umin;
    double gmin = golden_min(g, own.lo, own.hi, &umin);
    if (gmin > e0) return out;  // empty level-2 region
    auto edge = [&](double a, double b) {
      if (g(a) <= e0) return a;
      double lo = a, hi = b;
      for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        (g(mid) > e0 ? lo : hi) = mid;
      }
      return hi;
    };
    out.empty = false;
    out.lo = edge(own.lo, umin);
    out.hi = edge(own.hi, umin);
    if (out.lo > out.hi) std::swap(out.lo, out.hi);
    return out;
  };

  Interval ix2 = level2(ix1, iy1, true);
  Interval iy2 = level2(iy1, ix1, false);
  if (ix2.empty || iy2.empty) return true;  // chain collapsed, vacuous final test
  return min_dstar_over_box(h.p1, ix2, iy2, e1 - 1e-8) >= e1 - 1e-9;
}

}  // namespace detail

// Convex-program membership for binary alphabets, M in {2, 3}, psi or its
// complement (the complement is the same program with hypotheses and
// exponents swapped).
inline bool convexprog_member(const HypothesisPair& h, int m, DecoderVariant decoder,
                              double e0, double e1) {
  if (h.p0.nx != 2 || h.p0.ny != 2)
    throw std::invalid_argument("convexprog_member: binary alphabets required");
  if (m != 2 && m != 3)
    throw std::invalid_argument("convexprog_member: M must be 2 or 3");
  if (decoder == DecoderVariant::psi_bar) {
    HypothesisPair swapped(h.p1, h.p0);
    return convexprog_member(swapped, m, DecoderVariant::psi, e1, e0);
  }
  if (decoder != DecoderVariant::psi)
    throw std::invalid_argument("convexprog_member: decoder must be psi or psi_bar");
  return m == 2 ? detail::member_psi22_binary(h, e0, e1)
                : detail::member_psi33_binary(h, e0, e1);
}

inline RegionBoundary region_threshold_convexprog(const HypothesisPair& h, int m,
                                                  DecoderVariant decoder,
                                                  const std::vector<double>& e0_samples,
                                                  double tol = 1e-4) {
  RegionBoundary out;
  out.constraint = std::string(decoder == DecoderVariant::psi_bar ? "psi_bar_" : "psi_") +
                   std::to_string(m) + "x" + std::to_string(m);
  out.method = "convex_program";
  out.uncertainty = tol;
  for (double e0 : e0_samples) {
    auto pred = [&](double e1) { return convexprog_member(h, m, decoder, e0, e1); };
    out.points.emplace_back(e0, detail::bisect_boundary(pred, tol));
  }
  return out;
}

// ---- Identity checks and export -------------------------------------------

struct IdentityReport {
  struct PointVerdict {
    double e0 = 0.0;
    double lhs_e1 = 0.0;
    double rhs_e1 = 0.0;
    bool within_tol = false;
  };
  std::vector<PointVerdict> verdicts;
  bool all_within_tol = true;
  double max_gap = 0.0;
};

inline IdentityReport region_identity_check(const RegionBoundary& lhs,
                                            const RegionBoundary& rhs, double tol) {
  if (lhs.points.size() != rhs.points.size())
    throw std::invalid_argument("region_identity_check: sample grids differ");
  IdentityReport report;
  for (size_t k = 0; k < lhs.points.size(); ++k) {
    if (std::abs(lhs.points[k].first - rhs.points[k].first) > 1e-12)
      throw std::invalid_argument("region_identity_check: e0 grids differ");
    IdentityReport::PointVerdict v;
    v.e0 = lhs.points[k].first;
    v.lhs_e1 = lhs.points[k].second;
    v.rhs_e1 = rhs.points[k].second;
    double gap = std::abs(v.lhs_e1 - v.rhs_e1);
    v.within_tol = gap <= tol;
    report.max_gap = std::max(report.max_gap, gap);
    report.all_within_tol = report.all_within_tol && v.within_tol;
    report.verdicts.push_back(v);
  }
  return report;
}

}  // namespace dht

#endif  // DHT_EXPONENT_REGION_HPP_
