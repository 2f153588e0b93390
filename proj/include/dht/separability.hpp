#ifndef DHT_SEPARABILITY_HPP_
#define DHT_SEPARABILITY_HPP_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dht/coupling.hpp"
#include "dht/decision_matrix.hpp"
#include "dht/prob.hpp"
#include "dht/simplex_grid.hpp"

namespace dht {

inline constexpr double kStrictBuffer = 1e-9;  // interior buffer for open sets

// Memoized D*_i values over a grid product. Product-form references are
// evaluated through marginal divergences; everything else goes through IPF.
class DStarCache {
 public:
  DStarCache(const HypothesisPair& h, const SimplexGrid& gx, const SimplexGrid& gy)
      : h_(&h), gx_(&gx), gy_(&gy), product_(is_product_form(h)) {
    if (product_) {
      for (int i = 0; i < 2; ++i) {
        auto [px, py] = marginals(h.ref(i));
        klx_[i].resize(static_cast<size_t>(gx.size()));
        kly_[i].resize(static_cast<size_t>(gy.size()));
        for (int xi = 0; xi < gx.size(); ++xi)
          klx_[i][static_cast<size_t>(xi)] = kl_divergence(gx.points[static_cast<size_t>(xi)], px);
        for (int yi = 0; yi < gy.size(); ++yi)
          kly_[i][static_cast<size_t>(yi)] = kl_divergence(gy.points[static_cast<size_t>(yi)], py);
      }
    } else {
      for (int i = 0; i < 2; ++i)
        values_[i].assign(static_cast<size_t>(gx.size()) * gy.size(),
                          std::numeric_limits<double>::quiet_NaN());
    }
  }

  const SimplexGrid& gx() const { return *gx_; }
  const SimplexGrid& gy() const { return *gy_; }
  const HypothesisPair& hypotheses() const { return *h_; }
  bool product_form() const { return product_; }

  double get(int i, int xi, int yi) const {
    if (product_) return klx_[i][static_cast<size_t>(xi)] + kly_[i][static_cast<size_t>(yi)];
    double& slot = values_[i][static_cast<size_t>(xi) * gy_->size() + yi];
    if (std::isnan(slot))
      slot = d_star(h_->ref(i), gx_->points[static_cast<size_t>(xi)],
                    gy_->points[static_cast<size_t>(yi)]).value;
    return slot;
  }

 private:
  const HypothesisPair* h_;
  const SimplexGrid* gx_;
  const SimplexGrid* gy_;
  bool product_;
  std::vector<double> klx_[2], kly_[2];
  mutable std::vector<double> values_[2];
};

// D_i(t) = {(Qx,Qy) : D*_i(Qx,Qy) < t} on the grid, with an interior buffer
// implementing the strict inequality.
inline GridSet divergence_ball_set(DStarCache& cache, int i, double t) {
  GridSet out(cache.gx(), cache.gy());
  if (!(t > 0.0)) return out;
  for (int xi = 0; xi < out.nx(); ++xi)
    for (int yi = 0; yi < out.ny(); ++yi)
      if (cache.get(i, xi, yi) < t - kStrictBuffer) out.set(xi, yi, true);
  return out;
}

namespace detail {
inline GridSet transpose_grid_set(const GridSet& a) {
  GridSet out(*a.gy, *a.gx);
  for (int xi = 0; xi < a.nx(); ++xi)
    for (int yi = 0; yi < a.ny(); ++yi)
      if (a.at(xi, yi)) out.set(yi, xi, true);
  return out;
}
}  // namespace detail

// Separability of the disjoint pair (a, b) by the threshold decoder with
// symbol counts (mx, my): decided by emptiness of the alternating restriction.
// For mx > my the second set is first restricted to a's x-projection.
inline bool threshold_separable(const GridSet& a, const GridSet& b, int mx, int my) {
  if (mx < 1 || my < 1) throw std::invalid_argument("threshold_separable: sizes must be >= 1");
  if (!a.disjoint_from(b))
    throw std::invalid_argument("threshold_separable: sets must be disjoint");
  if (mx < my)
    return threshold_separable(detail::transpose_grid_set(a), detail::transpose_grid_set(b),
                               my, mx);
  if (b.empty()) return true;
  if (mx == my) return sub_k(a, b, mx).empty();
  return sub_k(a, sub_x(b, a), my).empty();
}

// Per-axis symbol assignment on grid indices.
struct Labeling {
  std::vector<int> theta_x;
  std::vector<int> theta_y;
};

// Checks psi(theta_x(Qx), theta_y(Qy)) = i at every cell of set i.
inline bool verify_labeling(const GridSet& a, const GridSet& b, const DecisionMatrix& d,
                            const Labeling& lab) {
  detail::check_shared_grids(a, b);
  if (static_cast<int>(lab.theta_x.size()) != a.nx() ||
      static_cast<int>(lab.theta_y.size()) != a.ny())
    throw std::invalid_argument("verify_labeling: labeling shape mismatch");
  for (int s : lab.theta_x)
    if (s < 0 || s >= d.mx) throw std::invalid_argument("verify_labeling: x symbol out of range");
  for (int s : lab.theta_y)
    if (s < 0 || s >= d.my) throw std::invalid_argument("verify_labeling: y symbol out of range");
  for (int xi = 0; xi < a.nx(); ++xi)
    for (int yi = 0; yi < a.ny(); ++yi) {
      int sx = lab.theta_x[static_cast<size_t>(xi)];
      int sy = lab.theta_y[static_cast<size_t>(yi)];
      if (a.at(xi, yi) && d.psi(sx, sy) != 0) return false;
      if (b.at(xi, yi) && d.psi(sx, sy) != 1) return false;
    }
  return true;
}

enum class SearchStatus { found, proven_impossible, budget_exhausted };

struct SearchResult {
  SearchStatus status = SearchStatus::proven_impossible;
  std::optional<Labeling> labeling;
  long long nodes = 0;
};

namespace detail {

struct CellConstraint {
  int other;     // index of the variable on the opposite axis
  int decision;  // required psi value
};

// Backtracking CSP over axis symbols: variables are grid indices that occur
// in some masked cell, domains are symbol bitmasks, forward checking prunes
// opposite-axis domains, most-constrained variable first. The search is
// exhaustive, so a completed search without a solution is a proof of
// non-separability at this grid; only a budget interrupt is inconclusive.
struct SeparabilitySearch {
  int mx, my, nx, ny;
  const DecisionMatrix* d;
  // var ids: 0..nx-1 are x indices, nx..nx+ny-1 are y indices
  std::vector<std::vector<CellConstraint>> constraints;
  std::vector<std::uint64_t> domain;
  std::vector<int> assignment;
  std::vector<char> active;
  long long budget, nodes = 0;
  bool interrupted = false;

  SeparabilitySearch(const GridSet& a, const GridSet& b, const DecisionMatrix& dec,
                     long long budget_)
      : mx(dec.mx), my(dec.my), nx(a.nx()), ny(a.ny()), d(&dec), budget(budget_) {
    if (mx > 64 || my > 64)
      throw std::invalid_argument("generic_separability_search: at most 64 symbols per axis");
    constraints.resize(static_cast<size_t>(nx + ny));
    domain.assign(static_cast<size_t>(nx + ny), 0);
    assignment.assign(static_cast<size_t>(nx + ny), -1);
    active.assign(static_cast<size_t>(nx + ny), 0);
    for (int v = 0; v < nx; ++v) domain[static_cast<size_t>(v)] = full_mask(mx);
    for (int v = 0; v < ny; ++v) domain[static_cast<size_t>(nx + v)] = full_mask(my);
    for (int xi = 0; xi < nx; ++xi)
      for (int yi = 0; yi < ny; ++yi) {
        int decision = a.at(xi, yi) ? 0 : (b.at(xi, yi) ? 1 : -1);
        if (decision < 0) continue;
        constraints[static_cast<size_t>(xi)].push_back({nx + yi, decision});
        constraints[static_cast<size_t>(nx + yi)].push_back({xi, decision});
        active[static_cast<size_t>(xi)] = active[static_cast<size_t>(nx + yi)] = 1;
      }
  }

  static std::uint64_t full_mask(int m) {
    return m >= 64 ? ~0ULL : ((1ULL << m) - 1);
  }

  bool consistent(int var, int sym, int other, int other_sym, int decision) const {
    int sx = var < nx ? sym : other_sym;
    int sy = var < nx ? other_sym : sym;
    return d->psi(sx, sy) == decision;
  }

  // Symbols of `other` compatible with assigning sym to var.
  std::uint64_t filter_domain(int var, int sym, int other, int decision) const {
    std::uint64_t dom = domain[static_cast<size_t>(other)];
    std::uint64_t out = 0;
    while (dom) {
      int s = std::countr_zero(dom);
      dom &= dom - 1;
      if (consistent(var, sym, other, s, decision)) out |= 1ULL << s;
    }
    return out;
  }

  int pick_unassigned() const {
    int best = -1, best_pop = 65;
    for (int v = 0; v < nx + ny; ++v)
      if (active[static_cast<size_t>(v)] && assignment[static_cast<size_t>(v)] < 0) {
        int pop = std::popcount(domain[static_cast<size_t>(v)]);
        if (pop < best_pop) {
          best_pop = pop;
          best = v;
        }
      }
    return best;
  }

  bool solve() {
    if (nodes >= budget) {
      interrupted = true;
      return false;
    }
    int var = pick_unassigned();
    if (var < 0) return true;
    std::uint64_t dom = domain[static_cast<size_t>(var)];
    while (dom) {
      int sym = std::countr_zero(dom);
      dom &= dom - 1;
      ++nodes;
      assignment[static_cast<size_t>(var)] = sym;
      std::vector<std::pair<int, std::uint64_t>> saved;
      bool feasible = true;
      for (const auto& c : constraints[static_cast<size_t>(var)]) {
        if (assignment[static_cast<size_t>(c.other)] >= 0) {
          if (!consistent(var, sym, c.other, assignment[static_cast<size_t>(c.other)],
                          c.decision)) {
            feasible = false;
            break;
          }
          continue;
        }
        std::uint64_t filtered = filter_domain(var, sym, c.other, c.decision);
        if (filtered != domain[static_cast<size_t>(c.other)]) {
          saved.emplace_back(c.other, domain[static_cast<size_t>(c.other)]);
          domain[static_cast<size_t>(c.other)] = filtered;
          if (filtered == 0) {
            feasible = false;
            break;
          }
        }
      }
      if (feasible && solve()) return true;
      for (auto& [v, old] : saved) domain[static_cast<size_t>(v)] = old;
      assignment[static_cast<size_t>(var)] = -1;
      if (interrupted) return false;
    }
    return false;
  }
};

}  // namespace detail

// Best-effort constructive search for a labeling separating (a, b) under d.
// A completed exhaustive search proves non-separability at this grid; a
// budget interrupt is reported as inconclusive. (At the default budget the
// search is heuristic, not a decision procedure.)
inline SearchResult generic_separability_search(const GridSet& a, const GridSet& b,
                                                const DecisionMatrix& d,
                                                long long budget = 2'000'000) {
  detail::check_shared_grids(a, b);
  if (!a.disjoint_from(b))
    throw std::invalid_argument("generic_separability_search: sets must be disjoint");
  SearchResult res;
  if (b.empty() && a.empty()) {
    res.status = SearchStatus::found;
    res.labeling = Labeling{std::vector<int>(static_cast<size_t>(a.nx()), 0),
                            std::vector<int>(static_cast<size_t>(a.ny()), 0)};
    return res;
  }
  if (b.empty() || a.empty()) {
    int want = b.empty() ? 0 : 1;
    for (int sx = 0; sx < d.mx; ++sx)
      for (int sy = 0; sy < d.my; ++sy)
        if (d.psi(sx, sy) == want) {
          res.status = SearchStatus::found;
          res.labeling = Labeling{std::vector<int>(static_cast<size_t>(a.nx()), sx),
                                  std::vector<int>(static_cast<size_t>(a.ny()), sy)};
          return res;
        }
    res.status = SearchStatus::proven_impossible;
    return res;
  }
  detail::SeparabilitySearch search(a, b, d, budget);
  bool found = search.solve();
  res.nodes = search.nodes;
  if (found) {
    Labeling lab;
    lab.theta_x.assign(static_cast<size_t>(a.nx()), 0);
    lab.theta_y.assign(static_cast<size_t>(a.ny()), 0);
    for (int xi = 0; xi < a.nx(); ++xi)
      if (search.assignment[static_cast<size_t>(xi)] >= 0)
        lab.theta_x[static_cast<size_t>(xi)] = search.assignment[static_cast<size_t>(xi)];
    for (int yi = 0; yi < a.ny(); ++yi)
      if (search.assignment[static_cast<size_t>(a.nx() + yi)] >= 0)
        lab.theta_y[static_cast<size_t>(yi)] = search.assignment[static_cast<size_t>(a.nx() + yi)];
    res.status = SearchStatus::found;
    res.labeling = std::move(lab);
  } else {
    res.status = search.interrupted ? SearchStatus::budget_exhausted
                                    : SearchStatus::proven_impossible;
  }
  return res;
}

// Staircase demo geometry on an s x s index grid (two mirror-image diagonal
// strips): separable by the periodic 4x4 decoder "1001/0011/0110/1100" but
// not by any labeling under the 4x4 threshold decoder.
struct StaircaseFixture {
  std::shared_ptr<SimplexGrid> gx;
  std::shared_ptr<SimplexGrid> gy;
  GridSet a0;
  GridSet a1;
  Labeling periodic_labeling;
};

inline DecisionMatrix staircase_decoder() {
  return DecisionMatrix::parse("1001/0011/0110/1100");
}

inline StaircaseFixture make_staircase_fixture(int s = 8) {
  if (s < 6) throw std::invalid_argument("make_staircase_fixture: need s >= 6");
  StaircaseFixture f;
  f.gx = std::make_shared<SimplexGrid>(2, s - 1);
  f.gy = std::make_shared<SimplexGrid>(2, s - 1);
  f.a0 = GridSet(*f.gx, *f.gy);
  f.a1 = GridSet(*f.gx, *f.gy);
  for (int x = 0; x < s; ++x)
    for (int y = 0; y < s; ++y) {
      if (x - y == 1) f.a0.set(x, y, true);
      if (y - x == 1) f.a1.set(x, y, true);
    }
  f.periodic_labeling.theta_x.resize(static_cast<size_t>(s));
  f.periodic_labeling.theta_y.resize(static_cast<size_t>(s));
  for (int x = 0; x < s; ++x) f.periodic_labeling.theta_x[static_cast<size_t>(x)] = x % 4;
  for (int y = 0; y < s; ++y)
    f.periodic_labeling.theta_y[static_cast<size_t>(y)] = (4 - y % 4) % 4;
  return f;
}

}  // namespace dht

#endif  // DHT_SEPARABILITY_HPP_
