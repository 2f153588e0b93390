#ifndef DHT_SIMPLEX_GRID_HPP_
#define DHT_SIMPLEX_GRID_HPP_

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dht/prob.hpp"

namespace dht {

// All lattice distributions with entries k/resolution, enumerated in
// lexicographic order of their count vectors.
struct SimplexGrid {
  int dim = 0;
  int resolution = 0;
  std::vector<Distribution> points;

  SimplexGrid() = default;
  SimplexGrid(int dim_, int resolution_) : dim(dim_), resolution(resolution_) {
    if (dim < 2 || resolution < 1)
      throw std::invalid_argument("SimplexGrid: need dim >= 2 and resolution >= 1");
    std::vector<int> counts(static_cast<size_t>(dim), 0);
    emit(counts, 0, resolution);
  }

  int size() const { return static_cast<int>(points.size()); }

  // Index of the grid point nearest to q in max-norm; ties break to the
  // lexicographically smallest index.
  int nearest_index(const Distribution& q) const {
    if (q.dim() != dim) throw std::invalid_argument("nearest_index: dimension mismatch");
    if (dim == 2) {
      // points are (k/res, 1 - k/res); ties resolve to the smaller index
      int k = static_cast<int>(std::ceil(q[0] * resolution - 0.5));
      return std::clamp(k, 0, resolution);
    }
    int best = 0;
    double best_d = kInf;
    for (int i = 0; i < size(); ++i) {
      double d = 0.0;
      for (int z = 0; z < dim; ++z)
        d = std::max(d, std::abs(points[static_cast<size_t>(i)][z] - q[z]));
      if (d < best_d - 1e-15) {
        best_d = d;
        best = i;
      }
    }
    return best;
  }

 private:
  void emit(std::vector<int>& counts, int pos, int remaining) {
    if (pos == dim - 1) {
      counts[static_cast<size_t>(pos)] = remaining;
      std::vector<double> p(static_cast<size_t>(dim));
      for (int z = 0; z < dim; ++z)
        p[static_cast<size_t>(z)] =
            static_cast<double>(counts[static_cast<size_t>(z)]) / resolution;
      // renormalize the last entry so the rounded coordinates sum to 1 exactly
      double s = 0.0;
      for (int z = 0; z < dim - 1; ++z) s += p[static_cast<size_t>(z)];
      p[static_cast<size_t>(dim - 1)] = 1.0 - s;
      points.emplace_back(std::move(p));
      return;
    }
    for (int k = 0; k <= remaining; ++k) {
      counts[static_cast<size_t>(pos)] = k;
      emit(counts, pos + 1, remaining - k);
    }
  }
};

// Subset of the product of two simplex grids, stored as a Boolean mask over
// (x-index, y-index).
struct GridSet {
  const SimplexGrid* gx = nullptr;
  const SimplexGrid* gy = nullptr;
  std::vector<std::uint8_t> mask;  // row-major, x-index major

  GridSet() = default;
  GridSet(const SimplexGrid& x, const SimplexGrid& y)
      : gx(&x), gy(&y), mask(static_cast<size_t>(x.size()) * y.size(), 0) {}

  int nx() const { return gx->size(); }
  int ny() const { return gy->size(); }
  std::uint8_t at(int xi, int yi) const { return mask[static_cast<size_t>(xi) * ny() + yi]; }
  void set(int xi, int yi, bool v) {
    mask[static_cast<size_t>(xi) * ny() + yi] = static_cast<std::uint8_t>(v);
  }

  bool empty() const {
    return std::none_of(mask.begin(), mask.end(), [](std::uint8_t b) { return b != 0; });
  }
  long long count() const {
    long long c = 0;
    for (auto b : mask) c += b;
    return c;
  }
  bool disjoint_from(const GridSet& o) const {
    for (size_t z = 0; z < mask.size(); ++z)
      if (mask[z] && o.mask[z]) return false;
    return true;
  }

  std::vector<std::uint8_t> proj_x() const {
    std::vector<std::uint8_t> p(static_cast<size_t>(nx()), 0);
    for (int xi = 0; xi < nx(); ++xi)
      for (int yi = 0; yi < ny(); ++yi)
        if (at(xi, yi)) {
          p[static_cast<size_t>(xi)] = 1;
          break;
        }
    return p;
  }
  std::vector<std::uint8_t> proj_y() const {
    std::vector<std::uint8_t> p(static_cast<size_t>(ny()), 0);
    for (int xi = 0; xi < nx(); ++xi)
      for (int yi = 0; yi < ny(); ++yi)
        if (at(xi, yi)) p[static_cast<size_t>(yi)] = 1;
    return p;
  }

  bool operator==(const GridSet& o) const {
    return gx == o.gx && gy == o.gy && mask == o.mask;
  }
};

namespace detail {
inline void check_shared_grids(const GridSet& a, const GridSet& b) {
  if (a.gx != b.gx || a.gy != b.gy)
    throw std::invalid_argument("GridSet operation: grids must be shared");
}
}  // namespace detail

// a restricted to b's projection cross: {(x,y) in a : x in proj_X(b), y in proj_Y(b)}.
inline GridSet sub(const GridSet& a, const GridSet& b) {
  detail::check_shared_grids(a, b);
  auto px = b.proj_x();
  auto py = b.proj_y();
  GridSet out(*a.gx, *a.gy);
  for (int xi = 0; xi < a.nx(); ++xi) {
    if (!px[static_cast<size_t>(xi)]) continue;
    for (int yi = 0; yi < a.ny(); ++yi)
      if (a.at(xi, yi) && py[static_cast<size_t>(yi)]) out.set(xi, yi, true);
  }
  return out;
}

inline GridSet sub_x(const GridSet& a, const GridSet& b) {
  detail::check_shared_grids(a, b);
  auto px = b.proj_x();
  GridSet out(*a.gx, *a.gy);
  for (int xi = 0; xi < a.nx(); ++xi) {
    if (!px[static_cast<size_t>(xi)]) continue;
    for (int yi = 0; yi < a.ny(); ++yi)
      if (a.at(xi, yi)) out.set(xi, yi, true);
  }
  return out;
}

inline GridSet sub_y(const GridSet& a, const GridSet& b) {
  detail::check_shared_grids(a, b);
  auto py = b.proj_y();
  GridSet out(*a.gx, *a.gy);
  for (int xi = 0; xi < a.nx(); ++xi)
    for (int yi = 0; yi < a.ny(); ++yi)
      if (a.at(xi, yi) && py[static_cast<size_t>(yi)]) out.set(xi, yi, true);
  return out;
}

// Alternating restriction: s_0 = a, s_1 = b, s_{k+2} = s_k restricted by s_{k+1}.
inline GridSet sub_k(const GridSet& a, const GridSet& b, int k) {
  if (k < 0) throw std::invalid_argument("sub_k: k must be >= 0");
  if (k == 0) return a;
  if (k == 1) return b;
  GridSet prev = a, cur = b;
  for (int step = 2; step <= k; ++step) {
    GridSet next = sub(prev, cur);
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

}  // namespace dht

#endif  // DHT_SIMPLEX_GRID_HPP_
