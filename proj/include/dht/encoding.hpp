#ifndef DHT_ENCODING_HPP_
#define DHT_ENCODING_HPP_

#include <algorithm>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "dht/exponent_region.hpp"
#include "dht/prob.hpp"
#include "dht/separability.hpp"
#include "dht/simplex_grid.hpp"

namespace dht {

// Symbol shuffle r_M: even levels fill 0,1,2,... from the bottom, odd levels
// fill M-1, M-2, ... from the top, so low symbols mean "looks like H=0".
inline int r_m(int m, int k) {
  if (k < 0 || k >= m) throw std::invalid_argument("r_m: k out of range");
  return k / 2 + (m - k) * chi(k);
}

// Nested per-axis decision regions Q^(0) >= Q^(1) >= ... >= Q^(M-1) as masks
// over one simplex grid each.
struct EncoderChains {
  std::vector<std::vector<std::uint8_t>> x;  // x[k][xi] = 1 iff grid point xi in Q_X^(k)
  std::vector<std::vector<std::uint8_t>> y;
};

namespace detail {

inline std::vector<std::uint8_t> box_mask(const SimplexGrid& grid, const Distribution& p0,
                                          const Distribution& p1, const AxisBox& box) {
  std::vector<std::uint8_t> mask(static_cast<size_t>(grid.size()), 0);
  for (int i = 0; i < grid.size(); ++i) {
    const Distribution& q = grid.points[static_cast<size_t>(i)];
    bool in0 = std::isinf(box.r0) || kl_divergence(q, p0) < box.r0 - kStrictBuffer;
    bool in1 = std::isinf(box.r1) || kl_divergence(q, p1) < box.r1 - kStrictBuffer;
    if (box.r0 <= 0.0 || box.r1 <= 0.0) continue;
    mask[static_cast<size_t>(i)] = static_cast<std::uint8_t>(in0 && in1);
  }
  return mask;
}

}  // namespace detail

// Builds the chains either through the closed-form divergence boxes (product
// hypotheses) or by the alternating divergence-to-set recursion on the grid.
inline EncoderChains build_regions(DStarCache& cache, double e0, double e1, int mx, int my,
                                   DecoderVariant variant, bool force_generic = false) {
  const int m = std::min(mx, my);
  if (m < 1) throw std::invalid_argument("build_regions: need at least one symbol");
  const HypothesisPair& h = cache.hypotheses();
  EncoderChains chains;

  if (cache.product_form() && !force_generic) {
    auto rec = cond_indep_chain(h, e0, e1, mx, my, variant);
    auto [px0, py0] = marginals(h.p0);
    auto [px1, py1] = marginals(h.p1);
    for (int k = 0; k < m; ++k) {
      chains.x.push_back(detail::box_mask(cache.gx(), px0, px1, rec.boxes_x[static_cast<size_t>(k)]));
      chains.y.push_back(detail::box_mask(cache.gy(), py0, py1, rec.boxes_y[static_cast<size_t>(k)]));
    }
    return chains;
  }

  const double e[2] = {e0, e1};
  std::vector<std::uint8_t> qx(static_cast<size_t>(cache.gx().size()), 1);
  std::vector<std::uint8_t> qy(static_cast<size_t>(cache.gy().size()), 1);
  if (variant == DecoderVariant::psi_asym) {
    auto [px0, py0] = marginals(h.p0);
    for (int xi = 0; xi < cache.gx().size(); ++xi)
      qx[static_cast<size_t>(xi)] = static_cast<std::uint8_t>(
          kl_divergence(cache.gx().points[static_cast<size_t>(xi)], px0) < e0 - kStrictBuffer);
  }
  chains.x.push_back(qx);
  chains.y.push_back(qy);
  for (int k = 1; k < m; ++k) {
    int i = chi_hat(k, variant);
    std::vector<std::uint8_t> nqx(qx.size(), 0), nqy(qy.size(), 0);
    for (size_t xi = 0; xi < qx.size(); ++xi) {
      if (!qx[xi]) continue;
      for (size_t yi = 0; yi < qy.size(); ++yi)
        if (qy[yi] && cache.get(i, static_cast<int>(xi), static_cast<int>(yi)) <
                          e[i] - kStrictBuffer) {
          nqx[xi] = 1;
          break;
        }
    }
    for (size_t yi = 0; yi < qy.size(); ++yi) {
      if (!qy[yi]) continue;
      for (size_t xi = 0; xi < qx.size(); ++xi)
        if (qx[xi] && cache.get(i, static_cast<int>(xi), static_cast<int>(yi)) <
                          e[i] - kStrictBuffer) {
          nqy[yi] = 1;
          break;
        }
    }
    qx = std::move(nqx);
    qy = std::move(nqy);
    chains.x.push_back(qx);
    chains.y.push_back(qy);
  }
  return chains;
}

// Final-step membership test on built chains: the divergence between the
// innermost regions must reach the final exponent.
inline bool chain_membership(DStarCache& cache, const EncoderChains& chains, double e0,
                             double e1, DecoderVariant variant) {
  const int m = static_cast<int>(chains.x.size());
  const int i = chi_hat(m, variant);
  const double e[2] = {e0, e1};
  const auto& qx = chains.x.back();
  const auto& qy = chains.y.back();
  for (size_t xi = 0; xi < qx.size(); ++xi) {
    if (!qx[xi]) continue;
    for (size_t yi = 0; yi < qy.size(); ++yi)
      if (qy[yi] &&
          cache.get(i, static_cast<int>(xi), static_cast<int>(yi)) < e[i] - kStrictBuffer)
        return false;
  }
  return true;
}

// Level function over a simplex grid realizing one node's type encoder.
struct TypeEncoder {
  std::shared_ptr<const SimplexGrid> grid;
  std::vector<std::vector<std::uint8_t>> chain;  // nested masks, level 0..M-1
  std::vector<int> levels;                       // symbol per grid index
  int m = 0;
  int symbol_count = 0;  // m, or m + 1 when the out-of-chain symbol is used
  DecoderVariant variant = DecoderVariant::psi;
  bool extra_symbol = false;  // psi_asym X side: indices outside Q^(0) emit symbol m
};

inline TypeEncoder build_encoder(std::shared_ptr<const SimplexGrid> grid,
                                 std::vector<std::vector<std::uint8_t>> chain, int m,
                                 DecoderVariant variant, bool extra_symbol) {
  if (static_cast<int>(chain.size()) != m)
    throw std::invalid_argument("build_encoder: chain must have M levels");
  for (int k = 1; k < m; ++k)
    for (size_t i = 0; i < chain[static_cast<size_t>(k)].size(); ++i)
      if (chain[static_cast<size_t>(k)][i] && !chain[static_cast<size_t>(k - 1)][i])
        throw std::invalid_argument("build_encoder: chain is not nested");
  TypeEncoder enc;
  enc.grid = std::move(grid);
  enc.m = m;
  enc.variant = variant;
  enc.extra_symbol = extra_symbol;
  enc.symbol_count = m + (extra_symbol ? 1 : 0);
  enc.levels.assign(chain[0].size(), extra_symbol ? m : r_m(m, 0));
  for (size_t i = 0; i < chain[0].size(); ++i) {
    int deepest = -1;
    for (int k = 0; k < m; ++k)
      if (chain[static_cast<size_t>(k)][i]) deepest = k;
    if (deepest >= 0) enc.levels[i] = r_m(m, deepest);
  }
  enc.chain = std::move(chain);
  return enc;
}

inline int encode_type(const TypeEncoder& enc, const Distribution& q) {
  return enc.levels[static_cast<size_t>(enc.grid->nearest_index(q))];
}

// Convenience: both encoders for a threshold scheme on shared grids.
struct EncoderPair {
  TypeEncoder x;
  TypeEncoder y;
  bool member = false;  // final-step membership of (e0, e1)
};

inline EncoderPair build_type_encoders(DStarCache& cache,
                                       std::shared_ptr<const SimplexGrid> gx,
                                       std::shared_ptr<const SimplexGrid> gy, double e0,
                                       double e1, int mx, int my, DecoderVariant variant,
                                       bool force_generic = false) {
  if (gx.get() != &cache.gx() || gy.get() != &cache.gy())
    throw std::invalid_argument("build_type_encoders: grids must match the cache");
  EncoderChains chains = build_regions(cache, e0, e1, mx, my, variant, force_generic);
  const int m = std::min(mx, my);
  EncoderPair pair;
  pair.x = build_encoder(gx, chains.x, m, variant, variant == DecoderVariant::psi_asym);
  pair.y = build_encoder(gy, chains.y, m, variant, false);
  pair.member = chain_membership(cache, chains, e0, e1, variant);
  return pair;
}

}  // namespace dht

#endif  // DHT_ENCODING_HPP_
