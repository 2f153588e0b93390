#include <algorithm>
#include <cmath>
#include <memory>

#include <doctest.h>

#include "dht/encoding.hpp"
#include "fixtures.hpp"

using namespace dht;

TEST_CASE("symbol shuffle hand values") {
  CHECK(r_m(1, 0) == 0);
  CHECK(r_m(2, 0) == 0);
  CHECK(r_m(2, 1) == 1);
  std::vector<int> r3, r7;
  for (int k = 0; k < 3; ++k) r3.push_back(r_m(3, k));
  for (int k = 0; k < 7; ++k) r7.push_back(r_m(7, k));
  CHECK(r3 == std::vector<int>{0, 2, 1});
  CHECK(r7 == std::vector<int>{0, 6, 1, 5, 2, 4, 3});
  CHECK_THROWS_AS(r_m(3, 3), std::invalid_argument);
  CHECK_THROWS_AS(r_m(3, -1), std::invalid_argument);
}

TEST_CASE("symbol shuffle is a bijection") {
  for (int m = 1; m <= 64; ++m) {
    std::vector<int> vals;
    for (int k = 0; k < m; ++k) vals.push_back(r_m(m, k));
    std::sort(vals.begin(), vals.end());
    for (int k = 0; k < m; ++k) CHECK(vals[static_cast<size_t>(k)] == k);
  }
}

TEST_CASE("threshold decision on shuffled levels recovers the level parity") {
  for (int m = 1; m <= 12; ++m) {
    auto d = threshold_decoder(m, m);
    for (int k0 = 0; k0 < m; ++k0)
      for (int k1 = 0; k1 < m; ++k1)
        CHECK(d.psi(r_m(m, k0), r_m(m, k1)) == chi(std::min(k0, k1)));
  }
}

TEST_CASE("encoder construction validates the chain") {
  auto grid = std::make_shared<SimplexGrid>(2, 4);
  std::vector<std::vector<std::uint8_t>> chain{
      {1, 1, 1, 1, 1}, {0, 1, 1, 1, 0}, {0, 0, 1, 0, 0}};
  auto enc = build_encoder(grid, chain, 3, DecoderVariant::psi, false);
  CHECK(enc.symbol_count == 3);
  // deepest levels 0,1,2,1,0 -> symbols r_3 = 0,2,1,2,0
  CHECK(enc.levels == std::vector<int>{0, 2, 1, 2, 0});

  auto bad = chain;
  bad[2] = {1, 0, 0, 0, 0};  // not contained in level 1
  CHECK_THROWS_AS(build_encoder(grid, bad, 3, DecoderVariant::psi, false),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_encoder(grid, chain, 4, DecoderVariant::psi, false),
                  std::invalid_argument);
}

TEST_CASE("encode_type snaps to the nearest grid point") {
  auto grid = std::make_shared<SimplexGrid>(2, 4);
  std::vector<std::vector<std::uint8_t>> chain{{1, 1, 1, 1, 1}, {0, 0, 1, 1, 1}};
  auto enc = build_encoder(grid, chain, 2, DecoderVariant::psi, false);
  CHECK(encode_type(enc, Distribution{0.95, 0.05}) == 1);  // index 4 is (1, 0)
  CHECK(encode_type(enc, Distribution{0.05, 0.95}) == 0);
  CHECK(encode_type(enc, Distribution{0.45, 0.55}) == 1);  // nearest index 2
}

TEST_CASE("generic grid recursion is contained in the closed-form boxes") {
  auto h = fixtures::ex2();
  SimplexGrid gx(3, 24), gy(3, 24);
  DStarCache cache(h, gx, gy);
  for (int m : {2, 3, 5}) {
    auto boxes = build_regions(cache, 0.3, 0.25, m, m, DecoderVariant::psi, false);
    auto generic = build_regions(cache, 0.3, 0.25, m, m, DecoderVariant::psi, true);
    REQUIRE(boxes.x.size() == static_cast<size_t>(m));
    REQUIRE(generic.x.size() == static_cast<size_t>(m));
    for (int k = 0; k < m; ++k) {
      long long box_count = 0, diff = 0;
      for (size_t i = 0; i < boxes.x[static_cast<size_t>(k)].size(); ++i) {
        CHECK((!generic.x[static_cast<size_t>(k)][i] || boxes.x[static_cast<size_t>(k)][i]));
        box_count += boxes.x[static_cast<size_t>(k)][i];
        diff += boxes.x[static_cast<size_t>(k)][i] != generic.x[static_cast<size_t>(k)][i];
      }
      // the two constructions may only disagree near the region boundary
      CHECK(diff <= box_count / 5 + 8);
      for (size_t i = 0; i < boxes.y[static_cast<size_t>(k)].size(); ++i)
        CHECK((!generic.y[static_cast<size_t>(k)][i] || boxes.y[static_cast<size_t>(k)][i]));
    }
  }
}

TEST_CASE("chains are nested for every variant and build path") {
  auto h = fixtures::ex2();
  SimplexGrid gx(3, 20), gy(3, 20);
  DStarCache cache(h, gx, gy);
  auto check_nested = [](const EncoderChains& c) {
    for (const auto* side : {&c.x, &c.y})
      for (size_t k = 1; k < side->size(); ++k)
        for (size_t i = 0; i < (*side)[k].size(); ++i)
          if ((*side)[k][i]) CHECK((*side)[k - 1][i]);
  };
  for (bool generic : {false, true}) {
    check_nested(build_regions(cache, 0.3, 0.25, 4, 4, DecoderVariant::psi, generic));
    check_nested(build_regions(cache, 0.3, 0.25, 4, 4, DecoderVariant::psi_bar, generic));
    check_nested(build_regions(cache, 0.3, 0.25, 5, 4, DecoderVariant::psi_asym, generic));
  }
}

TEST_CASE("grid membership tracks the closed recursion away from the boundary") {
  auto h = fixtures::ex2();
  auto gx = std::make_shared<SimplexGrid>(3, 40);
  auto gy = std::make_shared<SimplexGrid>(3, 40);
  DStarCache cache(h, *gx, *gy);
  for (int m : {2, 3, 7}) {
    double e0 = 0.3;
    auto pred = [&](double e1) {
      return cond_indep_chain(h, e0, e1, m, m, DecoderVariant::psi).member;
    };
    double boundary = detail::bisect_boundary(pred, 1e-5);
    for (double margin : {-0.1, 0.1}) {
      double e1 = boundary + margin;
      if (e1 <= 0.0) continue;
      auto pair = build_type_encoders(cache, gx, gy, e0, e1, m, m, DecoderVariant::psi);
      CHECK(pair.member == (margin < 0.0));
    }
  }
}

TEST_CASE("reference operating point: seven-level encoder") {
  auto h = fixtures::ex2();
  auto gx = std::make_shared<SimplexGrid>(3, 40);
  auto gy = std::make_shared<SimplexGrid>(3, 40);
  DStarCache cache(h, *gx, *gy);
  const double e0 = 0.3, e1 = 0.25;
  auto pair = build_type_encoders(cache, gx, gy, e0, e1, 7, 7, DecoderVariant::psi);
  CHECK(pair.member);
  CHECK(pair.x.m == 7);
  CHECK(pair.x.symbol_count == 7);
  CHECK(pair.x.chain.size() == 7);
  // the instance is symmetric in X and Y, so the two level functions agree
  CHECK(pair.x.levels == pair.y.levels);
  // at least the outer three levels are non-empty
  for (int k = 0; k < 3; ++k)
    CHECK(std::count(pair.x.chain[static_cast<size_t>(k)].begin(),
                     pair.x.chain[static_cast<size_t>(k)].end(), 1) > 0);

  // cellwise separation: divergence-ball cells force the matching decision
  auto d = threshold_decoder(7, 7);
  for (int xi = 0; xi < gx->size(); ++xi)
    for (int yi = 0; yi < gy->size(); ++yi) {
      int sx = pair.x.levels[static_cast<size_t>(xi)];
      int sy = pair.y.levels[static_cast<size_t>(yi)];
      if (cache.get(0, xi, yi) < e0 - kStrictBuffer) CHECK(d.psi(sx, sy) == 0);
      if (cache.get(1, xi, yi) < e1 - kStrictBuffer) CHECK(d.psi(sx, sy) == 1);
    }
}

TEST_CASE("asymmetric encoder reserves the out-of-region symbol") {
  auto h = fixtures::ex2();
  auto gx = std::make_shared<SimplexGrid>(3, 24);
  auto gy = std::make_shared<SimplexGrid>(3, 24);
  DStarCache cache(h, *gx, *gy);
  auto pair = build_type_encoders(cache, gx, gy, 0.2, 0.2, 3, 2, DecoderVariant::psi_asym);
  CHECK(pair.x.symbol_count == 3);
  CHECK(pair.y.symbol_count == 2);
  CHECK(pair.x.extra_symbol);
  CHECK_FALSE(pair.y.extra_symbol);
  // some x types fall outside the base region and emit the extra symbol
  CHECK(std::count(pair.x.levels.begin(), pair.x.levels.end(), 2) > 0);
  for (size_t i = 0; i < pair.x.levels.size(); ++i)
    if (!pair.x.chain[0][i]) CHECK(pair.x.levels[i] == 2);
  // the extra symbol always decides 1 under the matching threshold decoder
  auto d = threshold_decoder(3, 2);
  for (int sy = 0; sy < 2; ++sy) CHECK(d.psi(2, sy) == 1);
}

TEST_CASE("encoder pair rejects foreign grids") {
  auto h = fixtures::ex2();
  auto gx = std::make_shared<SimplexGrid>(3, 10);
  auto gy = std::make_shared<SimplexGrid>(3, 10);
  auto other = std::make_shared<SimplexGrid>(3, 10);
  DStarCache cache(h, *gx, *gy);
  CHECK_THROWS_AS(build_type_encoders(cache, other, gy, 0.2, 0.2, 2, 2, DecoderVariant::psi),
                  std::invalid_argument);
}
