// Acceptance gate: one test case per criterion, each printing a PASS/FAIL
// line with its elapsed time so the gate can be read off the log directly.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <cstdio>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <doctest.h>

#include "dht/coupling.hpp"
#include "dht/decision_matrix.hpp"
#include "dht/encoding.hpp"
#include "dht/exponent_region.hpp"
#include "dht/separability.hpp"
#include "dht/simulator.hpp"
#include "fixtures.hpp"

using namespace dht;

namespace {

struct Criterion {
  const char* id;
  double budget_s;
  bool ok = true;
  std::vector<std::string> notes;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  Criterion(const char* id_, double budget) : id(id_), budget_s(budget) {}

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes.push_back(what);
    }
  }
  void note(const std::string& what) { notes.push_back(what); }

  double finish() {
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= budget_s) {
      ok = false;
      notes.push_back("time budget exceeded");
    }
    std::printf("[%s] %s (%.1f s / %.0f s budget)\n", id, ok ? "PASS" : "FAIL", secs,
                budget_s);
    for (const auto& n : notes) std::printf("  - %s\n", n.c_str());
    std::fflush(stdout);
    return secs;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

DecisionMatrix from_code(int mx, int my, std::uint32_t code) {
  DecisionMatrix d(mx, my);
  for (size_t z = 0; z < d.bits.size(); ++z)
    d.bits[z] = static_cast<std::uint8_t>((code >> z) & 1u);
  return d;
}

bool entrywise_monotone(const DecisionMatrix& d) {
  for (int r = 0; r < d.my; ++r)
    for (int c = 0; c < d.mx; ++c) {
      if (r + 1 < d.my && d.at(r, c) > d.at(r + 1, c)) return false;
      if (c + 1 < d.mx && d.at(r, c) > d.at(r, c + 1)) return false;
    }
  return true;
}

// Brute force over all row and column permutations, independent of the
// library's sum-sorting construction.
bool monotone_sortable(const DecisionMatrix& d) {
  std::vector<int> rows(static_cast<size_t>(d.my)), cols(static_cast<size_t>(d.mx));
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);
  do {
    std::sort(cols.begin(), cols.end());
    do {
      DecisionMatrix p(d.mx, d.my);
      for (int r = 0; r < d.my; ++r)
        for (int c = 0; c < d.mx; ++c)
          p.set(r, c, d.at(rows[static_cast<size_t>(r)], cols[static_cast<size_t>(c)]));
      if (entrywise_monotone(p)) return true;
    } while (std::next_permutation(cols.begin(), cols.end()));
  } while (std::next_permutation(rows.begin(), rows.end()));
  return false;
}

void collect_reduction_ends(const DecisionMatrix& d, std::set<DecisionMatrix>& ends,
                            std::set<DecisionMatrix>& visited) {
  if (visited.count(d)) return;
  visited.insert(d);
  if (d.is_trivial()) {
    ends.insert(DecisionMatrix(1, 1));
    return;
  }
  bool stepped = false;
  for (Axis a : {Axis::X, Axis::Y})
    for (int i : {0, 1})
      if (auto next = reduce_step(d, a, i)) {
        stepped = true;
        collect_reduction_ends(*next, ends, visited);
      }
  if (!stepped) ends.insert(d);
}

}  // namespace

TEST_CASE("A1 coupling correctness") {
  Criterion c("A1", 30.0);
  double worst_binary = 0.0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    auto ref = fixtures::random_joint(2, 2, 11, s);
    auto qx = fixtures::random_distribution(2, 13, 2 * s);
    auto qy = fixtures::random_distribution(2, 13, 2 * s + 1);
    worst_binary = std::max(worst_binary, std::abs(d_star(ref, qx, qy).value -
                                                   d_star_binary_oracle(ref, qx, qy)));
  }
  c.expect(worst_binary <= 1e-5, "binary oracle gap " + fmt(worst_binary));
  c.note("max |IPF - scan oracle| over 1000 binary instances: " +
         fmt(worst_binary));

  double worst_split = 0.0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto px = fixtures::random_distribution(3, 17, 2 * s);
    auto py = fixtures::random_distribution(3, 17, 2 * s + 1);
    auto qx = fixtures::random_distribution(3, 19, 2 * s);
    auto qy = fixtures::random_distribution(3, 19, 2 * s + 1);
    double v = d_star(product_joint(px, py), qx, qy).value;
    worst_split =
        std::max(worst_split, std::abs(v - kl_divergence(qx, px) - kl_divergence(qy, py)));
  }
  c.expect(worst_split <= 1e-8, "product additivity gap " + fmt(worst_split));
  c.note("max additivity error over 200 product ternary instances: " +
         fmt(worst_split));
  CHECK(c.ok);
  c.finish();
}

TEST_CASE("A2 decoder combinatorics") {
  Criterion c("A2", 60.0);
  // below the size bound, no decoder is both irreducible and indecomposable
  for (int my = 1; my <= 4; ++my)
    for (int mx = my; static_cast<long long>(mx) * my <= 16; ++mx) {
      if ((mx - 2) * (my - 2) >= 2) continue;
      auto tally = enumerate_classify(mx, my);
      long long n = tally.counts.count(DecoderCategory::irreducible_indecomposable)
                        ? tally.counts.at(DecoderCategory::irreducible_indecomposable)
                        : 0;
      c.expect(n == 0, "irreducible indecomposable count " + std::to_string(n) + " at (" +
                           std::to_string(mx) + "," + std::to_string(my) + ")");
    }
  auto tally44 = enumerate_classify(4, 4);
  long long n44 = tally44.counts.count(DecoderCategory::irreducible_indecomposable)
                      ? tally44.counts.at(DecoderCategory::irreducible_indecomposable)
                      : 0;
  c.expect(n44 >= 1, "no irreducible indecomposable 4x4 decoder found");
  c.note("irreducible indecomposable 4x4 decoders: " + std::to_string(n44));
  auto periodic = classify(DecisionMatrix::parse("1001/0011/0110/1100"));
  c.expect(periodic.category == DecoderCategory::irreducible_indecomposable,
           "periodic 4x4 decoder not classified irreducible indecomposable");
  CHECK(c.ok);
  c.finish();
}

TEST_CASE("A3 complete-reducibility equivalences and reduced-form uniqueness") {
  Criterion c("A3", 60.0);
  for (int my = 1; my <= 3; ++my)
    for (int mx = 1; mx <= 3; ++mx)
      for (std::uint32_t code = 0; code < (1u << (mx * my)); ++code) {
        DecisionMatrix d = from_code(mx, my, code);
        bool s1 = is_completely_reducible_via_reduction(d);
        bool s2 = is_completely_reducible(d);
        bool s3 = monotone_sortable(d);
        if (s1 != s2 || s2 != s3) {
          c.expect(false, "equivalence broken at " + d.to_string());
          break;
        }
      }
  c.note("S1<=>S2<=>S3 exhausted over all matrices up to 3x3");

  long long checked = 0;
  for (int my = 1; my <= 4; ++my)
    for (int mx = 1; mx <= 4; ++mx)
      for (std::uint32_t code = 0; code < (1u << (mx * my)); ++code) {
        DecisionMatrix d = from_code(mx, my, code);
        std::set<DecisionMatrix> ends, visited;
        collect_reduction_ends(d, ends, visited);
        if (ends.size() != 1) {
          c.expect(false, "reduction order changed the endpoint at " + d.to_string());
          break;
        }
        auto rf = reduced_form(d);
        DecisionMatrix expect_end = rf ? *rf : DecisionMatrix(1, 1);
        if (!(*ends.begin() == expect_end)) {
          c.expect(false, "reduced_form disagrees with exhaustive orders at " + d.to_string());
          break;
        }
        ++checked;
      }
  c.note("reduced-form uniqueness over all reduction orders, " + std::to_string(checked) +
         " matrices up to 4x4");
  CHECK(c.ok);
  c.finish();
}

TEST_CASE("A4 seven-level encoder at the reference point") {
  Criterion c("A4", 120.0);
  auto h = fixtures::ex2();
  const double e0 = 0.3, e1 = 0.25;
  c.expect(gamma_recursion(h, e0, e1, 7).member, "(0.3, 0.25) not a member at M = 7");

  auto gx = std::make_shared<SimplexGrid>(3, 60);
  auto gy = std::make_shared<SimplexGrid>(3, 60);
  DStarCache cache(h, *gx, *gy);
  auto pair = build_type_encoders(cache, gx, gy, e0, e1, 7, 7, DecoderVariant::psi);
  c.expect(pair.member, "grid membership test failed at the reference point");
  c.expect(pair.x.m == 7 && static_cast<int>(pair.x.chain.size()) == 7,
           "encoder does not have 7 levels");
  for (size_t k = 1; k < pair.x.chain.size(); ++k)
    for (size_t i = 0; i < pair.x.chain[k].size(); ++i)
      if (pair.x.chain[k][i] && !pair.x.chain[k - 1][i])
        c.expect(false, "chain not nested at level " + std::to_string(k));
  c.expect(pair.x.levels == pair.y.levels, "theta_X and theta_Y differ on this symmetric pair");

  auto d = threshold_decoder(7, 7);
  long long violations = 0;
  for (int xi = 0; xi < gx->size(); ++xi)
    for (int yi = 0; yi < gy->size(); ++yi) {
      int v = d.psi(pair.x.levels[static_cast<size_t>(xi)],
                    pair.y.levels[static_cast<size_t>(yi)]);
      if (cache.get(0, xi, yi) < e0 - kStrictBuffer && v != 0) ++violations;
      if (cache.get(1, xi, yi) < e1 - kStrictBuffer && v != 1) ++violations;
    }
  c.expect(violations == 0,
           "separation property violated at " + std::to_string(violations) + " grid cells");
  c.note("separation checked at all " + std::to_string(gx->size() * gy->size()) +
         " grid cells, resolution 60");
  CHECK(c.ok);
  c.finish();
}

TEST_CASE("A5 four-curve region structure") {
  Criterion c("A5", 600.0);
  auto h = fixtures::ex1();
  const int res = 200;
  auto samples = default_e0_samples(h, 50);
  SimplexGrid gx(2, res), gy(2, res);
  DStarCache cache(h, gx, gy);

  auto local = pointwise_union({region_baselines(h, Baseline::local_x, samples),
                                region_baselines(h, Baseline::local_y, samples)},
                               "local");
  auto onebit = pointwise_union({region_threshold_grid(cache, 2, 2, false, samples),
                                 region_threshold_grid(cache, 2, 2, true, samples)},
                                "one_bit");
  auto onetrit = pointwise_union({region_threshold_grid(cache, 3, 3, false, samples),
                                  region_threshold_grid(cache, 3, 3, true, samples)},
                                 "one_trit");
  auto nondist = region_baselines(h, Baseline::non_distributed, samples);
  auto zerorate = region_baselines(h, Baseline::zero_rate, samples, 1e-4, res);

  const double cell = 2.0 / res;
  for (size_t k = 0; k < samples.size(); ++k) {
    double lo = local.points[k].second, b = onebit.points[k].second;
    double t = onetrit.points[k].second, nd = nondist.points[k].second;
    double zr = zerorate.points[k].second;
    if (lo > b + cell) c.expect(false, "local exceeds one-bit at sample " + std::to_string(k));
    if (b > t + cell) c.expect(false, "one-bit exceeds one-trit at sample " + std::to_string(k));
    if (t > nd + cell)
      c.expect(false, "one-trit exceeds non-distributed at sample " + std::to_string(k));
    if (std::abs(zr - nd) > cell)
      c.expect(false, "zero-rate and non-distributed differ at sample " + std::to_string(k));
  }

  // strict one-trit improvement where the one-bit boundary crosses e1 = e0
  size_t sym = 0;
  double best = kInf;
  for (size_t k = 0; k < samples.size(); ++k) {
    double d = std::abs(onebit.points[k].second - samples[k]);
    if (d < best) {
      best = d;
      sym = k;
    }
  }
  double gap = onetrit.points[sym].second - onebit.points[sym].second;
  c.expect(gap > 1.0 / res, "one-trit gain at the symmetric point is only " +
                                fmt(gap) + " nats");
  c.note("one-trit minus one-bit at the symmetric sample: " + fmt(gap) + " nats");

  auto [px0, py0] = marginals(h.p0);
  auto [px1, py1] = marginals(h.p1);
  double local_end = std::max(lambda_curve(px0, px1, 1e-8), lambda_curve(py0, py1, 1e-8));
  Distribution j0(std::vector<double>(h.p0.p)), j1(std::vector<double>(h.p1.p));
  double nondist_end = lambda_curve(j0, j1, 1e-8);
  c.expect(std::abs(local_end - 0.231049) <= 1e-3,
           "local Stein endpoint " + fmt(local_end));
  c.expect(std::abs(nondist_end - 0.366204) <= 1e-3,
           "non-distributed Stein endpoint " + fmt(nondist_end));
  c.note("Stein endpoints: local " + fmt(local_end) + ", non-distributed " +
         fmt(nondist_end));
  CHECK(c.ok);
  c.finish();
}

TEST_CASE("A6 region identities") {
  Criterion c("A6", 300.0);
  auto h = fixtures::ex1();
  SimplexGrid gx(2, 100), gy(2, 100);
  DStarCache cache(h, gx, gy);
  auto samples = default_e0_samples(h, 20);

  auto r42 = region_threshold_grid(cache, 4, 2, false, samples, 1e-4);
  auto r32 = region_threshold_grid(cache, 3, 2, false, samples, 1e-4);
  auto r32b = region_threshold_grid(cache, 3, 2, true, samples, 1e-4);
  double gap_a = std::max(region_identity_check(r42, r32, 3e-4).max_gap,
                          region_identity_check(r32, r32b, 3e-4).max_gap);
  c.expect(gap_a <= 3e-4, "asymmetric threshold identity gap " + fmt(gap_a));
  c.note("4x2 vs 3x2 vs complemented 3x2 max gap: " + fmt(gap_a) + " nats");

  double gap_b = 0.0;
  for (bool bar : {false, true}) {
    auto boxes = region_onebit_boxes(cache, bar, samples, 1e-4);
    auto grid = region_threshold_grid(cache, 2, 2, bar, samples, 1e-4);
    gap_b = std::max(gap_b, region_identity_check(boxes, grid, 3e-4).max_gap);
  }
  c.expect(gap_b <= 3e-4, "one-bit box identity gap " + fmt(gap_b));
  c.note("box formulation vs alternating recursion max gap: " + fmt(gap_b) +
         " nats");
  CHECK(c.ok);
  c.finish();
}

TEST_CASE("A7 staircase fixture") {
  Criterion c("A7", 10.0);
  auto f = make_staircase_fixture(8);
  c.expect(!threshold_separable(f.a0, f.a1, 4, 4),
           "staircase pair reported separable by the 4x4 threshold decoder");
  GridSet s4 = sub_k(f.a0, f.a1, 4);
  c.expect(s4.count() == 1 && s4.at(4, 3), "unexpected level-4 residual");
  c.expect(verify_labeling(f.a0, f.a1, staircase_decoder(), f.periodic_labeling),
           "periodic labeling rejected under the periodic decoder");
  c.expect(!verify_labeling(f.a0, f.a1, threshold_decoder(4, 4), f.periodic_labeling),
           "periodic labeling wrongly accepted under the threshold decoder");
  CHECK(c.ok);
  c.finish();
}

TEST_CASE("A8 shuffled-level decision identity") {
  Criterion c("A8", 1.0);
  for (int m = 1; m <= 12; ++m) {
    auto d = threshold_decoder(m, m);
    for (int k0 = 0; k0 < m; ++k0)
      for (int k1 = 0; k1 < m; ++k1)
        if (d.psi(r_m(m, k0), r_m(m, k1)) != chi(std::min(k0, k1))) {
          c.expect(false, "identity broken at M=" + std::to_string(m) + " (" +
                              std::to_string(k0) + "," + std::to_string(k1) + ")");
        }
  }
  CHECK(c.ok);
  c.finish();
}

TEST_CASE("A9 Monte Carlo slopes vs theory") {
  Criterion c("A9", 600.0);
  auto h = fixtures::ex1();
  auto gx = std::make_shared<SimplexGrid>(2, 200);
  auto gy = std::make_shared<SimplexGrid>(2, 200);
  DStarCache cache(h, *gx, *gy);
  std::vector<std::int64_t> n_grid{200, 600, 1000, 1400, 2000};

  // The chain construction makes one scheme exponent tiny and the other
  // large, so each hypothesis is measured on the decoder variant whose
  // exponent for that hypothesis sits at a desk-measurable scale.
  for (int i : {0, 1}) {
    DecoderVariant variant = (i == 1) ? DecoderVariant::psi : DecoderVariant::psi_bar;
    auto pair = build_type_encoders(cache, gx, gy, 0.004, 0.004, 2, 2, variant);
    c.expect(pair.member, "operating point not interior for variant " +
                              std::string(to_string(variant)));
    CodingScheme scheme{pair.x, pair.y,
                        (i == 1) ? threshold_decoder(2, 2) : threshold_decoder_bar(2, 2)};
    // theoretical exponent of this concrete scheme from the grid
    double t_exp = kInf;
    for (int xi = 0; xi < gx->size(); ++xi)
      for (int yi = 0; yi < gy->size(); ++yi)
        if (scheme.decoder.psi(pair.x.levels[static_cast<size_t>(xi)],
                               pair.y.levels[static_cast<size_t>(yi)]) != i)
          t_exp = std::min(t_exp, cache.get(i, xi, yi));

    auto est = estimate_exponent(h, scheme, i, n_grid, 50000, 2026 + i, 1'500'000, 50, 1);
    if (est.too_large_to_measure) {
      c.expect(false, "hypothesis " + std::to_string(i) +
                          " error rate unmeasurable; exponent lower bound " +
                          fmt(est.lower_bound));
      continue;
    }
    double rel = std::abs(est.slope - t_exp) / t_exp;
    c.expect(rel <= 0.25, "hypothesis " + std::to_string(i) + " slope " +
                              fmt(est.slope) + " off theory by " +
                              fmt(100.0 * rel) + "%");
    c.note("hypothesis " + std::to_string(i) + ": measured slope " + fmt(est.slope) +
           " vs theory " + fmt(t_exp) + " (" + fmt(100.0 * rel) + "% off)");
  }
  CHECK(c.ok);
  c.finish();
}

TEST_CASE("A10 cross-algorithm boundary agreement") {
  Criterion c("A10", 120.0);
  auto rnd = [](std::uint64_t k) {
    double u = 0.15 + 0.7 * uniform01(4242, 0, k);
    return Distribution{1.0 - u, u};
  };
  HypothesisPair h(product_joint(rnd(0), rnd(1)), product_joint(rnd(2), rnd(3)));
  double stein = kl_divergence_joint(h.p1, h.p0);
  std::vector<double> samples;
  for (int k = 1; k <= 8; ++k) samples.push_back(stein * k / 9.0);
  for (int m : {2, 3}) {
    auto chain = region_condindep(h, m, {DecoderVariant::psi}, samples, 1e-4);
    auto prog = region_threshold_convexprog(h, m, DecoderVariant::psi, samples, 1e-4);
    double gap = region_identity_check(chain, prog, 1e-3).max_gap;
    c.expect(gap <= 1e-3, "M=" + std::to_string(m) + " boundary gap " + fmt(gap));
    c.note("M=" + std::to_string(m) + " max boundary gap: " + fmt(gap) + " nats");
  }
  CHECK(c.ok);
  c.finish();
}
