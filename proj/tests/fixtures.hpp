#ifndef DHT_TESTS_FIXTURES_HPP_
#define DHT_TESTS_FIXTURES_HPP_

#include "dht/prob.hpp"

namespace dht::fixtures {

// Binary instance: P(i) puts mass 1/2 on the cell (1-i, 1-i) and 1/6 elsewhere.
inline HypothesisPair ex1() {
  const double s = 1.0 / 6.0;
  JointDistribution p0({{s, s}, {s, 0.5}});
  JointDistribution p1({{0.5, s}, {s, s}});
  return HypothesisPair(p0, p1);
}

// Ternary product-form instance with symmetric X/Y marginals.
inline Distribution ex2_marginal0() { return Distribution{0.125, 0.125, 0.75}; }
inline Distribution ex2_marginal1() { return Distribution{0.375, 0.375, 0.25}; }

inline HypothesisPair ex2() {
  return HypothesisPair(product_joint(ex2_marginal0(), ex2_marginal0()),
                        product_joint(ex2_marginal1(), ex2_marginal1()));
}

// Random strictly positive distribution with entries bounded away from 0.
inline Distribution random_distribution(int dim, std::uint64_t seed, std::uint64_t stream) {
  std::vector<double> p(static_cast<size_t>(dim));
  double total = 0.0;
  for (int z = 0; z < dim; ++z) {
    p[static_cast<size_t>(z)] = 0.05 + uniform01(seed, stream, static_cast<std::uint64_t>(z));
    total += p[static_cast<size_t>(z)];
  }
  for (auto& v : p) v /= total;
  return Distribution(std::move(p));
}

inline JointDistribution random_joint(int nx, int ny, std::uint64_t seed, std::uint64_t stream) {
  std::vector<double> p(static_cast<size_t>(nx) * ny);
  double total = 0.0;
  for (size_t z = 0; z < p.size(); ++z) {
    p[z] = 0.05 + uniform01(seed, stream, static_cast<std::uint64_t>(z));
    total += p[z];
  }
  for (auto& v : p) v /= total;
  return JointDistribution(nx, ny, std::move(p));
}

}  // namespace dht::fixtures

#endif  // DHT_TESTS_FIXTURES_HPP_
