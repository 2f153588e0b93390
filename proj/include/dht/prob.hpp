#ifndef DHT_PROB_HPP_
#define DHT_PROB_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dht {

inline constexpr double kSumTol = 1e-12;
inline constexpr double kZeroEps = 1e-15;   // entries below this are exact zeros
inline constexpr double kPosMin = 1e-12;    // strict-positivity floor for hypotheses
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Probability vector on a finite alphabet. Values in nats throughout.
struct Distribution {
  std::vector<double> p;

  Distribution() = default;
  explicit Distribution(std::vector<double> probs) : p(std::move(probs)) {
    validate();
  }
  Distribution(std::initializer_list<double> probs) : p(probs) { validate(); }

  int dim() const { return static_cast<int>(p.size()); }
  double operator[](int z) const { return p[static_cast<size_t>(z)]; }

  void validate() const {
    if (p.empty()) throw std::invalid_argument("Distribution: empty vector");
    double s = 0.0;
    for (double v : p) {
      if (!(v >= 0.0)) throw std::invalid_argument("Distribution: negative entry");
      s += v;
    }
    if (std::abs(s - 1.0) > kSumTol)
      throw std::invalid_argument("Distribution: entries sum to " + std::to_string(s));
  }

  bool operator==(const Distribution&) const = default;
};

// Probability matrix on X x Y, row index = x, column index = y.
struct JointDistribution {
  std::vector<double> p;  // row-major, nx*ny
  int nx = 0;
  int ny = 0;

  JointDistribution() = default;
  JointDistribution(int nx_, int ny_, std::vector<double> probs)
      : p(std::move(probs)), nx(nx_), ny(ny_) {
    validate();
  }
  explicit JointDistribution(const std::vector<std::vector<double>>& rows) {
    nx = static_cast<int>(rows.size());
    if (nx == 0) throw std::invalid_argument("JointDistribution: no rows");
    ny = static_cast<int>(rows[0].size());
    for (const auto& r : rows) {
      if (static_cast<int>(r.size()) != ny)
        throw std::invalid_argument("JointDistribution: ragged rows");
      p.insert(p.end(), r.begin(), r.end());
    }
    validate();
  }

  double at(int x, int y) const { return p[static_cast<size_t>(x) * ny + y]; }
  double& at(int x, int y) { return p[static_cast<size_t>(x) * ny + y]; }

  void validate() const {
    if (nx < 1 || ny < 1 || p.size() != static_cast<size_t>(nx) * ny)
      throw std::invalid_argument("JointDistribution: bad shape");
    double s = 0.0;
    for (double v : p) {
      if (!(v >= 0.0)) throw std::invalid_argument("JointDistribution: negative entry");
      s += v;
    }
    if (std::abs(s - 1.0) > kSumTol)
      throw std::invalid_argument("JointDistribution: entries sum to " + std::to_string(s));
  }

  bool operator==(const JointDistribution&) const = default;
};

inline std::pair<Distribution, Distribution> marginals(const JointDistribution& q) {
  std::vector<double> mx(static_cast<size_t>(q.nx), 0.0);
  std::vector<double> my(static_cast<size_t>(q.ny), 0.0);
  for (int x = 0; x < q.nx; ++x)
    for (int y = 0; y < q.ny; ++y) {
      mx[static_cast<size_t>(x)] += q.at(x, y);
      my[static_cast<size_t>(y)] += q.at(x, y);
    }
  return {Distribution(std::move(mx)), Distribution(std::move(my))};
}

inline JointDistribution product_joint(const Distribution& px, const Distribution& py) {
  std::vector<double> p(static_cast<size_t>(px.dim()) * py.dim());
  for (int x = 0; x < px.dim(); ++x)
    for (int y = 0; y < py.dim(); ++y)
      p[static_cast<size_t>(x) * py.dim() + y] = px[x] * py[y];
  return JointDistribution(px.dim(), py.dim(), std::move(p));
}

// The pair (P0, P1) defining a testing instance. Strict positivity is an
// assumption of the model, so violations are rejected, not repaired.
struct HypothesisPair {
  JointDistribution p0;
  JointDistribution p1;

  HypothesisPair(JointDistribution a, JointDistribution b)
      : p0(std::move(a)), p1(std::move(b)) {
    if (p0.nx != p1.nx || p0.ny != p1.ny)
      throw std::invalid_argument("HypothesisPair: shape mismatch");
    if (p0.nx < 2 || p0.ny < 2)
      throw std::invalid_argument("HypothesisPair: alphabets must have size >= 2");
    for (double v : p0.p)
      if (v < kPosMin) throw std::invalid_argument("HypothesisPair: P0 not strictly positive");
    for (double v : p1.p)
      if (v < kPosMin) throw std::invalid_argument("HypothesisPair: P1 not strictly positive");
  }

  const JointDistribution& ref(int i) const { return i == 0 ? p0 : p1; }
};

inline double kl_term(double q, double p) {
  if (q <= kZeroEps) return 0.0;
  if (p <= kZeroEps) return kInf;
  return q * std::log(q / p);
}

inline double kl_divergence(const Distribution& q, const Distribution& p) {
  if (q.dim() != p.dim()) throw std::invalid_argument("kl_divergence: dimension mismatch");
  double s = 0.0;
  for (int z = 0; z < q.dim(); ++z) {
    double t = kl_term(q[z], p[z]);
    if (std::isinf(t)) return kInf;
    s += t;
  }
  return s < 0.0 ? 0.0 : s;
}

inline double kl_divergence_joint(const JointDistribution& q, const JointDistribution& p) {
  if (q.nx != p.nx || q.ny != p.ny)
    throw std::invalid_argument("kl_divergence_joint: shape mismatch");
  double s = 0.0;
  for (size_t z = 0; z < q.p.size(); ++z) {
    double t = kl_term(q.p[z], p.p[z]);
    if (std::isinf(t)) return kInf;
    s += t;
  }
  return s < 0.0 ? 0.0 : s;
}

// True iff h factorizes as a product of its marginals on both hypotheses.
inline bool is_product_form(const HypothesisPair& h, double tol = 1e-10) {
  for (int i = 0; i < 2; ++i) {
    auto [mx, my] = marginals(h.ref(i));
    for (int x = 0; x < h.p0.nx; ++x)
      for (int y = 0; y < h.p0.ny; ++y)
        if (std::abs(h.ref(i).at(x, y) - mx[x] * my[y]) > tol) return false;
  }
  return true;
}

struct EmpiricalType {
  std::vector<std::int64_t> counts;
  std::int64_t n = 0;

  Distribution to_distribution() const {
    std::vector<double> p(counts.size());
    for (size_t z = 0; z < counts.size(); ++z)
      p[z] = static_cast<double>(counts[z]) / static_cast<double>(n);
    return Distribution(std::move(p));
  }
};

// Counter-based randomness: each draw is a pure function of (seed, stream,
// counter), so sampling is independent of parallel execution order.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t counter_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return mix64(mix64(seed ^ 0x6a09e667f3bcc908ULL) ^ mix64(stream * 0xb5297a4d3a2ec4c1ULL + counter));
}

inline double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return static_cast<double>(counter_rng(seed, stream, counter) >> 11) * 0x1.0p-53;
}

inline std::pair<EmpiricalType, EmpiricalType> sample_iid(const JointDistribution& p,
                                                          std::int64_t n,
                                                          std::uint64_t seed,
                                                          std::uint64_t stream = 0) {
  if (n < 1) throw std::invalid_argument("sample_iid: n must be >= 1");
  std::vector<double> cdf(p.p.size());
  double acc = 0.0;
  for (size_t z = 0; z < p.p.size(); ++z) {
    acc += p.p[z];
    cdf[z] = acc;
  }
  cdf.back() = 1.0;
  EmpiricalType tx{std::vector<std::int64_t>(static_cast<size_t>(p.nx), 0), n};
  EmpiricalType ty{std::vector<std::int64_t>(static_cast<size_t>(p.ny), 0), n};
  for (std::int64_t i = 0; i < n; ++i) {
    double u = uniform01(seed, stream, static_cast<std::uint64_t>(i));
    size_t z = static_cast<size_t>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (z >= p.p.size()) z = p.p.size() - 1;
    tx.counts[z / p.ny] += 1;
    ty.counts[z % p.ny] += 1;
  }
  return {std::move(tx), std::move(ty)};
}

}  // namespace dht

#endif  // DHT_PROB_HPP_
