#ifndef DHT_SIMULATOR_HPP_
#define DHT_SIMULATOR_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "dht/decision_matrix.hpp"
#include "dht/encoding.hpp"
#include "dht/prob.hpp"

namespace dht {

struct CodingScheme {
  TypeEncoder encoder_x;
  TypeEncoder encoder_y;
  DecisionMatrix decoder;

  void validate() const {
    if (encoder_x.symbol_count > decoder.mx || encoder_y.symbol_count > decoder.my)
      throw std::invalid_argument("CodingScheme: encoder symbols exceed decoder dimensions");
  }
};

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

inline WilsonInterval wilson_interval(long long errors, long long trials, double z = 1.96) {
  double n = static_cast<double>(trials);
  double phat = static_cast<double>(errors) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (phat + z2 / (2.0 * n)) / denom;
  double half = z / denom * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct ErrorEstimate {
  std::int64_t n = 0;
  long long trials = 0;
  long long errors = 0;
  double rate = 0.0;
  WilsonInterval interval;
  std::uint64_t seed = 0;
  int hypothesis = 0;
};

namespace detail {

// One trial is a pure function of (seed, trial index), so partitioning across
// workers cannot change the counted total.
inline bool trial_errs(const HypothesisPair& h, const CodingScheme& scheme, std::int64_t n,
                       int hypothesis, std::uint64_t seed, std::uint64_t trial) {
  auto [tx, ty] = sample_iid(h.ref(hypothesis), n, seed, trial);
  int sx = encode_type(scheme.encoder_x, tx.to_distribution());
  int sy = encode_type(scheme.encoder_y, ty.to_distribution());
  return scheme.decoder.psi(sx, sy) != hypothesis;
}

}  // namespace detail

inline ErrorEstimate run_trials(const HypothesisPair& h, const CodingScheme& scheme,
                                std::int64_t n, long long trials, int hypothesis,
                                std::uint64_t seed, int jobs = 1) {
  if (n < 1 || trials < 1) throw std::invalid_argument("run_trials: n and trials must be >= 1");
  scheme.validate();
  long long errors = 0;
  if (jobs <= 1) {
    for (long long t = 0; t < trials; ++t)
      if (detail::trial_errs(h, scheme, n, hypothesis, seed, static_cast<std::uint64_t>(t)))
        ++errors;
  } else {
    std::vector<long long> partial(static_cast<size_t>(jobs), 0);
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w)
      workers.emplace_back([&, w]() {
        long long local = 0;
        for (long long t = w; t < trials; t += jobs)
          if (detail::trial_errs(h, scheme, n, hypothesis, seed, static_cast<std::uint64_t>(t)))
            ++local;
        partial[static_cast<size_t>(w)] = local;
      });
    for (auto& th : workers) th.join();
    for (long long p : partial) errors += p;
  }
  ErrorEstimate est;
  est.n = n;
  est.trials = trials;
  est.errors = errors;
  est.rate = static_cast<double>(errors) / static_cast<double>(trials);
  est.interval = wilson_interval(errors, trials);
  est.seed = seed;
  est.hypothesis = hypothesis;
  return est;
}

struct ExponentEstimate {
  double slope = 0.0;       // nats per sample, positive = decay
  double stderr_slope = 0.0;
  double intercept = 0.0;
  std::vector<ErrorEstimate> per_n;
  bool too_large_to_measure = false;
  double lower_bound = 0.0;  // one-sided exponent bound when unmeasurable
};

// Least-squares regression of log pi vs n (with intercept to absorb the
// polynomial prefactor). Trials auto-escalate geometrically until each n has
// at least min_errors errors or the per-n cap is reached; an all-zero count
// at the largest n yields a one-sided bound instead of a slope.
inline ExponentEstimate estimate_exponent(const HypothesisPair& h, const CodingScheme& scheme,
                                          int hypothesis, const std::vector<std::int64_t>& n_grid,
                                          long long trials, std::uint64_t seed,
                                          long long trials_cap_per_n = 4'000'000,
                                          long long min_errors = 50, int jobs = 1) {
  if (n_grid.size() < 3)
    throw std::invalid_argument("estimate_exponent: need at least 3 sample lengths");
  for (size_t k = 1; k < n_grid.size(); ++k)
    if (n_grid[k] <= n_grid[k - 1])
      throw std::invalid_argument("estimate_exponent: n_grid must be increasing");
  ExponentEstimate out;
  for (size_t k = 0; k < n_grid.size(); ++k) {
    long long t = trials;
    ErrorEstimate est;
    // stream ids partition the counter space: (n index << 32) | escalation round
    while (true) {
      est = run_trials(h, scheme, n_grid[k], t, hypothesis,
                       seed + (static_cast<std::uint64_t>(k) << 32), jobs);
      if (est.errors >= min_errors || t >= trials_cap_per_n) break;
      t = std::min(trials_cap_per_n, t * 4);
    }
    out.per_n.push_back(est);
  }
  const ErrorEstimate& last = out.per_n.back();
  if (last.errors == 0) {
    out.too_large_to_measure = true;
    // rule-of-three style bound: pi <= 3/trials with ~95% confidence
    out.lower_bound = -std::log(3.0 / static_cast<double>(last.trials)) /
                      static_cast<double>(last.n);
    return out;
  }
  // weighted least squares, weights = error counts (inverse variance of log rate)
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  int used = 0;
  for (const auto& est : out.per_n) {
    if (est.errors == 0) continue;
    double w = static_cast<double>(est.errors);
    double x = static_cast<double>(est.n);
    double y = std::log(est.rate);
    sw += w;
    swx += w * x;
    swy += w * y;
    swxx += w * x * x;
    swxy += w * x * y;
    ++used;
  }
  double denom = sw * swxx - swx * swx;
  double b = (sw * swxy - swx * swy) / denom;  // slope of log pi vs n (negative)
  double a = (swy - b * swx) / sw;
  out.slope = -b;
  out.intercept = a;
  double rss = 0;
  for (const auto& est : out.per_n) {
    if (est.errors == 0) continue;
    double x = static_cast<double>(est.n);
    double y = std::log(est.rate);
    double resid = y - (a + b * x);
    rss += static_cast<double>(est.errors) * resid * resid;
  }
  if (used > 2) out.stderr_slope = std::sqrt(rss / (used - 2) * sw / denom);
  return out;
}

}  // namespace dht

#endif  // DHT_SIMULATOR_HPP_
