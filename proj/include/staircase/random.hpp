#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "staircase/config.hpp"
#include "staircase/graph.hpp"
#include "staircase/rational.hpp"

namespace staircase {

// Counter-based randomness: every draw is keyed by (seed, domain, stream,
// index), so regeneration is order-independent and coupling across parameters
// reuses the very same uniforms.

namespace rng {

enum : std::uint64_t { kEdgeDomain = 0x45u, kChipDomain = 0x43u, kTrialDomain = 0x54u };

inline std::uint64_t draw(std::uint64_t seed, std::uint64_t domain, std::uint64_t stream,
                          std::uint64_t index) {
  std::uint64_t h = hash_mix64(seed ^ 0x6a09e667f3bcc909ULL);
  h = hash_mix64(h ^ domain);
  h = hash_mix64(h ^ stream);
  h = hash_mix64(h ^ index);
  return h;
}

/// u/2^64 < q, decided exactly.
inline bool below(std::uint64_t u, const Rational& q) {
  if (q <= 0) return false;
  if (q >= 1) return true;
  BigInt lhs = BigInt(q.get_den());
  mpz_mul_ui(lhs.get_mpz_t(), lhs.get_mpz_t(), u);  // unsigned long is 64-bit here
  BigInt rhs = BigInt(q.get_num()) << 64;
  return lhs < rhs;
}

/// Smallest u64 threshold T with {u >= T} ⊆ {u/2^64 >= q}; monotone in q.
inline BigInt at_least_threshold(const Rational& q) {
  // T = ceil(q * 2^64), clamped below at 0
  Rational scaled = q * Rational(BigInt(1) << 64);
  BigInt t = rational_ceil(scaled);
  if (t < 0) t = 0;
  return t;
}

}  // namespace rng

inline std::uint64_t pair_index(long long u, long long v) {
  if (u > v) std::swap(u, v);
  return static_cast<std::uint64_t>(v) * (v - 1) / 2 + u;
}

/// Edge predicate shared by er_graph and the streaming experiments:
/// edge {u,v} present iff uniform(seed, pair_index, 0) < p.
inline bool er_edge_present(std::uint64_t seed, long long u, long long v, const Rational& p) {
  return rng::below(rng::draw(seed, rng::kEdgeDomain, pair_index(u, v), 0), p);
}

/// Erdos-Renyi sample G(n,p), deterministic in (n, p, seed).
inline FiniteGraph er_graph(long long n, const Rational& p_in, std::uint64_t seed) {
  const Rational p = canonical(p_in);
  if (n < 1) throw std::invalid_argument("n must be positive");
  if (p < 0 || p > 1) throw std::invalid_argument("p must lie in [0,1]");
  std::vector<FiniteGraph::Edge> edges;
  for (long long v = 1; v < n; ++v)
    for (long long u = 0; u < v; ++u)
      if (er_edge_present(seed, u, v, p))
        edges.push_back({static_cast<int>(u), static_cast<int>(v), 1});
  return FiniteGraph(static_cast<int>(n), edges);
}

/// Coupled geometric chips: vertex v receives the length of the initial run
/// of its uniforms lying at or above 1/(1+mu n). The threshold decreases with
/// mu, so configurations drawn with the same seed are pointwise nondecreasing
/// in mu. Marginal: Geometric, P(k) = (mu n)^k/(1+mu n)^{k+1}.
inline ChipConfig coupled_geometric_config(long long n, const Rational& mu_in,
                                           std::uint64_t seed) {
  const Rational mu = canonical(mu_in);
  if (n < 1) throw std::invalid_argument("n must be positive");
  if (mu < 0) throw std::invalid_argument("mu must be nonnegative");
  if (mu * to_rational(n) > Rational(BigInt(1) << 40))
    throw std::invalid_argument("mu n too large; expected run length is impractical");
  std::vector<Rational> vals(n, Rational(0));
  if (mu == 0) return ChipConfig(Context::graph, std::move(vals));
  const Rational tau = Rational(1) / (1 + mu * to_rational(n));
  const BigInt thr_big = rng::at_least_threshold(tau);
  if (thr_big >= (BigInt(1) << 64))
    return ChipConfig(Context::graph, std::move(vals));  // no u64 clears the bar
  const std::uint64_t thr64 =
      (static_cast<std::uint64_t>(BigInt(thr_big >> 32).get_ui()) << 32) |
      static_cast<std::uint64_t>(BigInt(thr_big & BigInt(0xffffffffUL)).get_ui());
  for (long long v = 0; v < n; ++v) {
    long long run = 0;
    while (rng::draw(seed, rng::kChipDomain, static_cast<std::uint64_t>(v),
                     static_cast<std::uint64_t>(run)) >= thr64)
      ++run;
    vals[v] = to_rational(run);
  }
  return ChipConfig(Context::graph, std::move(vals));
}

/// Sort ascending and divide by n: the step-graphon version of a relabeled
/// graph configuration (n equal parts).
inline ChipConfig sorted_step_config(const ChipConfig& sigma) {
  if (sigma.context() != Context::graph)
    throw std::invalid_argument("sorted_step_config expects a graph configuration");
  std::vector<Rational> vals = sigma.values();
  std::sort(vals.begin(), vals.end());
  const int n = sigma.size();
  for (auto& v : vals) {
    v /= n;
    v.canonicalize();
  }
  return ChipConfig(Context::graphon, std::move(vals));
}

struct L1ToLimit {
  double value = 0;
  double error_bound = 0;  // accumulated floating-point allowance
};

/// || F_n - E ||_1 where F_n(t) = (1/n) sum I{X_k <= t n} is the normalized
/// empirical distribution of the chips and E(t) = 1 - e^{-t/mu}. Piecewise
/// closed forms: on a constancy interval of F_n the integrand |c - E| changes
/// sign at t* = -mu log(1-c) with antiderivative (c-1)t - mu e^{-t/mu}; the
/// tail beyond the largest jump contributes mu e^{-T/mu}.
inline L1ToLimit l1_to_geometric_limit(const ChipConfig& sigma, double mu) {
  if (mu <= 0) throw std::invalid_argument("mu must be positive");
  if (sigma.context() != Context::graph)
    throw std::invalid_argument("expects a graph configuration");
  const int n = sigma.size();
  std::vector<double> jumps(n);
  for (int i = 0; i < n; ++i) jumps[i] = to_double(sigma.value(i)) / n;
  std::sort(jumps.begin(), jumps.end());

  auto anti = [&](double c, double t) { return (c - 1.0) * t - mu * std::exp(-t / mu); };
  auto piece = [&](double c, double a, double b) {
    // integral of |c - 1 + e^{-t/mu}| over [a, b]
    if (b <= a) return 0.0;
    double total = 0;
    if (c < 1.0) {
      double tstar = -mu * std::log(1.0 - c);
      if (tstar > a && tstar < b) {
        total += std::abs(anti(c, tstar) - anti(c, a));
        total += std::abs(anti(c, b) - anti(c, tstar));
        return total;
      }
    }
    return std::abs(anti(c, b) - anti(c, a));
  };

  L1ToLimit out;
  double prev = 0;
  for (int i = 0; i < n; ++i) {
    double c = static_cast<double>(i) / n;
    out.value += piece(c, prev, jumps[i]);
    prev = jumps[i];
  }
  out.value += mu * std::exp(-prev / mu);  // F_n = 1 from the last jump on
  out.error_bound = (n + 2) * 8e-16 * (1.0 + out.value + mu);
  return out;
}

struct ConcentrationReport {
  long long n = 0;
  long long trials = 0;
  long long violations = 0;
  double frequency = 0;
  double bound = 0;     // 2 e^{-n eta^2 / 2}
  double std_error = 0; // Monte Carlo standard error of the frequency
  bool within = false;  // frequency <= bound + 3 std errors
};

/// Degree concentration experiment: frequency of |deg(v0) - np| > eta n over
/// independent trials, against the subgaussian tail bound.
inline ConcentrationReport degree_concentration(long long n, const Rational& p_in,
                                                const Rational& eta_in, long long trials,
                                                std::uint64_t seed) {
  const Rational p = canonical(p_in);
  const Rational eta = canonical(eta_in);
  if (eta <= 0) throw std::invalid_argument("eta must be positive");
  if (n < 2) throw std::invalid_argument("n must be at least 2");
  if (trials < 1) throw std::invalid_argument("trials must be positive");
  ConcentrationReport rep;
  rep.n = n;
  rep.trials = trials;
  const Rational np = p * to_rational(n);
  const Rational etan = eta * to_rational(n);
  for (long long t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = rng::draw(seed, rng::kTrialDomain, t, 0);
    long long deg = 0;
    for (long long v = 1; v < n; ++v)
      if (er_edge_present(trial_seed, 0, v, p)) ++deg;
    if (abs(to_rational(deg) - np) > etan) ++rep.violations;
  }
  rep.frequency = static_cast<double>(rep.violations) / trials;
  const double eta_d = to_double(eta);
  rep.bound = 2.0 * std::exp(-0.5 * n * eta_d * eta_d);
  rep.std_error = std::sqrt(std::max(rep.frequency * (1 - rep.frequency), 0.0) /
                            static_cast<double>(trials));
  rep.within = rep.frequency <= rep.bound + 3 * rep.std_error;
  return rep;
}

}  // namespace staircase
