#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "staircase/analysis.hpp"
#include "staircase/circle_map.hpp"
#include "staircase/config.hpp"
#include "staircase/firing.hpp"
#include "staircase/graph.hpp"
#include "staircase/graphon.hpp"
#include "staircase/random.hpp"
#include "staircase/rational.hpp"

namespace staircase {

// Experiment drivers. Parallelism is sample-level only and results are merged
// by parameter order, so thread count never changes any output.

inline void parallel_for(long long count, int threads, const std::function<void(long long)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (long long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long long> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      long long i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int use = std::min<long long>(threads, count);
  pool.reserve(use);
  for (int t = 0; t < use; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct DiagramSample {
  Rational parameter;
  ActivityEstimate estimate;
  long long smoothness_hits = 0;
};

struct SweepOptions {
  long long budget = 100000;
  // Samples that fail to cycle retry with doubled budgets up to this cap.
  long long budget_cap = 400000;
  int threads = 1;
};

namespace detail {

template <class Model>
ChipConfig shifted_config(const Model& model, const ChipConfig& sigma, const Rational& y_in) {
  const Rational y = canonical(y_in);
  std::vector<Rational> vals(sigma.size());
  for (int i = 0; i < sigma.size(); ++i) {
    vals[i] = sigma.value(i) + y * degree(model, i);
    vals[i].canonicalize();
  }
  return ChipConfig(sigma.context(), std::move(vals));
}

template <class Model>
ActivityEstimate activity_with_retries(const Model& model, const ChipConfig& cfg,
                                       const SweepOptions& opts) {
  long long budget = opts.budget;
  for (;;) {
    ActivityOptions ao;
    ao.max_steps = budget;
    ActivityEstimate est = activity(model, cfg, ao);
    if (est.kind == ActivityEstimate::Kind::exact || budget >= opts.budget_cap) return est;
    budget = std::min(opts.budget_cap, budget * 2);
  }
}

}  // namespace detail

/// Activity diagram s(y) = a(model, sigma + y * deg) over a sorted rational
/// grid. Exact samples are nondecreasing in y (more chips fire more); failures
/// degrade to certified intervals.
template <class Model>
std::vector<DiagramSample> activity_diagram(const Model& model, const ChipConfig& sigma,
                                            const std::vector<Rational>& y_grid_in,
                                            const SweepOptions& opts = {}) {
  std::vector<Rational> y_grid(y_grid_in.size());
  for (std::size_t i = 0; i < y_grid_in.size(); ++i) y_grid[i] = canonical(y_grid_in[i]);
  for (std::size_t i = 0; i + 1 < y_grid.size(); ++i)
    if (!(y_grid[i] < y_grid[i + 1]))
      throw std::invalid_argument("y grid must be strictly increasing");
  std::vector<DiagramSample> out(y_grid.size());
  parallel_for(static_cast<long long>(y_grid.size()), opts.threads, [&](long long i) {
    ChipConfig cfg = detail::shifted_config(model, sigma, y_grid[i]);
    ActivityEstimate est = detail::activity_with_retries(model, cfg, opts);
    out[i] = DiagramSample{y_grid[i], est, est.smoothness_hits};
  });
  return out;
}

struct GeometricSample {
  Rational mu;
  ActivityEstimate estimate;
  RotationInterval reference;
  bool usable = true;  // excluded from the sup distance when false
};

struct GeometricSweepResult {
  long long n = 0;
  Rational p;
  std::uint64_t seed = 0;
  bool connected = true;
  std::vector<GeometricSample> samples;
  double sup_gap = 0;  // max |activity - reference midpoint| over usable samples
};

struct GeometricOptions {
  long long budget = 100000;
  long long budget_cap = 400000;
  long long rotation_iters = 4096;
  int threads = 1;
};

/// mu-sweep of a(G(n,p), sigma^mu) against the closed-form reference rho(f^mu).
/// Configurations are coupled through the seed, so the exact samples are
/// monotone in mu; the sampled graph is shared across the grid.
inline GeometricSweepResult geometric_sweep(long long n, const Rational& p_in,
                                            const std::vector<Rational>& mu_grid_in,
                                            std::uint64_t seed,
                                            const GeometricOptions& opts = {}) {
  const Rational p = canonical(p_in);
  std::vector<Rational> mu_grid(mu_grid_in.size());
  for (std::size_t i = 0; i < mu_grid_in.size(); ++i) mu_grid[i] = canonical(mu_grid_in[i]);
  for (std::size_t i = 0; i + 1 < mu_grid.size(); ++i)
    if (!(mu_grid[i] < mu_grid[i + 1]))
      throw std::invalid_argument("mu grid must be strictly increasing");
  const double p_d = to_double(p);
  const double mu_max = p_d / std::log(2.0);
  for (const auto& mu : mu_grid)
    if (mu < 0 || to_double(mu) > mu_max * (1 + 1e-12))
      throw std::invalid_argument("mu grid must lie in [0, p/log 2]");

  GeometricSweepResult res;
  res.n = n;
  res.p = p;
  res.seed = seed;
  FiniteGraph g = er_graph(n, p, seed);
  res.connected = g.connected();
  res.samples.resize(mu_grid.size());

  SweepOptions sw;
  sw.budget = opts.budget;
  sw.budget_cap = opts.budget_cap;
  parallel_for(static_cast<long long>(mu_grid.size()), opts.threads, [&](long long i) {
    const Rational& mu = mu_grid[i];
    GeometricSample s;
    s.mu = mu;
    ChipConfig cfg = coupled_geometric_config(n, mu, seed);
    s.estimate = detail::activity_with_retries(g, cfg, sw);
    const double md = to_double(mu);
    CircleLift ref = md == 0 ? CircleLift::geometric_limit_from_ratio(0.0, p_d)
                             : CircleLift::geometric_limit(md, p_d);
    s.reference = rotation_number(ref, opts.rotation_iters);
    s.usable = res.connected;
    res.samples[i] = std::move(s);
  });

  double sup = 0;
  for (const auto& s : res.samples) {
    if (!s.usable) continue;
    double a = s.estimate.kind == ActivityEstimate::Kind::exact
                   ? to_double(s.estimate.value)
                   : 0.5 * (to_double(s.estimate.lower) + to_double(s.estimate.upper));
    double r = to_double(rotation_midpoint(s.reference));
    sup = std::max(sup, std::abs(a - r));
  }
  res.sup_gap = sup;
  return res;
}

struct Plateau {
  Rational from;
  Rational to;  // inclusive parameter range [from, to]
  Rational value;
  std::optional<Rational> snapped;  // lowest-denominator rational within tol
  bool resolved = false;            // snapped denominator within the bound
};

struct PlateauOptions {
  Rational tol = Rational(1, 1024);
  long long max_denominator = 64;
};

/// Maximal runs of equal exact activities across a sorted sample list.
/// Interval samples never anchor or extend a plateau.
inline std::vector<Plateau> plateau_detect(const std::vector<DiagramSample>& samples,
                                           const PlateauOptions& opts = {}) {
  std::vector<Plateau> out;
  std::size_t i = 0;
  while (i < samples.size()) {
    if (samples[i].estimate.kind != ActivityEstimate::Kind::exact ||
        !samples[i].estimate.uniform) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < samples.size() && samples[j].estimate.kind == ActivityEstimate::Kind::exact &&
           samples[j].estimate.uniform &&
           samples[j].estimate.value == samples[i].estimate.value)
      ++j;
    if (j - i >= 2) {
      Plateau p;
      p.from = samples[i].parameter;
      p.to = samples[j - 1].parameter;
      p.value = samples[i].estimate.value;
      Rational tol = canonical(opts.tol);
      Rational lo = p.value - tol;
      Rational hi = p.value + tol;
      Rational snap = simplest_rational_in(lo < 0 ? Rational(0) : lo, hi);
      p.snapped = snap;
      p.resolved = BigInt(snap.get_den()) <= to_big(opts.max_denominator);
      out.push_back(std::move(p));
    }
    i = j;
  }
  return out;
}

struct RobustnessRow {
  Rational kernel_delta;  // blend factor toward the constant mean kernel
  Rational config_delta;  // uniform additive chip perturbation
  Rational cut_lower;     // d_box lower bound between W and W'
  Rational l1_delta;      // ||sigma - sigma'||_1
  ActivityEstimate base;
  ActivityEstimate perturbed;
  double activity_gap = 0;  // |a - a'| via exact values or midpoints
};

struct RobustnessOptions {
  long long budget = 100000;
  long long audit_horizon = 256;
  int threads = 1;
};

/// Empirical continuity probe: activity deviation against kernel and config
/// perturbations of shrinking size. Requires the base pair to audit smooth
/// over the probe horizon.
inline std::vector<RobustnessRow> robustness_probe(
    const StepGraphon& w, const ChipConfig& sigma,
    const std::vector<std::pair<Rational, Rational>>& schedule,
    const RobustnessOptions& opts = {}) {
  if (mindeg(w) <= 0) throw std::invalid_argument("probe needs mindeg > 0");
  if (!smoothness_audit(w, sigma, opts.audit_horizon).empty())
    throw std::invalid_argument("base pair fails the smoothness audit");
  for (const auto& [dk, dc] : schedule)
    if (dk < 0 || dk > 1 || dc < 0)
      throw std::invalid_argument("perturbation sizes out of range");

  const int k = w.parts();
  Rational mean(0);
  for (int i = 0; i < k; ++i) mean += w.measure(i) * w.degree(i);

  ActivityOptions ao;
  ao.max_steps = opts.budget;
  ActivityEstimate base = activity(w, sigma, ao);

  std::vector<RobustnessRow> rows(schedule.size());
  parallel_for(static_cast<long long>(schedule.size()), opts.threads, [&](long long idx) {
    const auto& [dk, dc] = schedule[idx];
    std::vector<std::vector<Rational>> kernel(k, std::vector<Rational>(k));
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        kernel[i][j] = w.kernel(i, j) + dk * (mean - w.kernel(i, j));
    StepGraphon wp(w.measures(), kernel);
    std::vector<Rational> vals(sigma.values());
    for (auto& v : vals) v += dc;
    ChipConfig sp(Context::graphon, std::move(vals));

    RobustnessRow row;
    row.kernel_delta = dk;
    row.config_delta = dc;
    row.cut_lower = cut_distance(w, wp).lower;
    row.l1_delta = l1_distance(sigma, sp, w);
    row.base = base;
    row.perturbed = activity(wp, sp, ao);
    auto mid = [](const ActivityEstimate& e) {
      return e.kind == ActivityEstimate::Kind::exact
                 ? to_double(e.value)
                 : 0.5 * (to_double(e.lower) + to_double(e.upper));
    };
    row.activity_gap = std::abs(mid(row.base) - mid(row.perturbed));
    rows[idx] = std::move(row);
  });
  return rows;
}

// ---------------------------------------------------------------------------
// Oscillating-odometer construction: a two-sided chain of parts indexed by the
// integers, each carrying one of three chip levels. The level pattern shifts
// left under the parallel update, so the odometer of a part is the count of
// level-2/level-3 indices inside a sliding window. Block boundaries at
// factorials make u_n/n oscillate between 1/2 and 1.

struct CounterexampleSpec {
  long long start = 2;   // m: leftmost represented index
  long long length = 720;  // N: window covers {m, ..., m+N}
};

namespace detail {

/// Level of integer m: 2 on (-inf,1] and on [(2k+1)!, (2k+2)!); alternating
/// 1/3 runs starting at each (2k)!.
inline int integer_level(long long m) {
  if (m <= 1) return 2;
  long long fact = 1, i = 1;
  while (true) {
    // find largest i with i! <= m
    if (fact > m / (i + 1)) break;  // next factorial would exceed m
    long long nf = fact * (i + 1);
    if (nf > m) break;
    fact = nf;
    ++i;
  }
  if (i % 2 == 1) return 2;           // [(2k+1)!, (2k+2)!) block
  return (m - fact) % 2 == 0 ? 1 : 3; // alternation starts on level 1
}

}  // namespace detail

struct CounterexampleResult {
  std::vector<long long> odometer;  // u_0 .. u_N via the window count
  bool crosscheck_ok = false;       // chip-arithmetic simulation agreement
  long long crosscheck_steps = 0;
};

/// Window-count odometer cross-validated by simulating the actual chip
/// arithmetic on the part chain with concrete (unnormalized) part measures.
/// Each part's value must stay one of the three admissible levels and the
/// level pattern must shift left one index per step; only the two inflows at
/// the window boundary fall back to the closed-form level rule.
inline CounterexampleResult counterexample_sequence(const CounterexampleSpec& spec,
                                                    long long crosscheck_steps = -1) {
  if (spec.length < 0) throw std::invalid_argument("window length must be nonnegative");
  const long long m = spec.start, N = spec.length;
  std::vector<int> level(N + 1);
  for (long long j = 0; j <= N; ++j) level[j] = detail::integer_level(m + j);
  // partition sanity on the represented window
  for (long long j = 0; j + 1 <= N; ++j)
    if ((level[j] == 1) != (level[j + 1] == 3))
      throw std::invalid_argument("level pattern violates the pairing rule");

  CounterexampleResult res;
  res.odometer.resize(N + 1);
  res.odometer[0] = 0;
  for (long long nn = 1; nn <= N; ++nn)
    res.odometer[nn] = res.odometer[nn - 1] + (level[nn - 1] >= 2 ? 1 : 0);

  const long long steps = crosscheck_steps < 0 ? N : std::min(crosscheck_steps, N);
  // generic positive measures; only positivity matters for level separation
  auto lam = [](long long j) -> long long { return ((j % 1009 + 1009) % 1009) * 31 % 1009 + 2; };
  auto level_value = [&](long long j, int lv) -> long long {
    const long long a = lam(m + j - 1), b = lam(m + j + 1);
    return lv == 1 ? a : lv == 2 ? a + b : 2 * a + b;
  };
  std::vector<long long> val(N + 1);
  for (long long j = 0; j <= N; ++j) val[j] = level_value(j, level[j]);

  long long fired = 0;
  bool ok = true;
  for (long long s = 0; s < steps && ok; ++s) {
    std::vector<int> fire(N + 3);  // index shifted by 1: fire[j+1] for part j
    fire[0] = detail::integer_level(m - 1 + s) >= 2;      // boundary inflow
    fire[N + 2] = detail::integer_level(m + N + 1 + s) >= 2;
    for (long long j = 0; j <= N; ++j) {
      const long long deg = lam(m + j - 1) + lam(m + j + 1);
      if (val[j] >= 2 * deg) {
        ok = false;  // a level value may never reach two full firings
        break;
      }
      fire[j + 1] = val[j] >= deg;
    }
    if (!ok) break;
    fired += fire[1];
    std::vector<long long> nxt(N + 1);
    for (long long j = 0; j <= N; ++j) {
      const long long a = lam(m + j - 1), b = lam(m + j + 1);
      nxt[j] = val[j] - (a + b) * fire[j + 1] + a * fire[j] + b * fire[j + 2];
    }
    val.swap(nxt);
    // classify and compare against the one-step shift of the level pattern
    for (long long j = 0; j <= N && ok; ++j) {
      const int expect = detail::integer_level(m + j + s + 1);
      if (val[j] != level_value(j, expect)) ok = false;
    }
    if (ok && fired != res.odometer[s + 1]) ok = false;
  }
  res.crosscheck_ok = ok;
  res.crosscheck_steps = steps;
  return res;
}

struct CounterexampleExtrema {
  Rational max_ratio;          // max over 1 <= n <= N of u_n/n
  Rational min_ratio_from;     // min over from <= n <= N
  long long argmax = 0;
  long long argmin = 0;
};

/// Streaming u_n/n extrema for large windows, window-count formula only.
inline CounterexampleExtrema counterexample_scan(long long start, long long N,
                                                 long long min_from = 24) {
  CounterexampleExtrema ex;
  ex.max_ratio = Rational(-1);
  ex.min_ratio_from = Rational(2);
  long long u = 0;
  for (long long n = 1; n <= N; ++n) {
    u += detail::integer_level(start + n - 1) >= 2 ? 1 : 0;
    Rational ratio = make_rational(u, n);
    if (ratio > ex.max_ratio) {
      ex.max_ratio = ratio;
      ex.argmax = n;
    }
    if (n >= min_from && ratio < ex.min_ratio_from) {
      ex.min_ratio_from = ratio;
      ex.argmin = n;
    }
  }
  ex.max_ratio.canonicalize();
  ex.min_ratio_from.canonicalize();
  return ex;
}

}  // namespace staircase
