#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "staircase/config.hpp"
#include "staircase/graph.hpp"
#include "staircase/graphon.hpp"
#include "staircase/rational.hpp"

namespace staircase {

// Parallel chip-firing: every site fires floor(sigma/deg) times per step.
// Internally the orbit is kept as integer numerators over a fixed scale L:
// sigma_i = S_i / L with L chosen so that the scaled coupling T_ij = L*c_ij
// and the scaled degrees rg_i = L*deg_i = sum_j T_ij are integers. The update
//   S'_i = S_i - rg_i*f_i + sum_j T_ij*f_j,   f_i = floor(S_i / rg_i)
// never leaves the lattice, which is what makes cycle detection exact. The
// plain sum sum_i S_i is invariant (T is symmetric), so the whole orbit is
// bounded a priori and a 64-bit fast path can be chosen up front.

struct SmoothnessHit {
  long long step;
  int site;
  BigInt multiple;  // U^step sigma(site) = multiple * deg(site)
};

struct ActivityEstimate {
  enum class Kind { exact, interval };
  Kind kind = Kind::interval;
  Rational value;  // exact kind only; lower == upper == value there
  Rational lower;
  Rational upper;
  long long period = 0;     // exact kind
  long long transient = 0;  // exact kind
  long long steps_used = 0;
  bool uniform = true;  // all connected components share the rate
  std::vector<Rational> component_values;
  // Certified Fekete bounds accumulated during the search: max_k m_k/k and
  // min_k M_k/k. Valid enclosure of the activity whenever it exists.
  Rational search_lower;
  Rational search_upper;
  long long smoothness_hits = 0;
};

struct ActivityOptions {
  long long max_steps = 100000;
  // Cycle search stores visited states up to this budget, then falls back to
  // Brent-style checkpoint comparison.
  std::size_t state_cap_bytes = std::size_t(1) << 26;
  bool count_smoothness_hits = true;
};

namespace detail {

/// Model + configuration reduced to the shared scaled-integer form (exact).
struct SystemSpec {
  Context ctx = Context::graph;
  int n = 0;
  std::vector<Rational> measures;  // graphon part measures; all 1 for graphs
  std::vector<Rational> degrees;
  BigInt scale;  // L
  std::vector<BigInt> s0;
  std::vector<long long> row_ptr;
  std::vector<int> col;
  std::vector<BigInt> weight;  // T_ij, symmetric, row sums = scaled degree
  std::vector<BigInt> scaled_degree;

  bool fits_int64() const {
    const BigInt lim = (BigInt(1) << 62);
    BigInt total = 0;
    for (const auto& s : s0) total += s;
    if (2 * total >= lim) return false;
    for (const auto& t : weight)
      if (t >= lim) return false;
    for (const auto& d : scaled_degree)
      if (d >= lim) return false;
    return true;
  }

  std::vector<int> support_components() const {
    std::vector<int> comp(n, -1);
    int next = 0;
    for (int s = 0; s < n; ++s) {
      if (comp[s] != -1) continue;
      comp[s] = next;
      std::queue<int> q;
      q.push(s);
      while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (long long a = row_ptr[u]; a < row_ptr[u + 1]; ++a)
          if (weight[a] > 0 && comp[col[a]] == -1) {
            comp[col[a]] = next;
            q.push(col[a]);
          }
      }
      ++next;
    }
    return comp;
  }
};

inline BigInt lcm(const BigInt& a, const BigInt& b) {
  BigInt r;
  mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

inline SystemSpec build_system(const FiniteGraph& g, const ChipConfig& sigma) {
  check_carrier(sigma, g);
  SystemSpec s;
  s.ctx = Context::graph;
  s.n = g.size();
  s.measures.assign(s.n, Rational(1));
  s.degrees.resize(s.n);
  for (int v = 0; v < s.n; ++v) s.degrees[v] = to_rational(g.degree_int(v));
  BigInt L = 1;
  for (const auto& q : sigma.values()) L = lcm(L, BigInt(q.get_den()));
  s.scale = L;
  s.s0.resize(s.n);
  for (int v = 0; v < s.n; ++v) {
    Rational scaled = sigma.value(v) * Rational(L);
    s.s0[v] = BigInt(scaled.get_num());  // exact by the lcm choice
  }
  s.row_ptr.assign(s.n + 1, 0);
  for (int v = 0; v < s.n; ++v) s.row_ptr[v + 1] = s.row_ptr[v] + g.neighbors(v).size();
  s.col.resize(s.row_ptr[s.n]);
  s.weight.resize(s.row_ptr[s.n]);
  s.scaled_degree.assign(s.n, 0);
  for (int v = 0; v < s.n; ++v) {
    long long a = s.row_ptr[v];
    for (const auto& arc : g.neighbors(v)) {
      s.col[a] = arc.to;
      s.weight[a] = L * to_big(arc.mult);
      s.scaled_degree[v] += s.weight[a];
      ++a;
    }
  }
  return s;
}

inline SystemSpec build_system(const StepGraphon& w, const ChipConfig& sigma) {
  check_carrier(sigma, w);
  SystemSpec s;
  s.ctx = Context::graphon;
  s.n = w.parts();
  s.measures = w.measures();
  s.degrees = w.degrees();
  BigInt L = 1;
  for (const auto& q : sigma.values()) L = lcm(L, BigInt(q.get_den()));
  for (int i = 0; i < s.n; ++i)
    for (int j = 0; j < s.n; ++j) {
      Rational c = w.measure(j) * w.kernel(i, j);
      L = lcm(L, BigInt(c.get_den()));
    }
  s.scale = L;
  s.s0.resize(s.n);
  for (int i = 0; i < s.n; ++i) {
    Rational scaled = sigma.value(i) * Rational(L);
    s.s0[i] = BigInt(scaled.get_num());
  }
  s.row_ptr.assign(s.n + 1, 0);
  for (int i = 0; i < s.n; ++i) s.row_ptr[i + 1] = (i + 1) * static_cast<long long>(s.n);
  s.col.resize(static_cast<std::size_t>(s.n) * s.n);
  s.weight.resize(static_cast<std::size_t>(s.n) * s.n);
  s.scaled_degree.assign(s.n, 0);
  for (int i = 0; i < s.n; ++i)
    for (int j = 0; j < s.n; ++j) {
      Rational c = w.measure(j) * w.kernel(i, j) * Rational(L);
      const long long a = s.row_ptr[i] + j;
      s.col[a] = j;
      s.weight[a] = BigInt(c.get_num());
      s.scaled_degree[i] += s.weight[a];
    }
  return s;
}

template <class I>
I to_int(const BigInt& z);
template <>
inline long long to_int<long long>(const BigInt& z) {
  return z.get_si();
}
template <>
inline BigInt to_int<BigInt>(const BigInt& z) {
  return z;
}

inline BigInt widen(long long v) { return to_big(v); }
inline const BigInt& widen(const BigInt& v) { return v; }

template <class I>
std::size_t hash_state(const std::vector<I>& s) {
  std::size_t h = 0x243f6a8885a308d3ULL;
  if constexpr (std::is_same_v<I, long long>) {
    for (long long v : s) h = hash_combine(h, static_cast<std::uint64_t>(v));
  } else {
    for (const BigInt& v : s) h = hash_bigint(h, v);
  }
  return h;
}

/// One trajectory of the scaled system. Deterministic and single-threaded.
template <class I>
class Orbit {
 public:
  explicit Orbit(const SystemSpec& spec)
      : n_(spec.n),
        row_ptr_(spec.row_ptr),
        col_(spec.col),
        measures_(spec.measures) {
    weight_.reserve(spec.weight.size());
    for (const auto& t : spec.weight) weight_.push_back(to_int<I>(t));
    rg_.reserve(spec.scaled_degree.size());
    for (const auto& d : spec.scaled_degree) rg_.push_back(to_int<I>(d));
    state_.reserve(spec.s0.size());
    for (const auto& v : spec.s0) state_.push_back(to_int<I>(v));
    next_.resize(n_);
    fire_.assign(n_, I(0));
    odometer_.assign(n_, I(0));
  }

  void advance() {
    for (int i = 0; i < n_; ++i) fire_[i] = rg_[i] > 0 ? I(state_[i] / rg_[i]) : I(0);
    for (int i = 0; i < n_; ++i) {
      I acc = state_[i] - rg_[i] * fire_[i];
      for (long long a = row_ptr_[i]; a < row_ptr_[i + 1]; ++a)
        acc += weight_[a] * fire_[col_[a]];
      next_[i] = acc;
    }
    state_.swap(next_);
    for (int i = 0; i < n_; ++i) odometer_[i] += fire_[i];
    ++steps_;
  }

  long long steps() const { return steps_; }
  const std::vector<I>& state() const { return state_; }
  const std::vector<I>& odometer() const { return odometer_; }
  const std::vector<I>& scaled_degrees() const { return rg_; }

  std::pair<BigInt, BigInt> odometer_extrema() const {
    I lo = odometer_[0], hi = odometer_[0];
    for (const I& v : odometer_) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
    return {widen(lo), widen(hi)};
  }

  /// Measure of sites currently at or above their degree (fires next step).
  Rational active_measure() const {
    Rational s(0);
    for (int i = 0; i < n_; ++i)
      if (rg_[i] > 0 && state_[i] >= rg_[i]) s += measures_[i];
    return s;
  }

  /// Sites whose current value is an exact natural multiple of their degree.
  template <class F>
  void scan_exact_multiples(F&& emit) const {
    for (int i = 0; i < n_; ++i) {
      if (rg_[i] <= 0) continue;
      if (state_[i] % rg_[i] == 0) emit(i, widen(I(state_[i] / rg_[i])));
    }
  }

  long long count_exact_multiples() const {
    long long c = 0;
    scan_exact_multiples([&](int, const BigInt&) { ++c; });
    return c;
  }

 private:
  int n_;
  const std::vector<long long>& row_ptr_;
  const std::vector<int>& col_;
  std::vector<Rational> measures_;
  std::vector<I> weight_, rg_, state_, next_, fire_, odometer_;
  long long steps_ = 0;
};

}  // namespace detail

/// Exact stepper over a graph or step-graphon system; shared by the trace,
/// beta-activity and audit paths. Heavy search lives in activity().
class Simulator {
 public:
  Simulator(const FiniteGraph& g, const ChipConfig& sigma)
      : spec_(detail::build_system(g, sigma)), orbit_(make_orbit(spec_)) {}
  Simulator(const StepGraphon& w, const ChipConfig& sigma)
      : spec_(detail::build_system(w, sigma)), orbit_(make_orbit(spec_)) {}

  // the orbit holds references into spec_
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  void advance(long long steps = 1) {
    for (long long k = 0; k < steps; ++k)
      std::visit([](auto& o) { o.advance(); }, orbit_);
  }

  long long steps() const {
    return std::visit([](const auto& o) { return o.steps(); }, orbit_);
  }

  Context context() const { return spec_.ctx; }
  int sites() const { return spec_.n; }
  const Rational& degree(int i) const { return spec_.degrees.at(i); }

  ChipConfig config() const {
    std::vector<Rational> vals(spec_.n);
    std::visit(
        [&](const auto& o) {
          for (int i = 0; i < spec_.n; ++i) {
            vals[i] = Rational(detail::widen(o.state()[i])) / Rational(spec_.scale);
            vals[i].canonicalize();
          }
        },
        orbit_);
    return ChipConfig(spec_.ctx, std::move(vals));
  }

  std::vector<BigInt> odometer() const {
    std::vector<BigInt> u(spec_.n);
    std::visit(
        [&](const auto& o) {
          for (int i = 0; i < spec_.n; ++i) u[i] = detail::widen(o.odometer()[i]);
        },
        orbit_);
    return u;
  }

  std::pair<BigInt, BigInt> odometer_extrema() const {
    return std::visit([](const auto& o) { return o.odometer_extrema(); }, orbit_);
  }

  Rational active_measure() const {
    return std::visit([](const auto& o) { return o.active_measure(); }, orbit_);
  }

  std::vector<SmoothnessHit> current_exact_multiples() const {
    std::vector<SmoothnessHit> hits;
    std::visit(
        [&](const auto& o) {
          o.scan_exact_multiples([&](int site, const BigInt& k) {
            hits.push_back({steps(), site, k});
          });
        },
        orbit_);
    return hits;
  }

 private:
  using OrbitVar = std::variant<detail::Orbit<long long>, detail::Orbit<BigInt>>;
  static OrbitVar make_orbit(const detail::SystemSpec& spec) {
    if (spec.fits_int64())
      return OrbitVar(std::in_place_type<detail::Orbit<long long>>, spec);
    return OrbitVar(std::in_place_type<detail::Orbit<BigInt>>, spec);
  }

  detail::SystemSpec spec_;
  OrbitVar orbit_;
};

/// Per-site fire counts for one parallel step: floor(sigma/deg), 0 on degree 0.
template <class Model>
std::vector<BigInt> firing_vector(const Model& model, const ChipConfig& sigma) {
  check_carrier(sigma, model);
  std::vector<BigInt> f(sigma.size());
  for (int i = 0; i < sigma.size(); ++i) {
    Rational d = degree(model, i);
    f[i] = d > 0 ? rational_floor(sigma.value(i) / d) : BigInt(0);
  }
  return f;
}

namespace detail {

inline Rational coupling(const FiniteGraph& g, int i, int j) {
  return to_rational(g.multiplicity(i, j));
}
inline Rational coupling(const StepGraphon& w, int i, int j) {
  return w.measure(j) * w.kernel(i, j);
}

}  // namespace detail

/// One parallel update U: sigma'_i = sigma_i - deg_i f_i + sum_j c_ij f_j.
template <class Model>
ChipConfig parallel_step(const Model& model, const ChipConfig& sigma) {
  std::vector<BigInt> f = firing_vector(model, sigma);
  std::vector<Rational> out(sigma.size());
  for (int i = 0; i < sigma.size(); ++i) {
    Rational acc = sigma.value(i) - degree(model, i) * Rational(f[i]);
    for (int j = 0; j < sigma.size(); ++j) {
      Rational c = detail::coupling(model, i, j);
      if (c != 0) acc += c * Rational(f[j]);
    }
    acc.canonicalize();
    out[i] = acc;
  }
  return ChipConfig(sigma.context(), std::move(out));
}

struct FiringState {
  Context context;
  long long steps;
  ChipConfig config;
  std::vector<BigInt> odometer;
};

template <class Model>
FiringState run(const Model& model, const ChipConfig& sigma, long long steps) {
  if (steps < 0) throw std::invalid_argument("steps must be nonnegative");
  Simulator sim(model, sigma);
  sim.advance(steps);
  return FiringState{sim.context(), sim.steps(), sim.config(), sim.odometer()};
}

/// Essential min/max of the odometer (every site has positive measure here).
inline std::pair<BigInt, BigInt> extremal_odometers(const FiringState& st) {
  BigInt lo = st.odometer.at(0), hi = st.odometer.at(0);
  for (const auto& v : st.odometer) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return {lo, hi};
}

namespace detail {

template <class I>
struct StateKey {
  std::vector<I> v;
  std::size_t h;
  bool operator==(const StateKey& o) const { return v == o.v; }
};
template <class I>
struct StateKeyHash {
  std::size_t operator()(const StateKey<I>& k) const { return k.h; }
};

struct CycleInfo {
  long long transient;
  long long period;
};

/// Repeated-configuration search: hash table while memory allows, then
/// Brent-style checkpointing. Fekete bounds are accumulated along the way.
template <class I>
struct ActivityDriver {
  const SystemSpec& spec;
  const ActivityOptions& opts;
  Orbit<I> orbit;
  Rational best_lower{-1};
  Rational best_upper;
  bool have_upper = false;
  long long hits = 0;

  explicit ActivityDriver(const SystemSpec& s, const ActivityOptions& o)
      : spec(s), opts(o), orbit(s) {}

  void note_bounds() {
    const long long k = orbit.steps();
    if (k <= 0) return;
    auto [lo, hi] = orbit.odometer_extrema();
    Rational l = Rational(lo) / to_rational(k);
    Rational u = Rational(hi) / to_rational(k);
    if (l > best_lower) best_lower = l;
    if (!have_upper || u < best_upper) {
      best_upper = u;
      have_upper = true;
    }
  }

  void step() {
    orbit.advance();
    note_bounds();
    if (opts.count_smoothness_hits) hits += orbit.count_exact_multiples();
  }

  std::optional<CycleInfo> search() {
    if (opts.count_smoothness_hits) hits += orbit.count_exact_multiples();
    const std::size_t bytes_per_state =
        static_cast<std::size_t>(spec.n) * (std::is_same_v<I, long long> ? 8 : 24) + 64;
    const std::size_t cap = std::max<std::size_t>(1, opts.state_cap_bytes / bytes_per_state);

    std::unordered_map<StateKey<I>, long long, StateKeyHash<I>> seen;
    seen.reserve(std::min<std::size_t>(cap, 1 << 16));
    seen.emplace(StateKey<I>{orbit.state(), hash_state(orbit.state())}, 0);
    while (orbit.steps() < opts.max_steps && seen.size() < cap) {
      step();
      StateKey<I> key{orbit.state(), hash_state(orbit.state())};
      auto it = seen.find(key);
      if (it != seen.end()) return CycleInfo{it->second, orbit.steps() - it->second};
      seen.emplace(std::move(key), orbit.steps());
    }
    if (orbit.steps() >= opts.max_steps) return std::nullopt;

    // Brent fallback: compare against a checkpoint that doubles its distance.
    seen.clear();
    std::vector<I> checkpoint = orbit.state();
    long long cp_step = orbit.steps();
    long long power = 1;
    while (orbit.steps() < opts.max_steps) {
      step();
      if (orbit.state() == checkpoint) {
        const long long period = orbit.steps() - cp_step;
        return CycleInfo{find_transient(period), period};
      }
      if (orbit.steps() - cp_step == power) {
        checkpoint = orbit.state();
        cp_step = orbit.steps();
        power *= 2;
      }
    }
    return std::nullopt;
  }

  long long find_transient(long long period) const {
    Orbit<I> a(spec), b(spec);
    for (long long k = 0; k < period; ++k) b.advance();
    while (a.state() != b.state()) {
      a.advance();
      b.advance();
    }
    return a.steps();
  }
};

template <class I>
ActivityEstimate activity_impl(const SystemSpec& spec, const ActivityOptions& opts) {
  ActivityDriver<I> drv(spec, opts);
  auto cycle = drv.search();
  ActivityEstimate est;
  est.smoothness_hits = drv.hits;
  if (!cycle) {
    est.kind = ActivityEstimate::Kind::interval;
    est.lower = drv.best_lower < 0 ? Rational(0) : drv.best_lower;
    est.upper = drv.best_upper;
    est.search_lower = est.lower;
    est.search_upper = est.upper;
    est.steps_used = drv.orbit.steps();
    return est;
  }

  // Confirm the rate over one full period from inside the cycle.
  std::vector<BigInt> before(spec.n);
  for (int i = 0; i < spec.n; ++i) before[i] = widen(drv.orbit.odometer()[i]);
  for (long long k = 0; k < cycle->period; ++k) drv.step();
  std::vector<BigInt> fires(spec.n);
  for (int i = 0; i < spec.n; ++i) fires[i] = widen(drv.orbit.odometer()[i]) - before[i];

  std::vector<int> comp = spec.support_components();
  int ncomp = 0;
  for (int c : comp) ncomp = std::max(ncomp, c + 1);
  std::vector<BigInt> comp_fires(ncomp, BigInt(-1));
  for (int i = 0; i < spec.n; ++i) {
    if (comp_fires[comp[i]] == -1)
      comp_fires[comp[i]] = fires[i];
    else if (comp_fires[comp[i]] != fires[i])
      throw std::logic_error("per-period fire counts differ inside a connected component");
  }

  est.kind = ActivityEstimate::Kind::exact;
  est.period = cycle->period;
  est.transient = cycle->transient;
  est.steps_used = drv.orbit.steps();
  est.search_lower = drv.best_lower < 0 ? Rational(0) : drv.best_lower;
  est.search_upper = drv.best_upper;
  est.component_values.resize(ncomp);
  bool uniform = true;
  for (int c = 0; c < ncomp; ++c) {
    est.component_values[c] = Rational(comp_fires[c]) / to_rational(cycle->period);
    est.component_values[c].canonicalize();
    if (est.component_values[c] != est.component_values[0]) uniform = false;
  }
  est.uniform = uniform;
  if (uniform) {
    est.value = est.component_values[0];
    est.lower = est.value;
    est.upper = est.value;
  } else {
    // Disconnected with disagreeing rates: no global activity; keep the
    // certified bounds as the reported enclosure.
    est.lower = est.search_lower;
    est.upper = est.search_upper;
  }
  return est;
}

}  // namespace detail

/// Activity a = lim u_n/n. Exact when a repeated configuration is found within
/// the step budget, otherwise a certified interval [max_k m_k/k, min_k M_k/k].
template <class Model>
ActivityEstimate activity(const Model& model, const ChipConfig& sigma,
                          const ActivityOptions& opts = {}) {
  if (opts.max_steps < 1) throw std::invalid_argument("max_steps must be at least 1");
  detail::SystemSpec spec = detail::build_system(model, sigma);
  if (spec.fits_int64()) return detail::activity_impl<long long>(spec, opts);
  return detail::activity_impl<BigInt>(spec, opts);
}

/// beta_n/n where beta_n accumulates the measure of sites at or above their
/// degree. Graphon context only.
inline Rational beta_activity(const StepGraphon& w, const ChipConfig& sigma, long long n) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  Simulator sim(w, sigma);
  Rational beta(0);
  for (long long k = 0; k < n; ++k) {
    beta += sim.active_measure();
    sim.advance();
  }
  beta /= to_rational(n);
  beta.canonicalize();
  return beta;
}

/// Every exact hit U^i sigma(site) = k * deg(site), deg > 0, over i <= n.
/// An empty list certifies the trajectory prefix as smooth on a step carrier.
template <class Model>
std::vector<SmoothnessHit> smoothness_audit(const Model& model, const ChipConfig& sigma,
                                            long long n) {
  if (n < 0) throw std::invalid_argument("n must be nonnegative");
  Simulator sim(model, sigma);
  std::vector<SmoothnessHit> hits = sim.current_exact_multiples();
  for (long long k = 0; k < n; ++k) {
    sim.advance();
    auto h = sim.current_exact_multiples();
    hits.insert(hits.end(), h.begin(), h.end());
  }
  return hits;
}

}  // namespace staircase
