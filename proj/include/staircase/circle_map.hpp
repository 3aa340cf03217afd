#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "staircase/rational.hpp"

namespace staircase {

// Monotone nondecreasing degree-one lifts f : R -> R with f(x+1) = f(x)+1.
// Empirical maps built from step configurations are exact rational step
// functions; the closed-form geometric family is evaluated in doubles.

struct RotationInterval {
  Rational lower;
  Rational upper;
  long long iterations = 0;
  Rational x0;
  bool exact_arithmetic = true;
};

class CircleLift {
 public:
  enum class Kind { step, affine, smooth };

  Kind kind() const { return kind_; }
  bool continuous() const { return continuous_; }

  /// Jump points of a step lift paired with their jump sizes (positive).
  const std::vector<std::pair<Rational, Rational>>& discontinuities() const {
    return jumps_;
  }

  /// Step lift from segment starts (cuts[0] == 0, strictly increasing, < 1)
  /// and the value taken on [cuts[b], cuts[b+1]).
  static CircleLift step_lift(std::vector<Rational> cuts, std::vector<Rational> vals) {
    CircleLift f;
    f.kind_ = Kind::step;
    if (cuts.empty() || cuts.size() != vals.size())
      throw std::invalid_argument("step lift needs matching cuts and values");
    if (cuts.front() != 0) throw std::invalid_argument("first cut must be 0");
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      if (!(cuts[i] < cuts[i + 1])) throw std::invalid_argument("cuts must increase");
    if (cuts.back() >= 1) throw std::invalid_argument("cuts must stay below 1");
    for (std::size_t i = 0; i + 1 < vals.size(); ++i)
      if (vals[i] > vals[i + 1]) throw std::invalid_argument("lift must be nondecreasing");
    if (vals.back() > vals.front() + 1)
      throw std::invalid_argument("degree-one lift violated at the wrap");
    f.cuts_ = std::move(cuts);
    f.vals_ = std::move(vals);
    f.collect_jumps();
    return f;
  }

  static CircleLift affine(const Rational& c) {
    CircleLift f;
    f.kind_ = Kind::affine;
    f.shift_ = canonical(c);
    f.continuous_ = true;
    return f;
  }

  /// Closed-form limit lift of the geometric family:
  ///   f(x) = e^{-p(1-x)/mu} / (1 - e^{-p/mu})  on [0,1).
  static CircleLift geometric_limit(double mu, double p) {
    if (mu <= 0) throw std::invalid_argument("mu must be positive");
    if (p <= 0 || p > 1) throw std::invalid_argument("p must lie in (0,1]");
    return geometric_limit_from_ratio(std::exp(-p / mu), p, mu);
  }

  /// Same family parameterized by the ratio r = e^{-p/mu}; r = 1/2 realizes
  /// mu = p/log 2 exactly in floating point (orbit of 0 hits the integers).
  static CircleLift geometric_limit_from_ratio(double ratio, double p, double mu = 0) {
    if (ratio < 0 || ratio >= 1) throw std::invalid_argument("ratio must lie in [0,1)");
    CircleLift f;
    f.kind_ = Kind::smooth;
    f.ratio_ = ratio;
    f.p_ = p;
    f.mu_ = mu;
    f.continuous_ = ratio > 0;  // ratio 0 degenerates to a step at the integers
    // monotonicity spot check on a 2^10 grid
    double prev = f.eval_double(0.0);
    for (int i = 1; i <= 1024; ++i) {
      double x = static_cast<double>(i) / 1024.0;
      double cur = f.eval_double(x);
      if (cur + 1e-15 < prev) throw std::logic_error("smooth lift not monotone on grid");
      prev = cur;
    }
    return f;
  }

  /// Exact evaluation (step and affine kinds).
  Rational eval(const Rational& x) const {
    switch (kind_) {
      case Kind::affine:
        return x + shift_;
      case Kind::step: {
        BigInt whole = rational_floor(x);
        Rational r = x - Rational(whole);
        std::size_t lo = 0, hi = cuts_.size();
        while (lo + 1 < hi) {
          std::size_t mid = (lo + hi) / 2;
          if (cuts_[mid] <= r)
            lo = mid;
          else
            hi = mid;
        }
        return Rational(whole) + vals_[lo];
      }
      case Kind::smooth:
        throw std::logic_error("smooth lift has no exact evaluator");
    }
    throw std::logic_error("unreachable");
  }

  double eval_double(double x) const {
    switch (kind_) {
      case Kind::affine:
        return x + to_double(shift_);
      case Kind::step: {
        double fl = std::floor(x);
        Rational r = Rational(x - fl);
        if (r < 0) r = 0;
        if (r >= 1) r = 0, fl += 1;
        return fl + to_double(eval(r));
      }
      case Kind::smooth: {
        double fl = std::floor(x);
        double r = x - fl;
        if (ratio_ == 0) return fl;  // mass collapses onto the integers
        // e^{-p(1-r)/mu} = ratio^{(1-r)}  expressed through the ratio alone
        double v = std::pow(ratio_, 1.0 - r) / (1.0 - ratio_);
        return fl + v;
      }
    }
    throw std::logic_error("unreachable");
  }

  bool exact() const { return kind_ != Kind::smooth; }

  /// (x, f(x)) samples on a uniform grid over [0,1).
  std::vector<std::pair<double, double>> sample(int grid) const {
    std::vector<std::pair<double, double>> out;
    out.reserve(grid);
    for (int i = 0; i < grid; ++i) {
      double x = static_cast<double>(i) / grid;
      out.emplace_back(x, eval_double(x));
    }
    return out;
  }

 private:
  void collect_jumps() {
    continuous_ = true;
    for (std::size_t i = 1; i < vals_.size(); ++i)
      if (vals_[i] != vals_[i - 1]) {
        jumps_.emplace_back(cuts_[i], vals_[i] - vals_[i - 1]);
        continuous_ = false;
      }
    // wrap jump: f(1) = vals[0] + 1 vs sup over [cuts.back(), 1)
    if (vals_.front() + 1 != vals_.back()) {
      jumps_.emplace_back(Rational(0), vals_.front() + 1 - vals_.back());
      continuous_ = false;
    }
  }

  Kind kind_ = Kind::affine;
  std::vector<Rational> cuts_, vals_;
  std::vector<std::pair<Rational, Rational>> jumps_;
  Rational shift_;
  double ratio_ = 0, p_ = 1, mu_ = 0;
  bool continuous_ = false;
};

/// f_sigma of a preconfined step configuration (values in [0,2)) on the
/// all-ones carrier:
///   f(x) = lambda({sigma >= 1}) + lambda({sigma in [1-x,1) u [2-x,2)}).
inline CircleLift preconfined_lift(const std::vector<Rational>& measures,
                                   const std::vector<Rational>& values) {
  if (measures.size() != values.size() || measures.empty())
    throw std::invalid_argument("measures and values must match");
  Rational base(0);
  std::map<Rational, Rational> events;  // threshold in (0,1) -> mass joining there
  for (std::size_t i = 0; i < measures.size(); ++i) {
    const Rational& s = values[i];
    if (s < 0 || s >= 2) throw std::invalid_argument("configuration not preconfined");
    if (s >= 1) base += measures[i];
    Rational t = s < 1 ? 1 - s : 2 - s;
    if (t < 1) events[t] += measures[i];  // t == 1 only contributes through the wrap
  }
  std::vector<Rational> cuts{Rational(0)}, vals{base};
  Rational acc = base;
  for (const auto& [t, m] : events) {
    acc += m;
    cuts.push_back(t);
    vals.push_back(acc);
  }
  return CircleLift::step_lift(std::move(cuts), std::move(vals));
}

/// Phi_{sigma,y} of a stable step configuration (values < 1):
///   Phi(x) = ceil(x) - lambda({sigma < ceil(x) - x}) + y.
/// Discontinuous whenever a level set of sigma carries positive measure,
/// which on a step carrier is every represented value; the jumps are flagged
/// on the returned lift.
inline CircleLift stable_shift_lift(const std::vector<Rational>& measures,
                                    const std::vector<Rational>& values,
                                    const Rational& y_in) {
  const Rational y = canonical(y_in);
  if (measures.size() != values.size() || measures.empty())
    throw std::invalid_argument("measures and values must match");
  std::map<Rational, Rational> events;  // threshold 1 - s -> mass
  for (std::size_t i = 0; i < measures.size(); ++i) {
    const Rational& s = values[i];
    if (s < 0 || s >= 1) throw std::invalid_argument("configuration not stable");
    events[1 - s] += measures[i];
  }
  // Phi(x) = 1 + y - sum of masses with threshold strictly above x, x in (0,1).
  std::vector<Rational> cuts{Rational(0)}, vals{y};
  Rational acc = y;  // value at 0+ equals y since all thresholds exceed 0
  for (const auto& [t, m] : events) {
    if (t >= 1) break;  // s == 0 parts join only at the wrap
    acc += m;
    cuts.push_back(t);
    vals.push_back(acc);
  }
  return CircleLift::step_lift(std::move(cuts), std::move(vals));
}

/// sigma-bar: increasing rearrangement of the one-step image of the geometric
/// profile, -mu log(1 - v + v e^{-p/mu}) + y(mu).
inline double geometric_profile(double mu, double p, double v) {
  if (mu <= 0) throw std::invalid_argument("mu must be positive");
  if (v < 0 || v > 1) throw std::invalid_argument("v must lie in [0,1]");
  double r = std::exp(-p / mu);
  return -mu * std::log(1.0 - v + v * r) + p * r / (1.0 - r);
}

/// y(mu) = p e^{-p/mu} / (1 - e^{-p/mu}); the uniform mass every site receives.
inline double geometric_offset(double mu, double p) {
  if (mu <= 0) throw std::invalid_argument("mu must be positive");
  double r = std::exp(-p / mu);
  return p * r / (1.0 - r);
}

/// Rotation number enclosure for a monotone degree-one lift:
///   [(f^n(x0) - x0 - 1)/n, (f^n(x0) - x0 + 1)/n], width 2/n.
/// Exact arithmetic for step/affine lifts; doubles (with a small widening for
/// tracked roundoff) for the smooth family.
inline RotationInterval rotation_number(const CircleLift& f, long long iters,
                                        const Rational& x0_in = Rational(0)) {
  if (iters < 1) throw std::invalid_argument("iterations must be positive");
  const Rational x0 = canonical(x0_in);
  RotationInterval out;
  out.iterations = iters;
  out.x0 = x0;
  if (f.exact()) {
    // monotonicity is enforced at construction, so the enclosure is rigorous
    Rational x = x0;
    for (long long k = 0; k < iters; ++k) x = f.eval(x);
    Rational disp = x - x0;
    out.lower = (disp - 1) / to_rational(iters);
    out.upper = (disp + 1) / to_rational(iters);
    out.lower.canonicalize();
    out.upper.canonicalize();
    out.exact_arithmetic = true;
    return out;
  }
  // smooth: track whole part exactly, fractional part in double
  long long whole = 0;
  double frac = to_double(x0);
  whole += static_cast<long long>(std::floor(frac));
  frac -= std::floor(frac);
  for (long long k = 0; k < iters; ++k) {
    double v = f.eval_double(frac);
    if (!std::isfinite(v)) throw std::runtime_error("lift evaluation diverged");
    double fl = std::floor(v);
    whole += static_cast<long long>(fl);
    frac = v - fl;
    if (frac < 0) frac = 0;
    if (frac >= 1) {
      whole += 1;
      frac = 0;
    }
  }
  // displacement = whole + frac - x0, with roundoff allowance 1e-12
  Rational disp = to_rational(whole) + Rational(frac) - x0;
  Rational slack = make_rational(1, 1000000000000LL);
  out.lower = (disp - 1 - slack) / to_rational(iters);
  out.upper = (disp + 1 + slack) / to_rational(iters);
  out.exact_arithmetic = false;
  return out;
}

inline Rational rotation_midpoint(const RotationInterval& r) {
  Rational m = (r.lower + r.upper) / 2;
  m.canonicalize();
  return m;
}

struct PeriodicityHit {
  Rational x;
  Rational displacement;  // f^q(x) - x, within tol of an integer
};

/// Samples grid points where f^q(x) - x sits within tol of an integer, i.e.
/// where the q-th circle-map iterate looks like the identity. A nonempty
/// list is only evidence against the map having no periodic iterate; an
/// empty list proves nothing beyond the sampled grid.
inline std::vector<PeriodicityHit> sampled_periodicity_hits(const CircleLift& f, int q,
                                                            int grid,
                                                            const Rational& tol = Rational(0)) {
  if (q < 1) throw std::invalid_argument("q must be positive");
  if (grid < 1) throw std::invalid_argument("grid must be positive");
  if (!f.exact())
    throw std::invalid_argument("periodicity sampling needs an exact lift");
  std::vector<PeriodicityHit> hits;
  for (int i = 0; i < grid; ++i) {
    Rational x = make_rational(i, grid);
    Rational y = x;
    for (int k = 0; k < q; ++k) y = f.eval(y);
    Rational disp = y - x;
    Rational dist = abs(disp - Rational(rational_floor(disp)));
    Rational wrap = 1 - dist;
    if (wrap < dist) dist = wrap;
    if (dist <= tol) hits.push_back({x, disp});
  }
  return hits;
}

}  // namespace staircase
