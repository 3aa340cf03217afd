#pragma once

#include <stdexcept>
#include <vector>

#include "staircase/graph.hpp"
#include "staircase/graphon.hpp"
#include "staircase/rational.hpp"

namespace staircase {

enum class Context { graph, graphon };

/// Nonnegative exact-rational chip amounts, one per vertex (graph context)
/// or per part (graphon context).
class ChipConfig {
 public:
  ChipConfig(Context ctx, std::vector<Rational> values)
      : ctx_(ctx), values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("empty chip configuration");
    for (auto& v : values_) {
      v.canonicalize();
      if (v < 0) throw std::invalid_argument("chip amounts must be nonnegative");
    }
  }

  Context context() const { return ctx_; }
  int size() const { return static_cast<int>(values_.size()); }
  const Rational& value(int i) const { return values_.at(i); }
  const std::vector<Rational>& values() const { return values_; }

 private:
  Context ctx_;
  std::vector<Rational> values_;
};

inline void check_carrier(const ChipConfig& c, const FiniteGraph& g) {
  if (c.context() != Context::graph || c.size() != g.size())
    throw std::invalid_argument("configuration does not match graph carrier");
}

inline void check_carrier(const ChipConfig& c, const StepGraphon& w) {
  if (c.context() != Context::graphon || c.size() != w.parts())
    throw std::invalid_argument("configuration does not match graphon carrier");
}

/// Graph-context L1 norm: plain sum of entries.
inline Rational l1_norm(const ChipConfig& c) {
  if (c.context() != Context::graph)
    throw std::invalid_argument("graphon configuration needs its carrier for the L1 norm");
  Rational s(0);
  for (const auto& v : c.values()) s += v;
  return s;
}

/// Graphon-context L1 norm: measure-weighted sum.
inline Rational l1_norm(const ChipConfig& c, const StepGraphon& w) {
  check_carrier(c, w);
  Rational s(0);
  for (int i = 0; i < c.size(); ++i) s += w.measure(i) * c.value(i);
  return s;
}

inline Rational l1_distance(const ChipConfig& a, const ChipConfig& b) {
  if (a.context() != Context::graph || b.context() != Context::graph || a.size() != b.size())
    throw std::invalid_argument("mismatched carriers");
  Rational s(0);
  for (int i = 0; i < a.size(); ++i) s += abs(a.value(i) - b.value(i));
  return s;
}

inline Rational l1_distance(const ChipConfig& a, const ChipConfig& b, const StepGraphon& w) {
  check_carrier(a, w);
  check_carrier(b, w);
  Rational s(0);
  for (int i = 0; i < a.size(); ++i) s += w.measure(i) * abs(a.value(i) - b.value(i));
  return s;
}

/// Graphon version of a graph configuration: part i carries sigma(v_i)/n.
inline ChipConfig scale_config_to_graphon(const ChipConfig& c, const FiniteGraph& g) {
  check_carrier(c, g);
  const int n = g.size();
  std::vector<Rational> vals(n);
  for (int i = 0; i < n; ++i) vals[i] = c.value(i) / n;
  return ChipConfig(Context::graphon, std::move(vals));
}

}  // namespace staircase
