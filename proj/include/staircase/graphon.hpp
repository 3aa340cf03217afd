#pragma once

#include <stdexcept>
#include <vector>

#include "staircase/graph.hpp"
#include "staircase/rational.hpp"

namespace staircase {

/// Step graphon: a partition of [0,1] into k parts with positive rational
/// measures summing to 1, and a symmetric rational kernel with entries in [0,1].
class StepGraphon {
 public:
  StepGraphon(std::vector<Rational> measures, std::vector<std::vector<Rational>> kernel)
      : measures_(std::move(measures)), kernel_(std::move(kernel)) {
    const std::size_t k = measures_.size();
    if (k == 0) throw std::invalid_argument("step graphon needs at least one part");
    Rational total(0);
    for (auto& m : measures_) {
      m.canonicalize();
      if (m <= 0) throw std::invalid_argument("part measures must be positive");
      total += m;
    }
    if (total != 1) throw std::invalid_argument("part measures must sum to 1");
    if (kernel_.size() != k) throw std::invalid_argument("kernel size mismatch");
    for (std::size_t i = 0; i < k; ++i) {
      if (kernel_[i].size() != k) throw std::invalid_argument("kernel row size mismatch");
      for (std::size_t j = 0; j < k; ++j) {
        kernel_[i][j].canonicalize();
        if (kernel_[i][j] < 0 || kernel_[i][j] > 1)
          throw std::invalid_argument("kernel entries must lie in [0,1]");
      }
    }
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        if (kernel_[i][j] != kernel_[j][i])
          throw std::invalid_argument("kernel must be symmetric");
    degrees_.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      Rational d(0);
      for (std::size_t j = 0; j < k; ++j) d += measures_[j] * kernel_[i][j];
      degrees_[i] = d;
    }
  }

  /// Constant graphon C_p as a single part.
  static StepGraphon constant(const Rational& p) { return constant(p, 1); }

  /// Constant graphon C_p split into `parts` equal parts.
  static StepGraphon constant(const Rational& p, int parts) {
    if (parts <= 0) throw std::invalid_argument("parts must be positive");
    std::vector<Rational> m(parts, Rational(1, parts));
    std::vector<std::vector<Rational>> w(parts, std::vector<Rational>(parts, p));
    return StepGraphon(std::move(m), std::move(w));
  }

  int parts() const { return static_cast<int>(measures_.size()); }
  const Rational& measure(int i) const { return measures_.at(i); }
  const std::vector<Rational>& measures() const { return measures_; }
  const Rational& kernel(int i, int j) const { return kernel_.at(i).at(j); }
  const std::vector<std::vector<Rational>>& kernel() const { return kernel_; }

  /// deg_i = sum_j m_j W_ij, always in [0,1].
  const Rational& degree(int i) const { return degrees_.at(i); }
  const std::vector<Rational>& degrees() const { return degrees_; }

 private:
  std::vector<Rational> measures_;
  std::vector<std::vector<Rational>> kernel_;
  std::vector<Rational> degrees_;
};

inline Rational degree(const StepGraphon& w, int i) { return w.degree(i); }

/// Step-graphon version of a simple graph: n equal parts, 0/1 kernel.
/// Multigraph multiplicities above 1 are not representable in a [0,1] kernel.
inline StepGraphon from_graph(const FiniteGraph& g) {
  const int n = g.size();
  std::vector<Rational> m(n, Rational(1, n));
  std::vector<std::vector<Rational>> w(n, std::vector<Rational>(n, Rational(0)));
  for (int u = 0; u < n; ++u)
    for (const auto& arc : g.neighbors(u)) {
      if (arc.mult > 1)
        throw std::invalid_argument("multigraph multiplicity exceeds 1; no {0,1} kernel");
      w[u][arc.to] = to_rational(arc.mult);
    }
  return StepGraphon(std::move(m), std::move(w));
}

}  // namespace staircase
