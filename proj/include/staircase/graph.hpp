#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include "staircase/rational.hpp"

namespace staircase {

/// Finite multigraph: symmetric nonnegative integer multiplicities, no self-loops.
/// Immutable after construction; degrees are derived once and kept consistent.
class FiniteGraph {
 public:
  struct Edge {
    int u;
    int v;
    long long mult = 1;
  };
  struct Arc {
    int to;
    long long mult;
  };

  FiniteGraph(int n, const std::vector<Edge>& edges) : n_(n) {
    if (n <= 0) throw std::invalid_argument("graph needs at least one vertex");
    std::map<std::pair<int, int>, long long> acc;
    for (const Edge& e : edges) {
      if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
        throw std::invalid_argument("edge endpoint out of range");
      if (e.u == e.v) throw std::invalid_argument("self-loops are not allowed");
      if (e.mult < 0) throw std::invalid_argument("negative multiplicity");
      if (e.mult == 0) continue;
      auto key = std::minmax(e.u, e.v);
      acc[{key.first, key.second}] += e.mult;
    }
    adj_.assign(n, {});
    degree_.assign(n, 0);
    for (const auto& [uv, m] : acc) {
      adj_[uv.first].push_back({uv.second, m});
      adj_[uv.second].push_back({uv.first, m});
      degree_[uv.first] += m;
      degree_[uv.second] += m;
    }
    for (auto& row : adj_)
      std::sort(row.begin(), row.end(), [](const Arc& a, const Arc& b) { return a.to < b.to; });
  }

  static FiniteGraph complete(int n) {
    std::vector<Edge> es;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) es.push_back({u, v, 1});
    return FiniteGraph(n, es);
  }

  int size() const { return n_; }

  long long multiplicity(int u, int v) const {
    check_index(u);
    check_index(v);
    if (u == v) return 0;
    const auto& row = adj_[u];
    auto it = std::lower_bound(row.begin(), row.end(), v,
                               [](const Arc& a, int t) { return a.to < t; });
    return (it != row.end() && it->to == v) ? it->mult : 0;
  }

  const std::vector<Arc>& neighbors(int v) const {
    check_index(v);
    return adj_[v];
  }

  long long degree_int(int v) const {
    check_index(v);
    return degree_[v];
  }

  bool is_simple() const {
    for (const auto& row : adj_)
      for (const Arc& a : row)
        if (a.mult > 1) return false;
    return true;
  }

  /// Component id per vertex, ids dense starting at 0 in BFS-from-lowest order.
  std::vector<int> components() const {
    std::vector<int> comp(n_, -1);
    int next = 0;
    for (int s = 0; s < n_; ++s) {
      if (comp[s] != -1) continue;
      comp[s] = next;
      std::queue<int> q;
      q.push(s);
      while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (const Arc& a : adj_[u])
          if (comp[a.to] == -1) {
            comp[a.to] = next;
            q.push(a.to);
          }
      }
      ++next;
    }
    return comp;
  }

  bool connected() const {
    auto c = components();
    return std::all_of(c.begin(), c.end(), [](int x) { return x == 0; });
  }

 private:
  void check_index(int v) const {
    if (v < 0 || v >= n_) throw std::out_of_range("vertex index out of range");
  }

  int n_;
  std::vector<std::vector<Arc>> adj_;
  std::vector<long long> degree_;
};

inline Rational degree(const FiniteGraph& g, int v) { return to_rational(g.degree_int(v)); }

}  // namespace staircase
