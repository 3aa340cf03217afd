#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "staircase/graphon.hpp"
#include "staircase/rational.hpp"

namespace staircase {

/// Essential infimum of the degree function; on a step carrier the minimum
/// part degree, since every part has positive measure.
inline Rational mindeg(const StepGraphon& w) {
  Rational lo = w.degree(0);
  for (int i = 1; i < w.parts(); ++i) lo = std::min(lo, w.degree(i));
  return lo;
}

namespace detail {

/// Support adjacency on parts: i ~ j iff W_ij > 0 (diagonal kept separately).
inline std::vector<std::vector<int>> support_adjacency(const StepGraphon& w) {
  const int k = w.parts();
  std::vector<std::vector<int>> adj(k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (j != i && w.kernel(i, j) > 0) adj[i].push_back(j);
  return adj;
}

}  // namespace detail

inline bool is_connected(const StepGraphon& w) {
  const int k = w.parts();
  auto adj = detail::support_adjacency(w);
  std::vector<char> seen(k, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        q.push(v);
      }
  }
  return count == k;
}

struct BipartiteResult {
  bool bipartite = false;
  // Canonical sides: BFS from the lowest part of each support component,
  // that part on side 0. Meaningful only when bipartite.
  std::vector<int> side;
};

inline BipartiteResult is_bipartite(const StepGraphon& w) {
  const int k = w.parts();
  BipartiteResult res;
  res.side.assign(k, -1);
  for (int i = 0; i < k; ++i)
    if (w.kernel(i, i) > 0) return res;  // odd closed walk of length 1
  auto adj = detail::support_adjacency(w);
  for (int s = 0; s < k; ++s) {
    if (res.side[s] != -1) continue;
    res.side[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u]) {
        if (res.side[v] == -1) {
          res.side[v] = 1 - res.side[u];
          q.push(v);
        } else if (res.side[v] == res.side[u]) {
          return res;  // odd cycle
        }
      }
    }
  }
  res.bipartite = true;
  return res;
}

/// Gamma_eps(A): parts receiving at least eps mass when A fires once,
/// i.e. { j : sum_{i in A} m_i W_ij >= eps }. Monotone in A, antitone in eps.
inline std::vector<int> gamma_eps(const StepGraphon& w, const std::vector<int>& parts,
                                  const Rational& eps_in) {
  const Rational eps = canonical(eps_in);
  if (eps <= 0) throw std::invalid_argument("eps must be positive");
  const int k = w.parts();
  std::vector<char> in(k, 0);
  for (int i : parts) {
    if (i < 0 || i >= k) throw std::out_of_range("part index out of range");
    in[i] = 1;
  }
  std::vector<int> out;
  for (int j = 0; j < k; ++j) {
    Rational mass(0);
    for (int i = 0; i < k; ++i)
      if (in[i]) mass += w.measure(i) * w.kernel(i, j);
    if (mass >= eps) out.push_back(j);
  }
  return out;
}

struct DiameterWitness {
  long long rounds = 0;  // N
  Rational epsilon;
  enum class Verification { exhaustive, sampled, skipped } verification =
      Verification::skipped;
};

struct DiameterWitnessOptions {
  int exhaustive_limit = 20;  // full subset enumeration up to this many parts
  int samples = 512;
  std::uint64_t seed = 1;
};

namespace detail {

/// Gamma_eps over bitmask part-sets with integer-scaled mass sums.
struct MaskGamma {
  int k;
  std::vector<long long> c;  // scaled m_i W_ij, row-major, fits by construction
  long long eps_scaled;
  bool int_ok = true;
  // exact fallback
  std::vector<Rational> cq;
  Rational epsq;

  MaskGamma(const StepGraphon& w, const Rational& eps) : k(w.parts()) {
    BigInt denom = BigInt(eps.get_den());
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        Rational v = w.measure(i) * w.kernel(i, j);
        denom = lcm_big(denom, BigInt(v.get_den()));
      }
    const BigInt lim = (BigInt(1) << 60);
    BigInt worst = denom * (k + 1);
    int_ok = worst < lim;
    cq.resize(static_cast<std::size_t>(k) * k);
    if (int_ok) c.resize(static_cast<std::size_t>(k) * k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        Rational v = w.measure(i) * w.kernel(i, j);
        cq[i * k + j] = v;
        if (int_ok) c[i * k + j] = BigInt(Rational(v * Rational(denom)).get_num()).get_si();
      }
    epsq = eps;
    if (int_ok) eps_scaled = BigInt(Rational(eps * Rational(denom)).get_num()).get_si();
  }

  static BigInt lcm_big(const BigInt& a, const BigInt& b) {
    BigInt r;
    mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
  }

  std::uint32_t operator()(std::uint32_t mask) const {
    std::uint32_t out = 0;
    for (int j = 0; j < k; ++j) {
      if (int_ok) {
        long long mass = 0;
        for (int i = 0; i < k; ++i)
          if (mask >> i & 1) mass += c[i * k + j];
        if (mass >= eps_scaled) out |= std::uint32_t(1) << j;
      } else {
        Rational mass(0);
        for (int i = 0; i < k; ++i)
          if (mask >> i & 1) mass += cq[i * k + j];
        if (mass >= epsq) out |= std::uint32_t(1) << j;
      }
    }
    return out;
  }
};

inline bool witness_covers(const MaskGamma& gamma, std::uint32_t start, long long rounds,
                           std::uint32_t full) {
  std::uint32_t cover = start, cur = start;
  for (long long r = 0; r < rounds && cover != full; ++r) {
    cur = gamma(cur);
    cover |= cur;
  }
  return cover == full;
}

}  // namespace detail

/// Finite-diameter witness (N, eps): every positive-measure part union reaches
/// full measure within N rounds of eps-neighborhoods. Exists iff the graphon
/// is connected with positive mindeg; built from the support-graph diameter
/// and the smallest positive single-part mass m_i W_ij.
inline std::optional<DiameterWitness> finite_diameter_witness(
    const StepGraphon& w, const DiameterWitnessOptions& opts = {}) {
  if (!is_connected(w) || mindeg(w) == 0) return std::nullopt;
  const int k = w.parts();
  auto adj = detail::support_adjacency(w);
  long long diameter = 0;
  for (int s = 0; s < k; ++s) {
    std::vector<int> dist(k, -1);
    dist[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (dist[v] == -1) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
    }
    for (int v = 0; v < k; ++v) diameter = std::max<long long>(diameter, dist[v]);
  }
  DiameterWitness wit;
  wit.rounds = std::max<long long>(1, diameter);
  bool have = false;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      Rational mass = w.measure(i) * w.kernel(i, j);
      if (mass > 0 && (!have || mass < wit.epsilon)) {
        wit.epsilon = mass;
        have = true;
      }
    }

  detail::MaskGamma gamma(w, wit.epsilon);
  const std::uint32_t full =
      k >= 32 ? ~std::uint32_t(0) : ((std::uint32_t(1) << k) - 1);
  if (k <= opts.exhaustive_limit && k < 32) {
    for (std::uint32_t mask = 1; mask <= full; ++mask)
      if (!detail::witness_covers(gamma, mask, wit.rounds, full))
        throw std::logic_error("diameter witness failed exhaustive verification");
    wit.verification = DiameterWitness::Verification::exhaustive;
  } else if (k < 32) {
    std::uint64_t state = opts.seed;
    for (int t = 0; t < opts.samples; ++t) {
      state = hash_mix64(state + 0x9e3779b97f4a7c15ULL);
      std::uint32_t mask = static_cast<std::uint32_t>(state) & full;
      if (mask == 0) mask = 1;
      if (!detail::witness_covers(gamma, mask, wit.rounds, full))
        throw std::logic_error("diameter witness failed sampled verification");
    }
    wit.verification = DiameterWitness::Verification::sampled;
  }
  return wit;
}

struct CutDistanceResult {
  Rational lower;
  Rational upper;
  bool exact = false;
  // Witness subsets realizing `lower`, as index sets over the refined overlay
  // partition whose boundaries are reported alongside.
  std::vector<int> witness_S;
  std::vector<int> witness_T;
  std::vector<Rational> refined_cuts;  // k+1 boundaries in [0,1]
};

struct CutDistanceOptions {
  int exact_limit = 20;  // exact 2^k enumeration up to this refined part count
  int restarts = 32;
  std::uint64_t seed = 1;
};

namespace detail {

struct Refinement {
  std::vector<Rational> len;
  std::vector<int> iu, iw;
  std::vector<Rational> cuts;
};

inline Refinement common_refinement(const StepGraphon& u, const StepGraphon& w) {
  Refinement r;
  Rational pos(0);
  int a = 0, b = 0;
  Rational ua = u.measure(0), wb = w.measure(0);
  r.cuts.push_back(Rational(0));
  while (true) {
    Rational step = std::min(ua, wb);
    r.len.push_back(step);
    r.iu.push_back(a);
    r.iw.push_back(b);
    pos += step;
    r.cuts.push_back(pos);
    ua -= step;
    wb -= step;
    if (ua == 0) {
      ++a;
      if (a < u.parts()) ua = u.measure(a);
    }
    if (wb == 0) {
      ++b;
      if (b < w.parts()) wb = w.measure(b);
    }
    if (a >= u.parts() || b >= w.parts()) break;
  }
  return r;
}

}  // namespace detail

/// Labeled cut distance between two step graphons:
///   sup_{S,T} | int_S int_T U - W |.
/// The optimum over measurable S,T is attained on unions of refined parts, so
/// exact mode enumerates part subsets (Gray order); beyond the limit an
/// alternating-maximization lower bound and the L1 upper bound are reported.
inline CutDistanceResult cut_distance(const StepGraphon& u, const StepGraphon& w,
                                      const CutDistanceOptions& opts = {}) {
  detail::Refinement ref = detail::common_refinement(u, w);
  const int k = static_cast<int>(ref.len.size());
  // weighted difference matrix  d_rs = w_r w_s (U - W)
  std::vector<std::vector<Rational>> d(k, std::vector<Rational>(k));
  for (int r = 0; r < k; ++r)
    for (int s = 0; s < k; ++s)
      d[r][s] = ref.len[r] * ref.len[s] *
                (u.kernel(ref.iu[r], ref.iu[s]) - w.kernel(ref.iw[r], ref.iw[s]));

  CutDistanceResult res;
  res.refined_cuts = ref.cuts;

  auto mask_to_list = [&](const std::vector<char>& m) {
    std::vector<int> out;
    for (int i = 0; i < k; ++i)
      if (m[i]) out.push_back(i);
    return out;
  };

  if (k <= opts.exact_limit && k < 31) {
    // Gray-code walk over S; maintain col[s] = sum_{r in S} d_rs and the
    // positive/negative column totals, so each mask costs O(k).
    std::vector<Rational> col(k, Rational(0));
    Rational pos(0), neg(0);
    Rational best(0);
    std::uint32_t best_mask = 0;
    bool best_sign_pos = true;
    std::uint32_t gray = 0;
    const std::uint32_t total = std::uint32_t(1) << k;
    for (std::uint32_t i = 1; i < total; ++i) {
      std::uint32_t next = i ^ (i >> 1);
      int flip = __builtin_ctz(gray ^ next);
      bool adding = (next >> flip) & 1;
      gray = next;
      for (int s = 0; s < k; ++s) {
        const Rational& delta = d[flip][s];
        if (delta == 0) continue;
        if (col[s] > 0)
          pos -= col[s];
        else
          neg -= col[s];
        if (adding)
          col[s] += delta;
        else
          col[s] -= delta;
        if (col[s] > 0)
          pos += col[s];
        else
          neg += col[s];
      }
      if (pos > best) {
        best = pos;
        best_mask = gray;
        best_sign_pos = true;
      }
      if (-neg > best) {
        best = -neg;
        best_mask = gray;
        best_sign_pos = false;
      }
    }
    res.lower = best;
    res.upper = best;
    res.exact = true;
    // reconstruct witness T for the winning S and sign
    std::vector<char> sm(k, 0), tm(k, 0);
    for (int i = 0; i < k; ++i) sm[i] = (best_mask >> i) & 1;
    for (int s = 0; s < k; ++s) {
      Rational c(0);
      for (int r = 0; r < k; ++r)
        if (sm[r]) c += d[r][s];
      if (best_sign_pos ? c > 0 : c < 0) tm[s] = 1;
    }
    res.witness_S = mask_to_list(sm);
    res.witness_T = mask_to_list(tm);
    return res;
  }

  // Heuristic lower bound: alternating maximization from seeded + random
  // starts, both signs. Degree-split starts guarantee
  // lower >= ||deg_U - deg_W||_1 / 2.
  std::vector<Rational> degdiff(k);
  for (int r = 0; r < k; ++r)
    degdiff[r] = u.degree(ref.iu[r]) - w.degree(ref.iw[r]);

  Rational best(0);
  std::vector<char> best_s(k, 0), best_t(k, 0);
  auto evaluate = [&](std::vector<char> t, bool sign_pos) {
    // alternate S|T improvement until fixpoint (objective is bilinear)
    std::vector<char> s(k, 0);
    Rational val(-1);
    for (int it = 0; it < 64; ++it) {
      for (int r = 0; r < k; ++r) {
        Rational row(0);
        for (int c2 = 0; c2 < k; ++c2)
          if (t[c2]) row += d[r][c2];
        s[r] = sign_pos ? row > 0 : row < 0;
      }
      for (int c2 = 0; c2 < k; ++c2) {
        Rational colv(0);
        for (int r = 0; r < k; ++r)
          if (s[r]) colv += d[r][c2];
        t[c2] = sign_pos ? colv > 0 : colv < 0;
      }
      Rational v(0);
      for (int r = 0; r < k; ++r)
        if (s[r])
          for (int c2 = 0; c2 < k; ++c2)
            if (t[c2]) v += d[r][c2];
      if (!sign_pos) v = -v;
      if (v == val) break;
      val = v;
    }
    if (val > best) {
      best = val;
      best_s = s;
      best_t = t;
    }
  };

  std::vector<char> all(k, 1);
  evaluate(all, true);
  evaluate(all, false);
  std::vector<char> degpos(k), degneg(k);
  for (int r = 0; r < k; ++r) {
    degpos[r] = degdiff[r] > 0;
    degneg[r] = degdiff[r] < 0;
  }
  evaluate(degpos, true);
  evaluate(degneg, false);
  std::uint64_t state = opts.seed;
  for (int t = 0; t < opts.restarts; ++t) {
    std::vector<char> mask(k);
    for (int i = 0; i < k; ++i) {
      state = hash_mix64(state + i + 1);
      mask[i] = state & 1;
    }
    evaluate(mask, true);
    evaluate(mask, false);
  }
  res.lower = best;
  res.witness_S = mask_to_list(best_s);
  res.witness_T = mask_to_list(best_t);
  Rational l1(0);
  for (int r = 0; r < k; ++r)
    for (int s = 0; s < k; ++s) l1 += abs(d[r][s]);
  res.upper = l1;
  res.exact = res.lower == res.upper;
  return res;
}

/// ||deg_U - deg_W||_1 over the common refinement.
inline Rational degree_l1_distance(const StepGraphon& u, const StepGraphon& w) {
  detail::Refinement ref = detail::common_refinement(u, w);
  Rational s(0);
  for (std::size_t r = 0; r < ref.len.size(); ++r)
    s += ref.len[r] * abs(u.degree(ref.iu[r]) - w.degree(ref.iw[r]));
  return s;
}

struct MixingEntry {
  long long step;
  Rational tv;  // max_i TV(P^step(i,.), pi); exact while within the exact phase
  bool exact;
};

struct MixingReport {
  bool bipartite = false;
  std::vector<int> sides;          // per part, when bipartite
  std::vector<MixingEntry> rows;   // whole chain
  std::vector<MixingEntry> side_rows;  // bipartite: P^2 per side, worst side
  std::vector<Rational> stationary;
};

/// Finite Markov chain of the graphon: P_ij = m_j W_ij / deg_i with stationary
/// pi_i = m_i deg_i / sum m deg. Requires a connected carrier with positive
/// degrees. Exact rationals up to 64 steps, doubles beyond.
inline MixingReport markov_mixing(const StepGraphon& w, long long steps) {
  const int k = w.parts();
  if (!is_connected(w)) throw std::invalid_argument("mixing needs a connected graphon");
  for (int i = 0; i < k; ++i)
    if (w.degree(i) == 0) throw std::invalid_argument("zero-degree part rejected");
  if (steps < 1) throw std::invalid_argument("steps must be positive");

  std::vector<std::vector<Rational>> p(k, std::vector<Rational>(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) p[i][j] = w.measure(j) * w.kernel(i, j) / w.degree(i);
  Rational z(0);
  for (int i = 0; i < k; ++i) z += w.measure(i) * w.degree(i);
  std::vector<Rational> pi(k);
  for (int i = 0; i < k; ++i) pi[i] = w.measure(i) * w.degree(i) / z;

  MixingReport rep;
  rep.stationary = pi;
  auto bip = is_bipartite(w);
  rep.bipartite = bip.bipartite;
  if (bip.bipartite) rep.sides = bip.side;

  const long long exact_cap = 64;
  auto tv_max = [&](const std::vector<std::vector<Rational>>& m,
                    const std::vector<Rational>& target,
                    const std::vector<int>& rows_sel) {
    Rational worst(0);
    for (int i : rows_sel) {
      Rational acc(0);
      for (int j = 0; j < k; ++j) acc += abs(m[i][j] - target[j]);
      acc /= 2;
      if (acc > worst) worst = acc;
    }
    return worst;
  };

  std::vector<int> all_rows(k);
  for (int i = 0; i < k; ++i) all_rows[i] = i;

  // whole-chain rows
  {
    std::vector<std::vector<Rational>> pn = p;
    std::vector<std::vector<double>> pnd;
    bool exact = true;
    for (long long n = 1; n <= steps; ++n) {
      if (exact && n > exact_cap) {
        pnd.assign(k, std::vector<double>(k));
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) pnd[i][j] = to_double(pn[i][j]);
        exact = false;
      }
      if (exact) {
        rep.rows.push_back({n, tv_max(pn, pi, all_rows), true});
      } else {
        double worst = 0;
        for (int i = 0; i < k; ++i) {
          double acc = 0;
          for (int j = 0; j < k; ++j) acc += std::abs(pnd[i][j] - to_double(pi[j]));
          worst = std::max(worst, acc / 2);
        }
        rep.rows.push_back({n, Rational(worst), false});
      }
      if (n == steps) break;
      if (exact) {
        std::vector<std::vector<Rational>> nx(k, std::vector<Rational>(k, Rational(0)));
        for (int i = 0; i < k; ++i)
          for (int l = 0; l < k; ++l) {
            if (pn[i][l] == 0) continue;
            for (int j = 0; j < k; ++j) nx[i][j] += pn[i][l] * p[l][j];
          }
        pn.swap(nx);
      } else {
        std::vector<std::vector<double>> nx(k, std::vector<double>(k, 0.0));
        for (int i = 0; i < k; ++i)
          for (int l = 0; l < k; ++l)
            for (int j = 0; j < k; ++j) nx[i][j] += pnd[i][l] * to_double(p[l][j]);
        pnd.swap(nx);
      }
    }
  }

  if (rep.bipartite) {
    // two-step chain restricted per side, against pi_X / pi_Y
    std::vector<std::vector<Rational>> p2(k, std::vector<Rational>(k, Rational(0)));
    for (int i = 0; i < k; ++i)
      for (int l = 0; l < k; ++l) {
        if (p[i][l] == 0) continue;
        for (int j = 0; j < k; ++j) p2[i][j] += p[i][l] * p[l][j];
      }
    std::vector<std::vector<Rational>> side_pi(2, std::vector<Rational>(k, Rational(0)));
    for (int side = 0; side < 2; ++side) {
      Rational zs(0);
      for (int i = 0; i < k; ++i)
        if (bip.side[i] == side) zs += w.measure(i) * w.degree(i);
      for (int i = 0; i < k; ++i)
        if (bip.side[i] == side) side_pi[side][i] = w.measure(i) * w.degree(i) / zs;
    }
    std::vector<std::vector<Rational>> pn = p2;
    for (long long n = 2; n <= steps; n += 2) {
      Rational worst(0);
      for (int side = 0; side < 2; ++side) {
        std::vector<int> rows_sel;
        for (int i = 0; i < k; ++i)
          if (bip.side[i] == side) rows_sel.push_back(i);
        Rational tv = tv_max(pn, side_pi[side], rows_sel);
        if (tv > worst) worst = tv;
      }
      rep.side_rows.push_back({n, worst, true});
      if (n + 2 > steps) break;
      std::vector<std::vector<Rational>> nx(k, std::vector<Rational>(k, Rational(0)));
      for (int i = 0; i < k; ++i)
        for (int l = 0; l < k; ++l) {
          if (pn[i][l] == 0) continue;
          for (int j = 0; j < k; ++j) nx[i][j] += pn[i][l] * p2[l][j];
        }
      pn.swap(nx);
      if (n / 2 >= exact_cap) break;  // keep the side analysis exact-only
    }
  }
  return rep;
}

/// Exact stationarity check pi P = pi; used by tests and the CLI report.
inline bool stationary_exact(const StepGraphon& w) {
  const int k = w.parts();
  std::vector<Rational> pi(k);
  Rational z(0);
  for (int i = 0; i < k; ++i) z += w.measure(i) * w.degree(i);
  for (int i = 0; i < k; ++i) pi[i] = w.measure(i) * w.degree(i) / z;
  for (int j = 0; j < k; ++j) {
    Rational acc(0);
    for (int i = 0; i < k; ++i) {
      if (w.degree(i) == 0) throw std::invalid_argument("zero-degree part rejected");
      acc += pi[i] * (w.measure(j) * w.kernel(i, j) / w.degree(i));
    }
    if (acc != pi[j]) return false;
  }
  return true;
}

}  // namespace staircase
