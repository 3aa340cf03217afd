#include <catch2/catch.hpp>

#include "staircase/analysis.hpp"
#include "staircase/random.hpp"
#include "support/generators.hpp"

using namespace staircase;

namespace {

Rational Q(const char* s) { return parse_rational(s); }

StepGraphon two_part_bipartite() {
  return StepGraphon({Q("1/2"), Q("1/2")}, {{Q("0"), Q("1")}, {Q("1"), Q("0")}});
}

/// Exhaustive (S, T) enumeration, independent of the production optimizer.
Rational brute_cut_distance(const StepGraphon& u, const StepGraphon& w) {
  auto ref = detail::common_refinement(u, w);
  const int k = static_cast<int>(ref.len.size());
  REQUIRE(k <= 12);
  Rational best(0);
  for (std::uint32_t sm = 0; sm < (1u << k); ++sm)
    for (std::uint32_t tm = 0; tm < (1u << k); ++tm) {
      Rational acc(0);
      for (int r = 0; r < k; ++r)
        if (sm >> r & 1)
          for (int s = 0; s < k; ++s)
            if (tm >> s & 1)
              acc += ref.len[r] * ref.len[s] *
                     (u.kernel(ref.iu[r], ref.iu[s]) - w.kernel(ref.iw[r], ref.iw[s]));
      if (abs(acc) > best) best = abs(acc);
    }
  return best;
}

}  // namespace

TEST_CASE("mindeg", "[analysis]") {
  CHECK(mindeg(StepGraphon::constant(Q("2/3"), 3)) == Q("2/3"));
  CHECK(mindeg(two_part_bipartite()) == Q("1/2"));
  CHECK(mindeg(StepGraphon::constant(Q("0"), 2)) == 0);
}

TEST_CASE("connectivity and bipartiteness", "[analysis]") {
  SECTION("constant graphon") {
    StepGraphon cp = StepGraphon::constant(Q("1/2"), 3);
    CHECK(is_connected(cp));
    CHECK_FALSE(is_bipartite(cp).bipartite);  // positive diagonal
  }
  SECTION("single edge support") {
    StepGraphon w = two_part_bipartite();
    CHECK(is_connected(w));
    auto b = is_bipartite(w);
    REQUIRE(b.bipartite);
    CHECK(b.side == std::vector<int>{0, 1});
  }
  SECTION("block diagonal is disconnected") {
    StepGraphon w({Q("1/2"), Q("1/2")}, {{Q("1"), Q("0")}, {Q("0"), Q("1")}});
    CHECK_FALSE(is_connected(w));
  }
}

TEST_CASE("gamma_eps", "[analysis]") {
  SECTION("constant graphon reaches everything in one round") {
    StepGraphon cp = StepGraphon::constant(Q("3/5"), 4);
    // eps = p * measure(A) with A = {0}
    auto out = gamma_eps(cp, {0}, Q("3/5") * Q("1/4"));
    CHECK(out == std::vector<int>{0, 1, 2, 3});
  }
  SECTION("eps above row mass gives the empty set") {
    StepGraphon cp = StepGraphon::constant(Q("1"), 2);
    CHECK(gamma_eps(cp, {0, 1}, Q("2")).empty());
  }
  SECTION("two-part kernel pushes mass across") {
    StepGraphon w = two_part_bipartite();
    CHECK(gamma_eps(w, {0}, Q("1/2")) == std::vector<int>{1});
  }
  SECTION("monotone in A, antitone in eps") {
    gen::Rng rng(31);
    for (int t = 0; t < 40; ++t) {
      StepGraphon w = gen::graphon(rng);
      const int k = w.parts();
      std::vector<int> a, b;
      for (int i = 0; i < k; ++i) {
        if (rng.below(2)) a.push_back(i);
        if (rng.below(2)) b.push_back(i);
      }
      std::vector<int> ab;  // a subset of (a union b)
      ab = a;
      for (int x : b)
        if (std::find(ab.begin(), ab.end(), x) == ab.end()) ab.push_back(x);
      std::sort(ab.begin(), ab.end());
      Rational eps = make_rational(1 + rng.below(8), 16);
      Rational eps2 = eps + make_rational(1 + rng.below(8), 16);
      auto g_a = gamma_eps(w, a, eps);
      auto g_ab = gamma_eps(w, ab, eps);
      for (int x : g_a)
        CHECK(std::find(g_ab.begin(), g_ab.end(), x) != g_ab.end());
      auto g_hi = gamma_eps(w, a, eps2);
      for (int x : g_hi) CHECK(std::find(g_a.begin(), g_a.end(), x) != g_a.end());
    }
  }
  CHECK_THROWS_AS(gamma_eps(two_part_bipartite(), {0}, Q("0")), std::invalid_argument);
}

TEST_CASE("finite diameter witness", "[analysis]") {
  SECTION("constant graphon: one round") {
    auto wit = finite_diameter_witness(StepGraphon::constant(Q("2/5"), 3));
    REQUIRE(wit.has_value());
    CHECK(wit->rounds == 1);
    CHECK(wit->epsilon == Q("2/5") * Q("1/3"));
    CHECK(wit->verification == DiameterWitness::Verification::exhaustive);
  }
  SECTION("disconnected: none") {
    StepGraphon w({Q("1/2"), Q("1/2")}, {{Q("1"), Q("0")}, {Q("0"), Q("1")}});
    CHECK_FALSE(finite_diameter_witness(w).has_value());
  }
  SECTION("zero mindeg: none") {
    StepGraphon w({Q("1/2"), Q("1/2")}, {{Q("1"), Q("0")}, {Q("0"), Q("0")}});
    CHECK_FALSE(finite_diameter_witness(w).has_value());
  }
  SECTION("path support has diameter 2") {
    StepGraphon w({Q("1/3"), Q("1/3"), Q("1/3")},
                  {{Q("0"), Q("1"), Q("0")}, {Q("1"), Q("0"), Q("1")}, {Q("0"), Q("1"), Q("0")}});
    auto wit = finite_diameter_witness(w);
    REQUIRE(wit.has_value());
    CHECK(wit->rounds == 2);
  }
  SECTION("witness exists iff connected with positive mindeg") {
    gen::Rng rng(41);
    for (int t = 0; t < 120; ++t) {
      StepGraphon w = gen::graphon(rng, 6);
      bool expected = is_connected(w) && mindeg(w) > 0;
      CHECK(finite_diameter_witness(w).has_value() == expected);
    }
  }
}

TEST_CASE("cut distance", "[analysis]") {
  SECTION("identical graphons") {
    StepGraphon w = two_part_bipartite();
    CutDistanceResult r = cut_distance(w, w);
    CHECK(r.exact);
    CHECK(r.lower == 0);
    CHECK(r.upper == 0);
  }
  SECTION("constant vs constant") {
    CutDistanceResult r =
        cut_distance(StepGraphon::constant(Q("3/4")), StepGraphon::constant(Q("1/4")));
    CHECK(r.exact);
    CHECK(r.lower == Q("1/2"));
  }
  SECTION("matches the brute-force enumeration") {
    gen::Rng rng(51);
    for (int t = 0; t < 25; ++t) {
      StepGraphon u = gen::graphon(rng, 3, 4);
      StepGraphon w = gen::graphon(rng, 3, 4);
      CutDistanceResult r = cut_distance(u, w);
      REQUIRE(r.exact);
      CHECK(r.lower == brute_cut_distance(u, w));
    }
  }
  SECTION("degree lemma bound") {
    gen::Rng rng(61);
    for (int t = 0; t < 40; ++t) {
      StepGraphon u = gen::graphon(rng, 4);
      StepGraphon w = gen::graphon(rng, 4);
      CutDistanceResult r = cut_distance(u, w);
      REQUIRE(r.exact);
      CHECK(degree_l1_distance(u, w) <= 2 * r.lower);
    }
  }
  SECTION("heuristic finds the optimum at desk scale") {
    gen::Rng rng(77);
    CutDistanceOptions exact_opts;
    CutDistanceOptions heur_opts;
    heur_opts.exact_limit = 0;  // force alternating maximization
    int hit = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
      StepGraphon u = gen::graphon(rng, 6, 6);
      StepGraphon w = gen::graphon(rng, 6, 6);
      CutDistanceResult ex = cut_distance(u, w, exact_opts);
      CutDistanceResult he = cut_distance(u, w, heur_opts);
      REQUIRE(ex.exact);
      REQUIRE(he.lower <= ex.lower);
      if (he.lower == ex.lower) ++hit;
    }
    CHECK(hit >= 95);
  }
  SECTION("heuristic mode stays a valid enclosure") {
    gen::Rng rng(71);
    CutDistanceOptions tight;
    tight.exact_limit = 2;  // force the heuristic on anything bigger
    for (int t = 0; t < 25; ++t) {
      StepGraphon u = gen::graphon(rng, 3, 4);
      StepGraphon w = gen::graphon(rng, 3, 4);
      CutDistanceResult heur = cut_distance(u, w, tight);
      Rational exact = brute_cut_distance(u, w);
      CHECK(heur.lower <= exact);
      CHECK(exact <= heur.upper);
      CHECK(heur.lower >= degree_l1_distance(u, w) / 2);
    }
  }
}

TEST_CASE("cut distance of a sampled graph to its constant limit", "[analysis]") {
  // heuristic mode (refined parts ~ n + 1): the degree-split seed keeps the
  // lower bound at or above ||deg_G - p||_1 / 2
  FiniteGraph g = er_graph(100, parse_rational("1/2"), 17);
  StepGraphon wg = from_graph(g);
  StepGraphon cp = StepGraphon::constant(parse_rational("1/2"));
  CutDistanceOptions opts;
  opts.restarts = 8;
  CutDistanceResult r = cut_distance(wg, cp, opts);
  CHECK_FALSE(r.exact);
  CHECK(r.lower >= degree_l1_distance(wg, cp) / 2);
  CHECK(r.lower <= r.upper);
  CHECK(r.lower > 0);
}

TEST_CASE("markov mixing", "[analysis]") {
  SECTION("constant graphon mixes in one step") {
    StepGraphon cp({Q("1/4"), Q("3/4")}, {{Q("1/2"), Q("1/2")}, {Q("1/2"), Q("1/2")}});
    MixingReport rep = markov_mixing(cp, 3);
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.rows[0].tv == 0);
    CHECK_FALSE(rep.bipartite);
  }
  SECTION("stationarity holds exactly on random connected graphons") {
    gen::Rng rng(81);
    for (int t = 0; t < 100; ++t) {
      StepGraphon w = gen::connected_graphon(rng, 5);
      CHECK(stationary_exact(w));
    }
  }
  SECTION("bipartite chain stalls globally but mixes per side") {
    StepGraphon w = two_part_bipartite();
    MixingReport rep = markov_mixing(w, 8);
    REQUIRE(rep.bipartite);
    // global chain alternates, TV stuck at 1/2
    for (const auto& row : rep.rows) CHECK(row.tv == Q("1/2"));
    // per-side two-step chain is already stationary
    for (const auto& row : rep.side_rows) CHECK(row.tv == 0);
  }
  SECTION("TV nonincreasing for an aperiodic chain") {
    gen::Rng rng(91);
    int done = 0;
    while (done < 12) {
      StepGraphon w = gen::connected_graphon(rng, 4);
      if (is_bipartite(w).bipartite) continue;
      MixingReport rep = markov_mixing(w, 24);
      for (std::size_t i = 1; i < rep.rows.size(); ++i)
        CHECK(rep.rows[i].tv <= rep.rows[i - 1].tv);
      ++done;
    }
  }
  SECTION("zero-degree part rejected") {
    StepGraphon w({Q("1/2"), Q("1/2")}, {{Q("1"), Q("0")}, {Q("0"), Q("0")}});
    CHECK_THROWS_AS(markov_mixing(w, 4), std::invalid_argument);
  }
  SECTION("disconnected carrier rejected") {
    StepGraphon w({Q("1/2"), Q("1/2")}, {{Q("1"), Q("0")}, {Q("0"), Q("1")}});
    CHECK_THROWS_AS(markov_mixing(w, 4), std::invalid_argument);
  }
}

TEST_CASE("analysis error paths", "[analysis]") {
  StepGraphon w = two_part_bipartite();
  CHECK_THROWS_AS(gamma_eps(w, {5}, Q("1/2")), std::out_of_range);
  CHECK_THROWS_AS(w.degree(7), std::out_of_range);
  FiniteGraph k3 = FiniteGraph::complete(3);
  CHECK_THROWS_AS(degree(k3, 3), std::out_of_range);
}
