#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "hbat/chc.hpp"
#include "hbat/honeygen.hpp"

using namespace hbat;
using chc::IconSet;
using chc::Params;

namespace {

std::vector<IconSet> disjoint_sets(std::size_t k, const Params& p, Rng& rng) {
  std::vector<int> ids(static_cast<std::size_t>(p.total_icons));
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<IconSet> out;
  for (std::size_t j = 0; j < k; ++j) {
    IconSet s(ids.begin() + static_cast<std::ptrdiff_t>(j * p.pass_icons),
              ids.begin() + static_cast<std::ptrdiff_t>((j + 1) * p.pass_icons));
    std::sort(s.begin(), s.end());
    out.push_back(s);
  }
  return out;
}

// Point in convex polygon by brute force: inside the closed triangle of
// some three displayed members.
bool in_hull_oracle(const chc::IconPlacement& pl, const IconSet& set, geometry::GridPoint q) {
  std::vector<geometry::GridPoint> pts;
  for (int id : set)
    if (auto p = pl.position(id)) pts.push_back(*p);
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a; b < pts.size(); ++b)
      for (std::size_t c = b; c < pts.size(); ++c) {
        const geometry::Triangle t{{pts[a], pts[b], pts[c]}};
        if (geometry::triangle_contains(t, q, geometry::Containment::kClosed)) return true;
      }
  return false;
}

double mean_kc(int K) {
  double s = 0;
  for (int j = 3; j <= K; ++j) s += j;
  return s / (K - 2);
}

}  // namespace

TEST(Chc, ExpectationsForReportedParameters) {
  EXPECT_NEAR(chc::expected_appearances(112, 70, 5, 100, true), 80.0, 1e-9);
  EXPECT_NEAR(chc::expected_appearances(112, 70, 5, 100, false), 61.68, 1e-2);
  EXPECT_EQ(chc::expected_appearances(112, 70, 5, 0, true), 0.0);
  EXPECT_EQ(chc::expected_appearances(112, 70, 5, 0, false), 0.0);
  EXPECT_THROW(chc::expected_appearances(112, 70, 2, 100, true), Error);
}

TEST(Chc, ExpectationsEqualShownFraction) {
  for (int K = 3; K <= 9; ++K) {
    EXPECT_NEAR(chc::expected_appearances(112, 70, K, 1, true), mean_kc(K) / K, 1e-12);
    EXPECT_NEAR(chc::expected_appearances(112, 70, K, 1, false),
                (70 - mean_kc(K)) / (112 - K), 1e-12);
  }
}

TEST(Chc, MonteCarloWithinThreeSigma) {
  struct Triple {
    int n, m, k, cols, rows;
  };
  const std::vector<Triple> triples{{112, 70, 5, 14, 8}, {60, 30, 4, 10, 6}, {200, 120, 8, 20, 10}};
  Rng rng(77);
  constexpr int kChallenges = 20000;
  for (const auto& t : triples) {
    Params p;
    p.total_icons = t.n;
    p.displayed = t.m;
    p.pass_icons = t.k;
    p.columns = t.cols;
    p.rows = t.rows;
    const auto sets = disjoint_sets(1, p, rng);
    const auto counts = chc::probabilistic_attack_sim(p, sets, kChallenges, rng);
    int other = 0;
    while (std::find(sets[0].begin(), sets[0].end(), other) != sets[0].end()) ++other;
    for (auto [id, is_pass] : {std::pair{sets[0][0], true}, std::pair{other, false}}) {
      const double expected = chc::expected_appearances(t.n, t.m, t.k, kChallenges, is_pass);
      const double pr = expected / kChallenges;
      const double sigma = std::sqrt(kChallenges * pr * (1 - pr));
      EXPECT_LE(std::abs(counts[static_cast<std::size_t>(id)] - expected), 3 * sigma)
          << t.n << ' ' << t.m << ' ' << t.k << (is_pass ? " pass" : " other");
    }
  }
}

TEST(Chc, SingleChallengeCountsAreZeroOrOne) {
  Rng rng(3);
  const Params p;
  const auto sets = disjoint_sets(1, p, rng);
  const auto counts = chc::probabilistic_attack_sim(p, sets, 1, rng);
  EXPECT_EQ(std::accumulate(counts.begin(), counts.end(), 0), p.displayed);
  for (int c : counts) EXPECT_TRUE(c == 0 || c == 1);
}

TEST(Chc, SweetIconsAppearAsOftenAsBasicPassIcons) {
  // With the same Kc shown from every set, a sweet icon's chance of being
  // displayed is E[Kc]/K in both variants; only the filler icons thin out.
  Rng rng(12);
  const Params p;
  constexpr int kChallenges = 4000;
  auto mean_of = [](const std::vector<int>& counts, const std::vector<IconSet>& sets, bool in) {
    std::set<int> sweet;
    for (const auto& s : sets) sweet.insert(s.begin(), s.end());
    double sum = 0;
    int n = 0;
    for (std::size_t id = 0; id < counts.size(); ++id) {
      if (sweet.count(static_cast<int>(id)) == static_cast<std::size_t>(in)) {
        sum += counts[id];
        ++n;
      }
    }
    return sum / n;
  };
  const auto basic_sets = disjoint_sets(1, p, rng);
  const auto mod_sets = disjoint_sets(3, p, rng);
  const auto basic = chc::probabilistic_attack_sim(p, basic_sets, kChallenges, rng);
  const auto modified = chc::probabilistic_attack_sim(p, mod_sets, kChallenges, rng);
  const double basic_pass = mean_of(basic, basic_sets, true) / kChallenges;
  const double sweet = mean_of(modified, mod_sets, true) / kChallenges;
  const double filler = mean_of(modified, mod_sets, false) / kChallenges;
  EXPECT_NEAR(basic_pass, 0.8, 0.02);
  EXPECT_NEAR(sweet, 0.8, 0.02);
  EXPECT_NEAR(filler, (70 - 3 * 4.0) / (112 - 15), 0.02);
  EXPECT_LT(filler, mean_of(basic, basic_sets, false) / kChallenges);
}

TEST(Chc, EveryRoundShowsKcFromEachSet) {
  Rng rng(5);
  const Params p;
  for (int i = 0; i < 200; ++i) {
    const auto sets = disjoint_sets(3, p, rng);
    const auto round = chc::generate_round(sets, i % 2 == 0, p, rng);
    EXPECT_GE(round.shown_per_set, 3);
    EXPECT_LE(round.shown_per_set, p.pass_icons);
    EXPECT_EQ(static_cast<int>(round.placement.icons().size()), p.displayed);
    for (const auto& s : sets) {
      const auto shown = std::count_if(s.begin(), s.end(),
                                       [&](int id) { return round.placement.displayed(id); });
      EXPECT_EQ(shown, round.shown_per_set);
    }
    std::set<geometry::GridPoint> cells;
    for (const auto& icon : round.placement.icons()) cells.insert(icon.pos);
    EXPECT_EQ(static_cast<int>(cells.size()), p.displayed);
  }
}

TEST(Chc, DesignatedRoundHullsShareNoIcon) {
  Rng rng(6);
  const Params p;
  for (std::size_t k : {2u, 3u}) {
    for (int i = 0; i < 30; ++i) {
      const auto sets = disjoint_sets(k, p, rng);
      const auto round = chc::generate_round(sets, true, p, rng);
      for (const auto& icon : round.placement.icons()) {
        int owners = 0;
        for (const auto& s : sets) owners += in_hull_oracle(round.placement, s, icon.pos);
        EXPECT_LE(owners, 1);
      }
      EXPECT_TRUE(chc::round_disjoint(round.placement, sets));
    }
  }
}

TEST(Chc, SmallDisplayDesignatedRound) {
  Rng rng(7);
  Params p;
  p.total_icons = 40;
  p.displayed = 20;
  p.columns = 5;
  p.rows = 4;
  const auto sets = disjoint_sets(2, p, rng);
  const auto round = chc::generate_round(sets, true, p, rng);
  EXPECT_TRUE(chc::round_disjoint(round.placement, sets));
}

TEST(Chc, TooManySweetIconsRejected) {
  Params p;
  p.displayed = 14;
  EXPECT_THROW(chc::validate(p, 3), Error);
  EXPECT_NO_THROW(chc::validate(Params{}, 3));
}

TEST(Chc, HullResponseMatchesOracle) {
  Rng rng(8);
  const Params p;
  for (int i = 0; i < 100; ++i) {
    const auto sets = disjoint_sets(2, p, rng);
    const auto round = chc::generate_round(sets, false, p, rng);
    for (const auto& icon : round.placement.icons()) {
      EXPECT_EQ(chc::hull_response_valid(round.placement, sets[0], icon.id),
                in_hull_oracle(round.placement, sets[0], icon.pos));
    }
    for (int id : sets[0]) {
      if (round.placement.displayed(id)) {
        EXPECT_TRUE(chc::hull_response_valid(round.placement, sets[0], id));
      } else {
        EXPECT_FALSE(chc::hull_response_valid(round.placement, sets[0], id));
      }
    }
  }
}

TEST(Chc, IconSetText) {
  EXPECT_EQ(chc::parse_icon_set("3,17,42,88,101"), (IconSet{3, 17, 42, 88, 101}));
  EXPECT_EQ(chc::format_icon_set({3, 17, 42}), "3,17,42");
  EXPECT_THROW(chc::parse_icon_set("3,x"), Error);
}

TEST(Chc, SessionSoundAndDetecting) {
  Rng rng(9);
  const Params p;
  for (int i = 0; i < 30; ++i) {
    auto sets = disjoint_sets(3, p, rng);
    const chc::Session session(p, sets, rng);
    for (std::size_t j = 1; j <= 3; ++j) {
      const auto tr = simulate_login(session, j, rng);
      EXPECT_EQ(identify_sweetword(tr), j);
    }
  }
}

TEST(Chc, ExpectationRuntime) {
  const auto start = std::chrono::steady_clock::now();
  volatile double v = chc::expected_appearances(112, 70, 5, 100, true);
  (void)v;
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::milliseconds(1));
}
