#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "../oracles.hpp"
#include "hbat/honeygen.hpp"
#include "hbat/s3pas.hpp"

using namespace hbat;
using s3pas::Params;

namespace {

std::string shuffled_grid(Rng& rng) {
  std::string g{s3pas::kAlphabet};
  std::shuffle(g.begin(), g.end(), rng);
  return g;
}

std::string sorted(std::string s) {
  std::sort(s.begin(), s.end());
  return s;
}

// Places each (char, col, row) by swapping into a copy of the alphabet.
std::string place(std::initializer_list<std::tuple<char, int, int>> cells) {
  std::string g{s3pas::kAlphabet};
  for (auto [c, col, row] : cells) {
    const auto target = static_cast<std::size_t>(row * 10 + col);
    std::swap(g[g.find(c)], g[target]);
  }
  return g;
}

std::vector<std::string> random_sweetwords(std::size_t k, Rng& rng) {
  const auto pw = honeygen::random_password(Scheme::kS3pas, rng);
  return honeygen::generate_sweetwords(Scheme::kS3pas, pw, k, rng).list.entries;
}

}  // namespace

TEST(S3pas, RoundPpi) {
  EXPECT_EQ(s3pas::round_ppi("2KZW", 1), "2KZ");
  EXPECT_EQ(s3pas::round_ppi("2KZW", 3), "ZW2");
  EXPECT_EQ(s3pas::round_ppi("2KZW", 4), "W2K");
  EXPECT_EQ(s3pas::round_ppi("rD1l", 3), "1lr");
}

TEST(S3pas, DefaultParamsValidate) {
  EXPECT_NO_THROW(s3pas::validate(Params{}));
  Params bad;
  bad.alphabet.pop_back();
  EXPECT_THROW(s3pas::validate(bad), Error);
}

TEST(S3pas, PrsMatchesOracleOnRandomGrids) {
  Rng rng(21);
  const Params p;
  for (int i = 0; i < 300; ++i) {
    const s3pas::Challenge ch(p, shuffled_grid(rng), 1);
    std::string ppi;
    std::sample(ch.grid().begin(), ch.grid().end(), std::back_inserter(ppi), 3, rng);
    std::shuffle(ppi.begin(), ppi.end(), rng);
    EXPECT_EQ(s3pas::prs(ch, ppi, p), sorted(oracle::s3pas_prs(ch.grid(), 10, ppi)));
  }
}

TEST(S3pas, DashInsideTriangle2KZ) {
  const Params p;
  const s3pas::Challenge ch(p, place({{'2', 0, 0}, {'K', 6, 0}, {'Z', 0, 6}, {'-', 1, 1}}), 1);
  const auto set = s3pas::prs(ch, "2KZ", p);
  EXPECT_NE(set.find('-'), std::string::npos);
  EXPECT_NE(set.find('2'), std::string::npos);
  // (3,0) lies on the edge 2-K and is excluded under the vertex-plus-interior rule.
  EXPECT_EQ(set.find(ch.at({3, 0})), std::string::npos);
}

TEST(S3pas, GeneratedChallengeSeparatesDesignatedRound) {
  Rng rng(4);
  const Params p;
  for (int i = 0; i < 20; ++i) {
    const auto sw = random_sweetwords(6, rng);
    const auto gen = s3pas::generate_challenge(sw, p, rng);
    EXPECT_EQ(sorted(gen.challenge.grid()), sorted(std::string{s3pas::kAlphabet}));
    const int r = gen.challenge.designated_round();
    std::string all;
    for (const auto& w : sw) all += oracle::s3pas_prs(gen.challenge.grid(), 10, oracle::ppi(w, r));
    const auto s = sorted(all);
    EXPECT_EQ(std::adjacent_find(s.begin(), s.end()), s.end());
    EXPECT_TRUE(s3pas::round_disjoint(gen.challenge, sw, r, p));
  }
}

TEST(S3pas, FixedDesignatedRound) {
  Rng rng(9);
  const auto sw = random_sweetwords(3, rng);
  const auto gen = s3pas::generate_challenge(sw, Params{}, rng, 2);
  EXPECT_EQ(gen.challenge.designated_round(), 2);
}

TEST(S3pas, InfeasibleKTimesOut) {
  Rng rng(1);
  Params p;
  p.max_iterations = 200;
  std::vector<std::string> sw;
  const std::string a{s3pas::kAlphabet};
  for (std::size_t j = 0; j < 20; ++j) sw.push_back(a.substr(j * 4, 4));
  EXPECT_THROW(s3pas::generate_challenge(sw, p, rng), GenerationTimeout);
}

TEST(S3pas, SmallKNeedsFewerIterations) {
  Rng rng(2);
  const std::vector<std::size_t> ks{2, 6};
  const auto rows = s3pas::challenge_gen_stats(ks, 20, rng);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_LT(rows[0].avg_iterations, rows[1].avg_iterations);
  EXPECT_GE(rows[1].min_iterations, 1u);
  EXPECT_EQ(rows[1].iterations.size(), 20u);
}

TEST(S3pas, BenchRejectsZeroRuns) {
  Rng rng(2);
  const std::vector<std::size_t> ks{4};
  EXPECT_THROW(s3pas::challenge_gen_stats(ks, 0, rng), Error);
}

TEST(S3pas, BenchCsvColumns) {
  s3pas::BenchRow row;
  row.k = 4;
  row.max_iterations = 9;
  row.min_iterations = 1;
  row.avg_iterations = 3.5;
  std::ostringstream os;
  s3pas::write_bench_csv(os, std::vector<s3pas::BenchRow>{row});
  std::istringstream in(os.str());
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 6);
  EXPECT_EQ(header.substr(0, 10), "value of k");
  EXPECT_EQ(line.substr(0, 10), "4,9,1,3.5,");
}

TEST(S3pas, TriangleAreaSmallN) {
  EXPECT_EQ(s3pas::expected_triangle_area(1), 0.0);
  EXPECT_NEAR(s3pas::expected_triangle_area(2), oracle::triangle_area_mean(2), 1e-12);
  EXPECT_NEAR(s3pas::expected_triangle_area(4), oracle::triangle_area_mean(4), 1e-12);
}

TEST(S3pas, TriangleAreaNine) {
  const double v = s3pas::expected_triangle_area(9);
  EXPECT_NEAR(v, oracle::triangle_area_mean(9), 1e-9);
  EXPECT_NEAR(v, 0.0753250404369, 1e-12);
}

TEST(S3pas, TypoProbability) {
  EXPECT_NEAR(s3pas::typo_false_alarm_prob(3, 80, 4), std::pow(3.0 / 80.0, 4), 1e-18);
  EXPECT_NEAR(s3pas::typo_false_alarm_prob(3, 80, 4), 1.9775390625e-6, 1e-15);
  EXPECT_EQ(s3pas::typo_false_alarm_prob(80, 80, 4), 1.0);
  EXPECT_NEAR(s3pas::typo_false_alarm_prob(8, 80, 2), 0.01, 1e-15);
}

TEST(S3pas, SessionSoundAndDetecting) {
  Rng rng(30);
  const Params p;
  for (int i = 0; i < 50; ++i) {
    const auto sw = random_sweetwords(6, rng);
    auto gen = s3pas::generate_challenge_with_retry(sw, p, rng);
    const s3pas::Session session(p, sw, gen.challenge);
    for (std::size_t j = 1; j <= sw.size(); ++j) {
      std::vector<std::string> responses;
      for (int r = 1; r <= 4; ++r) responses.push_back(session.respond(j, r, rng));
      EXPECT_EQ(s3pas::verify_session(gen.challenge, responses, sw, p), j);
      EXPECT_EQ(identify_sweetword(session, responses), j);
    }
  }
}

TEST(S3pas, ResponseOutsideEveryPrsRejects) {
  Rng rng(31);
  const Params p;
  const auto sw = random_sweetwords(2, rng);
  const auto gen = s3pas::generate_challenge(sw, p, rng);
  const int r = gen.challenge.designated_round();
  std::string covered;
  for (const auto& w : sw) covered += s3pas::prs(gen.challenge, s3pas::round_ppi(w, r), p);
  char outside = 0;
  for (char c : gen.challenge.grid())
    if (covered.find(c) == std::string::npos) outside = c;
  ASSERT_NE(outside, 0);
  std::vector<std::string> responses(4);
  for (int q = 1; q <= 4; ++q) {
    responses[static_cast<std::size_t>(q - 1)] =
        q == r ? std::string(1, outside)
               : std::string(1, s3pas::prs(gen.challenge, s3pas::round_ppi(sw[0], q), p)[0]);
  }
  EXPECT_FALSE(s3pas::verify_session(gen.challenge, responses, sw, p).has_value());
}

TEST(S3pas, PrintedSetSeparatesOnlyInRoundsOneAndFour) {
  const std::vector<std::string> sw{"2KZW", "8IMN", "6ABS", "0XRJ", "3OVB", "rD1l"};
  EXPECT_EQ(s3pas::separable_rounds(sw, Params{}), (std::vector<int>{1, 4}));
  Rng rng(40);
  for (int i = 0; i < 10; ++i) {
    const int r = s3pas::generate_challenge(sw, Params{}, rng).challenge.designated_round();
    EXPECT_TRUE(r == 1 || r == 4);
  }
  const std::vector<std::string> clash{"2KZW", "2KM5"};
  EXPECT_TRUE(s3pas::separable_rounds(clash, Params{}).empty());
  EXPECT_THROW(s3pas::generate_challenge(clash, Params{}, rng), Error);
}
