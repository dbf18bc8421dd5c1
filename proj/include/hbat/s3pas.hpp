#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hbat/core.hpp"
#include "hbat/geometry.hpp"

namespace hbat::s3pas {

/// 80 symbols: A-Z, a-z, 0-9 and 18 punctuation marks. Excludes the
/// separators used by the password file ('|', ',', tab, space).
inline constexpr std::string_view kAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789!#$%&*+-=?@^~<>/:;";

struct Params {
  std::string alphabet{kAlphabet};
  int columns = 10;
  int rows = 8;
  int password_length = 4;
  int rounds = 4;
  std::size_t k = 6;
  /// Vertices plus strict interior reproduces the reported generation cost.
  geometry::Containment containment = geometry::Containment::kOpenWithVertices;
  std::size_t max_iterations = 100000;
  /// Redraws of the designated round after a generation timeout.
  int timeout_retries = 3;

  int cells() const { return columns * rows; }
};

/// Throws Error unless alphabet size equals the cell count, the alphabet
/// has no duplicates, and password_length == rounds.
void validate(const Params& p);

/// Three characters at cyclic positions round, round+1, round+2 (1-based).
std::string round_ppi(std::string_view sweetword, int round);

/// A session's character matrix (static across rounds) and the secret
/// round in which the k PPI triangles own disjoint cells.
class Challenge {
 public:
  /// `grid` lists characters row-major; it must be a permutation of the
  /// alphabet.
  Challenge(const Params& params, std::string grid, int designated_round);

  const std::string& grid() const { return grid_; }
  int designated_round() const { return designated_round_; }
  int columns() const { return columns_; }
  int rows() const { return rows_; }

  geometry::GridPoint position(char c) const;
  char at(geometry::GridPoint p) const;

  /// Rows of the matrix as strings, top row first.
  std::vector<std::string> row_strings() const;

 private:
  std::string grid_;
  std::array<int, 256> index_of_{};
  int columns_;
  int rows_;
  int designated_round_;
};

/// Characters owned by the PPI's triangle, sorted.
std::string prs(const Challenge& challenge, std::string_view ppi, const Params& params);

/// True iff the k PPI triangles of `round` own pairwise disjoint cells.
bool round_disjoint(const Challenge& challenge, std::span<const std::string> sweetwords,
                    int round, const Params& params);

/// Rounds whose PPIs share no character across sweetwords; only these
/// triangles can own disjoint cells.
std::vector<int> separable_rounds(std::span<const std::string> sweetwords, const Params& params);

struct Generation {
  Challenge challenge;
  std::size_t iterations;
};

/// Resamples a uniform character matrix until the designated round's
/// triangles are pairwise disjoint. Unless given, the designated round is
/// drawn uniformly from separable_rounds; Error when there is none. Throws GenerationTimeout after params.max_iterations draws.
Generation generate_challenge(std::span<const std::string> sweetwords, const Params& params,
                              Rng& rng, std::optional<int> designated_round = std::nullopt);

/// generate_challenge with the engine's retry policy: on timeout redraw the
/// designated round up to params.timeout_retries more times.
Generation generate_challenge_with_retry(std::span<const std::string> sweetwords,
                                         const Params& params, Rng& rng);

/// Identification over four responses (each a single grid character).
std::optional<std::size_t> verify_session(const Challenge& challenge,
                                          std::span<const std::string> responses,
                                          std::span<const std::string> sweetwords,
                                          const Params& params);

/// Mean area of a triangle whose vertices are uniform on the lattice
/// {1/n, ..., n/n}^2. Exact integer accumulation, one final division.
double expected_triangle_area(int n);

/// Probability that a wrong response matches one honeyword's PRS in all
/// `rounds` rounds: (triangle_cells / total_cells)^rounds.
double typo_false_alarm_prob(double triangle_cells, double total_cells, int rounds);

/// One row of the challenge-generation benchmark.
struct BenchRow {
  std::size_t k = 0;
  std::size_t max_iterations = 0;
  std::size_t min_iterations = 0;
  double avg_iterations = 0;
  double max_ms = 0;
  double min_ms = 0;
  double avg_ms = 0;
  std::vector<std::size_t> iterations;  ///< per run
};

/// Runs challenge generation `runs` times per k over random
/// character-disjoint sweetword sets. Throws Error when runs == 0.
std::vector<BenchRow> challenge_gen_stats(std::span<const std::size_t> k_values,
                                          std::size_t runs, Rng& rng,
                                          const Params& params = {});

/// CSV with the benchmark's seven columns.
void write_bench_csv(std::ostream& os, std::span<const BenchRow> rows);

/// Mean number of cells a PPI triangle owns on uniformly random matrices.
double measured_triangle_cells(const Params& params, std::size_t samples, Rng& rng);

class Session final : public SchemeSession {
 public:
  Session(Params params, std::vector<std::string> sweetwords, Challenge challenge);

  Scheme scheme() const override { return Scheme::kS3pas; }
  int rounds() const override { return params_.rounds; }
  int designated_round() const override { return challenge_.designated_round(); }
  std::size_t k() const override { return sweetwords_.size(); }
  std::vector<Response> response_space(int round) const override;
  IndexSet candidates(int round, const Response& r) const override;
  Response respond(std::size_t index, int round, Rng& rng) const override;
  std::string round_payload(int round, std::string_view session_id) const override;

  const Challenge& challenge() const { return challenge_; }
  const std::string& prs_of(std::size_t index, int round) const;

 private:
  Params params_;
  std::vector<std::string> sweetwords_;
  Challenge challenge_;
  std::vector<std::vector<std::string>> prs_;  // [round-1][index-1]
};

}  // namespace hbat::s3pas
