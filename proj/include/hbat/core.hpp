#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hbat/geometry.hpp"

namespace hbat {

/// Base for domain errors that callers are expected to handle.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Challenge generation exhausted its iteration budget.
class GenerationTimeout : public Error {
 public:
  GenerationTimeout() : Error("generation timeout") {}
};

/// More than one sweetword survived every round. Only a generator bug
/// can produce this; well-formed challenges separate the designated round.
class AmbiguousIdentification : public Error {
 public:
  AmbiguousIdentification()
      : Error("ambiguous identification: challenge violated designated-round disjointness") {}
};

using Rng = std::mt19937_64;

/// SplitMix64 step; used to derive independent per-trial seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

enum class Scheme { kS3pas, kChc, kPas, kCop };

std::string_view to_string(Scheme s);
/// Accepts "s3pas", "chc", "pas", "cop". Throws Error otherwise.
Scheme parse_scheme(std::string_view name);

/// The k stored entries of one account, in their scheme's text encoding.
/// The original password's position is not recorded here.
struct SweetwordList {
  Scheme scheme = Scheme::kS3pas;
  std::vector<std::string> entries;

  std::size_t k() const { return entries.size(); }
};

/// (username, t) as held by the honeyChecker; t is 1-based.
struct HoneyIndexRecord {
  std::string username;
  std::size_t t = 0;
};

/// 1-based sweetword indices.
using IndexSet = std::set<std::size_t>;

/// Response elements are carried as short text tokens: a grid character for
/// S3PAS, an icon id for CHC, one of P/Q/R/S for PAS, a digit for COP.
using Response = std::string;

/// Returns the single index present in every round's candidate set, or
/// nullopt when the intersection is empty. Throws AmbiguousIdentification
/// if more than one index survives.
std::optional<std::size_t> identify_sweetword(std::span<const IndexSet> per_round);

/// One login ceremony for one account, as seen by the verifier.
///
/// Implementations hold the rendered challenge for every round plus the
/// sweetwords, and answer the two questions the verifier needs: which
/// sweetwords' partial response sets contain a given response, and what a
/// user holding sweetword j would answer.
class SchemeSession {
 public:
  virtual ~SchemeSession() = default;

  virtual Scheme scheme() const = 0;
  virtual int rounds() const = 0;
  /// The round whose partial response sets are pairwise disjoint (1-based).
  virtual int designated_round() const = 0;
  virtual std::size_t k() const = 0;

  /// Every response element a user could submit in `round`.
  virtual std::vector<Response> response_space(int round) const = 0;

  /// Indices of sweetwords whose partial response set in `round` contains `r`.
  virtual IndexSet candidates(int round, const Response& r) const = 0;

  /// A response a user holding sweetword `index` could give in `round`.
  virtual Response respond(std::size_t index, int round, Rng& rng) const = 0;

  /// Client-facing JSON for one round; never carries secrets.
  virtual std::string round_payload(int round, std::string_view session_id) const = 0;
};

/// Runs identify_sweetword over a complete set of responses.
std::optional<std::size_t> identify_sweetword(const SchemeSession& session,
                                              std::span<const Response> responses);

/// One round of a recorded login attempt.
struct TranscriptEntry {
  int round = 0;
  Response response;
  IndexSet candidates;
};

struct SessionTranscript {
  Scheme scheme = Scheme::kS3pas;
  std::vector<TranscriptEntry> rounds;
};

/// Simulates a user holding sweetword `index` through every round.
SessionTranscript simulate_login(const SchemeSession& session, std::size_t index, Rng& rng);

std::optional<std::size_t> identify_sweetword(const SessionTranscript& transcript);

// --- Reference scheme: 36 symbols on a 6x6 matrix, PRS = open line segment.

/// A 6x6 character matrix; rows[r][c] is the character at column c, row r.
struct LineGrid {
  std::array<std::string, 6> rows;

  geometry::GridPoint locate(char c) const;
};

/// Characters strictly between the two PPI characters on the line joining
/// them. Throws Error when a character is missing or the two are equal.
std::string hypo_prs(const LineGrid& grid, std::string_view ppi);

}  // namespace hbat
