#pragma once

#include <array>
#include <bitset>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hbat/core.hpp"

namespace hbat::pas {

/// A block index (row, col), each 1..5, paired with an uppercase letter.
struct Predicate {
  int row = 1;
  int col = 1;
  char letter = 'A';

  auto operator<=>(const Predicate&) const = default;
};

/// "23E" -> {2, 3, 'E'}. Throws Error on malformed text.
Predicate parse_predicate(std::string_view text);
std::string format_predicate(const Predicate& p);

/// A PAS secret: two predicates.
using PredicatePair = std::array<Predicate, 2>;

/// "23E,41P" <-> {23E, 41P}
PredicatePair parse_pair(std::string_view text);
std::string format_pair(const PredicatePair& pair);

inline constexpr int kGrid = 5;
inline constexpr int kLettersPerBlock = 13;

/// One challenge table: 25 blocks of letters, indexed by (row-1)*5 + (col-1).
struct Table {
  std::array<std::bitset<26>, kGrid * kGrid> blocks;

  bool has(const Predicate& p) const;
  std::string letters(int row, int col) const;
};

struct Tables {
  Table first;
  Table second;
};

/// (pred1 in table 1, pred1 in table 2, pred2 in table 1, pred2 in table 2)
using AnswerSequence = std::array<bool, 4>;

/// Four-bit code of an answer sequence, first answer most significant.
int sequence_code(const AnswerSequence& seq);
AnswerSequence sequence_from_code(int code);

/// Maps each of the 16 answer sequences to a response element.
struct ResponseTable {
  std::array<char, 16> element;

  /// The table printed with the scheme: a Latin square over P, Q, R, S
  /// indexed by (pred1 answers, pred2 answers).
  static ResponseTable standard();

  /// Every element in `options` is hit by exactly four sequences.
  bool well_formed() const;

  /// The four sequences mapping to `e`.
  std::vector<AnswerSequence> sequences_for(char e) const;
};

inline constexpr std::array<char, 4> kResponseOptions = {'P', 'Q', 'R', 'S'};

AnswerSequence answer_sequence(const Predicate& first, const Predicate& second,
                               const Tables& tables);

char response_for(const AnswerSequence& seq, const ResponseTable& rt = ResponseTable::standard());

struct Params {
  int rounds = 5;
  std::size_t k = 4;
};

/// Tables filled with 13 uniformly random letters per block.
Tables random_tables(Rng& rng);

struct DesignatedTables {
  Tables tables;
  std::vector<AnswerSequence> sequences;  ///< per sweetword
  std::vector<char> responses;            ///< per sweetword, pairwise distinct
};

/// Picks one random answer sequence per response element, hands each
/// sweetword a distinct element, then fills both tables so every pair
/// satisfies its sequence. Requires 2 <= k <= 4 and all 2k predicates
/// pairwise distinct.
DesignatedTables generate_designated_tables(std::span<const PredicatePair> pairs, Rng& rng,
                                            const ResponseTable& rt = ResponseTable::standard());

/// Fills both tables so pair j satisfies sequences[j]; remaining slots
/// are random. Throws Error when two constraints conflict.
Tables fill_tables(std::span<const PredicatePair> pairs, std::span<const AnswerSequence> sequences,
                   Rng& rng);

/// Identification over one response per round.
std::optional<std::size_t> verify_session(std::span<const Tables> rounds,
                                          std::span<const Response> responses,
                                          std::span<const PredicatePair> pairs,
                                          const ResponseTable& rt = ResponseTable::standard());

/// C(cells * letters + c - 1, c)^p
boost::multiprecision::cpp_int pas_bruteforce_complexity(unsigned cells, unsigned letters,
                                                         unsigned c, unsigned p);

class Session final : public SchemeSession {
 public:
  Session(Params params, std::vector<PredicatePair> pairs, Rng& rng,
          ResponseTable rt = ResponseTable::standard());

  Scheme scheme() const override { return Scheme::kPas; }
  int rounds() const override { return params_.rounds; }
  int designated_round() const override { return designated_; }
  std::size_t k() const override { return pairs_.size(); }
  std::vector<Response> response_space(int round) const override;
  IndexSet candidates(int round, const Response& r) const override;
  Response respond(std::size_t index, int round, Rng& rng) const override;
  std::string round_payload(int round, std::string_view session_id) const override;

  const Tables& tables(int round) const { return rounds_.at(static_cast<std::size_t>(round - 1)); }

 private:
  Params params_;
  std::vector<PredicatePair> pairs_;
  ResponseTable rt_;
  int designated_ = 1;
  std::vector<Tables> rounds_;
};

}  // namespace hbat::pas
