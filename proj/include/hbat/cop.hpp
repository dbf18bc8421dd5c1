#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hbat/core.hpp"
#include "hbat/geometry.hpp"

namespace hbat::cop {

/// Fixed character ordering, laid out row-major.
inline constexpr std::string_view kOrdering =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789*#@&";

struct Params {
  std::string alphabet{kOrdering};
  int columns = 11;  ///< a
  int rows = 6;      ///< b
  int password_length = 4;
  std::size_t k = 5;
  /// Ask for the response twice; a single mistyped entry then rejects
  /// instead of matching a honeyword.
  bool double_entry = false;

  int cells() const { return columns * rows; }
};

void validate(const Params& p);

/// Forward cyclic distance from `from` to `to` in the ordering (0..n-1).
int circular_distance(char from, char to, const Params& params = {});

/// The per-session digit attached to every character cell.
class DigitGrid {
 public:
  DigitGrid(const Params& params, std::vector<int> digits);

  int digit(char c) const;
  int digit_at(int index) const { return digits_.at(static_cast<std::size_t>(index)); }
  int index_of(char c) const;
  char char_at(int index) const { return alphabet_.at(static_cast<std::size_t>(index)); }
  geometry::GridPoint position(int index) const { return {index % columns_, index / columns_}; }
  int cells() const { return static_cast<int>(digits_.size()); }
  int columns() const { return columns_; }
  int rows() const { return rows_; }

 private:
  std::string alphabet_;
  std::vector<int> digits_;
  int columns_;
  int rows_;
};

/// The character cell a user holding `password` lands on: walk
/// digit(first) steps down its column (cyclic), then the sum of the other
/// characters' digits steps right in row-major order (cyclic).
char walk_target(std::string_view password, const DigitGrid& grid);

/// The digit of the landing cell.
int legit_response(std::string_view password, const DigitGrid& grid);

/// How one sweetword is routed to its response cell.
struct Assignment {
  char response_cell = 0;
  int response_digit = 0;
  int path_length = 0;
  int quotient = 0;
  std::vector<int> remainder_parts;  ///< one per remaining character
};

/// Optional fixed routing for one sweetword (used to replay known plans).
struct FixedRouting {
  char response_cell;
  int response_digit;
};

class Challenge {
 public:
  Challenge(DigitGrid grid, std::vector<Assignment> plan)
      : grid_(std::move(grid)), plan_(std::move(plan)) {}

  const DigitGrid& grid() const { return grid_; }
  std::span<const Assignment> plan() const { return plan_; }

 private:
  DigitGrid grid_;
  std::vector<Assignment> plan_;
};

/// Builds a challenge mapping sweetword j to its own response cell with a
/// unique digit. Sweetwords must be pairwise character-disjoint, each with
/// distinct characters; 2 <= k <= 10 and k * length <= n - k. When `fixed`
/// is non-empty it supplies the response cell and digit per sweetword.
Challenge generate_challenge(std::span<const std::string> sweetwords, const Params& params,
                             Rng& rng, std::span<const FixedRouting> fixed = {});

/// The sweetword whose response digit equals `digit`, if any.
std::optional<std::size_t> verify(int digit, const Challenge& challenge);

/// n * C(n + length - 2, length - 1)
boost::multiprecision::cpp_int cop_bruteforce_complexity(unsigned n, unsigned length);

class Session final : public SchemeSession {
 public:
  Session(Params params, std::vector<std::string> sweetwords, Rng& rng);

  Scheme scheme() const override { return Scheme::kCop; }
  int rounds() const override { return params_.double_entry ? 2 : 1; }
  int designated_round() const override { return 1; }
  std::size_t k() const override { return sweetwords_.size(); }
  std::vector<Response> response_space(int round) const override;
  IndexSet candidates(int round, const Response& r) const override;
  Response respond(std::size_t index, int round, Rng& rng) const override;
  std::string round_payload(int round, std::string_view session_id) const override;

  const Challenge& challenge() const { return challenge_; }

 private:
  Params params_;
  std::vector<std::string> sweetwords_;
  Challenge challenge_;
};

}  // namespace hbat::cop
