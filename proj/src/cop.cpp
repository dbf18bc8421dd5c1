#include "hbat/cop.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include <json.hpp>

namespace hbat::cop {

namespace {

/// All ways to write `total` as `parts` ordered terms in 0..9.
void compositions(int total, int parts, std::vector<int>& prefix,
                  std::vector<std::vector<int>>& out) {
  if (parts == 0) {
    if (total == 0) out.push_back(prefix);
    return;
  }
  for (int v = 0; v <= std::min(9, total); ++v) {
    prefix.push_back(v);
    compositions(total - v, parts - 1, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

void validate(const Params& p) {
  if (p.columns <= 0 || p.rows <= 0) throw Error("grid dimensions must be positive");
  if (static_cast<int>(p.alphabet.size()) != p.cells()) {
    throw Error("alphabet size must equal the number of grid cells");
  }
  std::string sorted = p.alphabet;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error("alphabet has duplicate characters");
  }
  if (p.password_length < 2) throw Error("password length must be at least 2");
  if ((p.cells() - 1) / p.columns > 9) throw Error("quotient would exceed one digit");
  if (p.columns - 1 > 9 * (p.password_length - 1)) {
    throw Error("remainder cannot be split into single digits");
  }
}

int circular_distance(char from, char to, const Params& params) {
  const auto i = params.alphabet.find(from);
  const auto j = params.alphabet.find(to);
  if (i == std::string::npos || j == std::string::npos) {
    throw Error("character not in the ordering");
  }
  const auto n = static_cast<int>(params.alphabet.size());
  return (static_cast<int>(j) - static_cast<int>(i) + n) % n;
}

DigitGrid::DigitGrid(const Params& params, std::vector<int> digits)
    : alphabet_(params.alphabet),
      digits_(std::move(digits)),
      columns_(params.columns),
      rows_(params.rows) {
  if (static_cast<int>(digits_.size()) != params.cells()) throw Error("digit grid size mismatch");
  for (int d : digits_) {
    if (d < 0 || d > 9) throw Error("digit out of range");
  }
}

int DigitGrid::index_of(char c) const {
  const auto i = alphabet_.find(c);
  if (i == std::string::npos) throw Error(std::string("character not on grid: ") + c);
  return static_cast<int>(i);
}

int DigitGrid::digit(char c) const { return digits_[static_cast<std::size_t>(index_of(c))]; }

char walk_target(std::string_view password, const DigitGrid& grid) {
  if (password.empty()) throw Error("empty password");
  const int start = grid.index_of(password[0]);
  const int col = start % grid.columns();
  const int row = (start / grid.columns() + grid.digit(password[0])) % grid.rows();
  int steps = 0;
  for (char c : password.substr(1)) steps += grid.digit(c);
  const int landing = (row * grid.columns() + col + steps) % grid.cells();
  return grid.char_at(landing);
}

int legit_response(std::string_view password, const DigitGrid& grid) {
  return grid.digit(walk_target(password, grid));
}

Challenge generate_challenge(std::span<const std::string> sweetwords, const Params& params,
                             Rng& rng, std::span<const FixedRouting> fixed) {
  validate(params);
  const std::size_t k = sweetwords.size();
  const auto n = static_cast<std::size_t>(params.cells());
  const auto len = static_cast<std::size_t>(params.password_length);
  if (k < 2) throw Error("at least two sweetwords required");
  if (k > 10) throw Error("k cannot exceed the 10 response digits");
  if (k * len > n - k) throw Error("not enough free cells for response cells");
  if (!fixed.empty() && fixed.size() != k) throw Error("one fixed routing per sweetword required");

  std::vector<bool> used(n, false);
  for (const auto& sw : sweetwords) {
    if (sw.size() != len) throw Error("sweetword length mismatch");
    for (char c : sw) {
      const auto i = params.alphabet.find(c);
      if (i == std::string::npos) throw Error(std::string("character not in ordering: ") + c);
      if (used[i]) throw Error("sweetwords must not share characters");
      used[i] = true;
    }
  }

  std::vector<char> cells;
  std::vector<int> digits;
  if (fixed.empty()) {
    std::vector<char> free;
    for (std::size_t i = 0; i < n; ++i) {
      if (!used[i]) free.push_back(params.alphabet[i]);
    }
    std::shuffle(free.begin(), free.end(), rng);
    cells.assign(free.begin(), free.begin() + static_cast<std::ptrdiff_t>(k));
    std::array<int, 10> pool{};
    std::iota(pool.begin(), pool.end(), 0);
    std::shuffle(pool.begin(), pool.end(), rng);
    digits.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  } else {
    for (const auto& f : fixed) {
      const auto i = params.alphabet.find(f.response_cell);
      if (i == std::string::npos || used[i]) throw Error("response cell must be a free cell");
      if (f.response_digit < 0 || f.response_digit > 9) throw Error("digit out of range");
      cells.push_back(f.response_cell);
      digits.push_back(f.response_digit);
    }
    auto sorted_cells = cells;
    std::sort(sorted_cells.begin(), sorted_cells.end());
    auto sorted_digits = digits;
    std::sort(sorted_digits.begin(), sorted_digits.end());
    if (std::adjacent_find(sorted_cells.begin(), sorted_cells.end()) != sorted_cells.end() ||
        std::adjacent_find(sorted_digits.begin(), sorted_digits.end()) != sorted_digits.end()) {
      throw Error("response cells and digits must be distinct");
    }
  }

  std::uniform_int_distribution<int> any_digit(0, 9);
  std::vector<int> grid_digits(n);
  for (auto& d : grid_digits) d = any_digit(rng);

  std::vector<Assignment> plan;
  for (std::size_t j = 0; j < k; ++j) {
    const auto& sw = sweetwords[j];
    Assignment a;
    a.response_cell = cells[j];
    a.response_digit = digits[j];
    a.path_length = circular_distance(sw[0], cells[j], params);
    a.quotient = a.path_length / params.columns;
    const int remainder = a.path_length % params.columns;
    std::vector<std::vector<int>> options;
    std::vector<int> prefix;
    compositions(remainder, params.password_length - 1, prefix, options);
    if (options.empty() || a.quotient > 9) throw Error("path length cannot be encoded");
    std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
    a.remainder_parts = options[pick(rng)];

    grid_digits[params.alphabet.find(sw[0])] = a.quotient;
    for (std::size_t c = 1; c < len; ++c) {
      grid_digits[params.alphabet.find(sw[c])] = a.remainder_parts[c - 1];
    }
    grid_digits[params.alphabet.find(cells[j])] = digits[j];
    plan.push_back(std::move(a));
  }
  return Challenge(DigitGrid(params, std::move(grid_digits)), std::move(plan));
}

std::optional<std::size_t> verify(int digit, const Challenge& challenge) {
  const auto plan = challenge.plan();
  for (std::size_t j = 0; j < plan.size(); ++j) {
    if (plan[j].response_digit == digit) return j + 1;
  }
  return std::nullopt;
}

boost::multiprecision::cpp_int cop_bruteforce_complexity(unsigned n, unsigned length) {
  if (n == 0 || length == 0) throw Error("parameters must be positive");
  // C(n + length - 2, length - 1)
  const unsigned top = n + length - 2;
  const unsigned choose = length - 1;
  boost::multiprecision::cpp_int c = 1;
  for (unsigned i = 1; i <= choose; ++i) {
    c *= top - choose + i;
    c /= i;
  }
  return c * n;
}

Session::Session(Params params, std::vector<std::string> sweetwords, Rng& rng)
    : params_(std::move(params)),
      sweetwords_(std::move(sweetwords)),
      challenge_(generate_challenge(sweetwords_, params_, rng)) {}

std::vector<Response> Session::response_space(int /*round*/) const {
  std::vector<Response> out;
  for (char d = '0'; d <= '9'; ++d) out.emplace_back(1, d);
  return out;
}

IndexSet Session::candidates(int round, const Response& r) const {
  IndexSet out;
  if (round < 1 || round > rounds() || r.size() != 1 || r[0] < '0' || r[0] > '9') return out;
  if (auto j = verify(r[0] - '0', challenge_)) out.insert(*j);
  return out;
}

Response Session::respond(std::size_t index, int /*round*/, Rng& /*rng*/) const {
  return Response(1, static_cast<char>('0' + legit_response(sweetwords_.at(index - 1),
                                                            challenge_.grid())));
}

std::string Session::round_payload(int round, std::string_view session_id) const {
  const auto& grid = challenge_.grid();
  nlohmann::json cells = nlohmann::json::array();
  for (int i = 0; i < grid.cells(); ++i) {
    const auto pos = grid.position(i);
    cells.push_back({{"char", std::string(1, grid.char_at(i))},
                     {"digit", grid.digit_at(i)},
                     {"x", pos.col},
                     {"y", pos.row}});
  }
  nlohmann::json j;
  j["cells"] = std::move(cells);
  j["session_id"] = session_id;
  j["round"] = round;
  return j.dump();
}

}  // namespace hbat::cop
