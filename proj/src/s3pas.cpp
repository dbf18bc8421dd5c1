#include "hbat/s3pas.hpp"

#include <algorithm>
#include <bitset>
#include <chrono>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <numeric>
#include <ostream>

#include <json.hpp>

namespace hbat::s3pas {

namespace {

using CellMask = std::bitset<256>;

geometry::Triangle triangle_of(const Challenge& challenge, std::string_view ppi) {
  return {{challenge.position(ppi[0]), challenge.position(ppi[1]), challenge.position(ppi[2])}};
}

CellMask cell_mask(const geometry::Triangle& t, int columns, int rows,
                   geometry::Containment rule) {
  CellMask mask;
  for (const auto& c : geometry::cells_in_triangle(t, columns, rows, rule)) {
    mask.set(static_cast<std::size_t>(c.row * columns + c.col));
  }
  return mask;
}

std::string random_grid(const Params& params, Rng& rng) {
  std::string grid = params.alphabet;
  std::shuffle(grid.begin(), grid.end(), rng);
  return grid;
}

int draw_round(std::span<const std::string> sweetwords, const Params& params, Rng& rng) {
  const auto rounds = separable_rounds(sweetwords, params);
  if (rounds.empty()) throw Error("no round can separate the sweetwords");
  const int last = static_cast<int>(rounds.size()) - 1;
  return rounds[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, last)(rng))];
}

}  // namespace

void validate(const Params& p) {
  if (p.columns <= 0 || p.rows <= 0) throw Error("grid dimensions must be positive");
  if (static_cast<int>(p.alphabet.size()) != p.cells()) {
    throw Error("alphabet size must equal the number of grid cells");
  }
  if (p.cells() > 256) throw Error("grid larger than 256 cells");
  std::string sorted = p.alphabet;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error("alphabet has duplicate characters");
  }
  if (p.password_length != p.rounds || p.password_length < 3) {
    throw Error("password length must equal the round count and be at least 3");
  }
}

std::string round_ppi(std::string_view sweetword, int round) {
  const auto n = static_cast<int>(sweetword.size());
  if (n < 3) throw Error("sweetword shorter than a PPI");
  if (round < 1 || round > n) throw Error("round out of range");
  std::string ppi;
  for (int offset = 0; offset < 3; ++offset) {
    ppi.push_back(sweetword[static_cast<std::size_t>((round - 1 + offset) % n)]);
  }
  return ppi;
}

Challenge::Challenge(const Params& params, std::string grid, int designated_round)
    : grid_(std::move(grid)),
      columns_(params.columns),
      rows_(params.rows),
      designated_round_(designated_round) {
  if (static_cast<int>(grid_.size()) != params.cells()) throw Error("grid size mismatch");
  index_of_.fill(-1);
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    auto& slot = index_of_[static_cast<unsigned char>(grid_[i])];
    if (slot != -1) throw Error("grid repeats a character");
    slot = static_cast<int>(i);
  }
  for (char c : params.alphabet) {
    if (index_of_[static_cast<unsigned char>(c)] == -1) {
      throw Error("grid is not a permutation of the alphabet");
    }
  }
  if (designated_round < 1 || designated_round > params.rounds) {
    throw Error("designated round out of range");
  }
}

geometry::GridPoint Challenge::position(char c) const {
  const int i = index_of_[static_cast<unsigned char>(c)];
  if (i < 0) throw Error(std::string("character not on grid: ") + c);
  return {i % columns_, i / columns_};
}

char Challenge::at(geometry::GridPoint p) const {
  return grid_[static_cast<std::size_t>(p.row * columns_ + p.col)];
}

std::vector<std::string> Challenge::row_strings() const {
  std::vector<std::string> rows;
  for (int r = 0; r < rows_; ++r) {
    rows.push_back(grid_.substr(static_cast<std::size_t>(r * columns_),
                                static_cast<std::size_t>(columns_)));
  }
  return rows;
}

std::string prs(const Challenge& challenge, std::string_view ppi, const Params& params) {
  if (ppi.size() != 3) throw Error("S3PAS PPI must be three characters");
  std::string out;
  for (const auto& cell : geometry::cells_in_triangle(triangle_of(challenge, ppi),
                                                      challenge.columns(), challenge.rows(),
                                                      params.containment)) {
    out.push_back(challenge.at(cell));
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool round_disjoint(const Challenge& challenge, std::span<const std::string> sweetwords,
                    int round, const Params& params) {
  CellMask seen;
  for (const auto& sw : sweetwords) {
    const auto mask = cell_mask(triangle_of(challenge, round_ppi(sw, round)),
                                challenge.columns(), challenge.rows(), params.containment);
    if ((mask & seen).any()) return false;
    seen |= mask;
  }
  return true;
}

std::vector<int> separable_rounds(std::span<const std::string> sweetwords, const Params& params) {
  std::vector<int> out;
  for (int r = 1; r <= params.rounds; ++r) {
    std::string used;
    bool ok = true;
    for (const auto& sw : sweetwords) {
      const auto ppi = round_ppi(sw, r);
      ok = ok && ppi.find_first_of(used) == std::string::npos;
      used += ppi;
    }
    if (ok) out.push_back(r);
  }
  return out;
}

Generation generate_challenge(std::span<const std::string> sweetwords, const Params& params,
                              Rng& rng, std::optional<int> designated_round) {
  validate(params);
  if (sweetwords.size() < 2) throw Error("at least two sweetwords required");
  const int round = designated_round ? *designated_round : draw_round(sweetwords, params, rng);
  std::vector<std::string> ppis;
  for (const auto& sw : sweetwords) {
    if (static_cast<int>(sw.size()) != params.password_length) {
      throw Error("sweetword length mismatch");
    }
    if (sw.find_first_not_of(params.alphabet) != std::string::npos) {
      throw Error("sweetword uses a character outside the alphabet");
    }
    ppis.push_back(round_ppi(sw, round));
  }

  std::array<int, 256> index_of{};
  for (std::size_t it = 1; it <= params.max_iterations; ++it) {
    std::string grid = random_grid(params, rng);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      index_of[static_cast<unsigned char>(grid[i])] = static_cast<int>(i);
    }
    auto pos = [&](char c) {
      const int i = index_of[static_cast<unsigned char>(c)];
      return geometry::GridPoint{i % params.columns, i / params.columns};
    };
    CellMask seen;
    bool ok = true;
    for (const auto& ppi : ppis) {
      const auto mask = cell_mask({{pos(ppi[0]), pos(ppi[1]), pos(ppi[2])}}, params.columns,
                                  params.rows, params.containment);
      if ((mask & seen).any()) {
        ok = false;
        break;
      }
      seen |= mask;
    }
    if (ok) return {Challenge(params, std::move(grid), round), it};
  }
  throw GenerationTimeout();
}

Generation generate_challenge_with_retry(std::span<const std::string> sweetwords,
                                         const Params& params, Rng& rng) {
  for (int attempt = 0;; ++attempt) {
    try {
      return generate_challenge(sweetwords, params, rng);
    } catch (const GenerationTimeout&) {
      if (attempt >= params.timeout_retries) throw;
    }
  }
}

std::optional<std::size_t> verify_session(const Challenge& challenge,
                                          std::span<const std::string> responses,
                                          std::span<const std::string> sweetwords,
                                          const Params& params) {
  if (static_cast<int>(responses.size()) != params.rounds) throw Error("transcript incomplete");
  std::vector<IndexSet> per_round;
  for (int r = 1; r <= params.rounds; ++r) {
    const auto& resp = responses[static_cast<std::size_t>(r - 1)];
    IndexSet hits;
    if (resp.size() == 1) {
      for (std::size_t j = 0; j < sweetwords.size(); ++j) {
        const auto set = prs(challenge, round_ppi(sweetwords[j], r), params);
        if (std::binary_search(set.begin(), set.end(), resp[0])) hits.insert(j + 1);
      }
    }
    per_round.push_back(std::move(hits));
  }
  return identify_sweetword(per_round);
}

double expected_triangle_area(int n) {
  if (n < 1) throw Error("lattice size must be at least 1");
  // Group the six coordinates by the two differences along each axis;
  // weight(a, b) counts base coordinates keeping base-a and base-b in range.
  auto weight = [n](int a, int b) {
    const int lo = std::max({1, 1 + a, 1 + b});
    const int hi = std::min({n, n + a, n + b});
    return static_cast<std::int64_t>(std::max(0, hi - lo + 1));
  };
  std::vector<std::int64_t> w;
  const int span = 2 * n - 1;
  w.reserve(static_cast<std::size_t>(span * span));
  for (int a = -(n - 1); a <= n - 1; ++a) {
    for (int b = -(n - 1); b <= n - 1; ++b) w.push_back(weight(a, b));
  }
  std::int64_t total = 0;  // sum of |2 * area| in lattice units
  for (int a = -(n - 1); a <= n - 1; ++a) {
    for (int b = -(n - 1); b <= n - 1; ++b) {
      const auto wab = w[static_cast<std::size_t>((a + n - 1) * span + (b + n - 1))];
      if (wab == 0) continue;
      for (int c = -(n - 1); c <= n - 1; ++c) {
        for (int d = -(n - 1); d <= n - 1; ++d) {
          const auto wcd = w[static_cast<std::size_t>((c + n - 1) * span + (d + n - 1))];
          if (wcd == 0) continue;
          total += wab * wcd * std::llabs(static_cast<std::int64_t>(a) * c -
                                          static_cast<std::int64_t>(b) * d);
        }
      }
    }
  }
  const double n2 = static_cast<double>(n) * n;
  return static_cast<double>(total) / (2.0 * n2 * n2 * n2 * n2);
}

double typo_false_alarm_prob(double triangle_cells, double total_cells, int rounds) {
  if (triangle_cells <= 0 || total_cells <= 0 || rounds <= 0) {
    throw Error("typo probability parameters must be positive");
  }
  return std::pow(triangle_cells / total_cells, rounds);
}

std::vector<BenchRow> challenge_gen_stats(std::span<const std::size_t> k_values,
                                          std::size_t runs, Rng& rng, const Params& params) {
  if (runs == 0) throw Error("runs must be at least 1");
  validate(params);
  std::vector<BenchRow> rows;
  for (const auto k : k_values) {
    if (k < 2 || k * static_cast<std::size_t>(params.password_length) > params.alphabet.size()) {
      throw Error("k out of range for the alphabet");
    }
    BenchRow row;
    row.k = k;
    row.min_iterations = std::numeric_limits<std::size_t>::max();
    row.min_ms = std::numeric_limits<double>::infinity();
    double total_ms = 0;
    std::size_t total_it = 0;
    for (std::size_t run = 0; run < runs; ++run) {
      std::string pool = params.alphabet;
      std::shuffle(pool.begin(), pool.end(), rng);
      std::vector<std::string> sweetwords;
      for (std::size_t j = 0; j < k; ++j) {
        const auto len = static_cast<std::size_t>(params.password_length);
        sweetwords.push_back(pool.substr(j * len, len));
      }
      const auto start = std::chrono::steady_clock::now();
      const auto gen = generate_challenge(sweetwords, params, rng);
      const std::chrono::duration<double, std::milli> ms =
          std::chrono::steady_clock::now() - start;
      row.iterations.push_back(gen.iterations);
      row.max_iterations = std::max(row.max_iterations, gen.iterations);
      row.min_iterations = std::min(row.min_iterations, gen.iterations);
      row.max_ms = std::max(row.max_ms, ms.count());
      row.min_ms = std::min(row.min_ms, ms.count());
      total_ms += ms.count();
      total_it += gen.iterations;
    }
    row.avg_iterations = static_cast<double>(total_it) / static_cast<double>(runs);
    row.avg_ms = total_ms / static_cast<double>(runs);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_bench_csv(std::ostream& os, std::span<const BenchRow> rows) {
  os << "value of k,no. of max iteration,no. of min iteration,avg iteration,"
        "max exec time (ms),min exec time (ms),avg exec time (ms)\n";
  for (const auto& r : rows) {
    os << r.k << ',' << r.max_iterations << ',' << r.min_iterations << ',' << r.avg_iterations
       << ',' << r.max_ms << ',' << r.min_ms << ',' << r.avg_ms << '\n';
  }
}

double measured_triangle_cells(const Params& params, std::size_t samples, Rng& rng) {
  validate(params);
  if (samples == 0) throw Error("samples must be at least 1");
  std::size_t total = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    std::string grid = random_grid(params, rng);
    // First three cells of a fresh permutation are three distinct random
    // characters; their positions are what matters.
    const Challenge challenge(params, grid, 1);
    std::string ppi = params.alphabet;
    std::shuffle(ppi.begin(), ppi.end(), rng);
    total += prs(challenge, ppi.substr(0, 3), params).size();
  }
  return static_cast<double>(total) / static_cast<double>(samples);
}

Session::Session(Params params, std::vector<std::string> sweetwords, Challenge challenge)
    : params_(std::move(params)),
      sweetwords_(std::move(sweetwords)),
      challenge_(std::move(challenge)) {
  for (int r = 1; r <= params_.rounds; ++r) {
    std::vector<std::string> sets;
    for (const auto& sw : sweetwords_) sets.push_back(prs(challenge_, round_ppi(sw, r), params_));
    prs_.push_back(std::move(sets));
  }
}

const std::string& Session::prs_of(std::size_t index, int round) const {
  return prs_.at(static_cast<std::size_t>(round - 1)).at(index - 1);
}

std::vector<Response> Session::response_space(int /*round*/) const {
  std::vector<Response> out;
  for (char c : params_.alphabet) out.emplace_back(1, c);
  return out;
}

IndexSet Session::candidates(int round, const Response& r) const {
  IndexSet out;
  if (r.size() != 1 || round < 1 || round > params_.rounds) return out;
  const auto& sets = prs_[static_cast<std::size_t>(round - 1)];
  for (std::size_t j = 0; j < sets.size(); ++j) {
    if (std::binary_search(sets[j].begin(), sets[j].end(), r[0])) out.insert(j + 1);
  }
  return out;
}

Response Session::respond(std::size_t index, int round, Rng& rng) const {
  const auto& set = prs_of(index, round);
  std::uniform_int_distribution<std::size_t> pick(0, set.size() - 1);
  return Response(1, set[pick(rng)]);
}

std::string Session::round_payload(int round, std::string_view session_id) const {
  nlohmann::json j;
  j["grid"] = challenge_.row_strings();
  j["round"] = round;
  j["session_id"] = session_id;
  return j.dump();
}

}  // namespace hbat::s3pas
