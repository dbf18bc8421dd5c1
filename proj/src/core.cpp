#include "hbat/core.hpp"

#include <algorithm>
#include <iterator>

namespace hbat {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::kS3pas:
      return "s3pas";
    case Scheme::kChc:
      return "chc";
    case Scheme::kPas:
      return "pas";
    case Scheme::kCop:
      return "cop";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "s3pas") return Scheme::kS3pas;
  if (name == "chc") return Scheme::kChc;
  if (name == "pas") return Scheme::kPas;
  if (name == "cop") return Scheme::kCop;
  throw Error("unknown scheme: " + std::string(name));
}

std::optional<std::size_t> identify_sweetword(std::span<const IndexSet> per_round) {
  if (per_round.empty()) return std::nullopt;
  IndexSet survivors = per_round.front();
  for (const auto& round : per_round.subspan(1)) {
    IndexSet next;
    std::set_intersection(survivors.begin(), survivors.end(), round.begin(), round.end(),
                          std::inserter(next, next.end()));
    survivors = std::move(next);
    if (survivors.empty()) return std::nullopt;
  }
  if (survivors.empty()) return std::nullopt;
  if (survivors.size() > 1) throw AmbiguousIdentification();
  return *survivors.begin();
}

std::optional<std::size_t> identify_sweetword(const SchemeSession& session,
                                              std::span<const Response> responses) {
  if (responses.size() != static_cast<std::size_t>(session.rounds())) {
    throw Error("transcript incomplete");
  }
  std::vector<IndexSet> per_round;
  per_round.reserve(responses.size());
  for (int r = 1; r <= session.rounds(); ++r) {
    per_round.push_back(session.candidates(r, responses[static_cast<std::size_t>(r - 1)]));
  }
  return identify_sweetword(per_round);
}

SessionTranscript simulate_login(const SchemeSession& session, std::size_t index, Rng& rng) {
  SessionTranscript transcript{session.scheme(), {}};
  for (int r = 1; r <= session.rounds(); ++r) {
    Response resp = session.respond(index, r, rng);
    transcript.rounds.push_back({r, resp, session.candidates(r, resp)});
  }
  return transcript;
}

std::optional<std::size_t> identify_sweetword(const SessionTranscript& transcript) {
  std::vector<IndexSet> per_round;
  per_round.reserve(transcript.rounds.size());
  for (const auto& e : transcript.rounds) per_round.push_back(e.candidates);
  return identify_sweetword(per_round);
}

geometry::GridPoint LineGrid::locate(char c) const {
  for (int r = 0; r < 6; ++r) {
    const auto pos = rows[static_cast<std::size_t>(r)].find(c);
    if (pos != std::string::npos) return {static_cast<int>(pos), r};
  }
  throw Error(std::string("character not in grid: ") + c);
}

std::string hypo_prs(const LineGrid& grid, std::string_view ppi) {
  if (ppi.size() != 2) throw Error("line scheme PPI must be two characters");
  if (ppi[0] == ppi[1]) throw Error("line scheme PPI characters must differ");
  const auto p = grid.locate(ppi[0]);
  const auto q = grid.locate(ppi[1]);
  std::string out;
  for (const auto& cell : geometry::cells_on_segment(p, q)) {
    out.push_back(grid.rows[static_cast<std::size_t>(cell.row)][static_cast<std::size_t>(cell.col)]);
  }
  return out;
}

}  // namespace hbat
