#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hbat/core.hpp"
#include "hbat/geometry.hpp"

namespace hbat::chc {

/// Convex-Hull-Click parameters. Icons are shown on a columns x rows
/// display grid; each round shows `displayed` of the `total_icons` icons,
/// including the same number Kc (3 <= Kc <= pass_icons) from every
/// sweetword's icon set.
struct Params {
  int total_icons = 112;
  int displayed = 70;
  int pass_icons = 5;
  int rounds = 4;
  std::size_t k = 3;
  int columns = 14;
  int rows = 8;
  std::size_t max_iterations = 100000;
};

/// Throws Error unless 3 <= K <= M <= N, M fits the display, k*K <= M and
/// enough non-sweet icons remain to fill a round.
void validate(const Params& p, std::size_t k);

/// A sweetword: `pass_icons` distinct icon ids, kept sorted.
using IconSet = std::vector<int>;

/// "3,17,42,88,101" <-> {3, 17, 42, 88, 101}
IconSet parse_icon_set(std::string_view text);
std::string format_icon_set(const IconSet& icons);

struct PlacedIcon {
  int id = 0;
  geometry::GridPoint pos;
};

class IconPlacement {
 public:
  IconPlacement() = default;
  explicit IconPlacement(std::vector<PlacedIcon> icons);

  std::span<const PlacedIcon> icons() const { return icons_; }
  std::vector<geometry::GridPoint> positions() const;
  std::optional<geometry::GridPoint> position(int id) const;
  bool displayed(int id) const { return position(id).has_value(); }

 private:
  std::vector<PlacedIcon> icons_;  // sorted by id
};

struct Round {
  IconPlacement placement;
  int shown_per_set = 0;  ///< Kc
};

/// Hull of the displayed members of `icon_set`.
geometry::ConvexHull displayed_hull(const IconPlacement& placement, const IconSet& icon_set);

/// True iff every displayed icon lies in at most one sweetword hull.
bool round_disjoint(const IconPlacement& placement, std::span<const IconSet> sweet_sets);

/// Draws Kc, the shown icons of every set and the filler icons, then
/// positions. A designated round resamples positions until the k hulls
/// are pairwise disjoint; throws GenerationTimeout past max_iterations.
Round generate_round(std::span<const IconSet> sweet_sets, bool designated, const Params& params,
                     Rng& rng);

/// True iff `response_icon` is displayed and lies inside or on the hull of
/// the displayed icons of `icon_set`.
bool hull_response_valid(const IconPlacement& placement, const IconSet& icon_set,
                         int response_icon);

/// Expected number of appearances of one icon over r basic-CHC challenges.
/// Pass icon: r (K(K+1)/2 - 3) / (K(K-2)).
/// Other icon: r (M(K-2) - K(K+1)/2 + 3) / ((K-2)(N-K)).
/// Throws Error when K <= 2.
double expected_appearances(int total_icons, int displayed, int pass_icons, int challenges,
                            bool is_pass);

/// Appearance count per icon id over `challenges` non-designated rounds.
/// With a single sweet set this is basic CHC.
std::vector<int> probabilistic_attack_sim(const Params& params,
                                          std::span<const IconSet> sweet_sets, int challenges,
                                          Rng& rng);

class Session final : public SchemeSession {
 public:
  Session(Params params, std::vector<IconSet> sweet_sets, Rng& rng);

  Scheme scheme() const override { return Scheme::kChc; }
  int rounds() const override { return params_.rounds; }
  int designated_round() const override { return designated_; }
  std::size_t k() const override { return sweet_sets_.size(); }
  std::vector<Response> response_space(int round) const override;
  IndexSet candidates(int round, const Response& r) const override;
  Response respond(std::size_t index, int round, Rng& rng) const override;
  std::string round_payload(int round, std::string_view session_id) const override;

  const Round& round(int r) const { return rounds_.at(static_cast<std::size_t>(r - 1)); }

 private:
  Params params_;
  std::vector<IconSet> sweet_sets_;
  int designated_ = 1;
  std::vector<Round> rounds_;
};

}  // namespace hbat::chc
