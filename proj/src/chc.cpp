#include "hbat/chc.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include <json.hpp>

namespace hbat::chc {

namespace {

std::optional<int> parse_response_icon(const Response& r) {
  int id = 0;
  auto [ptr, ec] = std::from_chars(r.data(), r.data() + r.size(), id);
  if (ec != std::errc{} || ptr != r.data() + r.size() || r.empty()) return std::nullopt;
  return id;
}

}  // namespace

void validate(const Params& p, std::size_t k) {
  if (p.pass_icons < 3) throw Error("CHC needs at least 3 pass icons");
  if (p.pass_icons > p.displayed || p.displayed > p.total_icons) {
    throw Error("CHC parameters must satisfy K <= M <= N");
  }
  if (p.displayed > p.columns * p.rows) throw Error("display grid too small");
  if (k < 1 || k * static_cast<std::size_t>(p.pass_icons) > static_cast<std::size_t>(p.displayed)) {
    throw Error("k * K must not exceed M");
  }
  const auto ki = static_cast<int>(k);
  if (p.total_icons - ki * p.pass_icons < p.displayed - ki * 3) {
    throw Error("not enough non-sweet icons to fill a round");
  }
  if (p.rounds < 1) throw Error("rounds must be positive");
}

IconSet parse_icon_set(std::string_view text) {
  IconSet out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    const auto part = text.substr(pos, end - pos);
    int id = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), id);
    if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size() || id < 0) {
      throw Error("malformed icon set: " + std::string(text));
    }
    out.push_back(id);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw Error("icon set repeats an icon");
  }
  return out;
}

std::string format_icon_set(const IconSet& icons) {
  std::string out;
  for (std::size_t i = 0; i < icons.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(icons[i]);
  }
  return out;
}

IconPlacement::IconPlacement(std::vector<PlacedIcon> icons) : icons_(std::move(icons)) {
  std::sort(icons_.begin(), icons_.end(),
            [](const PlacedIcon& a, const PlacedIcon& b) { return a.id < b.id; });
}

std::vector<geometry::GridPoint> IconPlacement::positions() const {
  std::vector<geometry::GridPoint> out;
  out.reserve(icons_.size());
  for (const auto& icon : icons_) out.push_back(icon.pos);
  return out;
}

std::optional<geometry::GridPoint> IconPlacement::position(int id) const {
  auto it = std::lower_bound(icons_.begin(), icons_.end(), id,
                             [](const PlacedIcon& icon, int v) { return icon.id < v; });
  if (it == icons_.end() || it->id != id) return std::nullopt;
  return it->pos;
}

geometry::ConvexHull displayed_hull(const IconPlacement& placement, const IconSet& icon_set) {
  std::vector<geometry::GridPoint> pts;
  for (int id : icon_set) {
    if (auto p = placement.position(id)) pts.push_back(*p);
  }
  return geometry::ConvexHull::of(pts);
}

bool round_disjoint(const IconPlacement& placement, std::span<const IconSet> sweet_sets) {
  std::vector<geometry::ConvexHull> hulls;
  for (const auto& set : sweet_sets) hulls.push_back(displayed_hull(placement, set));
  for (const auto& icon : placement.icons()) {
    int owners = 0;
    for (const auto& h : hulls) owners += h.contains(icon.pos) ? 1 : 0;
    if (owners > 1) return false;
  }
  return true;
}

Round generate_round(std::span<const IconSet> sweet_sets, bool designated, const Params& params,
                     Rng& rng) {
  validate(params, sweet_sets.size());
  const int kc = std::uniform_int_distribution<int>(3, params.pass_icons)(rng);

  std::vector<bool> sweet(static_cast<std::size_t>(params.total_icons), false);
  std::vector<int> shown;
  for (const auto& set : sweet_sets) {
    if (static_cast<int>(set.size()) != params.pass_icons) throw Error("icon set size mismatch");
    IconSet pick = set;
    std::shuffle(pick.begin(), pick.end(), rng);
    shown.insert(shown.end(), pick.begin(), pick.begin() + kc);
    for (int id : set) {
      if (id < 0 || id >= params.total_icons) throw Error("icon id out of range");
      if (sweet[static_cast<std::size_t>(id)]) throw Error("sweetword icon sets overlap");
      sweet[static_cast<std::size_t>(id)] = true;
    }
  }
  std::vector<int> fillers;
  for (int id = 0; id < params.total_icons; ++id) {
    if (!sweet[static_cast<std::size_t>(id)]) fillers.push_back(id);
  }
  std::shuffle(fillers.begin(), fillers.end(), rng);
  const auto filler_count = static_cast<std::size_t>(params.displayed) - shown.size();
  shown.insert(shown.end(), fillers.begin(),
               fillers.begin() + static_cast<std::ptrdiff_t>(filler_count));

  std::vector<int> cells(static_cast<std::size_t>(params.columns * params.rows));
  std::iota(cells.begin(), cells.end(), 0);
  const std::size_t limit = designated ? params.max_iterations : 1;
  for (std::size_t it = 0; it < limit; ++it) {
    std::shuffle(cells.begin(), cells.end(), rng);
    std::vector<PlacedIcon> placed;
    placed.reserve(shown.size());
    for (std::size_t i = 0; i < shown.size(); ++i) {
      placed.push_back({shown[i], {cells[i] % params.columns, cells[i] / params.columns}});
    }
    IconPlacement placement(std::move(placed));
    if (!designated || round_disjoint(placement, sweet_sets)) return {std::move(placement), kc};
  }
  throw GenerationTimeout();
}

bool hull_response_valid(const IconPlacement& placement, const IconSet& icon_set,
                         int response_icon) {
  const auto pos = placement.position(response_icon);
  if (!pos) return false;
  return displayed_hull(placement, icon_set).contains(*pos);
}

double expected_appearances(int total_icons, int displayed, int pass_icons, int challenges,
                            bool is_pass) {
  const double n = total_icons;
  const double m = displayed;
  const double k = pass_icons;
  const double r = challenges;
  if (pass_icons <= 2) throw Error("formula undefined for K <= 2");
  if (total_icons <= pass_icons) throw Error("N must exceed K");
  const double pass_sum = k * (k + 1) / 2 - 3;  // 3 + 4 + ... + K
  if (is_pass) return r * (1.0 / (k * (k - 2))) * pass_sum;
  return r * (1.0 / (k - 2)) * (1.0 / (n - k)) * (m * (k - 2) - pass_sum);
}

std::vector<int> probabilistic_attack_sim(const Params& params,
                                          std::span<const IconSet> sweet_sets, int challenges,
                                          Rng& rng) {
  if (challenges < 1) throw Error("challenge count must be at least 1");
  std::vector<int> counts(static_cast<std::size_t>(params.total_icons), 0);
  for (int c = 0; c < challenges; ++c) {
    const auto round = generate_round(sweet_sets, false, params, rng);
    for (const auto& icon : round.placement.icons()) ++counts[static_cast<std::size_t>(icon.id)];
  }
  return counts;
}

Session::Session(Params params, std::vector<IconSet> sweet_sets, Rng& rng)
    : params_(std::move(params)), sweet_sets_(std::move(sweet_sets)) {
  validate(params_, sweet_sets_.size());
  designated_ = std::uniform_int_distribution<int>(1, params_.rounds)(rng);
  for (int r = 1; r <= params_.rounds; ++r) {
    rounds_.push_back(generate_round(sweet_sets_, r == designated_, params_, rng));
  }
}

std::vector<Response> Session::response_space(int r) const {
  std::vector<Response> out;
  for (const auto& icon : round(r).placement.icons()) out.push_back(std::to_string(icon.id));
  return out;
}

IndexSet Session::candidates(int r, const Response& resp) const {
  IndexSet out;
  const auto id = parse_response_icon(resp);
  if (!id || r < 1 || r > params_.rounds) return out;
  const auto& placement = round(r).placement;
  for (std::size_t j = 0; j < sweet_sets_.size(); ++j) {
    if (hull_response_valid(placement, sweet_sets_[j], *id)) out.insert(j + 1);
  }
  return out;
}

Response Session::respond(std::size_t index, int r, Rng& rng) const {
  const auto& placement = round(r).placement;
  const auto hull = displayed_hull(placement, sweet_sets_.at(index - 1));
  std::vector<int> inside;
  for (const auto& icon : placement.icons()) {
    if (hull.contains(icon.pos)) inside.push_back(icon.id);
  }
  std::uniform_int_distribution<std::size_t> pick(0, inside.size() - 1);
  return std::to_string(inside[pick(rng)]);
}

std::string Session::round_payload(int r, std::string_view session_id) const {
  nlohmann::json icons = nlohmann::json::array();
  for (const auto& icon : round(r).placement.icons()) {
    icons.push_back({{"id", icon.id}, {"x", icon.pos.col}, {"y", icon.pos.row}});
  }
  nlohmann::json j;
  j["icons"] = std::move(icons);
  j["session_id"] = session_id;
  j["round"] = r;
  return j.dump();
}

}  // namespace hbat::chc
