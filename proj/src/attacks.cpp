#include "hbat/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "hbat/honeychecker.hpp"
#include "hbat/session.hpp"

namespace hbat::attacks {

double Estimate::sigma() const {
  if (trials == 0) return 0.0;
  const double p = rate();
  return std::sqrt(p * (1 - p) / static_cast<double>(trials));
}

double Estimate::ci_low() const { return std::max(0.0, rate() - 1.96 * sigma()); }
double Estimate::ci_high() const { return std::min(1.0, rate() + 1.96 * sigma()); }

bool Estimate::within_3_sigma(double p) const {
  if (trials == 0) return false;
  const double s = std::sqrt(p * (1 - p) / static_cast<double>(trials));
  return std::abs(rate() - p) <= 3 * s;
}

Account random_account(Scheme scheme, std::size_t k, Rng& rng, const SchemeParams& params) {
  Account a;
  a.password = honeygen::random_password(scheme, rng, params);
  a.sweetwords = honeygen::generate_sweetwords(scheme, a.password, k, rng, params);
  return a;
}

namespace {

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

std::size_t other_index(std::size_t t, std::size_t k, Rng& rng) {
  auto j = std::uniform_int_distribution<std::size_t>(1, k - 1)(rng);
  return j >= t ? j + 1 : j;
}

std::optional<std::size_t> safe_identify(std::span<const IndexSet> per_round, bool& ambiguous) {
  try {
    return identify_sweetword(per_round);
  } catch (const AmbiguousIdentification&) {
    ambiguous = true;
    return std::nullopt;
  }
}

/// Every string of `length` symbols over `alphabet`.
std::vector<std::string> all_strings(const std::string& alphabet, int length) {
  std::vector<std::string> out{""};
  for (int i = 0; i < length; ++i) {
    std::vector<std::string> next;
    next.reserve(out.size() * alphabet.size());
    for (const auto& s : out) {
      for (char c : alphabet) next.push_back(s + c);
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace

LoginSuiteResult login_suite(Scheme scheme, std::size_t k, const TrialConfig& cfg,
                             const SchemeParams& params) {
  const auto r = run_trials<3>(cfg, [&](Rng& rng) -> std::array<bool, 3> {
    const auto acc = random_account(scheme, k, rng, params);
    const auto session = start_session(acc.sweetwords.list, params, rng);
    const auto t = acc.sweetwords.t;

    bool disjoint = true;
    const int d = session->designated_round();
    for (const auto& resp : session->response_space(d)) {
      if (session->candidates(d, resp).size() > 1) disjoint = false;
    }

    bool legit = false;
    bool honey = false;
    try {
      legit = identify_sweetword(simulate_login(*session, t, rng)) == t;
      const auto j = other_index(t, k, rng);
      HoneyCheckerStore store;
      store.set("user", t);
      const auto id = identify_sweetword(simulate_login(*session, j, rng));
      honey = id == j && honeychecker_check(store, "user", *id) == CheckResult::kAlarm;
    } catch (const AmbiguousIdentification&) {
    }
    return {legit, honey, disjoint};
  });
  return {r[0], r[1], r[2]};
}

s3pas::Params reduced_s3pas_params() {
  s3pas::Params p;
  p.alphabet = "ABCDEFGHIJKL";
  p.columns = 4;
  p.rows = 3;
  p.k = 2;
  return p;
}

cop::Params reduced_cop_params() {
  cop::Params p;
  p.alphabet = "ABCDEFGHIJKLMNOPQRST";
  p.columns = 5;
  p.rows = 4;
  p.password_length = 3;
  p.k = 2;
  return p;
}

BruteforceRun bruteforce_observer(Scheme scheme, const SchemeParams& reduced, int sessions,
                                  Rng& rng) {
  if (scheme != Scheme::kS3pas && scheme != Scheme::kCop) {
    throw Error("brute-force observer supports s3pas and cop");
  }
  const bool s3 = scheme == Scheme::kS3pas;
  const auto& alphabet = s3 ? reduced.s3pas.alphabet : reduced.cop.alphabet;
  const int length = s3 ? reduced.s3pas.password_length : reduced.cop.password_length;
  auto candidates = all_strings(alphabet, length);
  if (candidates.size() > 1000000) throw Error("candidate space too large to enumerate");

  BruteforceRun run;
  const auto acc = random_account(scheme, 2, rng, reduced);
  run.secret = acc.password;
  run.trace.sizes.push_back(candidates.size());

  for (int s = 0; s < sessions; ++s) {
    const auto session = start_session(acc.sweetwords.list, reduced, rng);
    Observation obs;
    for (const auto& e : simulate_login(*session, acc.sweetwords.t, rng).rounds) {
      obs.responses.push_back(e.response);
    }
    std::vector<std::string> kept;
    if (s3) {
      const auto& ch = dynamic_cast<const s3pas::Session&>(*session).challenge();
      obs.grid = ch.grid();
      std::unordered_map<std::string, std::string> memo;
      auto prs_of = [&](const std::string& ppi) -> const std::string& {
        auto it = memo.find(ppi);
        if (it == memo.end()) it = memo.emplace(ppi, s3pas::prs(ch, ppi, reduced.s3pas)).first;
        return it->second;
      };
      for (auto& c : candidates) {
        bool ok = true;
        for (int r = 1; ok && r <= reduced.s3pas.rounds; ++r) {
          const auto& resp = obs.responses[static_cast<std::size_t>(r - 1)];
          ok = resp.size() == 1 && prs_of(s3pas::round_ppi(c, r)).find(resp[0]) != std::string::npos;
        }
        if (ok) kept.push_back(std::move(c));
      }
    } else {
      const auto& grid = dynamic_cast<const cop::Session&>(*session).challenge().grid();
      for (int i = 0; i < grid.cells(); ++i) obs.digits.push_back(grid.digit_at(i));
      const int observed = obs.responses.front()[0] - '0';
      for (auto& c : candidates) {
        if (cop::legit_response(c, grid) == observed) kept.push_back(std::move(c));
      }
    }
    candidates = std::move(kept);
    run.observations.push_back(std::move(obs));
    run.trace.sizes.push_back(candidates.size());
  }
  run.trace.contains_secret =
      std::find(candidates.begin(), candidates.end(), run.secret) != candidates.end();
  run.trace.survivors = std::move(candidates);
  return run;
}

RandomClickResult random_click_attack(Scheme scheme, std::size_t k, const TrialConfig& cfg,
                                      const SchemeParams& params) {
  if (cfg.trials == 0) throw Error("trials must be at least 1");
  const auto r = run_trials<2>(cfg, [&](Rng& rng) -> std::array<bool, 2> {
    const auto acc = random_account(scheme, k, rng, params);
    const auto session = start_session(acc.sweetwords.list, params, rng);
    const int round = std::uniform_int_distribution<int>(1, session->rounds())(rng);
    const auto cands = session->candidates(round, pick(session->response_space(round), rng));
    return {cands.count(acc.sweetwords.t) == 1, !cands.empty()};
  });
  return {r[0], r[1]};
}

std::string_view to_string(TypoModel m) {
  switch (m) {
    case TypoModel::kOneRoundWrong: return "one-round-wrong";
    case TypoModel::kOneRoundAny: return "one-round-any";
    case TypoModel::kAllRoundsRandom: return "all-rounds-random";
  }
  return "?";
}

TypoModel parse_typo_model(std::string_view name) {
  for (auto m : {TypoModel::kOneRoundWrong, TypoModel::kOneRoundAny, TypoModel::kAllRoundsRandom}) {
    if (to_string(m) == name) return m;
  }
  throw Error("unknown typo model: " + std::string(name));
}

TypoResult typo_false_alarm_sim(Scheme scheme, std::size_t k, TypoModel model,
                                const TrialConfig& cfg, const SchemeParams& params) {
  if (cfg.trials == 0) throw Error("trials must be at least 1");
  const auto r = run_trials<2>(cfg, [&](Rng& rng) -> std::array<bool, 2> {
    const auto acc = random_account(scheme, k, rng, params);
    const auto session = start_session(acc.sweetwords.list, params, rng);
    const auto t = acc.sweetwords.t;
    const int rounds = session->rounds();
    const int corrupt = std::uniform_int_distribution<int>(1, rounds)(rng);

    std::vector<IndexSet> per_round;
    bool designated_hit = false;
    for (int round = 1; round <= rounds; ++round) {
      Response resp;
      if (model == TypoModel::kAllRoundsRandom || round == corrupt) {
        const auto space = session->response_space(round);
        if (model == TypoModel::kOneRoundWrong) {
          std::vector<Response> wrong;
          for (const auto& x : space) {
            if (!session->candidates(round, x).count(t)) wrong.push_back(x);
          }
          resp = wrong.empty() ? pick(space, rng) : pick(wrong, rng);
        } else {
          resp = pick(space, rng);
        }
      } else {
        resp = session->respond(t, round, rng);
      }
      auto cands = session->candidates(round, resp);
      if (round == session->designated_round()) {
        designated_hit = !cands.empty() && !cands.count(t);
      }
      per_round.push_back(std::move(cands));
    }
    bool ambiguous = false;
    const auto id = safe_identify(per_round, ambiguous);
    return {ambiguous || (id && *id != t), designated_hit};
  });
  return {r[0], r[1]};
}

TypoResult dos_attack_sim(Scheme scheme, std::size_t k, const TrialConfig& cfg,
                          const SchemeParams& params) {
  return typo_false_alarm_sim(scheme, k, TypoModel::kOneRoundWrong, cfg, params);
}

Estimate typo_monte_carlo(int triangle_cells, int total_cells, int rounds, const TrialConfig& cfg) {
  if (triangle_cells < 0 || total_cells <= 0 || triangle_cells > total_cells || rounds < 1) {
    throw Error("invalid typo model parameters");
  }
  return run_trials<1>(cfg, [&](Rng& rng) -> std::array<bool, 1> {
    std::uniform_int_distribution<int> cell(0, total_cells - 1);
    for (int r = 0; r < rounds; ++r) {
      if (cell(rng) >= triangle_cells) return {false};
    }
    return {true};
  })[0];
}

Fraction covered_ratio(std::uint64_t k, std::uint64_t total) {
  if (total == 0 || k > total) throw Error("invalid coverage parameters");
  const auto g = std::gcd(k, total);
  return {k / g, total / g};
}

Fraction single_response_alarm(std::uint64_t k, std::uint64_t total) {
  if (k == 0 || total < 2 || k > total) throw Error("invalid coverage parameters");
  return covered_ratio(k - 1, total - 1);
}

std::vector<std::string> msv_intersection(const SweetwordList& a, const SweetwordList& b) {
  std::vector<std::string> x = a.entries;
  std::vector<std::string> y = b.entries;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::vector<std::string> out;
  std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
  return out;
}

Estimate msv_trial_rate(Scheme scheme, std::size_t k, const TrialConfig& cfg,
                        const SchemeParams& params) {
  return run_trials<1>(cfg, [&](Rng& rng) -> std::array<bool, 1> {
    const auto password = honeygen::random_password(scheme, rng, params);
    const auto a = honeygen::generate_sweetwords(scheme, password, k, rng, params);
    const auto b = honeygen::generate_sweetwords(scheme, password, k, rng, params);
    const auto common = msv_intersection(a.list, b.list);
    return {common.size() == 1 && common.front() == a.list.entries[a.t - 1]};
  })[0];
}

std::string_view to_string(Heuristic h) {
  switch (h) {
    case Heuristic::kRandomPick: return "random-pick";
    case Heuristic::kFrequency: return "frequency";
  }
  return "?";
}

std::vector<FlatnessResult> flatness_estimate(Scheme scheme, std::size_t k, std::size_t accounts,
                                              std::size_t pool_size, std::uint64_t seed,
                                              const SchemeParams& params) {
  if (accounts < 100) throw Error("at least 100 accounts required");
  if (k < 2) throw Error("k must be at least 2");
  if (pool_size == 0) throw Error("password pool must not be empty");

  Rng pool_rng(derive_seed(seed, ~std::uint64_t{0}));
  std::vector<std::string> pool;
  std::map<std::string, double> weight;
  while (pool.size() < pool_size) {
    auto pw = honeygen::random_password(scheme, pool_rng, params);
    if (weight.count(pw)) continue;
    weight[pw] = 1.0 / static_cast<double>(pool.size() + 1);
    pool.push_back(std::move(pw));
  }
  std::vector<double> w;
  for (const auto& pw : pool) w.push_back(weight[pw]);

  TrialConfig cfg{accounts, seed, 1};
  const auto r = run_trials<2>(cfg, [&](Rng& rng) -> std::array<bool, 2> {
    std::discrete_distribution<std::size_t> zipf(w.begin(), w.end());
    const auto& password = pool[zipf(rng)];
    const auto g = honeygen::generate_sweetwords(scheme, password, k, rng, params);
    const auto random_pick = std::uniform_int_distribution<std::size_t>(1, k)(rng);

    double best = -1;
    std::vector<std::size_t> top;
    for (std::size_t i = 0; i < k; ++i) {
      const auto it = weight.find(g.list.entries[i]);
      const double score = it == weight.end() ? 0.0 : it->second;
      if (score > best) {
        best = score;
        top.clear();
      }
      if (score == best) top.push_back(i + 1);
    }
    const auto freq_pick = pick(top, rng);
    return {random_pick == g.t, freq_pick == g.t};
  });
  const double base = 1.0 / static_cast<double>(k);
  return {{Heuristic::kRandomPick, r[0], r[0].rate() - base},
          {Heuristic::kFrequency, r[1], r[1].rate() - base}};
}

}  // namespace hbat::attacks
