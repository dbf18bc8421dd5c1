#pragma once

#include <array>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "hbat/core.hpp"
#include "hbat/honeygen.hpp"

namespace hbat::attacks {

/// A Monte Carlo proportion.
struct Estimate {
  std::size_t successes = 0;
  std::size_t trials = 0;

  double rate() const { return trials ? static_cast<double>(successes) / trials : 0.0; }
  /// Binomial standard error of rate().
  double sigma() const;
  /// Normal-approximation 95% interval, clamped to [0, 1].
  double ci_low() const;
  double ci_high() const;
  /// |rate() - p| <= 3 sigma, with sigma taken at p.
  bool within_3_sigma(double p) const;
};

struct TrialConfig {
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

/// Runs `trial(rng)` once per trial index with an rng seeded by
/// derive_seed(seed, index). The trial returns one flag per counter.
/// Results do not depend on the worker count.
template <std::size_t N, typename F>
std::array<Estimate, N> run_trials(const TrialConfig& cfg, F&& trial) {
  std::array<Estimate, N> out{};
  for (auto& e : out) e.trials = cfg.trials;
  const unsigned workers = cfg.workers == 0 ? 1 : cfg.workers;
  std::vector<std::array<std::size_t, N>> counts(workers, std::array<std::size_t, N>{});
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&](unsigned w) {
    try {
      for (std::size_t i = w; i < cfg.trials; i += workers) {
        Rng rng(derive_seed(cfg.seed, i));
        const std::array<bool, N> flags = trial(rng);
        for (std::size_t c = 0; c < N; ++c) counts[w][c] += flags[c] ? 1 : 0;
      }
    } catch (...) {
      std::lock_guard lock(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  for (const auto& c : counts) {
    for (std::size_t i = 0; i < N; ++i) out[i].successes += c[i];
  }
  return out;
}

/// A freshly registered account: sweetwords plus the real index.
struct Account {
  std::string password;
  honeygen::Generated sweetwords;
};

Account random_account(Scheme scheme, std::size_t k, Rng& rng, const SchemeParams& params = {});

// --- Soundness and detection

struct LoginSuiteResult {
  Estimate legit_accepted;     ///< identified index == t
  Estimate honeyword_alarmed;  ///< identified index == chosen honeyword, and CHECK alarms
  Estimate designated_disjoint;  ///< every response hits at most one sweetword
};

/// Per trial: a random account, one session, a legitimate login and a
/// login consistent with a random honeyword, plus an exhaustive check of
/// the designated round.
LoginSuiteResult login_suite(Scheme scheme, std::size_t k, const TrialConfig& cfg,
                             const SchemeParams& params = {});

// --- Observation brute force

struct BruteforceTrace {
  std::vector<std::size_t> sizes;  ///< candidate count before and after each session
  bool contains_secret = false;
  std::vector<std::string> survivors;
};

/// A session as the observer records it. `grid` is the S3PAS character
/// matrix row-major, or the COP digits in ordering order.
struct Observation {
  std::string grid;
  std::vector<int> digits;
  std::vector<Response> responses;
};

struct BruteforceRun {
  BruteforceTrace trace;
  std::vector<Observation> observations;
  std::string secret;
};

/// Reduced S3PAS: alphabet "ABCDEFGHIJKL" on 4x3 cells, 12^4 candidates.
s3pas::Params reduced_s3pas_params();
/// Reduced COP: 20 characters on 5x4 cells, length 3, 20^3 candidates.
cop::Params reduced_cop_params();

/// Watches `sessions` logins of one user (k = 2) and after each removes
/// every candidate secret that could not have produced the responses.
/// Candidates are all strings of the password length over the alphabet.
BruteforceRun bruteforce_observer(Scheme scheme, const SchemeParams& reduced, int sessions,
                                  Rng& rng);

// --- Random click

struct RandomClickResult {
  Estimate password_hit;  ///< the response is valid for the real password
  Estimate any_hit;       ///< the response is valid for some sweetword
};

/// One uniformly random response in one uniformly random round per trial.
RandomClickResult random_click_attack(Scheme scheme, std::size_t k, const TrialConfig& cfg,
                                      const SchemeParams& params = {});

// --- Typo and DoS

enum class TypoModel {
  kOneRoundWrong,    ///< one random round gets a uniformly random wrong response
  kOneRoundAny,      ///< one random round gets a uniformly random response
  kAllRoundsRandom,  ///< every round gets a uniformly random response
};

std::string_view to_string(TypoModel m);
TypoModel parse_typo_model(std::string_view name);

struct TypoResult {
  /// The session identifies a honeyword: the honeyChecker raises ALARM.
  Estimate alarm;
  /// The designated round's response falls in a honeyword's PRS while the
  /// password's PRS misses it.
  Estimate designated_hit;
};

/// Legitimate users who mistype. Correct rounds follow the real password.
TypoResult typo_false_alarm_sim(Scheme scheme, std::size_t k, TypoModel model,
                                const TrialConfig& cfg, const SchemeParams& params = {});

/// An attacker who knows the password but not the file submits a wrong
/// response in one round, hoping to hit a honeyword.
TypoResult dos_attack_sim(Scheme scheme, std::size_t k, const TrialConfig& cfg,
                          const SchemeParams& params = {});

/// Abstract check of (TR/T)^lr: every round draws uniformly from T
/// elements and hits when the draw is one of TR fixed elements.
Estimate typo_monte_carlo(int triangle_cells, int total_cells, int rounds, const TrialConfig& cfg);

struct Fraction {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const { return static_cast<double>(num) / den; }
  bool operator==(const Fraction&) const = default;
};

/// Reduced fraction of the Z response elements a k-sweetword session covers
/// in a single-response scheme: k / Z.
Fraction covered_ratio(std::uint64_t k, std::uint64_t total);

/// Chance a uniformly random wrong response in a single-response scheme
/// hits a honeyword: (k - 1) / (Z - 1).
Fraction single_response_alarm(std::uint64_t k, std::uint64_t total);

// --- MSV

/// Entries present in both lists, sorted.
std::vector<std::string> msv_intersection(const SweetwordList& a, const SweetwordList& b);

/// Per trial: one password, two independent honeygen runs, intersection is
/// exactly {password}.
Estimate msv_trial_rate(Scheme scheme, std::size_t k, const TrialConfig& cfg,
                        const SchemeParams& params = {});

// --- Flatness

enum class Heuristic { kRandomPick, kFrequency };

std::string_view to_string(Heuristic h);

struct FlatnessResult {
  Heuristic heuristic;
  Estimate success;
  double advantage = 0;  ///< success rate - 1/k
};

/// Users draw passwords from a pool of `pool_size` passwords with Zipf
/// weights 1/rank. The frequency heuristic knows the pool and its weights
/// and picks the most popular sweetword (random among ties); the random
/// heuristic picks uniformly. Throws Error when accounts < 100 or k < 2.
std::vector<FlatnessResult> flatness_estimate(Scheme scheme, std::size_t k, std::size_t accounts,
                                              std::size_t pool_size, std::uint64_t seed,
                                              const SchemeParams& params = {});

}  // namespace hbat::attacks
