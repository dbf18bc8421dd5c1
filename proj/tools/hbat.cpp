// hbat: sessions, attacks, formulas, the challenge-generation benchmark and
// the two servers.

#include <csignal>
#include <cstdint>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hbat/attacks.hpp"
#include "hbat/chc.hpp"
#include "hbat/cop.hpp"
#include "hbat/honeychecker.hpp"
#include "hbat/honeygen.hpp"
#include "hbat/pas.hpp"
#include "hbat/s3pas.hpp"
#include "hbat/services.hpp"
#include "hbat/session.hpp"

namespace {

using nlohmann::json;
using namespace hbat;

constexpr int kUsage = 1;
constexpr int kRuntime = 2;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  const std::uint64_t s =
      seed ? *seed : (std::uint64_t{std::random_device{}()} << 32) ^ std::random_device{}();
  std::cerr << "seed: " << s << '\n';
  return s;
}

/// "4..8" or "4,6,8".
std::vector<std::size_t> parse_k_list(const std::string& text) {
  std::vector<std::size_t> out;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const auto lo = std::stoul(text.substr(0, dots));
    const auto hi = std::stoul(text.substr(dots + 2));
    if (lo > hi) throw Error("empty k range: " + text);
    for (auto k = lo; k <= hi; ++k) out.push_back(k);
    return out;
  }
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(std::stoul(part));
  if (out.empty()) throw Error("no k values given");
  return out;
}

boost::multiprecision::cpp_int binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  boost::multiprecision::cpp_int c = 1;
  for (unsigned i = 1; i <= k; ++i) {
    c *= n - k + i;
    c /= i;
  }
  return c;
}

json estimate_json(const attacks::Estimate& e) {
  return {{"successes", e.successes},
          {"trials", e.trials},
          {"rate", e.rate()},
          {"ci95", {e.ci_low(), e.ci_high()}}};
}

std::string join(const IndexSet& s) {
  std::string out = "{";
  for (auto it = s.begin(); it != s.end(); ++it) {
    if (it != s.begin()) out += ",";
    out += std::to_string(*it);
  }
  return out + "}";
}

int session_run(Scheme scheme, std::optional<std::size_t> k_opt, const std::string& who,
                const std::optional<std::string>& password_opt,
                const std::optional<std::uint64_t>& seed_opt) {
  const SchemeParams params;
  const auto k = k_opt.value_or(default_k(scheme, params));
  Rng rng(resolve_seed(seed_opt));
  const auto password = password_opt ? *password_opt : honeygen::random_password(scheme, rng, params);
  const auto gen = honeygen::generate_sweetwords(scheme, password, k, rng, params);
  const auto session = start_session(gen.list, params, rng);

  std::size_t index = gen.t;
  bool random_user = false;
  if (who == "random") {
    random_user = true;
  } else if (who.rfind("honeyword:", 0) == 0) {
    index = std::stoul(who.substr(10));
    if (index < 1 || index > k || index == gen.t) {
      throw CLI::ValidationError("--simulate-user", "honeyword index must be in 1..k and differ from t");
    }
  } else if (who != "legit") {
    throw CLI::ValidationError("--simulate-user", "expected legit, honeyword:J or random");
  }

  std::cout << "scheme: " << to_string(scheme) << "\nsweetwords:";
  for (std::size_t i = 0; i < k; ++i) std::cout << ' ' << i + 1 << '=' << gen.list.entries[i];
  std::cout << "\nt: " << gen.t << "\ndesignated round: " << session->designated_round() << '\n';

  std::vector<IndexSet> per_round;
  for (int r = 1; r <= session->rounds(); ++r) {
    Response resp;
    if (random_user) {
      const auto space = session->response_space(r);
      resp = space[std::uniform_int_distribution<std::size_t>(0, space.size() - 1)(rng)];
    } else {
      resp = session->respond(index, r, rng);
    }
    per_round.push_back(session->candidates(r, resp));
    std::cout << "round " << r << ": response " << resp << " candidates "
              << join(per_round.back()) << '\n';
  }
  HoneyCheckerStore store;
  store.set("user", gen.t);
  std::string verdict = "denied (no sweetword matched)";
  if (const auto id = identify_sweetword(per_round)) {
    verdict = honeychecker_check(store, "user", *id) == CheckResult::kOk
                  ? "accepted"
                  : "denied (ALARM: honeyword " + std::to_string(*id) + ")";
  }
  std::cout << "verdict: " << verdict << '\n';
  return 0;
}

int bench(const std::string& ks, std::size_t runs, const std::optional<std::uint64_t>& seed) {
  const auto k_values = parse_k_list(ks);
  Rng rng(resolve_seed(seed));
  const auto rows = s3pas::challenge_gen_stats(k_values, runs, rng);
  s3pas::write_bench_csv(std::cout, rows);
  return 0;
}

struct AttackOptions {
  std::string kind;
  std::string scheme = "s3pas";
  std::optional<std::size_t> k;
  std::size_t trials = 10000;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  std::string model = "one-round-wrong";
  int sessions = 10;
  std::size_t pool = 1000;
};

int attack(const AttackOptions& o) {
  const Scheme scheme = parse_scheme(o.scheme);
  SchemeParams params;
  const auto k = o.k.value_or(default_k(scheme, params));
  const attacks::TrialConfig cfg{o.trials, resolve_seed(o.seed), o.workers};
  json out{{"attack", o.kind}, {"scheme", o.scheme}, {"seed", cfg.seed}};

  if (o.kind == "bruteforce") {
    SchemeParams reduced;
    reduced.s3pas = attacks::reduced_s3pas_params();
    reduced.cop = attacks::reduced_cop_params();
    Rng rng(cfg.seed);
    const auto run = attacks::bruteforce_observer(scheme, reduced, o.sessions, rng);
    out["secret"] = run.secret;
    out["trace"] = run.trace.sizes;
    out["contains_secret"] = run.trace.contains_secret;
    if (run.trace.survivors.size() <= 20) out["survivors"] = run.trace.survivors;
  } else if (o.kind == "random-click") {
    const auto r = attacks::random_click_attack(scheme, k, cfg, params);
    out["k"] = k;
    out["password_hit"] = estimate_json(r.password_hit);
    out["any_sweetword_hit"] = estimate_json(r.any_hit);
    if (scheme == Scheme::kS3pas) {
      out["expected_triangle_area_n9"] = s3pas::expected_triangle_area(9);
    }
  } else if (o.kind == "dos") {
    const auto r = attacks::dos_attack_sim(scheme, k, cfg, params);
    out["k"] = k;
    out["alarm"] = estimate_json(r.alarm);
    out["designated_round_honeyword_hit"] = estimate_json(r.designated_hit);
    if (scheme == Scheme::kCop) {
      const auto f = attacks::single_response_alarm(k, 10);
      out["analytic_alarm"] = std::to_string(f.num) + "/" + std::to_string(f.den);
    }
  } else if (o.kind == "msv") {
    out["k"] = k;
    out["intersection_is_password"] = estimate_json(attacks::msv_trial_rate(scheme, k, cfg, params));
  } else if (o.kind == "typo") {
    const auto model = attacks::parse_typo_model(o.model);
    const auto r = attacks::typo_false_alarm_sim(scheme, k, model, cfg, params);
    out["k"] = k;
    out["model"] = o.model;
    out["alarm"] = estimate_json(r.alarm);
    out["designated_round_honeyword_hit"] = estimate_json(r.designated_hit);
    if (scheme == Scheme::kS3pas) {
      out["analytic_tr3"] = s3pas::typo_false_alarm_prob(3, 80, 4);
    }
  } else if (o.kind == "flatness") {
    const auto results = attacks::flatness_estimate(scheme, k, o.trials, o.pool, cfg.seed, params);
    out["k"] = k;
    for (const auto& r : results) {
      out["heuristics"].push_back({{"heuristic", std::string(attacks::to_string(r.heuristic))},
                                   {"success", estimate_json(r.success)},
                                   {"advantage", r.advantage}});
    }
  } else {
    throw CLI::ValidationError("attack", "unknown attack " + o.kind);
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

/// Blocks SIGINT/SIGTERM in every thread and calls `stop` when one arrives.
template <typename Stop>
std::thread stop_on_signal(Stop stop) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return std::thread([set, stop] {
    int sig = 0;
    sigwait(&set, &sig);
    stop();
  });
}

int serve(const std::string& which, const std::string& config_file) {
  auto config = config_file.empty() ? services::Config{} : services::load_config(config_file);
  services::apply_env_overrides(config);
  std::filesystem::create_directories(config.data_dir);
  if (which == "honeychecker") {
    HoneyCheckerStore store(config.data_dir / "honeychecker.tsv");
    services::HoneyCheckerServer server(store, config.host, config.honeychecker_port,
                                        config.data_dir / "honeychecker_alarms.log");
    const int port = server.bind();
    auto waiter = stop_on_signal([&server] { server.stop(); });
    waiter.detach();
    std::cout << "honeychecker listening on " << config.host << ':' << port << std::endl;
    server.run();
    return 0;
  }
  services::AuthServer server(config);
  const int port = server.bind();
  auto waiter = stop_on_signal([&server] { server.stop(); });
  waiter.detach();
  std::cout << "auth listening on " << config.host << ':' << port << std::endl;
  server.run();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Honeyword-enabled shoulder-surfing resistant authentication toolkit"};
  app.require_subcommand(1);

  // session run
  auto* session = app.add_subcommand("session", "Simulate login sessions");
  session->require_subcommand(1);
  auto* run = session->add_subcommand("run", "Run one login ceremony");
  std::string run_scheme;
  std::optional<std::size_t> run_k;
  std::string who = "legit";
  std::optional<std::string> run_password;
  std::optional<std::uint64_t> run_seed;
  run->add_option("--scheme", run_scheme, "s3pas | chc | pas | cop")
      ->required()
      ->check(CLI::IsMember({"s3pas", "chc", "pas", "cop"}));
  run->add_option("--k", run_k, "Number of sweetwords");
  run->add_option("--simulate-user", who, "legit | honeyword:J | random");
  run->add_option("--password", run_password, "Password to register (random if omitted)");
  run->add_option("--seed", run_seed);

  // bench challenge-gen
  auto* bench_cmd = app.add_subcommand("bench", "Benchmarks");
  bench_cmd->require_subcommand(1);
  auto* gen = bench_cmd->add_subcommand("challenge-gen", "S3PAS challenge generation cost");
  std::string bench_k = "4..8";
  std::size_t bench_runs = 20;
  std::optional<std::uint64_t> bench_seed;
  gen->add_option("--k", bench_k, "k values: 4..8 or 4,6,8");
  gen->add_option("--runs", bench_runs, "Runs per k")->check(CLI::PositiveNumber);
  gen->add_option("--seed", bench_seed);

  // attack
  auto* attack_cmd = app.add_subcommand("attack", "Adversary simulations");
  AttackOptions ao;
  attack_cmd->add_option("kind", ao.kind, "bruteforce | random-click | dos | msv | typo | flatness")
      ->required()
      ->check(CLI::IsMember({"bruteforce", "random-click", "dos", "msv", "typo", "flatness"}));
  attack_cmd->add_option("--scheme", ao.scheme)->check(CLI::IsMember({"s3pas", "chc", "pas", "cop"}));
  attack_cmd->add_option("--k", ao.k);
  attack_cmd->add_option("--trials", ao.trials, "Trials (accounts for flatness)");
  attack_cmd->add_option("--seed", ao.seed);
  attack_cmd->add_option("--workers", ao.workers)->check(CLI::PositiveNumber);
  attack_cmd->add_option("--model", ao.model, "Typo model")
      ->check(CLI::IsMember({"one-round-wrong", "one-round-any", "all-rounds-random"}));
  attack_cmd->add_option("--sessions", ao.sessions, "Observed sessions (bruteforce)");
  attack_cmd->add_option("--pool", ao.pool, "Password pool size (flatness)");

  // formula
  auto* formula = app.add_subcommand("formula", "Closed-form values");
  formula->require_subcommand(1);
  auto* es = formula->add_subcommand("es", "Expected triangle area E[S]");
  int es_n = 9;
  es->add_option("--n", es_n)->check(CLI::PositiveNumber);
  auto* chc_expect = formula->add_subcommand("chc-expect", "Expected CHC icon appearances");
  int cn = 112, cm = 70, ck = 5, cr = 100;
  chc_expect->add_option("--N", cn);
  chc_expect->add_option("--M", cm);
  chc_expect->add_option("--K", ck);
  chc_expect->add_option("--r", cr);
  auto* complexity = formula->add_subcommand("complexity", "Observation brute-force complexity");
  std::string cx_scheme;
  std::optional<unsigned> cx_n, cx_len;
  unsigned cx_cells = 25, cx_letters = 26, cx_c = 1, cx_p = 2;
  complexity->add_option("--scheme", cx_scheme)
      ->required()
      ->check(CLI::IsMember({"s3pas", "chc", "pas", "cop"}));
  complexity->add_option("--n", cx_n, "Elements: S3PAS characters, CHC icons or COP cells");
  complexity->add_option("--length", cx_len, "S3PAS PPI length, CHC pass icons or COP password length");
  complexity->add_option("--cells", cx_cells, "PAS blocks");
  complexity->add_option("--letters", cx_letters, "PAS letters per block");
  complexity->add_option("--c", cx_c, "PAS predicates");
  complexity->add_option("--p", cx_p, "PAS rounds");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run a server");
  std::string which;
  std::string config_file;
  serve_cmd->add_option("which", which, "auth | honeychecker")
      ->required()
      ->check(CLI::IsMember({"auth", "honeychecker"}));
  serve_cmd->add_option("--config", config_file, "JSON config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run) return session_run(parse_scheme(run_scheme), run_k, who, run_password, run_seed);
    if (*gen) return bench(bench_k, bench_runs, bench_seed);
    if (*attack_cmd) return attack(ao);
    if (*es) {
      std::cout << std::setprecision(12) << s3pas::expected_triangle_area(es_n) << '\n';
      return 0;
    }
    if (*chc_expect) {
      std::cout << std::fixed << std::setprecision(2)
                << "pass " << chc::expected_appearances(cn, cm, ck, cr, true) << '\n'
                << "non-pass " << chc::expected_appearances(cn, cm, ck, cr, false) << '\n';
      return 0;
    }
    if (*complexity) {
      if (cx_scheme == "cop") {
        std::cout << cop::cop_bruteforce_complexity(cx_n.value_or(66), cx_len.value_or(4)) << '\n';
      } else if (cx_scheme == "s3pas") {
        std::cout << binomial(cx_n.value_or(80), cx_len.value_or(3)) << '\n';
      } else if (cx_scheme == "chc") {
        std::cout << binomial(cx_n.value_or(112), cx_len.value_or(5)) << '\n';
      } else {
        std::cout << pas::pas_bruteforce_complexity(cx_cells, cx_letters, cx_c, cx_p) << '\n';
      }
      return 0;
    }
    if (*serve_cmd) return serve(which, config_file);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
