// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <httplib.h>
#include <json.hpp>

#include "../oracles.hpp"
#include "hbat/attacks.hpp"
#include "hbat/chc.hpp"
#include "hbat/cop.hpp"
#include "hbat/honeygen.hpp"
#include "hbat/s3pas.hpp"
#include "hbat/services.hpp"

using namespace hbat;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (!out.pass) ++failures;
  std::cout << (out.pass ? "PASS " : "FAIL ") << name << ": " << out.detail << " ["
            << std::fixed << std::setprecision(1) << secs << " s]" << std::endl;
}

template <typename... Ts>
std::string cat(const Ts&... parts) {
  std::ostringstream os;
  os << std::setprecision(10);
  (os << ... << parts);
  return os.str();
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// Average ranks, ties sharing the mean rank.
std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t m = i; m <= j; ++m) out[idx[m]] = (i + j) / 2.0 + 1;
    i = j + 1;
  }
  return out;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

Outcome chc_expectations() {
  const auto start = Clock::now();
  const double pass = chc::expected_appearances(112, 70, 5, 100, true);
  const double other = chc::expected_appearances(112, 70, 5, 100, false);
  const double us = std::chrono::duration<double, std::micro>(Clock::now() - start).count();
  const bool ok = std::abs(pass - 80.0) < 1e-2 && std::abs(other - 61.68) < 1e-2 && us < 1000;
  return {ok, cat("pass ", pass, ", non-pass ", other, " (expected 80.00, 61.68), ", us, " us")};
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Outcome generation_iterations() {
  const auto start = Clock::now();
  Rng rng(7);
  const std::vector<std::size_t> ks{4, 5, 6, 7, 8};
  const auto rows = s3pas::challenge_gen_stats(ks, 20, rng);
  std::vector<double> x, y;
  std::string means;
  bool increasing = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    means += cat(i ? " " : "", "k=", rows[i].k, ":", rows[i].avg_iterations);
    if (i && rows[i].avg_iterations <= rows[i - 1].avg_iterations) increasing = false;
    for (auto it : rows[i].iterations) {
      x.push_back(static_cast<double>(rows[i].k));
      y.push_back(static_cast<double>(it));
    }
  }
  const double rho = pearson(ranks(x), ranks(y));
  const double n = static_cast<double>(x.size());
  const double t = rho * std::sqrt((n - 2) / (1 - rho * rho));
  const boost::math::students_t dist(n - 2);
  const double p = boost::math::cdf(boost::math::complement(dist, t));
  const double k6 = rows[2].avg_iterations;
  const bool ok = increasing && p < 0.01 && k6 >= 10 && k6 <= 250 && seconds_since(start) < 600;
  return {ok, cat("mean iterations ", means, "; spearman rho ", rho, " one-sided p ", p,
                  "; k=6 mean in [10, 250]: ", (k6 >= 10 && k6 <= 250 ? "yes" : "no"))};
}

Outcome expected_area() {
  const auto start = Clock::now();
  const double v = s3pas::expected_triangle_area(9);
  const double secs = seconds_since(start);
  const double ref = oracle::triangle_area_mean(9);
  const bool ok = std::abs(v - ref) < 1e-9 && secs < 30;
  return {ok, cat("E[S](9) = ", v, " in ", secs, " s, brute-force oracle ", ref,
                  "; printed figure 0.753 differs by a factor of 10 (value is 0.0753)")};
}

Outcome soundness(Scheme s, attacks::LoginSuiteResult& out) {
  out = attacks::login_suite(s, default_k(s), {10000, 2024, workers()});
  const auto& e = out.legit_accepted;
  return {e.successes == e.trials,
          cat(to_string(s), " k=", default_k(s), ": ", e.successes, "/", e.trials,
              " legitimate logins identified as t")};
}

Outcome detection(Scheme s, const attacks::LoginSuiteResult& r) {
  const bool ok = r.honeyword_alarmed.trials == 10000 &&
                  r.honeyword_alarmed.successes == r.honeyword_alarmed.trials &&
                  r.designated_disjoint.successes == r.designated_disjoint.trials;
  return {ok, cat(to_string(s), ": ", r.honeyword_alarmed.successes, "/",
                  r.honeyword_alarmed.trials, " honeyword logins alarmed with the right index; ",
                  r.designated_disjoint.successes, "/", r.designated_disjoint.trials,
                  " designated rounds disjoint")};
}

Outcome cop_worked_example() {
  const std::vector<std::string> sweet{"A1B3", "QJw9", "2XTD", "YSRK", "icat"};
  const std::vector<cop::FixedRouting> routing{{'Z', 3}, {'C', 1}, {'M', 5}, {'H', 6}, {'h', 8}};
  Rng rng(1);
  const auto ch = cop::generate_challenge(sweet, cop::Params{}, rng, routing);
  std::vector<int> lengths;
  for (const auto& a : ch.plan()) lengths.push_back(a.path_length);
  const auto& first = ch.plan()[0];
  const int split = std::accumulate(first.remainder_parts.begin(), first.remainder_parts.end(), 0);
  bool ok = lengths == std::vector<int>{25, 52, 24, 49, 65} && first.quotient == 2 && split == 3;

  // Walk identity over random generations, checked with a step-by-step walk.
  int good = 0;
  constexpr int kGenerations = 10000;
  const cop::Params p;
  for (int i = 0; i < kGenerations; ++i) {
    Rng r(derive_seed(99, static_cast<std::uint64_t>(i)));
    const auto pw = honeygen::random_password(Scheme::kCop, r);
    const auto sw = honeygen::generate_sweetwords(Scheme::kCop, pw, 5, r).list.entries;
    const auto c = cop::generate_challenge(sw, p, r);
    std::vector<int> digits;
    for (int d = 0; d < c.grid().cells(); ++d) digits.push_back(c.grid().digit_at(d));
    bool all = true;
    for (std::size_t j = 0; j < sw.size(); ++j) {
      const auto& a = c.plan()[j];
      const int h = std::accumulate(a.remainder_parts.begin(), a.remainder_parts.end(), 0);
      const int pl = oracle::forward_steps(cop::kOrdering, sw[j][0], a.response_cell);
      all = all && a.quotient * 11 + h == pl &&
            oracle::cop_walk(cop::kOrdering, digits, 11, sw[j]) == a.response_cell &&
            digits[cop::kOrdering.find(a.response_cell)] == a.response_digit;
    }
    good += all;
  }
  ok = ok && good == kGenerations;
  return {ok, cat("path lengths 25 52 24 49 65 reproduced: ",
                  lengths == std::vector<int>{25, 52, 24, 49, 65} ? "yes" : "no",
                  "; quotient ", first.quotient, ", remainder parts sum ", split,
                  "; walk identity held in ", good, "/", kGenerations, " generations")};
}

Outcome dos_figure() {
  const auto r = attacks::dos_attack_sim(Scheme::kCop, 5, {100000, 3, workers()});
  const auto ratio = attacks::covered_ratio(5, 10);
  const double rate = r.alarm.rate();
  const bool ok = std::abs(rate - 4.0 / 9.0) <= 0.02 && ratio == attacks::Fraction{1, 2};
  return {ok, cat("cop k=5 wrong-digit alarm rate ", rate, " (4/9 = ", 4.0 / 9.0,
                  ", tolerance 0.02); covered ratio ", ratio.num, "/", ratio.den)};
}

Outcome typo_figures() {
  const double v = s3pas::typo_false_alarm_prob(3, 80, 4);
  const int exponent = static_cast<int>(std::floor(std::log10(v)));
  const double mantissa = std::floor(v / std::pow(10.0, exponent - 1)) / 10.0;
  const auto mc = attacks::typo_monte_carlo(8, 80, 2, {100000, 5, workers()});
  const double inflated = s3pas::typo_false_alarm_prob(8, 80, 2);
  const bool ok = mantissa == 1.9 && exponent == -6 && mc.within_3_sigma(inflated);
  return {ok, cat("(3/80)^4 = ", v, " -> ", mantissa, "e", exponent,
                  " to two significant figures; (8/80)^2 = ", inflated, ", Monte Carlo ",
                  mc.rate(), " +/- ", mc.sigma())};
}

Outcome msv() {
  std::string detail;
  bool ok = true;
  for (auto s : {Scheme::kS3pas, Scheme::kChc, Scheme::kPas, Scheme::kCop}) {
    const auto e = attacks::msv_trial_rate(s, default_k(s), {10000, 8, workers()});
    ok = ok && e.rate() > 0.95;
    detail += cat(detail.empty() ? "" : ", ", to_string(s), " ", e.rate());
  }
  return {ok, "intersection is exactly {password} in " + detail + " of 10000 trials"};
}

Outcome bruteforce() {
  const auto start = Clock::now();
  Rng rng(11);
  const SchemeParams reduced{attacks::reduced_s3pas_params(), {}, {}, {}};
  const auto run = attacks::bruteforce_observer(Scheme::kS3pas, reduced, 12, rng);
  auto candidates = oracle::all_strings(reduced.s3pas.alphabet, 4);
  bool matches = run.trace.sizes.front() == candidates.size();
  bool monotone = true;
  for (std::size_t s = 0; s < run.observations.size(); ++s) {
    const auto& obs = run.observations[s];
    std::vector<std::string> kept;
    for (const auto& c : candidates) {
      bool ok = true;
      for (int r = 1; r <= 4 && ok; ++r) {
        const auto prs = oracle::s3pas_prs(obs.grid, reduced.s3pas.columns, oracle::ppi(c, r));
        ok = prs.find(obs.responses[static_cast<std::size_t>(r - 1)][0]) != std::string::npos;
      }
      if (ok) kept.push_back(c);
    }
    candidates = std::move(kept);
    matches = matches && run.trace.sizes[s + 1] == candidates.size();
    monotone = monotone && run.trace.sizes[s + 1] <= run.trace.sizes[s];
  }
  const double secs = seconds_since(start);
  const bool kept_secret =
      std::find(candidates.begin(), candidates.end(), run.secret) != candidates.end();
  std::string trace;
  for (auto n : run.trace.sizes) trace += cat(trace.empty() ? "" : " ", n);
  return {matches && monotone && kept_secret && run.trace.contains_secret && secs < 60,
          cat("trace ", trace, "; monotone ", monotone ? "yes" : "no", ", matches oracle ",
              matches ? "yes" : "no", ", secret kept ", kept_secret ? "yes" : "no")};
}

// --- services end to end

class Child {
 public:
  Child(const std::string& exe, const std::vector<std::string>& args) {
    int fds[2];
    if (::pipe(fds) != 0) throw std::runtime_error("pipe failed");
    pid_ = ::fork();
    if (pid_ < 0) throw std::runtime_error("fork failed");
    if (pid_ == 0) {
      ::dup2(fds[1], STDOUT_FILENO);
      ::close(fds[0]);
      ::close(fds[1]);
      std::vector<char*> argv{const_cast<char*>(exe.c_str())};
      for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
      argv.push_back(nullptr);
      ::execv(exe.c_str(), argv.data());
      ::_exit(127);
    }
    ::close(fds[1]);
    out_ = ::fdopen(fds[0], "r");
  }
  ~Child() {
    if (pid_ > 0) {
      ::kill(pid_, SIGTERM);
      int status = 0;
      ::waitpid(pid_, &status, 0);
    }
    if (out_) std::fclose(out_);
  }
  Child(const Child&) = delete;
  Child& operator=(const Child&) = delete;

  /// Port from the "<name> listening on host:port" line.
  int port() {
    char buf[512];
    while (std::fgets(buf, sizeof buf, out_)) {
      const std::string line(buf);
      if (line.find("listening on") != std::string::npos) {
        return std::stoi(line.substr(line.rfind(':') + 1));
      }
    }
    throw std::runtime_error("server exited before listening");
  }

 private:
  pid_t pid_ = -1;
  std::FILE* out_ = nullptr;
};

int cop_answer(const json& challenge, const std::string& password) {
  std::vector<int> digits(cop::kOrdering.size());
  for (const auto& cell : challenge.at("cells")) {
    digits[cop::kOrdering.find(cell.at("char").get<std::string>()[0])] = cell.at("digit");
  }
  return cop::legit_response(password, cop::DigitGrid(cop::Params{}, digits));
}

std::vector<std::string> read_lines(const std::filesystem::path& file) {
  std::ifstream in(file);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

Outcome services_e2e() {
  const auto dir = std::filesystem::temp_directory_path() / "hbat_acceptance_e2e";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto hc_dir = dir / "honeychecker";
  const auto auth_dir = dir / "auth";

  std::ofstream(dir / "honeychecker.json")
      << json{{"host", "127.0.0.1"}, {"honeychecker_port", 0}, {"data_dir", hc_dir.string()}};
  Child hc(HBAT_CLI, {"serve", "honeychecker", "--config", (dir / "honeychecker.json").string()});
  const int hc_port = hc.port();

  std::ofstream(dir / "auth.json") << json{{"host", "127.0.0.1"},
                                           {"auth_port", 0},
                                           {"honeychecker_port", hc_port},
                                           {"policy", "light"},
                                           {"admin_token", "acceptance"},
                                           {"data_dir", auth_dir.string()}};
  Child auth(HBAT_CLI, {"serve", "auth", "--config", (dir / "auth.json").string()});
  httplib::Client http("127.0.0.1", auth.port());
  http.set_read_timeout(10, 0);

  std::vector<std::string> steps;
  auto post = [&](const std::string& path, const json& body) {
    auto r = http.Post(path.c_str(), body.dump(), "application/json");
    if (!r) throw std::runtime_error("no reply from " + path);
    return r;
  };
  auto login = [&](const std::string& password) -> std::string {
    auto s = post("/session", {{"username", "alex"}});
    if (s->status != 200) return std::to_string(s->status);
    const auto body = json::parse(s->body);
    const auto id = body.at("session_id").get<std::string>();
    const int digit = cop_answer(body.at("challenge"), password);
    const auto v = post("/session/" + id + "/response", {{"response", std::to_string(digit)}});
    return json::parse(v->body).at("result").get<std::string>();
  };

  const auto reg = post("/register", {{"username", "alex"}, {"password", "A1B3"}, {"scheme", "cop"}});
  steps.push_back("register " + std::to_string(reg->status));
  const auto legit = login("A1B3");
  steps.push_back("login " + legit);

  // The attacker holds a stolen password file and picks a honeyword.
  const auto records = read_lines(auth_dir / "passwords.tsv");
  if (records.size() != 1) return {false, "expected one password record"};
  const auto [user, list] = services::parse_password_record(records[0]);
  std::string honeyword;
  for (const auto& e : list.entries)
    if (e != "A1B3") honeyword = e;
  const auto stolen = login(honeyword);
  steps.push_back("honeyword login " + stolen);

  const auto alarms = http.Get("/admin/alarms", {{"X-Admin-Token", "acceptance"}});
  const auto alarm_list = json::parse(alarms->body);
  const bool alarmed = alarm_list.size() == 1 && alarm_list[0]["username"] == "alex" &&
                       alarm_list[0]["policy_applied"] == "light";
  steps.push_back(std::string("alarm ") + (alarmed ? "recorded" : "missing"));
  const auto locked = login("A1B3");
  steps.push_back("login after alarm " + locked);
  const auto other = post("/register", {{"username", "sam"}, {"password", "QJw9"}, {"scheme", "cop"}});
  auto s = post("/session", {{"username", "sam"}});
  steps.push_back("other account session " + std::to_string(s->status));

  // Storage separation.
  bool auth_clean = true;
  for (const auto& line : read_lines(auth_dir / "passwords.tsv")) {
    const auto [u, l] = services::parse_password_record(line);
    auth_clean = auth_clean && std::count(line.begin(), line.end(), '\t') == 3 && l.k() == 5;
  }
  for (const auto& entry : std::filesystem::directory_iterator(auth_dir)) {
    auth_clean = auth_clean && entry.path().filename() != "honeychecker.tsv";
  }
  bool hc_clean = true;
  const auto hc_lines = read_lines(hc_dir / "honeychecker.tsv");
  for (const auto& line : hc_lines) {
    hc_clean = hc_clean && std::count(line.begin(), line.end(), '\t') == 1;
    for (const auto& e : list.entries) hc_clean = hc_clean && line.find(e) == std::string::npos;
  }
  hc_clean = hc_clean && hc_lines.size() == 2 && !std::filesystem::exists(hc_dir / "passwords.tsv");
  steps.push_back(std::string("auth storage without t: ") + (auth_clean ? "yes" : "no"));
  steps.push_back(std::string("honeychecker storage without sweetwords: ") +
                  (hc_clean ? "yes" : "no"));

  const bool ok = reg->status == 201 && legit == "accepted" && stolen == "denied" && alarmed &&
                  locked == "423" && other->status == 201 && s->status == 200 && auth_clean &&
                  hc_clean;
  std::string detail;
  for (const auto& st : steps) detail += (detail.empty() ? "" : "; ") + st;
  return {ok, detail};
}

}  // namespace

int main() {
  criterion("chc-expectations", chc_expectations);
  criterion("challenge-generation-iterations", generation_iterations);
  criterion("expected-triangle-area", expected_area);

  const std::vector<Scheme> schemes{Scheme::kS3pas, Scheme::kChc, Scheme::kPas, Scheme::kCop};
  std::vector<attacks::LoginSuiteResult> suites(schemes.size());
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    criterion("soundness-" + std::string(to_string(schemes[i])),
              [&] { return soundness(schemes[i], suites[i]); });
  }
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    criterion("detection-" + std::string(to_string(schemes[i])),
              [&] { return detection(schemes[i], suites[i]); });
  }

  criterion("cop-worked-example", cop_worked_example);
  criterion("dos-figure", dos_figure);
  criterion("typo-figures", typo_figures);
  criterion("msv-property", msv);
  criterion("bruteforce-observer", bruteforce);
  criterion("services-end-to-end", services_e2e);

  std::cout << (failures ? "FAILED " : "ALL PASSED ") << failures << " failing" << std::endl;
  return failures ? 1 : 0;
}
