#include "hbat/services.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "hbat/session.hpp"

namespace hbat::services {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxLine = 4096;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int parse_port(std::string_view text, const char* what) {
  int port = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), port);
  if (ec != std::errc{} || ptr != text.data() + text.size() || port < 0 || port > 65535) {
    throw Error(std::string("invalid ") + what + ": " + std::string(text));
  }
  return port;
}

void send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw HoneyCheckerUnavailable(std::string("send failed: ") + std::strerror(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

void set_timeouts(int fd, std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

/// Connects with a bounded wait; returns -1 on failure.
int connect_with_timeout(const std::string& host, int port, std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0) return -1;
  int fd = -1;
  for (auto* ai = res; ai && fd < 0; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    const int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
    if (rc < 0 && errno == EINPROGRESS) {
      pollfd p{fd, POLLOUT, 0};
      rc = ::poll(&p, 1, static_cast<int>(timeout.count())) == 1 ? 0 : -1;
      if (rc == 0) {
        int err = 0;
        socklen_t len = sizeof err;
        ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
        if (err != 0) rc = -1;
      }
    }
    if (rc < 0) {
      ::close(fd);
      fd = -1;
      continue;
    }
    ::fcntl(fd, F_SETFL, flags);
    set_timeouts(fd, timeout);
  }
  ::freeaddrinfo(res);
  return fd;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = text.find(sep, pos);
    out.emplace_back(text.substr(pos, next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace

Config parse_config(std::string_view json_text) {
  Config c;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error("config must be a JSON object");
  try {
    c.host = j.value("host", c.host);
    c.auth_port = j.value("auth_port", c.auth_port);
    c.honeychecker_host = j.value("honeychecker_host", c.honeychecker_host);
    c.honeychecker_port = j.value("honeychecker_port", c.honeychecker_port);
    c.honeychecker_timeout_ms = j.value("honeychecker_timeout_ms", c.honeychecker_timeout_ms);
    c.policy = parse_block_policy(j.value("policy", std::string(to_string(c.policy))));
    c.data_dir = j.value("data_dir", c.data_dir.string());
    c.admin_token = j.value("admin_token", c.admin_token);
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("k")) {
      const auto& k = j.at("k");
      c.scheme_params.s3pas.k = k.value("s3pas", c.scheme_params.s3pas.k);
      c.scheme_params.chc.k = k.value("chc", c.scheme_params.chc.k);
      c.scheme_params.pas.k = k.value("pas", c.scheme_params.pas.k);
      c.scheme_params.cop.k = k.value("cop", c.scheme_params.cop.k);
    }
  } catch (const json::exception& e) {
    throw Error(std::string("bad config value: ") + e.what());
  }
  return c;
}

Config load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot read config: " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_env_overrides(Config& config) {
  if (const char* v = std::getenv("HBAT_AUTH_PORT")) {
    config.auth_port = parse_port(v, "HBAT_AUTH_PORT");
  }
  if (const char* v = std::getenv("HBAT_HONEYCHECKER_PORT")) {
    config.honeychecker_port = parse_port(v, "HBAT_HONEYCHECKER_PORT");
  }
}

// --- honeyChecker client

HoneyCheckerClient::HoneyCheckerClient(std::string host, int port,
                                       std::chrono::milliseconds timeout)
    : host_(std::move(host)), port_(port), timeout_(timeout) {}

std::string HoneyCheckerClient::request(std::string_view line) const {
  const int fd = connect_with_timeout(host_, port_, timeout_);
  if (fd < 0) throw HoneyCheckerUnavailable("honeyChecker unreachable");
  std::string reply;
  try {
    send_all(fd, std::string(line) + "\n");
    char buf[256];
    while (reply.find('\n') == std::string::npos) {
      const auto n = ::recv(fd, buf, sizeof buf, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw HoneyCheckerUnavailable("honeyChecker closed or timed out");
      reply.append(buf, static_cast<std::size_t>(n));
      if (reply.size() > kMaxLine) throw HoneyCheckerUnavailable("oversized reply");
    }
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
  reply.resize(reply.find('\n'));
  return reply;
}

void HoneyCheckerClient::set(const std::string& username, std::size_t t) const {
  const auto reply = request("SET " + username + " " + std::to_string(t));
  if (reply != "OK") throw HoneyCheckerUnavailable("unexpected SET reply: " + reply);
}

CheckResult HoneyCheckerClient::check(const std::string& username, std::size_t index) const {
  const auto reply = request("CHECK " + username + " " + std::to_string(index));
  if (reply == "OK") return CheckResult::kOk;
  if (reply == "ALARM") return CheckResult::kAlarm;
  if (reply == "ERR NOUSER") throw NoRecord(username);
  throw HoneyCheckerUnavailable("unexpected CHECK reply: " + reply);
}

// --- honeyChecker server

HoneyCheckerServer::HoneyCheckerServer(HoneyCheckerStore& store, std::string host, int port,
                                       std::optional<std::filesystem::path> alarm_log)
    : store_(store), host_(std::move(host)), port_(port), alarm_log_(std::move(alarm_log)) {}

HoneyCheckerServer::~HoneyCheckerServer() {
  stop();
  std::unique_lock lock(conn_mu_);
  idle_.wait(lock, [this] { return active_ == 0; });
}

int HoneyCheckerServer::bind() {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port_));
  if (::inet_pton(AF_INET, host_.c_str(), &addr.sin_addr) != 1) {
    throw Error("honeyChecker host must be an IPv4 address: " + host_);
  }
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 ||
      ::listen(listen_fd_, 64) < 0) {
    const std::string msg = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error("cannot listen on port " + std::to_string(port_) + ": " + msg);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  return port_;
}

void HoneyCheckerServer::run() {
  if (listen_fd_ < 0) bind();
  while (!stopping_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      if (stopping_) break;
      if (errno == EMFILE || errno == ENFILE) {
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
        continue;
      }
      break;
    }
    std::lock_guard lock(conn_mu_);
    open_fds_.push_back(fd);
    ++active_;
    std::thread([this, fd] { serve_connection(fd); }).detach();
  }
}

void HoneyCheckerServer::stop() {
  if (stopping_.exchange(true)) return;
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  std::lock_guard lock(conn_mu_);
  for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
}

void HoneyCheckerServer::serve_connection(int fd) {
  std::string buffer;
  char chunk[512];
  bool open = true;
  while (open) {
    const auto n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl;
    while ((nl = buffer.find('\n')) != std::string::npos) {
      const std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      const auto reply = handle_honeychecker_line(store_, line);
      if (reply == "ALARM") {
        std::cerr << utc_now() << " ALARM " << line << std::endl;
        if (alarm_log_) {
          std::lock_guard lock(log_mu_);
          std::ofstream(*alarm_log_, std::ios::app) << utc_now() << '\t' << line << '\n';
        }
      }
      try {
        send_all(fd, reply + "\n");
      } catch (const Error&) {
        open = false;
        break;
      }
    }
    if (buffer.size() > kMaxLine) {
      try {
        send_all(fd, "ERR BADREQ\n");
      } catch (const Error&) {
      }
      break;
    }
  }
  std::lock_guard lock(conn_mu_);
  std::erase(open_fds_, fd);
  ::close(fd);
  if (--active_ == 0) idle_.notify_all();
}

// --- password file

std::string format_password_record(const std::string& username, const SweetwordList& list) {
  std::string out = username + '\t' + std::string(to_string(list.scheme)) + '\t' +
                    std::to_string(list.k()) + '\t';
  for (std::size_t i = 0; i < list.k(); ++i) {
    if (i) out += '|';
    out += list.entries[i];
  }
  return out;
}

std::pair<std::string, SweetwordList> parse_password_record(std::string_view line) {
  const auto fields = split(line, '\t');
  if (fields.size() != 4) throw Error("malformed password record");
  SweetwordList list;
  list.scheme = parse_scheme(fields[1]);
  list.entries = split(fields[3], '|');
  std::size_t k = 0;
  auto [ptr, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), k);
  if (ec != std::errc{} || ptr != fields[2].data() + fields[2].size() || k != list.k()) {
    throw Error("password record k does not match its sweetwords");
  }
  return {fields[0], std::move(list)};
}

PasswordFile::PasswordFile(std::filesystem::path file) : file_(std::move(file)) {
  std::ifstream in(file_);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto [user, list] = parse_password_record(line);
    records_[user] = std::move(list);
  }
}

bool PasswordFile::add(const std::string& username, const SweetwordList& list) {
  std::lock_guard lock(mu_);
  if (records_.count(username)) return false;
  if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
  std::ofstream out(file_, std::ios::app);
  out << format_password_record(username, list) << '\n';
  out.flush();
  if (!out) throw Error("cannot write password file");
  records_[username] = list;
  return true;
}

std::optional<SweetwordList> PasswordFile::find(const std::string& username) const {
  std::lock_guard lock(mu_);
  auto it = records_.find(username);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

// --- auth server

struct AuthServer::LoginState {
  std::mutex mu;
  std::string username;
  std::unique_ptr<SchemeSession> session;
  int next_round = 1;
  std::vector<IndexSet> per_round;
  bool done = false;
};

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void error_reply(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, {{"error", message}});
}

std::filesystem::path ensure_dir(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

AuthServer::AuthServer(Config config)
    : config_(std::move(config)),
      checker_(config_.honeychecker_host, config_.honeychecker_port,
               std::chrono::milliseconds(config_.honeychecker_timeout_ms)),
      passwords_(ensure_dir(config_.data_dir) / "passwords.tsv"),
      blocker_(config_.data_dir / "blocked.tsv"),
      http_(std::make_unique<httplib::Server>()),
      rng_(config_.seed ? *config_.seed : std::random_device{}()) {
  routes();
}

AuthServer::~AuthServer() { stop(); }

int AuthServer::bind() {
  if (config_.auth_port == 0) {
    bound_port_ = http_->bind_to_any_port(config_.host);
  } else if (http_->bind_to_port(config_.host, config_.auth_port)) {
    bound_port_ = config_.auth_port;
  }
  if (bound_port_ < 0) throw Error("cannot listen on port " + std::to_string(config_.auth_port));
  return bound_port_;
}

void AuthServer::run() {
  if (bound_port_ < 0) bind();
  http_->listen_after_bind();
}

void AuthServer::stop() {
  if (http_) http_->stop();
}

std::vector<AlarmRecord> AuthServer::alarms() const {
  std::lock_guard lock(alarms_mu_);
  return alarms_;
}

std::string AuthServer::new_session_id() {
  std::random_device rd;
  std::string id;
  static constexpr char kHex[] = "0123456789abcdef";
  for (int i = 0; i < 32; ++i) id.push_back(kHex[rd() & 15]);
  return id;
}

void AuthServer::record_alarm(const std::string& username) {
  const auto effect = blocker_.apply(config_.policy, username);
  AlarmRecord rec{username, utc_now(), effect.policy};
  std::lock_guard lock(alarms_mu_);
  std::ofstream(config_.data_dir / "alarms.tsv", std::ios::app)
      << rec.username << '\t' << rec.time << '\t' << to_string(rec.policy_applied) << '\n';
  alarms_.push_back(std::move(rec));
}

void AuthServer::routes() {
  auto register_mu = std::make_shared<std::mutex>();

  http_->Post("/register", [this, register_mu](const httplib::Request& req,
                                               httplib::Response& res) {
    std::string username;
    std::string password;
    Scheme scheme;
    std::size_t k;
    try {
      const auto body = json::parse(req.body);
      username = body.at("username").get<std::string>();
      password = body.at("password").get<std::string>();
      scheme = parse_scheme(body.at("scheme").get<std::string>());
      k = body.value("k", default_k(scheme, config_.scheme_params));
    } catch (const std::exception& e) {
      return error_reply(res, 400, e.what());
    }
    if (!valid_username(username)) return error_reply(res, 400, "invalid username");

    std::lock_guard lock(*register_mu);
    if (passwords_.find(username)) return error_reply(res, 409, "user exists");
    honeygen::Generated g;
    try {
      std::lock_guard rng_lock(rng_mu_);
      g = honeygen::generate_sweetwords(scheme, password, k, rng_, config_.scheme_params);
    } catch (const Error& e) {
      return error_reply(res, 400, e.what());
    }
    try {
      checker_.set(username, g.t);
    } catch (const Error&) {
      return error_reply(res, 503, "honeyChecker unavailable");
    }
    if (!passwords_.add(username, g.list)) return error_reply(res, 409, "user exists");
    reply(res, 201, {{"k", g.list.k()}});
  });

  http_->Post("/session", [this](const httplib::Request& req, httplib::Response& res) {
    std::string username;
    try {
      username = json::parse(req.body).at("username").get<std::string>();
    } catch (const std::exception& e) {
      return error_reply(res, 400, e.what());
    }
    const auto list = passwords_.find(username);
    if (!list) return error_reply(res, 404, "unknown user");
    if (blocker_.is_blocked(username)) return error_reply(res, 423, "account locked");

    auto state = std::make_shared<LoginState>();
    state->username = username;
    std::uint64_t seed;
    {
      std::lock_guard lock(rng_mu_);
      seed = rng_();
    }
    Rng rng(seed);
    try {
      state->session = start_session(*list, config_.scheme_params, rng);
    } catch (const Error& e) {
      return error_reply(res, 503, e.what());
    }
    const auto id = new_session_id();
    const auto payload = json::parse(state->session->round_payload(1, id));
    const int rounds = state->session->rounds();
    {
      std::lock_guard lock(sessions_mu_);
      sessions_[id] = state;
    }
    reply(res, 200, {{"session_id", id}, {"round", 1}, {"rounds", rounds}, {"challenge", payload}});
  });

  http_->Post(R"(/session/([0-9a-f]+)/response)", [this](const httplib::Request& req,
                                                         httplib::Response& res) {
    const std::string id = req.matches[1];
    std::shared_ptr<LoginState> state;
    {
      std::lock_guard lock(sessions_mu_);
      auto it = sessions_.find(id);
      if (it == sessions_.end()) return error_reply(res, 404, "unknown session");
      state = it->second;
    }
    Response response;
    std::optional<int> round;
    try {
      const auto body = json::parse(req.body);
      const auto& r = body.at("response");
      response = r.is_string() ? r.get<std::string>() : r.dump();
      if (body.contains("round")) round = body.at("round").get<int>();
    } catch (const std::exception& e) {
      return error_reply(res, 400, e.what());
    }

    std::lock_guard lock(state->mu);
    if (state->done) return error_reply(res, 409, "session complete");
    if (round && *round != state->next_round) return error_reply(res, 409, "round out of order");
    const int r = state->next_round++;
    state->per_round.push_back(state->session->candidates(r, response));
    if (r < state->session->rounds()) {
      const auto payload = json::parse(state->session->round_payload(r + 1, id));
      return reply(res, 200, {{"round", r + 1}, {"challenge", payload}});
    }

    state->done = true;
    bool accepted = false;
    try {
      if (const auto index = identify_sweetword(state->per_round)) {
        if (checker_.check(state->username, *index) == CheckResult::kOk) {
          accepted = !blocker_.is_blocked(state->username);
        } else {
          record_alarm(state->username);
        }
      }
    } catch (const AmbiguousIdentification& e) {
      std::cerr << utc_now() << " " << e.what() << " user=" << state->username << std::endl;
    } catch (const Error& e) {
      std::cerr << utc_now() << " login denied, honeyChecker: " << e.what() << std::endl;
    }
    {
      std::lock_guard sl(sessions_mu_);
      sessions_.erase(id);
    }
    reply(res, 200, {{"result", accepted ? "accepted" : "denied"}});
  });

  http_->Get("/admin/alarms", [this](const httplib::Request& req, httplib::Response& res) {
    if (config_.admin_token.empty() || req.get_header_value("X-Admin-Token") != config_.admin_token) {
      return error_reply(res, 401, "admin token required");
    }
    json out = json::array();
    for (const auto& a : alarms()) {
      out.push_back({{"username", a.username},
                     {"time", a.time},
                     {"policy_applied", std::string(to_string(a.policy_applied))}});
    }
    reply(res, 200, out);
  });
}

}  // namespace hbat::services
