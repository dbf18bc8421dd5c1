#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hbat/core.hpp"
#include "hbat/honeychecker.hpp"
#include "hbat/honeygen.hpp"

namespace httplib {
class Server;
}

namespace hbat::services {

/// Settings shared by both servers. Loaded from a JSON file:
///
///   {
///     "host": "127.0.0.1",
///     "auth_port": 8080,
///     "honeychecker_host": "127.0.0.1",
///     "honeychecker_port": 9090,
///     "honeychecker_timeout_ms": 2000,
///     "policy": "light",
///     "data_dir": "data",
///     "admin_token": "secret",
///     "seed": 42,
///     "k": {"s3pas": 6, "chc": 3, "pas": 4, "cop": 5}
///   }
///
/// Every key is optional. HBAT_AUTH_PORT and HBAT_HONEYCHECKER_PORT
/// override the ports.
struct Config {
  std::string host = "127.0.0.1";
  int auth_port = 8080;
  std::string honeychecker_host = "127.0.0.1";
  int honeychecker_port = 9090;
  int honeychecker_timeout_ms = 2000;
  BlockPolicy policy = BlockPolicy::kLight;
  std::filesystem::path data_dir = "data";
  std::string admin_token;
  std::optional<std::uint64_t> seed;
  SchemeParams scheme_params;
};

Config parse_config(std::string_view json_text);
Config load_config(const std::filesystem::path& file);
/// Applies HBAT_AUTH_PORT / HBAT_HONEYCHECKER_PORT when set.
void apply_env_overrides(Config& config);

/// Raised when the honeyChecker cannot be reached or answers unexpectedly.
class HoneyCheckerUnavailable : public Error {
 public:
  using Error::Error;
};

/// Speaks the line protocol, one connection per request.
class HoneyCheckerClient {
 public:
  HoneyCheckerClient(std::string host, int port,
                     std::chrono::milliseconds timeout = std::chrono::seconds(2));

  /// Sends one line, returns the reply without the newline.
  std::string request(std::string_view line) const;

  void set(const std::string& username, std::size_t t) const;
  /// Throws NoRecord for ERR NOUSER, HoneyCheckerUnavailable otherwise.
  CheckResult check(const std::string& username, std::size_t index) const;

 private:
  std::string host_;
  int port_;
  std::chrono::milliseconds timeout_;
};

/// TCP server for the honeyChecker line protocol, one thread per
/// connection. Alarms are appended to `alarm_log` when given.
class HoneyCheckerServer {
 public:
  HoneyCheckerServer(HoneyCheckerStore& store, std::string host, int port,
                     std::optional<std::filesystem::path> alarm_log = std::nullopt);
  ~HoneyCheckerServer();

  HoneyCheckerServer(const HoneyCheckerServer&) = delete;
  HoneyCheckerServer& operator=(const HoneyCheckerServer&) = delete;

  /// Binds and listens; returns the bound port (useful with port 0).
  int bind();
  /// Accept loop; returns after stop().
  void run();
  void stop();

 private:
  void serve_connection(int fd);

  HoneyCheckerStore& store_;
  std::string host_;
  int port_;
  std::optional<std::filesystem::path> alarm_log_;
  std::mutex log_mu_;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::mutex conn_mu_;
  std::condition_variable idle_;
  std::size_t active_ = 0;
  std::vector<int> open_fds_;
};

/// One line of the password file: `username<TAB>scheme<TAB>k<TAB>sw1|...|swk`.
std::string format_password_record(const std::string& username, const SweetwordList& list);
std::pair<std::string, SweetwordList> parse_password_record(std::string_view line);

/// The auth server's sweetword store. Never holds the real index.
class PasswordFile {
 public:
  explicit PasswordFile(std::filesystem::path file);

  /// False when the user exists already.
  bool add(const std::string& username, const SweetwordList& list);
  std::optional<SweetwordList> find(const std::string& username) const;

 private:
  mutable std::mutex mu_;
  std::filesystem::path file_;
  std::map<std::string, SweetwordList> records_;
};

struct AlarmRecord {
  std::string username;
  std::string time;  ///< UTC, ISO 8601
  BlockPolicy policy_applied = BlockPolicy::kLight;
};

/// HTTP/JSON front end:
///   POST /register              {username, password, scheme, k?}
///   POST /session               {username}
///   POST /session/{id}/response {response, round?}
///   GET  /admin/alarms          X-Admin-Token header
class AuthServer {
 public:
  explicit AuthServer(Config config);
  ~AuthServer();

  AuthServer(const AuthServer&) = delete;
  AuthServer& operator=(const AuthServer&) = delete;

  int bind();
  void run();
  void stop();

  std::vector<AlarmRecord> alarms() const;

 private:
  struct LoginState;

  void routes();
  std::string new_session_id();
  void record_alarm(const std::string& username);

  Config config_;
  HoneyCheckerClient checker_;
  PasswordFile passwords_;
  AccountBlocker blocker_;
  std::unique_ptr<httplib::Server> http_;
  int bound_port_ = -1;

  std::mutex rng_mu_;
  Rng rng_;

  std::mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<LoginState>> sessions_;

  mutable std::mutex alarms_mu_;
  std::vector<AlarmRecord> alarms_;
};

}  // namespace hbat::services
