#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hbat/core.hpp"

namespace hbat {

class NoRecord : public Error {
 public:
  explicit NoRecord(const std::string& user) : Error("no record: " + user) {}
};

enum class CheckResult { kOk, kAlarm };

/// The honeyChecker's only state: which index is the real password for each
/// user. It never sees sweetwords.
///
/// With a backing file, records are appended as `username<TAB>t` lines; a
/// re-SET of an existing user rewrites the file atomically. All operations
/// are serialized.
class HoneyCheckerStore {
 public:
  HoneyCheckerStore() = default;
  explicit HoneyCheckerStore(std::filesystem::path file);

  HoneyCheckerStore(const HoneyCheckerStore&) = delete;
  HoneyCheckerStore& operator=(const HoneyCheckerStore&) = delete;

  /// Registers or overwrites (username, t). t is 1-based.
  void set(const std::string& username, std::size_t t);

  /// kOk iff `submitted` equals the stored index. Throws NoRecord.
  CheckResult check(const std::string& username, std::size_t submitted) const;

  bool contains(const std::string& username) const;
  std::size_t size() const;

 private:
  void rewrite_locked() const;

  mutable std::mutex mu_;
  std::map<std::string, std::size_t> records_;
  std::optional<std::filesystem::path> file_;
};

/// Convenience for the check flow: throws NoRecord for unknown users.
CheckResult honeychecker_check(const HoneyCheckerStore& store, const std::string& username,
                               std::size_t submitted_index);

/// Usernames travel in a space-separated protocol and tab-separated files.
bool valid_username(std::string_view username);

/// Handles one line of the honeyChecker text protocol (without the newline):
///   SET <username> <t>    -> OK
///   CHECK <username> <j>  -> OK | ALARM | ERR NOUSER
/// Anything else yields ERR BADREQ.
std::string handle_honeychecker_line(HoneyCheckerStore& store, std::string_view line);

enum class BlockPolicy { kLight, kStrict };

std::string_view to_string(BlockPolicy p);
BlockPolicy parse_block_policy(std::string_view name);

struct BlockEffect {
  BlockPolicy policy = BlockPolicy::kLight;
  bool all_frozen = false;
  std::string blocked_user;
};

/// Account lockout state driven by honeyChecker alarms. Light policy blocks
/// only the offending account; strict policy freezes every account.
class AccountBlocker {
 public:
  AccountBlocker() = default;
  /// Persists `frozen` / `blocked<TAB>user` lines, rewritten atomically.
  explicit AccountBlocker(std::filesystem::path file);

  AccountBlocker(const AccountBlocker&) = delete;
  AccountBlocker& operator=(const AccountBlocker&) = delete;

  BlockEffect apply(BlockPolicy policy, const std::string& username);
  bool is_blocked(const std::string& username) const;
  bool frozen() const;
  std::vector<std::string> blocked_users() const;

 private:
  void persist_locked() const;

  mutable std::mutex mu_;
  bool frozen_ = false;
  std::set<std::string> blocked_;
  std::optional<std::filesystem::path> file_;
};

/// Writes `content` to `path` via a temporary file and rename.
void atomic_write(const std::filesystem::path& path, std::string_view content);

}  // namespace hbat
