#include "hbat/honeychecker.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace hbat {

namespace {

std::optional<std::size_t> parse_index(std::string_view s) {
  if (s.empty() || s.size() > 9) return std::nullopt;
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || value == 0) return std::nullopt;
  return value;
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const auto next = line.find(' ', pos);
    const auto end = next == std::string_view::npos ? line.size() : next;
    out.push_back(line.substr(pos, end - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

bool valid_username(std::string_view username) {
  if (username.empty() || username.size() > 64) return false;
  for (char c : username) {
    const auto u = static_cast<unsigned char>(c);
    if (u <= 0x20 || u == 0x7f || c == '|') return false;
  }
  return true;
}

HoneyCheckerStore::HoneyCheckerStore(std::filesystem::path file) : file_(std::move(file)) {
  std::ifstream in(*file_);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error("corrupt honeychecker store line: " + line);
    const auto t = parse_index(std::string_view(line).substr(tab + 1));
    if (!t) throw Error("corrupt honeychecker store line: " + line);
    records_[line.substr(0, tab)] = *t;
  }
}

void HoneyCheckerStore::set(const std::string& username, std::size_t t) {
  if (!valid_username(username)) throw Error("invalid username");
  if (t == 0) throw Error("index is 1-based");
  std::lock_guard lock(mu_);
  const bool overwrite = records_.contains(username);
  records_[username] = t;
  if (!file_) return;
  if (overwrite) {
    rewrite_locked();
  } else {
    std::ofstream out(*file_, std::ios::app);
    out << username << '\t' << t << '\n';
    out.flush();
    if (!out) throw Error("cannot append to honeychecker store");
  }
}

void HoneyCheckerStore::rewrite_locked() const {
  std::ostringstream os;
  for (const auto& [user, t] : records_) os << user << '\t' << t << '\n';
  atomic_write(*file_, os.str());
}

CheckResult HoneyCheckerStore::check(const std::string& username, std::size_t submitted) const {
  std::lock_guard lock(mu_);
  const auto it = records_.find(username);
  if (it == records_.end()) throw NoRecord(username);
  return it->second == submitted ? CheckResult::kOk : CheckResult::kAlarm;
}

bool HoneyCheckerStore::contains(const std::string& username) const {
  std::lock_guard lock(mu_);
  return records_.contains(username);
}

std::size_t HoneyCheckerStore::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

CheckResult honeychecker_check(const HoneyCheckerStore& store, const std::string& username,
                               std::size_t submitted_index) {
  return store.check(username, submitted_index);
}

std::string handle_honeychecker_line(HoneyCheckerStore& store, std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto parts = split_spaces(line);
  if (parts.size() != 3 || !valid_username(parts[1])) return "ERR BADREQ";
  const auto index = parse_index(parts[2]);
  if (!index) return "ERR BADREQ";
  const std::string user(parts[1]);
  if (parts[0] == "SET") {
    store.set(user, *index);
    return "OK";
  }
  if (parts[0] == "CHECK") {
    try {
      return store.check(user, *index) == CheckResult::kOk ? "OK" : "ALARM";
    } catch (const NoRecord&) {
      return "ERR NOUSER";
    }
  }
  return "ERR BADREQ";
}

std::string_view to_string(BlockPolicy p) {
  return p == BlockPolicy::kLight ? "light" : "strict";
}

BlockPolicy parse_block_policy(std::string_view name) {
  if (name == "light") return BlockPolicy::kLight;
  if (name == "strict") return BlockPolicy::kStrict;
  throw Error("unknown block policy: " + std::string(name));
}

AccountBlocker::AccountBlocker(std::filesystem::path file) : file_(std::move(file)) {
  std::ifstream in(*file_);
  std::string line;
  while (std::getline(in, line)) {
    if (line == "frozen") {
      frozen_ = true;
    } else if (line.starts_with("blocked\t")) {
      blocked_.insert(line.substr(8));
    }
  }
}

BlockEffect AccountBlocker::apply(BlockPolicy policy, const std::string& username) {
  std::lock_guard lock(mu_);
  BlockEffect effect{policy, false, username};
  if (policy == BlockPolicy::kStrict) {
    frozen_ = true;
    effect.all_frozen = true;
  }
  blocked_.insert(username);
  if (file_) persist_locked();
  return effect;
}

void AccountBlocker::persist_locked() const {
  std::ostringstream os;
  if (frozen_) os << "frozen\n";
  for (const auto& user : blocked_) os << "blocked\t" << user << '\n';
  atomic_write(*file_, os.str());
}

bool AccountBlocker::is_blocked(const std::string& username) const {
  std::lock_guard lock(mu_);
  return frozen_ || blocked_.contains(username);
}

bool AccountBlocker::frozen() const {
  std::lock_guard lock(mu_);
  return frozen_;
}

std::vector<std::string> AccountBlocker::blocked_users() const {
  std::lock_guard lock(mu_);
  return {blocked_.begin(), blocked_.end()};
}

}  // namespace hbat
