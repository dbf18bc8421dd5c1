#include "hbat/honeygen.hpp"

#include <algorithm>
#include <array>
#include <iterator>
#include <map>
#include <set>

namespace hbat {

std::size_t default_k(Scheme scheme, const SchemeParams& params) {
  switch (scheme) {
    case Scheme::kS3pas: return params.s3pas.k;
    case Scheme::kChc: return params.chc.k;
    case Scheme::kPas: return params.pas.k;
    case Scheme::kCop: return params.cop.k;
  }
  throw Error("unknown scheme");
}

std::size_t max_k(Scheme scheme, const SchemeParams& params) {
  switch (scheme) {
    case Scheme::kS3pas: return static_cast<std::size_t>(params.s3pas.cells());
    case Scheme::kChc: return static_cast<std::size_t>(params.chc.displayed);
    case Scheme::kPas: return pas::kResponseOptions.size();
    case Scheme::kCop: return 10;
  }
  throw Error("unknown scheme");
}

}  // namespace hbat

namespace hbat::honeygen {

namespace {

const Error kTooLarge("k too large for scheme");

std::size_t class_index(CharClass c) { return static_cast<std::size_t>(c); }

void validate_string(std::string_view password, std::string_view alphabet, int length,
                     bool distinct) {
  if (static_cast<int>(password.size()) != length) {
    throw Error("password must have " + std::to_string(length) + " characters");
  }
  for (char c : password) {
    if (alphabet.find(c) == std::string_view::npos) {
      throw Error(std::string("character not allowed: ") + c);
    }
  }
  if (distinct) {
    std::string sorted(password);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw Error("password characters must be distinct");
    }
  }
}

/// Class-preserving honeywords sharing no character with each other or
/// with the password.
std::vector<std::string> string_honeywords(std::string_view password, std::string_view alphabet,
                                           std::size_t count, Rng& rng) {
  std::array<std::vector<char>, 4> pools;
  std::set<char> used(password.begin(), password.end());
  for (char c : alphabet) {
    if (!used.count(c)) pools[class_index(char_class(c))].push_back(c);
  }
  std::size_t available = 0;
  for (const auto& pool : pools) available += pool.size();
  if (count * password.size() > available) throw kTooLarge;
  for (auto& pool : pools) std::shuffle(pool.begin(), pool.end(), rng);

  std::vector<std::string> out;
  for (std::size_t h = 0; h < count; ++h) {
    std::string word;
    for (char c : password) {
      auto* pool = &pools[class_index(char_class(c))];
      if (pool->empty()) {
        // Class exhausted: borrow from the fullest remaining class.
        pool = &*std::max_element(pools.begin(), pools.end(), [](const auto& a, const auto& b) {
          return a.size() < b.size();
        });
      }
      word.push_back(pool->back());
      pool->pop_back();
    }
    out.push_back(std::move(word));
  }
  return out;
}

std::vector<std::string> chc_honeywords(const chc::IconSet& password, const chc::Params& params,
                                        std::size_t count, Rng& rng) {
  std::vector<int> free;
  for (int id = 0; id < params.total_icons; ++id) {
    if (!std::binary_search(password.begin(), password.end(), id)) free.push_back(id);
  }
  if (count * password.size() > free.size()) throw kTooLarge;
  std::shuffle(free.begin(), free.end(), rng);
  std::vector<std::string> out;
  auto it = free.begin();
  for (std::size_t h = 0; h < count; ++h) {
    chc::IconSet set(it, it + static_cast<std::ptrdiff_t>(password.size()));
    it += static_cast<std::ptrdiff_t>(password.size());
    std::sort(set.begin(), set.end());
    out.push_back(chc::format_icon_set(set));
  }
  return out;
}

pas::Predicate random_predicate(Rng& rng) {
  std::uniform_int_distribution<int> cell(1, pas::kGrid);
  std::uniform_int_distribution<int> letter(0, 25);
  return {cell(rng), cell(rng), static_cast<char>('A' + letter(rng))};
}

std::vector<std::string> pas_honeywords(const pas::PredicatePair& password, std::size_t count,
                                        Rng& rng) {
  std::set<pas::Predicate> used(password.begin(), password.end());
  std::vector<std::string> out;
  for (std::size_t h = 0; h < count; ++h) {
    pas::PredicatePair pair;
    for (std::size_t i = 0; i < 2; ++i) {
      const auto& orig = password[i];
      pas::Predicate p;
      do {
        p = random_predicate(rng);
      } while ((p.row == orig.row && p.col == orig.col) || p.letter == orig.letter ||
               used.count(p));
      used.insert(p);
      pair[i] = p;
    }
    out.push_back(pas::format_pair(pair));
  }
  return out;
}

std::vector<std::string> honeywords(Scheme scheme, std::string_view password, std::size_t count,
                                    Rng& rng, const SchemeParams& params) {
  switch (scheme) {
    case Scheme::kS3pas:
      return string_honeywords(password, params.s3pas.alphabet, count, rng);
    case Scheme::kCop:
      return string_honeywords(password, params.cop.alphabet, count, rng);
    case Scheme::kChc:
      return chc_honeywords(chc::parse_icon_set(password), params.chc, count, rng);
    case Scheme::kPas:
      return pas_honeywords(pas::parse_pair(password), count, rng);
  }
  throw Error("unknown scheme");
}

void s3pas_violations(const SweetwordList& list, const SchemeParams& params,
                      std::vector<std::string>& out) {
  const auto& p = params.s3pas;
  for (const auto& e : list.entries) {
    try {
      validate_string(e, p.alphabet, p.password_length, false);
    } catch (const Error& err) {
      out.push_back("sweetword " + e + ": " + err.what());
      return;
    }
  }
  if (!s3pas::separable_rounds(list.entries, p).empty()) return;
  for (int r = 1; r <= p.password_length; ++r) {
    std::vector<std::string> ppis;
    for (const auto& e : list.entries) ppis.push_back(s3pas::round_ppi(e, r));
    for (std::size_t i = 0; i < ppis.size(); ++i) {
      for (std::size_t j = i + 1; j < ppis.size(); ++j) {
        if (ppis[i].find_first_of(ppis[j]) != std::string::npos) {
          out.push_back("round " + std::to_string(r) + ": PPIs " + ppis[i] + " and " + ppis[j] +
                        " share a character");
        }
      }
    }
  }
  out.push_back("no round can separate the sweetwords");
}

void cop_violations(const SweetwordList& list, const SchemeParams& params,
                    std::vector<std::string>& out) {
  const auto& p = params.cop;
  for (const auto& e : list.entries) {
    try {
      validate_string(e, p.alphabet, p.password_length, true);
    } catch (const Error& err) {
      out.push_back("sweetword " + e + ": " + err.what());
      return;
    }
  }
  for (std::size_t i = 0; i < list.k(); ++i) {
    for (std::size_t j = i + 1; j < list.k(); ++j) {
      if (list.entries[i].find_first_of(list.entries[j]) != std::string::npos) {
        out.push_back("sweetwords " + list.entries[i] + " and " + list.entries[j] +
                      " share a character");
      }
    }
  }
  const auto n = static_cast<std::size_t>(p.cells());
  if (list.k() * static_cast<std::size_t>(p.password_length) > n - list.k()) {
    out.push_back("not enough free cells for response cells");
  }
}

void chc_violations(const SweetwordList& list, const SchemeParams& params,
                    std::vector<std::string>& out) {
  std::vector<chc::IconSet> sets;
  for (const auto& e : list.entries) {
    try {
      validate_password(Scheme::kChc, e, params);
      sets.push_back(chc::parse_icon_set(e));
    } catch (const Error& err) {
      out.push_back("sweetword " + e + ": " + err.what());
      return;
    }
  }
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      std::vector<int> common;
      std::set_intersection(sets[i].begin(), sets[i].end(), sets[j].begin(), sets[j].end(),
                            std::back_inserter(common));
      if (!common.empty()) {
        out.push_back("icon sets " + list.entries[i] + " and " + list.entries[j] + " overlap");
      }
    }
  }
  try {
    chc::validate(params.chc, list.k());
  } catch (const Error& err) {
    out.push_back(err.what());
  }
}

void pas_violations(const SweetwordList& list, std::vector<std::string>& out) {
  std::map<pas::Predicate, std::size_t> seen;
  for (std::size_t i = 0; i < list.k(); ++i) {
    pas::PredicatePair pair;
    try {
      pair = pas::parse_pair(list.entries[i]);
    } catch (const Error& err) {
      out.push_back("sweetword " + list.entries[i] + ": " + err.what());
      return;
    }
    for (const auto& p : pair) {
      auto [it, inserted] = seen.emplace(p, i);
      if (!inserted) {
        out.push_back("predicate " + pas::format_predicate(p) + " repeated in " +
                      list.entries[it->second] + " and " + list.entries[i]);
      }
    }
  }
}

}  // namespace

CharClass char_class(char c) {
  if (c >= 'A' && c <= 'Z') return CharClass::kUpper;
  if (c >= 'a' && c <= 'z') return CharClass::kLower;
  if (c >= '0' && c <= '9') return CharClass::kDigit;
  return CharClass::kSymbol;
}

void validate_password(Scheme scheme, std::string_view password, const SchemeParams& params) {
  switch (scheme) {
    case Scheme::kS3pas:
      s3pas::validate(params.s3pas);
      validate_string(password, params.s3pas.alphabet, params.s3pas.password_length, false);
      return;
    case Scheme::kCop:
      cop::validate(params.cop);
      validate_string(password, params.cop.alphabet, params.cop.password_length, true);
      return;
    case Scheme::kChc: {
      const auto set = chc::parse_icon_set(password);
      if (static_cast<int>(set.size()) != params.chc.pass_icons) {
        throw Error("icon set must have " + std::to_string(params.chc.pass_icons) + " icons");
      }
      if (set.back() >= params.chc.total_icons) throw Error("icon id out of range");
      return;
    }
    case Scheme::kPas: {
      const auto pair = pas::parse_pair(password);
      if (pair[0] == pair[1]) throw Error("predicates must differ");
      return;
    }
  }
}

Generated generate_sweetwords(Scheme scheme, std::string_view password, std::size_t k, Rng& rng,
                              const SchemeParams& params, std::size_t max_attempts) {
  if (k < 2) throw Error("k must be at least 2");
  if (k > max_k(scheme, params)) throw kTooLarge;
  validate_password(scheme, password, params);
  if (scheme == Scheme::kChc) {
    try {
      chc::validate(params.chc, k);
    } catch (const Error&) {
      throw kTooLarge;
    }
  }

  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    auto words = honeywords(scheme, password, k - 1, rng, params);
    const auto t = std::uniform_int_distribution<std::size_t>(1, k)(rng);
    Generated g;
    g.t = t;
    g.list.scheme = scheme;
    g.list.entries = std::move(words);
    const std::string original = scheme == Scheme::kChc
                                     ? chc::format_icon_set(chc::parse_icon_set(password))
                                     : std::string(password);
    g.list.entries.insert(g.list.entries.begin() + static_cast<std::ptrdiff_t>(t - 1), original);
    if (validate_sweetword_set(g.list, params).empty()) return g;
  }
  throw kTooLarge;
}

std::vector<std::string> validate_sweetword_set(const SweetwordList& list,
                                                const SchemeParams& params) {
  std::vector<std::string> out;
  if (list.k() < 2) out.push_back("k must be at least 2");
  if (list.k() > max_k(list.scheme, params)) {
    out.push_back("k exceeds the " + std::to_string(max_k(list.scheme, params)) +
                  " response elements");
  }
  std::vector<std::string> sorted = list.entries;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    out.push_back("duplicate sweetwords");
  }
  switch (list.scheme) {
    case Scheme::kS3pas: s3pas_violations(list, params, out); break;
    case Scheme::kChc: chc_violations(list, params, out); break;
    case Scheme::kPas: pas_violations(list, out); break;
    case Scheme::kCop: cop_violations(list, params, out); break;
  }
  return out;
}

std::string random_password(Scheme scheme, Rng& rng, const SchemeParams& params) {
  auto distinct_string = [&rng](std::string alphabet, int length) {
    std::shuffle(alphabet.begin(), alphabet.end(), rng);
    return alphabet.substr(0, static_cast<std::size_t>(length));
  };
  switch (scheme) {
    case Scheme::kS3pas:
      return distinct_string(params.s3pas.alphabet, params.s3pas.password_length);
    case Scheme::kCop:
      return distinct_string(params.cop.alphabet, params.cop.password_length);
    case Scheme::kChc: {
      std::vector<int> ids(static_cast<std::size_t>(params.chc.total_icons));
      for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
      std::shuffle(ids.begin(), ids.end(), rng);
      chc::IconSet set(ids.begin(), ids.begin() + params.chc.pass_icons);
      std::sort(set.begin(), set.end());
      return chc::format_icon_set(set);
    }
    case Scheme::kPas: {
      pas::PredicatePair pair{random_predicate(rng), random_predicate(rng)};
      while (pair[1] == pair[0]) pair[1] = random_predicate(rng);
      return pas::format_pair(pair);
    }
  }
  throw Error("unknown scheme");
}

}  // namespace hbat::honeygen
