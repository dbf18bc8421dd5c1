#include "hbat/pas.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

namespace hbat::pas {

namespace {

std::size_t block_of(const Predicate& p) {
  return static_cast<std::size_t>((p.row - 1) * kGrid + (p.col - 1));
}

std::size_t letter_of(const Predicate& p) { return static_cast<std::size_t>(p.letter - 'A'); }

boost::multiprecision::cpp_int binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  boost::multiprecision::cpp_int result = 1;
  for (unsigned i = 1; i <= k; ++i) {
    result *= n - k + i;
    result /= i;
  }
  return result;
}

}  // namespace

Predicate parse_predicate(std::string_view text) {
  if (text.size() != 3 || text[0] < '1' || text[0] > '5' || text[1] < '1' || text[1] > '5' ||
      text[2] < 'A' || text[2] > 'Z') {
    throw Error("malformed predicate: " + std::string(text));
  }
  return {text[0] - '0', text[1] - '0', text[2]};
}

std::string format_predicate(const Predicate& p) {
  return {static_cast<char>('0' + p.row), static_cast<char>('0' + p.col), p.letter};
}

PredicatePair parse_pair(std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) throw Error("malformed predicate pair: " + std::string(text));
  return {parse_predicate(text.substr(0, comma)), parse_predicate(text.substr(comma + 1))};
}

std::string format_pair(const PredicatePair& pair) {
  return format_predicate(pair[0]) + "," + format_predicate(pair[1]);
}

bool Table::has(const Predicate& p) const { return blocks[block_of(p)].test(letter_of(p)); }

std::string Table::letters(int row, int col) const {
  std::string out;
  const auto& block = blocks[static_cast<std::size_t>((row - 1) * kGrid + (col - 1))];
  for (std::size_t i = 0; i < 26; ++i) {
    if (block.test(i)) out.push_back(static_cast<char>('A' + i));
  }
  return out;
}

int sequence_code(const AnswerSequence& seq) {
  return (seq[0] ? 8 : 0) | (seq[1] ? 4 : 0) | (seq[2] ? 2 : 0) | (seq[3] ? 1 : 0);
}

AnswerSequence sequence_from_code(int code) {
  return {(code & 8) != 0, (code & 4) != 0, (code & 2) != 0, (code & 1) != 0};
}

ResponseTable ResponseTable::standard() {
  // Rows: first predicate's answers NN, NY, YN, YY; columns likewise for
  // the second predicate.
  constexpr std::string_view kSquare = "PQRS" "QSPR" "SRQP" "RPSQ";
  ResponseTable rt{};
  std::copy(kSquare.begin(), kSquare.end(), rt.element.begin());
  return rt;
}

bool ResponseTable::well_formed() const {
  for (char e : kResponseOptions) {
    if (std::count(element.begin(), element.end(), e) != 4) return false;
  }
  return true;
}

std::vector<AnswerSequence> ResponseTable::sequences_for(char e) const {
  std::vector<AnswerSequence> out;
  for (int code = 0; code < 16; ++code) {
    if (element[static_cast<std::size_t>(code)] == e) out.push_back(sequence_from_code(code));
  }
  return out;
}

AnswerSequence answer_sequence(const Predicate& first, const Predicate& second,
                               const Tables& tables) {
  return {tables.first.has(first), tables.second.has(first), tables.first.has(second),
          tables.second.has(second)};
}

char response_for(const AnswerSequence& seq, const ResponseTable& rt) {
  return rt.element[static_cast<std::size_t>(sequence_code(seq))];
}

Tables random_tables(Rng& rng) {
  Tables tables;
  std::array<int, 26> letters{};
  std::iota(letters.begin(), letters.end(), 0);
  for (Table* table : {&tables.first, &tables.second}) {
    for (auto& block : table->blocks) {
      std::shuffle(letters.begin(), letters.end(), rng);
      for (int i = 0; i < kLettersPerBlock; ++i) block.set(static_cast<std::size_t>(letters[static_cast<std::size_t>(i)]));
    }
  }
  return tables;
}

Tables fill_tables(std::span<const PredicatePair> pairs, std::span<const AnswerSequence> sequences,
                   Rng& rng) {
  if (pairs.size() != sequences.size()) throw Error("one answer sequence per pair required");
  std::array<std::array<std::bitset<26>, kGrid * kGrid>, 2> required{};
  std::array<std::array<std::bitset<26>, kGrid * kGrid>, 2> forbidden{};
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const auto& seq = sequences[j];
    const std::array<std::pair<const Predicate*, int>, 4> slots = {
        {{&pairs[j][0], 0}, {&pairs[j][0], 1}, {&pairs[j][1], 0}, {&pairs[j][1], 1}}};
    for (std::size_t s = 0; s < 4; ++s) {
      const auto& [pred, table] = slots[s];
      auto& target = seq[s] ? required : forbidden;
      target[static_cast<std::size_t>(table)][block_of(*pred)].set(letter_of(*pred));
    }
  }

  Tables tables;
  std::array<Table*, 2> out = {&tables.first, &tables.second};
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t b = 0; b < kGrid * kGrid; ++b) {
      const auto& req = required[t][b];
      const auto& forb = forbidden[t][b];
      if ((req & forb).any()) throw Error("conflicting table constraints");
      if (req.count() > kLettersPerBlock) throw Error("too many required letters in a block");
      std::vector<std::size_t> free;
      for (std::size_t l = 0; l < 26; ++l) {
        if (!req.test(l) && !forb.test(l)) free.push_back(l);
      }
      const auto missing = kLettersPerBlock - req.count();
      if (free.size() < missing) throw Error("too many excluded letters in a block");
      std::shuffle(free.begin(), free.end(), rng);
      auto block = req;
      for (std::size_t i = 0; i < missing; ++i) block.set(free[i]);
      out[t]->blocks[b] = block;
    }
  }
  return tables;
}

DesignatedTables generate_designated_tables(std::span<const PredicatePair> pairs, Rng& rng,
                                            const ResponseTable& rt) {
  if (pairs.size() < 2) throw Error("at least two sweetwords required");
  if (pairs.size() > kResponseOptions.size()) throw Error("k cannot exceed the 4 response elements");
  std::vector<Predicate> all;
  for (const auto& pair : pairs) all.insert(all.end(), pair.begin(), pair.end());
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
    throw Error("sweetword predicates must be pairwise distinct");
  }

  std::array<char, 4> elements = kResponseOptions;
  std::shuffle(elements.begin(), elements.end(), rng);
  DesignatedTables result;
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const auto options = rt.sequences_for(elements[j]);
    std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
    result.sequences.push_back(options[pick(rng)]);
    result.responses.push_back(elements[j]);
  }
  result.tables = fill_tables(pairs, result.sequences, rng);
  return result;
}

std::optional<std::size_t> verify_session(std::span<const Tables> rounds,
                                          std::span<const Response> responses,
                                          std::span<const PredicatePair> pairs,
                                          const ResponseTable& rt) {
  if (rounds.size() != responses.size()) throw Error("transcript incomplete");
  std::vector<IndexSet> per_round;
  for (std::size_t r = 0; r < rounds.size(); ++r) {
    IndexSet hits;
    if (responses[r].size() == 1) {
      for (std::size_t j = 0; j < pairs.size(); ++j) {
        if (response_for(answer_sequence(pairs[j][0], pairs[j][1], rounds[r]), rt) ==
            responses[r][0]) {
          hits.insert(j + 1);
        }
      }
    }
    per_round.push_back(std::move(hits));
  }
  return identify_sweetword(per_round);
}

boost::multiprecision::cpp_int pas_bruteforce_complexity(unsigned cells, unsigned letters,
                                                         unsigned c, unsigned p) {
  if (cells == 0 || letters == 0 || p == 0) throw Error("parameters must be positive");
  const auto base = binomial(cells * letters + c - 1, c);
  return boost::multiprecision::pow(base, p);
}

Session::Session(Params params, std::vector<PredicatePair> pairs, Rng& rng, ResponseTable rt)
    : params_(params), pairs_(std::move(pairs)), rt_(rt) {
  if (params_.rounds < 1) throw Error("rounds must be positive");
  if (!rt_.well_formed()) throw Error("response table is not well formed");
  designated_ = std::uniform_int_distribution<int>(1, params_.rounds)(rng);
  for (int r = 1; r <= params_.rounds; ++r) {
    if (r == designated_) {
      rounds_.push_back(generate_designated_tables(pairs_, rng, rt_).tables);
    } else {
      rounds_.push_back(random_tables(rng));
    }
  }
}

std::vector<Response> Session::response_space(int /*round*/) const {
  std::vector<Response> out;
  for (char e : kResponseOptions) out.emplace_back(1, e);
  return out;
}

IndexSet Session::candidates(int round, const Response& r) const {
  IndexSet out;
  if (r.size() != 1 || round < 1 || round > params_.rounds) return out;
  const auto& t = tables(round);
  for (std::size_t j = 0; j < pairs_.size(); ++j) {
    if (response_for(answer_sequence(pairs_[j][0], pairs_[j][1], t), rt_) == r[0]) out.insert(j + 1);
  }
  return out;
}

Response Session::respond(std::size_t index, int round, Rng& /*rng*/) const {
  const auto& pair = pairs_.at(index - 1);
  return Response(1, response_for(answer_sequence(pair[0], pair[1], tables(round)), rt_));
}

std::string Session::round_payload(int round, std::string_view session_id) const {
  auto table_json = [](const Table& t) {
    nlohmann::json blocks = nlohmann::json::array();
    for (int row = 1; row <= kGrid; ++row) {
      for (int col = 1; col <= kGrid; ++col) {
        blocks.push_back({{"index", {row, col}}, {"letters", t.letters(row, col)}});
      }
    }
    return blocks;
  };
  const auto& t = tables(round);
  nlohmann::json j;
  j["table1"] = table_json(t.first);
  j["table2"] = table_json(t.second);
  j["response_options"] = {"P", "Q", "R", "S"};
  j["round"] = round;
  j["session_id"] = session_id;
  return j.dump();
}

}  // namespace hbat::pas
