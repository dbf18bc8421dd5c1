#include "hbat/session.hpp"

namespace hbat {

std::unique_ptr<SchemeSession> start_session(const SweetwordList& list,
                                             const SchemeParams& params, Rng& rng) {
  switch (list.scheme) {
    case Scheme::kS3pas: {
      auto gen = s3pas::generate_challenge_with_retry(list.entries, params.s3pas, rng);
      return std::make_unique<s3pas::Session>(params.s3pas, list.entries,
                                              std::move(gen.challenge));
    }
    case Scheme::kChc: {
      std::vector<chc::IconSet> sets;
      for (const auto& e : list.entries) sets.push_back(chc::parse_icon_set(e));
      return std::make_unique<chc::Session>(params.chc, std::move(sets), rng);
    }
    case Scheme::kPas: {
      std::vector<pas::PredicatePair> pairs;
      for (const auto& e : list.entries) pairs.push_back(pas::parse_pair(e));
      return std::make_unique<pas::Session>(params.pas, std::move(pairs), rng);
    }
    case Scheme::kCop:
      return std::make_unique<cop::Session>(params.cop, list.entries, rng);
  }
  throw Error("unknown scheme");
}

}  // namespace hbat
