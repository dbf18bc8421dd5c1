#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "hbat/chc.hpp"
#include "hbat/cop.hpp"
#include "hbat/core.hpp"
#include "hbat/pas.hpp"
#include "hbat/s3pas.hpp"

namespace hbat {

/// Parameters for all four schemes; only the one matching the list's
/// scheme is consulted.
struct SchemeParams {
  s3pas::Params s3pas;
  chc::Params chc;
  pas::Params pas;
  cop::Params cop;
};

/// Default k for a scheme.
std::size_t default_k(Scheme scheme, const SchemeParams& params = {});

/// Z: the number of distinct response elements a user can submit.
std::size_t max_k(Scheme scheme, const SchemeParams& params = {});

}  // namespace hbat

namespace hbat::honeygen {

enum class CharClass { kUpper, kLower, kDigit, kSymbol };

CharClass char_class(char c);

/// Throws Error unless `password` is a well-formed secret for the scheme:
/// S3PAS/COP strings of the configured length over the scheme alphabet,
/// a CHC icon set of pass_icons ids, or a PAS predicate pair.
void validate_password(Scheme scheme, std::string_view password, const SchemeParams& params = {});

struct Generated {
  SweetwordList list;
  std::size_t t = 0;  ///< 1-based position of the original password
};

/// Builds k - 1 honeywords around `password` and inserts the password at a
/// uniformly random position.
///
/// S3PAS and COP honeywords share no character with any other sweetword and
/// keep the character class of every position while that class has unused
/// characters left; after that the fullest remaining class supplies them.
/// CHC honeywords are icon sets disjoint from every other set. PAS
/// honeywords change both the block index and the letter of each predicate.
///
/// Throws Error("k too large for scheme") when the constraints cannot be
/// met, or after `max_attempts` rejected draws.
Generated generate_sweetwords(Scheme scheme, std::string_view password, std::size_t k, Rng& rng,
                              const SchemeParams& params = {},
                              std::size_t max_attempts = 100000);

/// Violations of the per-scheme distinctness rules; empty when the list is
/// usable.
///
/// S3PAS: some round has k PPIs sharing no character (PPIs that share a
/// character share a vertex cell, so that round can never separate them);
/// honeygen itself keeps sweetwords fully character-disjoint. CHC: icon sets pairwise disjoint. PAS: all 2k
/// predicates distinct. COP: no character shared between sweetwords.
std::vector<std::string> validate_sweetword_set(const SweetwordList& list,
                                                const SchemeParams& params = {});

/// A uniformly random well-formed password for the scheme.
std::string random_password(Scheme scheme, Rng& rng, const SchemeParams& params = {});

}  // namespace hbat::honeygen
