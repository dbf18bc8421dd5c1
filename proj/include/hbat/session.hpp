#pragma once

#include <memory>

#include "hbat/core.hpp"
#include "hbat/honeygen.hpp"

namespace hbat {

/// Builds the scheme session for `list`: parses the entries and generates
/// every round's challenge. S3PAS uses the retrying generator.
std::unique_ptr<SchemeSession> start_session(const SweetwordList& list,
                                             const SchemeParams& params, Rng& rng);

}  // namespace hbat
