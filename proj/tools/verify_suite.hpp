#pragma once

#include "json.hpp"

#include <cstdint>

namespace dpbo::cli {

/// Quick self-check of the library against the reference oracles and the
/// statistical privacy tests. The result carries a top-level `pass`.
nlohmann::json run_verification_suite(std::uint64_t seed);

}  // namespace dpbo::cli
