#pragma once

#include "dpbo/dp_release.hpp"
#include "dpbo/mtgp_experiment.hpp"
#include "dpbo/verification.hpp"

#include "json.hpp"

namespace dpbo::cli {

nlohmann::json bundle_to_json(const SensitivityBundle& b);
nlohmann::json bundle_to_json(const ExactBundle& b);
nlohmann::json bundle_to_json(const LipschitzBundle& b);
nlohmann::json utility_to_json(const UtilityReport& report);

/// Released values, constants, budget and bounds. The non-private trace is
/// left out.
nlohmann::json record_to_json(const ReleaseRecord& record, const UtilityReport& utility);

nlohmann::json curve_to_json(const LikelihoodCurve& curve);
nlohmann::json report_to_json(const verification::DPTestReport& report);
nlohmann::json report_to_json(const verification::FrequencyReport& report);

}  // namespace dpbo::cli
