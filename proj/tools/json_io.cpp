#include "json_io.hpp"

#include "config.hpp"

namespace dpbo::cli {

using nlohmann::json;

namespace {

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

json bundle_to_json(const SensitivityBundle& b) {
  return {{"kind", "noisy"},
          {"beta_T", b.beta_T},
          {"beta_T_plus_1", b.beta_T1},
          {"c", b.c},
          {"q", b.q},
          {"C1", b.C1},
          {"gamma_T", b.gamma_T},
          {"gamma_method", to_string(b.gamma_method)},
          {"Omega", b.Omega},
          {"Delta", b.Delta},
          {"laplace_scale_v", b.laplace_scale_v}};
}

json bundle_to_json(const ExactBundle& b) {
  return {{"kind", "exact"}, {"A", b.A},         {"tau", b.tau},
          {"dimension", b.dimension}, {"c", b.c}, {"Omega", b.Omega},
          {"laplace_scale_f", b.laplace_scale_f}};
}

json bundle_to_json(const LipschitzBundle& b) {
  return {{"kind", "lipschitz"},
          {"L", b.L},
          {"g_star", b.g_star},
          {"m", b.m},
          {"lambda_min", b.lambda_min},
          {"lambda_max", b.lambda_max},
          {"dataset_term", b.dataset_term},
          {"range_term", b.range_term},
          {"laplace_scale", b.laplace_scale}};
}

json utility_to_json(const UtilityReport& report) {
  return {{"failure_exponent", report.failure_exponent},
          {"confidence", report.confidence},
          {"bounds", report.bounds}};
}

json record_to_json(const ReleaseRecord& record, const UtilityReport& utility) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["algorithm"] = to_string(record.algorithm);
  j["seed"] = record.seed;
  j["shape"] = {{"grid_size", record.shape.grid_size},
                {"dimension", record.shape.dimension},
                {"T", record.shape.T},
                {"epsilon", record.shape.epsilon},
                {"delta", record.shape.delta}};
  j["lambda_tilde"] = optional_json(record.lambda_tilde);
  j["lambda_tilde_index"] = optional_json(record.lambda_tilde_index);
  j["v_tilde"] = optional_json(record.v_tilde);
  j["f_tilde"] = optional_json(record.f_tilde);
  j["f_tilde_L"] = optional_json(record.f_tilde_L);
  j["bundle"] = std::visit([](const auto& b) { return bundle_to_json(b); }, record.bundle);
  json releases = json::array();
  for (const auto& r : record.releases) {
    releases.push_back({{"name", r.name}, {"epsilon", r.budget.epsilon}, {"delta", r.budget.delta}});
  }
  j["releases"] = releases;
  j["budget_spent"] = {{"epsilon", record.budget_spent.epsilon}, {"delta", record.budget_spent.delta}};
  j["utility_bounds"] = utility_to_json(utility);
  j["notes"] = record.notes;
  return j;
}

json curve_to_json(const LikelihoodCurve& curve) {
  return {{"k1", curve.k1_values}, {"loglik", curve.loglik}, {"argmax_k1", curve.argmax()}};
}

json report_to_json(const verification::DPTestReport& r) {
  return {{"epsilon_claimed", r.epsilon_claimed},
          {"delta_claimed", r.delta_claimed},
          {"bins", {{"kind", verification::to_string(r.bins.kind)}, {"count", r.bins.count}}},
          {"slack", r.slack},
          {"threshold", r.threshold},
          {"max_ratio_observed", r.max_ratio_observed},
          {"excluded_bins", r.excluded_bins},
          {"sample_count", r.sample_count},
          {"pass", r.pass}};
}

json report_to_json(const verification::FrequencyReport& r) {
  return {{"repetitions", r.repetitions},
          {"within_bound", r.within_bound},
          {"fraction", r.fraction},
          {"target_prob", r.target_prob},
          {"pass", r.pass}};
}

}  // namespace dpbo::cli
