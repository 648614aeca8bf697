#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace gnnctrl {

struct CampaignResult {
  std::string name;
  std::size_t instances = 0;
  std::size_t failures = 0;
  std::string detail;  // worst observed margin or first failure
  bool passed() const noexcept { return failures == 0; }
};

// One audited inequality; eps is 0 when the instance has no perturbation.
struct InstanceRow {
  std::string campaign;
  std::size_t instance = 0;
  double eps = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// Instance counts are the audit defaults; campaigns are deterministic in
// (seed, count). iss_fault_scale != 1 deliberately corrupts the certified
// bound inside the ISS audit and must make it fail (negative control).
struct VerifyOptions {
  std::uint64_t seed = 7;
  std::size_t filter_bound_instances = 1000;
  std::size_t gnn_bound_instances = 1000;
  std::size_t response_lipschitz_instances = 500;
  std::size_t filter_linearity_instances = 200;
  std::size_t equivariance_instances = 200;
  std::size_t filter_perturbation_instances = 200;
  std::size_t gnn_perturbation_instances = 200;
  std::size_t iss_instances = 500;
  std::size_t stability_change_instances = 501;  // split across three eps
  std::size_t deviation_instances = 200;
  std::size_t limit_check_instances = 50;
  std::size_t envelope_instances = 200;
  std::size_t determinism_instances = 10;
  // Multiplies the certified right-hand side in the ISS audit before the
  // comparison; values far below 1 must trip failures.
  double iss_fault_scale = 1.0;
  // When set, bound campaigns append one row per audited inequality.
  std::vector<InstanceRow>* rows = nullptr;
};

CampaignResult campaign_filter_bound(const VerifyOptions& opt);
CampaignResult campaign_gnn_bound(const VerifyOptions& opt);
CampaignResult campaign_response_lipschitz(const VerifyOptions& opt);
CampaignResult campaign_filter_linearity(const VerifyOptions& opt);
CampaignResult campaign_equivariance(const VerifyOptions& opt);
CampaignResult campaign_filter_perturbation(const VerifyOptions& opt);
CampaignResult campaign_gnn_perturbation(const VerifyOptions& opt);
CampaignResult campaign_iss(const VerifyOptions& opt);
CampaignResult campaign_stability_change(const VerifyOptions& opt);
CampaignResult campaign_deviation(const VerifyOptions& opt);
CampaignResult campaign_limit_check(const VerifyOptions& opt);
CampaignResult campaign_envelope(const VerifyOptions& opt);
CampaignResult campaign_determinism(const VerifyOptions& opt);

std::vector<CampaignResult> run_verify_campaigns(const VerifyOptions& opt);

}  // namespace gnnctrl
