#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "gnnctrl/gnn.hpp"
#include "gnnctrl/matrix.hpp"
#include "gnnctrl/system.hpp"

namespace gnnctrl {

// Closed-loop stability certificate for running p on d:
//   xi = ||A||_2 ||Abar||_inf + C_phi ||B||_2 ||Bbar||_inf,
// with C_phi the product of the per-layer filter sizes over the exact
// spectral interval of d's support. xi < 1 certifies exponential stability;
// the trajectory-size factors are beta0 = ||X(0)||/(1 - xi) (stored per
// unit of ||X(0)||) and beta1 = ||B||_2 ||Bbar||_inf / (1 - xi).
struct StabilityReport {
  double xi = 0.0;
  double c_phi = 0.0;
  double gamma_phi = 0.0;  // sum of per-layer Lipschitz/size ratios
  bool is_sufficiently_stable = false;
  std::optional<double> beta0_per_unit_x0;
  std::optional<double> beta1;
};

StabilityReport stability_constant(const DistributedSystem& d,
                                   const GnnParams& p);

// How much xi can move between two systems sharing the same parameters:
//   |xi - xi_hat| <= c_xi_hat * distance,
//   c_xi_hat = ||A||_2 + ||Abar_hat||_inf + C_phi (||B||_2 + ||Bbar_hat||_inf).
// C_phi (shared by both sides) is evaluated on the union of the two
// supports' spectral intervals.
struct StabilityChangeReport {
  double xi = 0.0;
  double xi_hat = 0.0;
  double distance = 0.0;
  double c_xi_hat = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

StabilityChangeReport stability_change_bound(const DistributedSystem& d,
                                             const DistributedSystem& d_hat,
                                             const GnnParams& p);

// Time-indexed deviation envelope between the closed loops of d and d_hat
// run from the same initial state with the same parameters:
//   ||X(t) - X_hat(t)|| <= c_phi_hat * c_t * ||X(0)|| * distance,
//   c_phi_hat = c_xi_hat
//             + C_phi Gamma_phi ||B_hat||_2 ||Bbar_hat||_inf (1 + 8 sqrt(N)),
//   c_t = t * max(xi, xi_hat)^(t-1), c_0 = 0.
// When max(xi, xi_hat) < 1 the envelope is uniformly bounded by
//   uniform_constant = -e^{-1} c_phi_hat / (m log m), m = max(xi, xi_hat).
struct DeviationReport {
  double xi = 0.0;
  double xi_hat = 0.0;
  double distance = 0.0;
  double c_xi_hat = 0.0;
  double c_phi_hat = 0.0;
  std::vector<double> empirical;  // t = 0..horizon
  std::vector<double> bound;      // t = 0..horizon
  double max_ratio = 0.0;         // max over t of empirical/bound where bound > 0
  bool truncated = false;         // a rollout hit the divergence guard
  std::optional<double> uniform_constant;
};

DeviationReport deviation_bound(const DistributedSystem& d,
                                const DistributedSystem& d_hat,
                                const GnnParams& p, const Matrix& x0,
                                std::size_t horizon);

// True iff the empirical deviation at the final step has decayed below
// 1e-6 * ||X(0)||. Requires xi < 1 and xi_hat < 1 (NotApplicableError).
bool cor1_limit_check(const DistributedSystem& d,
                      const DistributedSystem& d_hat, const GnnParams& p,
                      const Matrix& x0, std::size_t horizon = 500);

// The deviation envelope's time profile and its closed-form upper bound.
double deviation_time_factor(double m, std::size_t t);  // t * m^(t-1), 0 at t=0
double cor1_envelope(double m);  // -e^{-1} / (m log m) for 0 < m < 1

}  // namespace gnnctrl
