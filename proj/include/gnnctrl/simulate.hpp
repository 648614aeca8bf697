#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "gnnctrl/controllers.hpp"
#include "gnnctrl/gnn.hpp"
#include "gnnctrl/matrix.hpp"
#include "gnnctrl/system.hpp"

namespace gnnctrl {

// Closed-loop trajectory. For a full rollout states has horizon+1 entries
// and controls/step_costs have horizon; when the size guard fires at step t
// the record is truncated (states t+1, controls and costs t entries) and
// diverged_at holds t.
struct TrajectoryRecord {
  std::vector<Matrix> states;
  std::vector<Matrix> controls;
  std::vector<double> step_costs;
  std::vector<double> state_sizes;  // l21 size per recorded state
  double total_cost = 0.0;
  bool stable = false;
  std::optional<std::size_t> diverged_at;
};

// Additive control disturbance: U(t) = controller output + signals[t].
struct Disturbance {
  std::vector<Matrix> signals;
};

double summable_size(const Disturbance& dist);

// Rolls the controller on d from x0 for `horizon` steps. Step cost is
// tr(X^T X Q) + tr(U^T U R). States whose size exceeds 1e12 stop the
// rollout and mark divergence instead of overflowing.
TrajectoryRecord rollout(const DistributedSystem& d, const Controller& ctrl,
                         const Matrix& x0, std::size_t horizon,
                         const CostSpec& cost,
                         const Disturbance* dist = nullptr);

// A trajectory counts as stable when it did not hit the divergence guard,
// never exceeded 1000x its initial size, and ended strictly below its
// initial size. The all-zero trajectory is stable by special case.
bool classify_stable(const TrajectoryRecord& rec);

// Input-to-state stability check: with xi < 1, the summed trajectory sizes
// of the disturbed closed loop are bounded by
//   ||X(0)||/(1-xi) + (||B||_2 ||Bbar||_inf / (1-xi)) * sum_t ||E(t)||.
struct IssResult {
  double xi = 0.0;
  double beta0 = 0.0;
  double beta1 = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// Raises NotApplicableError when xi >= 1. The filter sizes behind xi are
// evaluated on the exact spectral interval of d's support.
IssResult iss_check(const DistributedSystem& d, const GnnParams& p,
                    const Matrix& x0, const Disturbance& dist,
                    std::size_t horizon);

}  // namespace gnnctrl
