#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "gnnctrl/matrix.hpp"

namespace gnnctrl {

// A graph signal is an N x F matrix: one row per node, one column per
// feature. Its size is l21_norm (sum of euclidean column norms).
using GraphSignal = Matrix;

// Polynomial graph filter: Y = sum_{k=0..K} S^k X taps[k]. Every tap is
// F x G; order K = taps.size() - 1. The interval [lambda_lo, lambda_hi]
// bounds the spectrum of every support the bank is analyzed against and is
// where size and Lipschitz constants are maximized.
struct FilterBank {
  std::vector<Matrix> taps;
  double lambda_lo = -1.0;
  double lambda_hi = 1.0;

  std::size_t order() const noexcept { return taps.size() - 1; }
  std::size_t in_dim() const noexcept { return taps.front().rows(); }
  std::size_t out_dim() const noexcept { return taps.front().cols(); }
};

void validate_filter_bank(const FilterBank& fb);

// Applies the filter through the shift recursion Z_k = S Z_{k-1}; no
// explicit matrix powers are formed.
GraphSignal apply_filter(const FilterBank& fb, const Matrix& support,
                         const GraphSignal& x);

// Scalar frequency response h_fg(lambda) = sum_k taps[k](f,g) lambda^k,
// evaluated by Horner's rule.
double freq_response(const FilterBank& fb, std::size_t f, std::size_t g,
                     double lambda);

// Per-pair extrema of |h_fg| (or |h'_fg|) over the bank's interval, plus the
// row whose absolute sum attains the infinity norm. Maximizer ties keep the
// smallest lambda; row ties keep the smallest row index.
struct FilterExtrema {
  Matrix values;  // F x G, the per-pair maxima
  Matrix args;    // F x G, maximizing lambda per pair
  Matrix signs;   // F x G, sign of the polynomial at the maximizer
  std::size_t active_row = 0;
  double norm = 0.0;  // infinity norm of `values`
};

FilterExtrema filter_size_detail(const FilterBank& fb);
FilterExtrema filter_lipschitz_detail(const FilterBank& fb);

// Filter size: infinity norm of the matrix of per-pair maxima of |h_fg| over
// the interval. Extrema are located through the derivative's sign changes
// (bisection to 1e-12) plus the interval endpoints.
double filter_size(const FilterBank& fb);

// Tightest Lipschitz constant of the frequency responses on the interval:
// infinity norm of the per-pair maxima of |h'_fg|.
double filter_lipschitz(const FilterBank& fb);

// Smallest closed interval containing every eigenvalue of every support in
// the list. The list must be nonempty and each support symmetric.
std::pair<double, double> default_interval(const std::vector<Matrix>& supports);

}  // namespace gnnctrl
