#include "gnnctrl/filters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "gnnctrl/errors.hpp"

namespace gnnctrl {

namespace {

// Ascending-coefficient polynomial evaluation (Horner).
double poly_eval(std::span<const double> coeffs, double x) {
  double acc = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
  return acc;
}

std::vector<double> poly_derivative(std::span<const double> coeffs) {
  std::vector<double> out;
  for (std::size_t k = 1; k < coeffs.size(); ++k)
    out.push_back(static_cast<double>(k) * coeffs[k]);
  return out;
}

// Roots of `poly` inside [lo, hi] located by bisection on sign changes over
// a dense grid. Tolerance 1e-12 on the argument. Plateau roots without a
// sign change are irrelevant for maximizing |antiderivative|, since the
// antiderivative is monotone through them.
std::vector<double> poly_roots_bisect(std::span<const double> poly, double lo,
                                      double hi) {
  std::vector<double> roots;
  if (poly.empty() || lo >= hi) return roots;
  std::size_t degree = poly.size() - 1;
  std::size_t cells = std::max<std::size_t>(128, 32 * (degree + 1));
  double prev_x = lo;
  double prev_v = poly_eval(poly, lo);
  for (std::size_t c = 1; c <= cells; ++c) {
    double x = lo + (hi - lo) * static_cast<double>(c) / cells;
    double v = poly_eval(poly, x);
    if (prev_v == 0.0) {
      roots.push_back(prev_x);
    } else if ((prev_v < 0.0) != (v < 0.0) && v != 0.0) {
      double a = prev_x, b = x, fa = prev_v;
      while (b - a > 1e-12) {
        double m = 0.5 * (a + b);
        double fm = poly_eval(poly, m);
        if (fm == 0.0) {
          a = b = m;
          break;
        }
        if ((fa < 0.0) != (fm < 0.0)) {
          b = m;
        } else {
          a = m;
          fa = fm;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_x = x;
    prev_v = v;
  }
  if (poly_eval(poly, hi) == 0.0) roots.push_back(hi);
  return roots;
}

struct PolyMax {
  double value = 0.0;
  double arg = 0.0;
  double sign = 0.0;
};

// Max of |p| over [lo, hi]; candidates are the endpoints and the interior
// critical points. Ties keep the smallest argument.
PolyMax poly_abs_max(std::span<const double> coeffs, double lo, double hi) {
  std::vector<double> candidates{lo};
  if (hi > lo) {
    auto deriv = poly_derivative(coeffs);
    auto crit = poly_roots_bisect(deriv, lo, hi);
    candidates.insert(candidates.end(), crit.begin(), crit.end());
    candidates.push_back(hi);
  }
  std::sort(candidates.begin(), candidates.end());
  PolyMax best;
  best.arg = lo;
  for (double x : candidates) {
    double v = poly_eval(coeffs, x);
    if (std::abs(v) > best.value) {
      best.value = std::abs(v);
      best.arg = x;
      best.sign = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    }
  }
  return best;
}

std::vector<double> pair_coeffs(const FilterBank& fb, std::size_t f,
                                std::size_t g) {
  std::vector<double> coeffs(fb.taps.size());
  for (std::size_t k = 0; k < fb.taps.size(); ++k) coeffs[k] = fb.taps[k](f, g);
  return coeffs;
}

FilterExtrema extrema_of(const FilterBank& fb, bool differentiate) {
  validate_filter_bank(fb);
  const std::size_t f_dim = fb.in_dim();
  const std::size_t g_dim = fb.out_dim();
  FilterExtrema out;
  out.values = Matrix(f_dim, g_dim);
  out.args = Matrix(f_dim, g_dim);
  out.signs = Matrix(f_dim, g_dim);
  for (std::size_t f = 0; f < f_dim; ++f) {
    for (std::size_t g = 0; g < g_dim; ++g) {
      std::vector<double> coeffs = pair_coeffs(fb, f, g);
      if (differentiate) coeffs = poly_derivative(coeffs);
      PolyMax m = poly_abs_max(coeffs, fb.lambda_lo, fb.lambda_hi);
      out.values(f, g) = m.value;
      out.args(f, g) = m.arg;
      out.signs(f, g) = m.sign;
    }
  }
  double best = -1.0;
  for (std::size_t f = 0; f < f_dim; ++f) {
    double row = 0.0;
    for (std::size_t g = 0; g < g_dim; ++g) row += out.values(f, g);
    if (row > best) {
      best = row;
      out.active_row = f;
    }
  }
  out.norm = best;
  return out;
}

}  // namespace

void validate_filter_bank(const FilterBank& fb) {
  if (fb.taps.empty()) throw InvalidArgumentError("filter bank needs >= 1 tap");
  const std::size_t f = fb.taps.front().rows();
  const std::size_t g = fb.taps.front().cols();
  if (f == 0 || g == 0) throw DimensionError("taps must be nonempty matrices");
  for (const Matrix& tap : fb.taps)
    if (tap.rows() != f || tap.cols() != g)
      throw DimensionError("all taps must share one shape");
  if (!(fb.lambda_lo <= fb.lambda_hi) || !std::isfinite(fb.lambda_lo) ||
      !std::isfinite(fb.lambda_hi))
    throw InvalidArgumentError("filter interval must satisfy lo <= hi");
}

GraphSignal apply_filter(const FilterBank& fb, const Matrix& support,
                         const GraphSignal& x) {
  validate_filter_bank(fb);
  if (support.rows() != support.cols())
    throw DimensionError("support must be square");
  if (x.rows() != support.rows())
    throw DimensionError("signal rows must match the support");
  if (x.cols() != fb.in_dim())
    throw DimensionError("signal features must match tap rows");
  Matrix shifted = x;
  GraphSignal y = shifted * fb.taps[0];
  for (std::size_t k = 1; k < fb.taps.size(); ++k) {
    shifted = support * shifted;
    y += shifted * fb.taps[k];
  }
  return y;
}

double freq_response(const FilterBank& fb, std::size_t f, std::size_t g,
                     double lambda) {
  validate_filter_bank(fb);
  if (f >= fb.in_dim() || g >= fb.out_dim())
    throw DimensionError("response index out of range");
  std::vector<double> coeffs = pair_coeffs(fb, f, g);
  return poly_eval(coeffs, lambda);
}

FilterExtrema filter_size_detail(const FilterBank& fb) {
  return extrema_of(fb, false);
}

FilterExtrema filter_lipschitz_detail(const FilterBank& fb) {
  return extrema_of(fb, true);
}

double filter_size(const FilterBank& fb) { return filter_size_detail(fb).norm; }

double filter_lipschitz(const FilterBank& fb) {
  return filter_lipschitz_detail(fb).norm;
}

std::pair<double, double> default_interval(
    const std::vector<Matrix>& supports) {
  if (supports.empty())
    throw InvalidArgumentError("default_interval needs >= 1 support");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Matrix& s : supports) {
    Spectrum spec = sym_eig(s);
    lo = std::min(lo, spec.values.front());
    hi = std::max(hi, spec.values.back());
  }
  return {lo, hi};
}

}  // namespace gnnctrl
