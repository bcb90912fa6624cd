#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hierdet {

using ScalarFn = std::function<double(std::span<const double>)>;
using GradientFn = std::function<std::vector<double>(std::span<const double>)>;

struct GradReport {
  std::vector<double> analytic;
  std::vector<double> numeric;
  std::vector<double> rel_error;
  /// Coordinates where the one-sided curvatures disagree (e.g. the SmoothL1
  /// transition); excluded from max_rel_error.
  std::vector<std::size_t> nonsmooth;
  double max_rel_error = 0.0;
  std::size_t worst = 0;

  bool passed(double tolerance) const { return max_rel_error <= tolerance; }
  bool is_nonsmooth(std::size_t k) const;
};

/// |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-8);

/// Compares grad(params) against central differences (f(p+h e_k) -
/// f(p-h e_k)) / 2h. Throws LossError on a non-finite evaluation.
GradReport grad_check(const ScalarFn& f, const GradientFn& grad, std::span<const double> params,
                      double h = 1e-5);

}  // namespace hierdet
