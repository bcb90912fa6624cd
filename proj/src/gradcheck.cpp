#include "hierdet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hierdet/loss.hpp"

namespace hierdet {

namespace {

constexpr double kCurvatureJump = 0.1;
constexpr double kRoundoffMargin = 1e3;

}  // namespace

bool GradReport::is_nonsmooth(std::size_t k) const {
  return std::find(nonsmooth.begin(), nonsmooth.end(), k) != nonsmooth.end();
}

double relative_error(double analytic, double numeric, double floor) {
  const double diff = std::abs(analytic - numeric);
  if (diff == 0.0) return 0.0;
  return diff / std::max({std::abs(analytic), std::abs(numeric), floor});
}

GradReport grad_check(const ScalarFn& f, const GradientFn& grad, std::span<const double> params,
                      double h) {
  std::vector<double> p(params.begin(), params.end());
  auto eval = [&](std::size_t k) {
    double v = f(p);
    if (!std::isfinite(v)) {
      throw LossError("non-finite evaluation while perturbing coordinate " + std::to_string(k));
    }
    return v;
  };

  GradReport report;
  report.analytic = grad(p);
  if (report.analytic.size() != p.size()) {
    throw LossError("gradient has " + std::to_string(report.analytic.size()) +
                    " entries for " + std::to_string(p.size()) + " parameters");
  }
  const double f0 = eval(0);
  const double eps = std::numeric_limits<double>::epsilon();

  for (std::size_t k = 0; k < p.size(); ++k) {
    const double x = p[k];
    auto at = [&](double offset) {
      p[k] = x + offset;
      double v = eval(k);
      p[k] = x;
      return v;
    };
    const double fp = at(h), fm = at(-h), fp2 = at(2 * h), fm2 = at(-2 * h);
    const double numeric = (fp - fm) / (2 * h);
    report.numeric.push_back(numeric);
    report.rel_error.push_back(relative_error(report.analytic[k], numeric));

    const double left = (f0 - 2 * fm + fm2) / (h * h);
    const double right = (fp2 - 2 * fp + f0) / (h * h);
    const double noise = kRoundoffMargin * eps * std::max(1.0, std::abs(f0)) / (h * h);
    const double jump = std::abs(left - right);
    if (jump > noise && jump > kCurvatureJump * std::max(std::abs(left), std::abs(right))) {
      report.nonsmooth.push_back(k);
      continue;
    }
    if (report.rel_error[k] > report.max_rel_error) {
      report.max_rel_error = report.rel_error[k];
      report.worst = k;
    }
  }
  return report;
}

}  // namespace hierdet
