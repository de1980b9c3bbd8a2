// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>

#include "wpmec/mathkit.hpp"
#include "wpmec/model.hpp"

namespace wpmec {

namespace {

constexpr double kInvE = 0.36787944117144233;  // 1/e
constexpr double kE = 2.718281828459045;

// 1 + W0 around the branch point in p = sqrt(2 (e y + 1)).
double branch_series_p1(double p) {
  return p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0 +
              p * (769.0 / 17280.0 + p * (-221.0 / 8505.0))))));
}

double branch_series(double p) { return branch_series_p1(p) - 1.0; }

}  // namespace

double lambert_w0(double y) {
  if (std::isnan(y) || y < -kInvE - 1e-15) {
    throw Error(ErrorKind::DomainError, "y", "Lambert W0 is undefined below -1/e");
  }
  if (y == 0.0) return 0.0;
  if (y == std::numeric_limits<double>::infinity()) return y;
  if (y <= -kInvE) return -1.0;

  const double p2 = 2.0 * (kE * y + 1.0);
  const double p = std::sqrt(std::max(p2, 0.0));
  if (p < 2e-3) return branch_series(p);

  double w;
  if (p < 0.5) {
    w = branch_series(p);
  } else if (y < 3.0) {
    w = std::log1p(y);
    w *= 1.0 - std::log1p(w) / (2.0 + w);
  } else {
    const double l1 = std::log(y);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }

  // Halley iteration on f(w) = w e^w - y.
  for (int it = 0; it < 64; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - y;
    const double wp1 = w + 1.0;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double step = f / denom;
    w -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w))) break;
  }
  return w;
}

double one_plus_w0_shifted(double u) {
  if (std::isnan(u) || u < 0.0) {
    throw Error(ErrorKind::DomainError, "u", "shifted Lambert W needs u >= 0");
  }
  const double p = std::sqrt(2.0 * u);
  if (p < 1e-2) return branch_series_p1(p);
  return 1.0 + lambert_w0((u - 1.0) * kInvE);
}

}  // namespace wpmec
