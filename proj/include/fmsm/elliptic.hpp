#pragma once

#include <cmath>
#include <limits>

#include "fmsm/constants.hpp"
#include "fmsm/errors.hpp"

namespace fmsm {

/// K, E and the Maxwell kernel D = (1 - m/2) K - E for parameter m = k^2.
///
/// Arithmetic-geometric mean with the Legendre sum. D is accumulated as
/// K * sum_{n>=1} 2^(n-1) c_n^2 using c_{n+1} = c_n^2 / (4 a_{n+1}), so no
/// difference of nearly equal numbers is formed; the direct (1 - m/2) K - E
/// loses about log10(16 / m^2) digits as m -> 0.
struct EllipticKernel {
  double K;
  double E;
  double D;
};

[[nodiscard]] inline EllipticKernel elliptic_kernel(double m) {
  if (!(m >= 0.0) || !(m < 1.0)) {
    throw DomainError("elliptic integrals: parameter m must lie in [0, 1)");
  }
  const double root = std::sqrt(1.0 - m);
  double a = 0.5 * (1.0 + root);
  double b = std::sqrt(root);
  double c = 0.5 * m / (1.0 + root);  // c_1 = (1 - sqrt(1-m)) / 2
  double weight = 1.0;
  double tail = c * c;
  for (int iter = 0; iter < 64 && c > 0.0; ++iter) {
    const double a_next = 0.5 * (a + b);
    const double b_next = std::sqrt(a * b);
    c = c * c / (4.0 * a_next);
    weight *= 2.0;
    const double term = weight * c * c;
    tail += term;
    a = a_next;
    b = b_next;
    if (term <= 1e-3 * std::numeric_limits<double>::epsilon() * tail) {
      break;
    }
  }
  const double K = kPi / (2.0 * a);
  const double D = K * tail;
  return {K, (1.0 - 0.5 * m) * K - D, D};
}

struct EllipticKE {
  double K;
  double E;
};

/// Complete elliptic integrals of the first and second kind; throws
/// DomainError outside 0 <= m < 1.
[[nodiscard]] inline EllipticKE elliptic_KE(double m) {
  const auto kernel = elliptic_kernel(m);
  return {kernel.K, kernel.E};
}

}  // namespace fmsm
