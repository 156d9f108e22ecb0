#pragma once

#include <cmath>

#include "mimopc/solver.hpp"

namespace mimopc {

/// Central differences of f(x) = log(log2(1 + eps + e^x)) in long double.
///
/// first: (f(x+h) - f(x-h)) / 2h. The numerator is evaluated through
///   g(x+h) - g(x-h) = log1p(2 e^x sinh(h) / (1 + eps + e^(x-h))),  g = ln(1 + eps + e^x),
///   f(x+h) - f(x-h) = log1p((g(x+h) - g(x-h)) / g(x-h)),
/// which is the same quotient without the cancellation that swamps it when f' ~ 1e-12.
/// second: (f'(x+h) - f'(x-h)) / 2h with the analytic f'.
struct LinkDifferences {
  long double first = 0;
  long double second = 0;
};

inline LinkDifferences link_central_differences(long double x, long double eps,
                                                long double h = 1e-4L) {
  const long double gm = std::log1p(eps + std::exp(x - h));
  const long double dg = std::log1p(2 * std::exp(x) * std::sinh(h) / (1 + eps + std::exp(x - h)));
  LinkDifferences d;
  d.first = std::log1p(dg / gm) / (2 * h);
  d.second = (concave_link<long double>(x + h, eps).first -
              concave_link<long double>(x - h, eps).first) /
             (2 * h);
  return d;
}

/// Scale for relative comparisons of f'' = f' (1 - s - f'): the size of its two summands.
/// f'' itself crosses zero at the inflection point.
inline long double link_second_scale(long double x, long double eps) {
  const auto v = concave_link<long double>(x, eps);
  const long double s = std::exp(x) / (1 + eps + std::exp(x));
  return std::abs(v.first) * (std::abs(1 - s) + std::abs(v.first));
}

}  // namespace mimopc
