#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "debtav/choice_data.hpp"
#include "debtav/rng.hpp"

namespace debtav::test {

inline Prospect sure(double x) { return Prospect::certain({x, 0.0, 0.0, 1.0}); }

inline Prospect stream(double x_t, double x_T, double T) {
  return Prospect::certain({x_t, x_T, 0.0, T});
}

/// A random prospect mixing gains, losses, saving and debt streams.
inline Prospect random_prospect(Rng& rng) {
  const int kind = static_cast<int>(rng.below(4));
  const double a = 0.3 + 4.0 * rng.uniform();
  const double b = 0.3 + 4.0 * rng.uniform();
  const double T = 1.0 + static_cast<double>(rng.below(12));
  switch (kind) {
    case 0: return stream(a, -b, T);  // debt
    case 1: return stream(-a, b, T);  // saving
    case 2: {
      const double p = 0.1 + 0.8 * rng.uniform();
      return Prospect({{{a, 0.0, 0.0, T}, p}, {{-b, 0.0, 0.0, T}, 1.0 - p}});
    }
    default: {
      const double p = 0.1 + 0.8 * rng.uniform();
      return Prospect({{{a, -b, 0.0, T}, p}, {{0.0, b, 0.0, T}, 1.0 - p}});
    }
  }
}

inline PreferenceParams random_params(Rng& rng) {
  PreferenceParams p;
  p.alpha = -0.5 + 1.3 * rng.uniform();  // (-0.5, 0.8), away from 1
  p.delta = 0.001 + 0.05 * rng.uniform();
  p.gamma = 0.9 + 0.3 * rng.uniform();
  p.lambda = 0.5 + 2.0 * rng.uniform();
  p.mu = 0.2 + 1.5 * rng.uniform();
  return p;
}

/// Derivative of f at t = 0 by Ridders' extrapolation of central
/// differences, starting from step h (shrunk until f is finite at +-h).
template <class F>
double derivative(F&& f, double h) {
  constexpr int kTable = 10;
  constexpr double kShrink = 1.4, kShrink2 = kShrink * kShrink;
  while (!(std::isfinite(f(h)) && std::isfinite(f(-h)))) h *= 0.5;
  double a[kTable][kTable];
  a[0][0] = (f(h) - f(-h)) / (2.0 * h);
  double best = a[0][0], err = std::numeric_limits<double>::infinity();
  for (int i = 1; i < kTable; ++i) {
    h /= kShrink;
    a[0][i] = (f(h) - f(-h)) / (2.0 * h);
    double fac = kShrink2;
    for (int j = 1; j <= i; ++j) {
      a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
      fac *= kShrink2;
      const double e = std::max(std::abs(a[j][i] - a[j - 1][i]), std::abs(a[j][i] - a[j - 1][i - 1]));
      if (e <= err) {
        err = e;
        best = a[j][i];
      }
    }
    if (std::abs(a[i][i] - a[i - 1][i - 1]) >= 2.0 * err) break;
  }
  return best;
}

inline double rel_err(double a, double b, double floor = 1e-7) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace debtav::test
