#include "debtav/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace debtav::optimize {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double finite_or_inf(double v) { return std::isnan(v) ? kInf : v; }

struct Simplex {
  std::vector<std::vector<double>> x;
  std::vector<double> f;
};

}  // namespace

Result nelder_mead(const Objective& f, std::vector<double> start, const NelderMeadOptions& opts) {
  const std::size_t n = start.size();
  Result res;
  auto eval = [&](const std::vector<double>& p) {
    ++res.evaluations;
    return finite_or_inf(f(p));
  };

  std::vector<double> best = start;
  double best_f = eval(best);
  if (!std::isfinite(best_f)) {
    res.x = std::move(best);
    res.value = best_f;
    res.message = "infeasible starting point";
    return res;
  }

  for (int round = 0; round <= opts.restarts && res.iterations < opts.max_iterations; ++round) {
    Simplex s;
    s.x.push_back(best);
    s.f.push_back(best_f);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v = best;
      v[i] += opts.initial_step * std::max(1.0, std::abs(v[i]) * 0.1);
      double fv = eval(v);
      if (!std::isfinite(fv)) {
        v[i] = best[i] - (v[i] - best[i]);
        fv = eval(v);
      }
      s.x.push_back(std::move(v));
      s.f.push_back(fv);
    }
    std::vector<std::size_t> order(n + 1);
    bool converged = false;
    while (res.iterations < opts.max_iterations) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s.f[a] < s.f[b] || (s.f[a] == s.f[b] && a < b);
      });
      const std::size_t lo = order.front();
      const std::size_t hi = order.back();
      const std::size_t second = order[n - 1];

      double size = 0.0;
      for (std::size_t v = 0; v <= n; ++v) {
        for (std::size_t i = 0; i < n; ++i) size = std::max(size, std::abs(s.x[v][i] - s.x[lo][i]));
      }
      if (size <= opts.size_tolerance) {
        converged = true;
        break;
      }
      ++res.iterations;

      std::vector<double> centroid(n, 0.0);
      for (std::size_t v = 0; v <= n; ++v) {
        if (v == hi) continue;
        for (std::size_t i = 0; i < n; ++i) centroid[i] += s.x[v][i] / static_cast<double>(n);
      }
      auto along = [&](double coef) {
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = centroid[i] + coef * (s.x[hi][i] - centroid[i]);
        return p;
      };

      std::vector<double> reflected = along(-1.0);
      const double fr = eval(reflected);
      if (fr < s.f[lo]) {
        std::vector<double> expanded = along(-2.0);
        const double fe = eval(expanded);
        if (fe < fr) {
          s.x[hi] = std::move(expanded);
          s.f[hi] = fe;
        } else {
          s.x[hi] = std::move(reflected);
          s.f[hi] = fr;
        }
        continue;
      }
      if (fr < s.f[second]) {
        s.x[hi] = std::move(reflected);
        s.f[hi] = fr;
        continue;
      }
      const bool outside = fr < s.f[hi];
      std::vector<double> contracted = along(outside ? -0.5 : 0.5);
      const double fc = eval(contracted);
      if (fc < (outside ? fr : s.f[hi])) {
        s.x[hi] = std::move(contracted);
        s.f[hi] = fc;
        continue;
      }
      for (std::size_t v = 0; v <= n; ++v) {
        if (v == lo) continue;
        for (std::size_t i = 0; i < n; ++i) s.x[v][i] = s.x[lo][i] + 0.5 * (s.x[v][i] - s.x[lo][i]);
        s.f[v] = eval(s.x[v]);
      }
    }
    const auto it = std::min_element(s.f.begin(), s.f.end());
    const std::size_t lo = static_cast<std::size_t>(it - s.f.begin());
    const bool improved = s.f[lo] < best_f;
    best = s.x[lo];
    best_f = s.f[lo];
    res.converged = converged;
    if (!converged) break;
    if (round > 0 && !improved) break;
  }
  res.x = std::move(best);
  res.value = best_f;
  res.message = res.converged ? "simplex size below tolerance" : "iteration limit reached";
  return res;
}

Result bfgs(const ObjectiveWithGradient& f, std::vector<double> start, const BfgsOptions& opts) {
  const std::size_t n = start.size();
  Result res;
  std::vector<double> x = std::move(start);
  std::vector<double> g(n), g_new(n), x_new(n), dir(n), s(n), y(n);
  auto eval = [&](const std::vector<double>& p, std::vector<double>& grad) {
    ++res.evaluations;
    const double v = finite_or_inf(f(p, grad));
    for (double gi : grad) {
      if (!std::isfinite(gi)) return kInf;
    }
    return v;
  };
  double fx = eval(x, g);
  if (!std::isfinite(fx)) {
    res.x = std::move(x);
    res.value = fx;
    res.message = "infeasible starting point";
    return res;
  }

  // Inverse Hessian approximation, row-major.
  std::vector<double> H(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;
  bool scaled = false;

  auto inf_norm = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double e : v) m = std::max(m, std::abs(e));
    return m;
  };

  while (res.iterations < opts.max_iterations) {
    if (inf_norm(g) <= opts.gradient_tolerance) {
      res.converged = true;
      break;
    }
    ++res.iterations;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc -= H[i * n + j] * g[j];
      dir[i] = acc;
    }
    double slope = std::inner_product(dir.begin(), dir.end(), g.begin(), 0.0);
    if (!(slope < 0.0)) {
      // Not a descent direction: reset to steepest descent.
      std::fill(H.begin(), H.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        H[i * n + i] = 1.0;
        dir[i] = -g[i];
      }
      slope = -std::inner_product(g.begin(), g.end(), g.begin(), 0.0);
      scaled = false;
    }

    double step = 1.0;
    if (!scaled) step = std::min(1.0, 1.0 / std::max(inf_norm(g), 1e-12));
    double f_new = kInf;
    bool accepted = false;
    for (int k = 0; k < opts.max_backtracks; ++k) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * dir[i];
      f_new = eval(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= fx + opts.armijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // Accept as converged when the predicted decrease along the quasi-Newton
      // direction is already below what the objective can resolve.
      if (scaled && -slope <= 1e-10 * (1.0 + std::abs(fx))) {
        res.converged = true;
        res.message = "no further decrease at working precision";
      } else {
        res.message = "line search failed";
      }
      break;
    }

    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = g_new[i] - g[i];
    }
    const double sy = std::inner_product(s.begin(), s.end(), y.begin(), 0.0);
    if (sy > 1e-12 * std::sqrt(std::inner_product(s.begin(), s.end(), s.begin(), 0.0) *
                               std::inner_product(y.begin(), y.end(), y.begin(), 0.0))) {
      if (!scaled) {
        const double yy = std::inner_product(y.begin(), y.end(), y.begin(), 0.0);
        const double gamma = sy / yy;
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) H[i * n + j] = (i == j) ? gamma : 0.0;
        }
        scaled = true;
      }
      // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
      const double rho = 1.0 / sy;
      std::vector<double> Hy(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) Hy[i] += H[i * n + j] * y[j];
      }
      const double yHy = std::inner_product(y.begin(), y.end(), Hy.begin(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          H[i * n + j] += rho * ((1.0 + rho * yHy) * s[i] * s[j] - Hy[i] * s[j] - s[i] * Hy[j]);
        }
      }
    }
    const double change = std::abs(fx - f_new);
    x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
    if (change == 0.0 && inf_norm(s) == 0.0) {
      if (scaled && -slope <= 1e-10 * (1.0 + std::abs(fx))) {
        res.converged = true;
        res.message = "no further decrease at working precision";
      } else {
        res.message = "no progress";
      }
      break;
    }
  }
  res.x = std::move(x);
  res.value = fx;
  if (res.converged && res.message.empty()) {
    res.message = "gradient norm below tolerance";
  } else if (res.message.empty()) {
    res.message = "iteration limit reached";
  }
  return res;
}

double golden_section(const std::function<double(double)>& f, double lo, double hi,
                      double tolerance) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = finite_or_inf(f(c));
  double fd = finite_or_inf(f(d));
  while (b - a > tolerance) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = finite_or_inf(f(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = finite_or_inf(f(d));
    }
  }
  return 0.5 * (a + b);
}

}  // namespace debtav::optimize
