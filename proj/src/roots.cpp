#include "ssflow/roots.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <limits>

namespace ssflow {

double bisect(const std::function<double(double)>& f, double lo, double hi, double xtol,
              const std::string& what) {
  const double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (!(std::signbit(flo) != std::signbit(fhi)) || std::isnan(flo) || std::isnan(fhi))
    throw SearchFailure(what + ": no sign change", lo, hi);
  std::uintmax_t iters = max_bisection_iterations;
  auto done = [xtol](double a, double b) { return std::abs(b - a) <= xtol; };
  const auto r = boost::math::tools::bisect(f, lo, hi, done, iters);
  return 0.5 * (r.first + r.second);
}

double expand_bracket(const std::function<double(double)>& f, double lo, double hi, double limit,
                      double factor, const std::string& what) {
  const double flo = f(lo);
  for (double x = hi; x <= limit; x *= factor) {
    const double fx = f(x);
    if (std::signbit(fx) != std::signbit(flo) && !std::isnan(fx)) return x;
  }
  throw SearchFailure(what + ": no sign change below limit", lo, limit);
}

Extremum minimize_unimodal(const std::function<double(double)>& f, double lo, double hi) {
  std::uintmax_t iters = 500;
  const auto r = boost::math::tools::brent_find_minima(f, lo, hi, std::numeric_limits<double>::digits / 2, iters);
  return {r.first, r.second};
}

Extremum maximize_unimodal(const std::function<double(double)>& f, double lo, double hi) {
  const auto r = minimize_unimodal([&](double x) { return -f(x); }, lo, hi);
  return {r.x, -r.f};
}

std::vector<std::pair<double, double>> sign_changes(const std::function<double(double)>& f,
                                                    const std::vector<double>& xs) {
  std::vector<std::pair<double, double>> out;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double fx = f(xs[i]);
    if (i > 0 && !std::isnan(prev) && !std::isnan(fx) && std::signbit(prev) != std::signbit(fx))
      out.emplace_back(xs[i - 1], xs[i]);
    prev = fx;
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

std::vector<double> logspace(double lo, double hi, int n) {
  std::vector<double> v = linspace(std::log(lo), std::log(hi), n);
  for (auto& x : v) x = std::exp(x);
  if (n > 1) v.front() = lo, v.back() = hi;
  return v;
}

}  // namespace ssflow
