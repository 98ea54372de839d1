#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ssflow/errors.hpp"

namespace ssflow {

inline constexpr int max_bisection_iterations = 200;

// Bisection on [lo, hi]; f(lo) and f(hi) must differ in sign.  Stops when the
// bracket is below xtol (absolute) or after the iteration cap.
double bisect(const std::function<double(double)>& f, double lo, double hi, double xtol,
              const std::string& what = "bisection");

// Grows hi geometrically (hi *= factor) until f changes sign relative to f(lo).
// Returns the bracketing hi; SearchFailure when limit is passed.
double expand_bracket(const std::function<double(double)>& f, double lo, double hi, double limit,
                      double factor = 2.0, const std::string& what = "bracket search");

struct Extremum {
  double x;
  double f;
};

// Maximiser of a unimodal f on [lo, hi] (golden section via Brent).
Extremum maximize_unimodal(const std::function<double(double)>& f, double lo, double hi);
Extremum minimize_unimodal(const std::function<double(double)>& f, double lo, double hi);

// Sign-change brackets of f sampled at xs (NaN samples break brackets).
std::vector<std::pair<double, double>> sign_changes(const std::function<double(double)>& f,
                                                    const std::vector<double>& xs);

std::vector<double> linspace(double lo, double hi, int n);
std::vector<double> logspace(double lo, double hi, int n);  // lo, hi > 0, geometric spacing

}  // namespace ssflow
