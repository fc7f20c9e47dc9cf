#pragma once

#include "confocal/common.hpp"

#include <functional>
#include <vector>

namespace confocal::poly {

/// Polynomials are stored as ascending coefficient vectors: c[0] + c[1] t + ...

double eval(const Vec& coeffs, double t);

/// Drops trailing coefficients whose magnitude is below tol * max|c|.
Vec trim(const Vec& coeffs, double tol = 0.0);

Vec multiply(const Vec& p, const Vec& q);

/// Coefficients of p(center + scale * t) from those of p(t) in lambda,
/// and the inverse direction (lambda-basis from t-basis).
Vec to_local(const Vec& coeffs, double center, double scale);
Vec from_local(const Vec& local, double center, double scale);

/// Interpolating polynomial of the given degree through (nodes[i], values[i]).
/// The Vandermonde system is solved in the affinely normalized variable
/// t = (lambda - center) / scale, then mapped back.
Vec fit(const Vec& nodes, const Vec& values, int degree);

/// All complex roots from the companion matrix (Eigen's real eigensolver).
CVec companion_roots(const Vec& coeffs);

/// Real roots of a polynomial: companion-matrix candidates with small imaginary
/// part, polished by safeguarded Newton on `refine` (which defaults to the
/// polynomial itself). Returned in ascending order.
std::vector<double> real_roots(const Vec& coeffs, double imag_tol = 1e-7,
                               const std::function<double(double)>& refine = {});

/// Roots of a continuous function found by a uniform sign-change scan over
/// [lo, hi] with `samples` cells and bisection inside each cell.
std::vector<double> sign_change_roots(const std::function<double(double)>& f, double lo,
                                      double hi, int samples, double xtol = 1e-14);

}  // namespace confocal::poly
