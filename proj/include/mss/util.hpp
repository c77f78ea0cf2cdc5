// Small numerics shared across modules: monotone cubic interpolation in ln t,
// Gauss-Legendre panel quadrature, least-squares fits, nonuniform FD stencils.
#pragma once

#include "mss/spectral_core.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace mss {

// ---- monotone cubic (Fritsch-Carlson) interpolation -------------------------

// value at x of the monotone cubic through (xs, ys); xs strictly ascending.
// Evaluation outside [xs.front, xs.back] is clamped-extrapolated linearly.
double pchip_eval(const double* xs, const double* ys, int npts, double x);
int pchip_interval(const std::vector<double>& xs, double x);
// same interpolant but evaluated per grid point across a field series;
// abscissae are ln t, query is t
ComplexScalarField interp_series(const std::vector<double>& lnt,
                                 const std::vector<ComplexScalarField>& f, double t);
RealVectorField interp_series(const std::vector<double>& lnt,
                              const std::vector<RealVectorField>& f, double t);

// ---- quadrature ---------------------------------------------------------------

struct Quadrature {
  std::vector<double> x, w;
};

Quadrature gauss_legendre(int order);                      // on [-1, 1]
Quadrature panel_quadrature(const std::vector<double>& boundaries, int order);
std::vector<double> log_spaced(double a, double b, int count);

// ---- fits -----------------------------------------------------------------------

struct LinearFit {
  double slope = 0, intercept = 0, r2 = 0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// ---- finite differences ------------------------------------------------------------

// first-derivative weights of the 5-point Lagrange stencil at node j
std::array<double, 5> fd5_weights(const std::array<double, 5>& xs, int j);

// ---- formatting ----------------------------------------------------------------------

std::string fmt_g17(double v); // fixed "%.17g" rendering for byte-stable CSV

} // namespace mss
