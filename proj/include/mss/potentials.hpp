// Interaction quantities: Hartree potential, currents, the time-integral
// kernels I_m and F_j with their tail closures, B_a / B_b, and the sharp
// short/long frequency splitting.
#pragma once

#include "mss/spectral_core.hpp"
#include "mss/util.hpp"

#include <functional>

namespace mss {

// ---- Hartree potential ---------------------------------------------------------

// g = (-Laplace)^{-1} Re(conj(w1) w2); real-valued, mean-zero on the torus
ComplexScalarField hartree_g(const ComplexScalarField& w1, const ComplexScalarField& w2);
ComplexScalarField hartree_g(const ComplexScalarField& w);

// ---- currents ---------------------------------------------------------------------

RealVectorField current_Ma(const ComplexScalarField& w); // x |w|^2 (centered chart)
RealVectorField current_Mb(const ComplexScalarField& w, const RealVectorField& s,
                           const RealVectorField& B); // Im conj(w) grad w - (s+B)|w|^2

// ---- time-kernel quadrature -----------------------------------------------------------

struct TimeKernelQuadrature {
  std::vector<double> nu_nodes;          // flattened Gauss-Legendre nodes, ascending
  std::vector<double> weights;           // matching weights (d nu measure)
  std::vector<double> panel_boundaries;  // log-spaced, first = 1
  int gl_order = 8;
  double tail_exponent = 1.0;            // assumed power decay of means beyond coverage
  double mean_extension_factor = 100.0;  // zero-mode-only numeric extension span
  int mean_extension_panels = 4;

  double nu_end() const { return panel_boundaries.back(); }

  // panels on [1, nu_end] log-spaced; nu_end defaults to the dilation band
  // limit n/2 beyond which every nonzero mode is masked anyway
  static TimeKernelQuadrature make(double nu_end, int panels, int gl_order,
                                   double tail_exponent = 1.0);
  static TimeKernelQuadrature for_grid(const SpectralGrid& g, int panels = 6, int gl_order = 6,
                                       double tail_exponent = 1.0);
};

// scalar time series with power-law tail beyond stored coverage
struct ScalarSeries {
  std::vector<double> t;
  std::vector<double> v;
  double tail_exponent = 1.0;
  double eval(double tq) const;
};

// I_m: integral of nu^{-m-3/2} f(nu t) over [1, inf); time_form=true integrates
// the equivalent t'-space form instead (independent node placement)
double apply_Im(const ScalarSeries& f, double m, double t, const TimeKernelQuadrature& quad,
                bool time_form = false);

// F_j kernel. M must evaluate the integrand vector field at any t' >= t,
// applying its own tail closure beyond trajectory coverage (throws on gaps).
RealVectorField apply_Fj(const std::function<RealVectorField(double)>& M, int j, double t,
                         const TimeKernelQuadrature& quad, const SpectralGrid& g);

// ---- B_a, B_b --------------------------------------------------------------------------

struct AmplitudePair {
  std::function<ComplexScalarField(double)> w1, w2;
};

struct AuxFieldContext {
  std::function<ComplexScalarField(double)> w;
  std::function<RealVectorField(double)> s, B;
};

// B_a(w1,w2)(t) = P F_0(x Re(conj(w1) w2)); divergence-free
RealVectorField compute_Ba(const AmplitudePair& ws, double t, const TimeKernelQuadrature& quad,
                           const SpectralGrid& g);
// B_b(t) = t^{-1} P F_1(Im conj(w) grad w - (s+B)|w|^2); divergence-free
RealVectorField compute_Bb(const AuxFieldContext& ctx, double t, const TimeKernelQuadrature& quad,
                           const SpectralGrid& g);

// ---- short/long splitting ------------------------------------------------------------------

struct SplitSpec {
  double beta = 0.0; // cutoff radius is t^beta
  double t = 1.0;
};

struct SplitFields {
  ComplexScalarField short_part; // |xi| > t^beta
  ComplexScalarField long_part;  // |xi| <= t^beta
};

SplitFields split_short_long(const ComplexScalarField& f, const SplitSpec& spec);

} // namespace mss
