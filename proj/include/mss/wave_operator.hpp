// Phase correction psi, assembly of the physical pair, residuals against the
// original coupled system, energy, and decay-rate fits.
//
// The physical pair is kept in comoving variables: u = M(t) D(t) v with
// v = exp(-i(phi+psi))(W+q), and A = t^{-1} D0(t) B. M, D are unitary and the
// dilation rescales norms by an explicit power of t, so every reported
// physical-space quantity is evaluated exactly through these factors; the
// dilated fields themselves would alias on the fixed box for t >> n/2.
#pragma once

#include "mss/cauchy_solver.hpp"

namespace mss {

struct PhysicalSolution {
  SpectralGrid grid;
  std::shared_ptr<const ProfileTable> profile;
  std::vector<double> times, lnt; // reported window [T, T_max]
  std::vector<ComplexScalarField> v;   // comoving amplitude: u = M D v
  std::vector<ComplexScalarField> w;   // W + q
  std::vector<RealVectorField> s;      // S + sigma
  std::vector<RealVectorField> B;      // B_* + G + B_b; A = t^{-1} D0(t) B
  std::vector<RealVectorField> G, Bb;  // pieces of B beyond B_*
  std::vector<RealVectorField> B1;     // B with B_b re-evaluated from the integral form
  std::vector<ComplexScalarField> phi, psi; // real-valued phases
};

// psi at every trajectory node: -int_t^inf { |s|^2/(2t'^2) + g(q, q+2W)/t'
// - (x.G)_L/t' } dt' by Hermite-corrected trapezoid on the node grid in ln t
// plus the profile tail beyond t_ext
std::vector<ComplexScalarField> build_psi(const Trajectory& traj,
                                          const std::vector<RealVectorField>& G_nodes);
// single-time convenience (fresh G, pchip in ln t between nodes)
ComplexScalarField build_psi(const Trajectory& traj, double t, const SolverConfig& cfg);

PhysicalSolution assemble_solution(const Trajectory& traj, const SolverConfig& cfg);

// residuals of the assembled pair at one node (needs the two neighbors on each
// side for the time stencil): Schrodinger defect in L^2 and the field-equation
// defect ||B - B1|| in K^{k+1}
struct ResidualPair {
  double schrodinger = 0, maxwell = 0;
};
ResidualPair ms_residual(const PhysicalSolution& sol, int node);

// energy of (u, A) at one node, evaluated in comoving variables
double compute_energy(const PhysicalSolution& sol, int node);

struct DecayFit {
  std::string series_name;
  double exponent = 0;
  int log_power = 0; // the (ln t)^p correction divided out before the fit
  double r_squared = 0;
  double t_lo = 0, t_hi = 0;
  double expected = 0;   // envelope exponent the series is checked against
  bool zero_series = false;
};

// least-squares slope of log(series / (ln t)^p) vs log t on [t_lo, t_hi];
// needs >= 8 nodes spanning >= 1 decade
DecayFit fit_decay(const std::string& name, const std::vector<double>& times,
                   const std::vector<double>& values, double expected, int log_power,
                   double t_lo, double t_hi);

// the tracked norm series, one value per window node
struct NormSeries {
  std::vector<std::string> names;
  std::vector<std::vector<double>> values; // values[series][node]
};
NormSeries asymptotic_series(const PhysicalSolution& sol);

// the norm series of the asymptotic estimates, fitted on [2T, T_max]
std::vector<DecayFit> verify_asymptotics(const PhysicalSolution& sol);

} // namespace mss
