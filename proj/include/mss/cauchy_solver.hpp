// Time integration of the linearized amplitude/phase system and the
// fixed-point drivers: backward-from-infinity and finite-initial-time solves.
#pragma once

#include "mss/profiles.hpp"

#include <memory>
#include <optional>

namespace mss {

struct AuxState {
  ComplexScalarField q;
  RealVectorField sigma; // curl-free
  RealVectorField B_b;   // div-free
  double t = 0;
};

// Geometric node grid T*rho^i up to T_max, then a coarser tail grid (ratio
// tail_rho) out to t_ext = T_max * 10^tail_decades where the data is pinned to
// zero and the profile closure takes over.
struct Trajectory {
  SpectralGrid grid;
  std::shared_ptr<const ProfileTable> profile;
  double T = 0, T_max = 0, rho = 0, tail_rho = 0, t_ext = 0;
  std::vector<double> times, lnt;
  std::vector<AuxState> states;

  int window_nodes() const; // nodes with t <= T_max (reported window)
  bool is_zero() const;
  // pchip in ln t over the node grid; identically zero beyond t_ext
  ComplexScalarField q_at(double t) const;
  RealVectorField sigma_at(double t) const;
  RealVectorField bb_at(double t) const;
};

struct IterationReport {
  int iterate_index = 0;
  double Y = 0, Y1 = 0, Z0 = 0, Z1 = 0, Z2 = 0, N = 0; // weighted sup norms
  double distance = 0;          // weighted distance to the previous iterate
  double contraction_ratio = 0; // distance_n / distance_{n-1}, from iterate 2
};

struct SolverConfig {
  double T = 20, T_max = 200, rho = 1.05;
  double tail_rho = 1.25, tail_decades = 6;
  double tol = 1e-8; // absolute weighted distance between iterates
  int max_iters = 30;
  double under_relaxation = 1.0;
  double step_tol = 1e-9; // sub-step error budget per unit ln t
  int quad_panels = 6, quad_gl = 6;
  int profile_nodes_per_decade = 12;
};

struct NonContractionError : std::runtime_error {
  std::vector<double> ratios;
  explicit NonContractionError(std::vector<double> r)
      : std::runtime_error("fixed point not contracting (window start too small)"),
        ratios(std::move(r)) {}
};

// frozen-coefficient bundle for one evaluation time; tests may build these
// directly to exercise the stepper on synthetic coefficients
struct StepBundle {
  RealVectorField s_plus_B;      // transport field of the q equation
  ComplexScalarField div_sB;     // its divergence (real-valued)
  ComplexScalarField pot2;       // 2 B.s + |B|^2 (real-valued)
  ComplexScalarField pot;        // (x.B_a)_S + x.B_b (real-valued)
  RealVectorField s;             // transport field of the sigma equation
  ComplexScalarField source_q;   // full q source (profile + difference terms)
  RealVectorField source_sigma;  // full sigma source
  explicit StepBundle(const SpectralGrid& g)
      : s_plus_B(g), div_sB(g), pot2(g), pot(g), s(g), source_q(g), source_sigma(g) {}
};

// advance (q, sigma) from t_from to t_to (either direction) with adaptive
// step-doubled RK4 in ln t; the stiff Laplacian handled exactly in the
// interaction picture
void step_linearized(const std::function<const StepBundle&(double)>& bundle_at,
                     double step_tol, double t_from, double t_to, ComplexScalarField& q,
                     RealVectorField& sigma);

struct GammaMode {
  enum Kind { infinity, finite_t0 } kind = infinity;
  double t0 = 0;
  const AuxState* data = nullptr; // pinned state for finite_t0
};

Trajectory make_zero_trajectory(std::shared_ptr<const ProfileTable> prof,
                                const SolverConfig& cfg);
// span the profile table must cover so every kernel evaluation of a solve
// with this config stays inside it
double required_profile_span(const SpectralGrid& g, const SolverConfig& cfg);
std::shared_ptr<const ProfileTable> make_profile(const AsymptoticState& st,
                                                 const SpectralGrid& g, const SolverConfig& cfg);

Trajectory gamma_map(const Trajectory& in, const GammaMode& mode, const SolverConfig& cfg);

Trajectory solve_at_infinity(std::shared_ptr<const ProfileTable> prof, const SolverConfig& cfg,
                             std::vector<IterationReport>* history = nullptr);
Trajectory solve_finite_t0(std::shared_ptr<const ProfileTable> prof, double t0,
                           const AuxState& data, const SolverConfig& cfg,
                           std::vector<IterationReport>* history = nullptr);

IterationReport weighted_norms(const Trajectory& traj);
double weighted_distance(const Trajectory& a, const Trajectory& b);

// step-defect of the converged trajectory: re-integrate each window interval
// from the stored state and compare with the stored endpoint; returns the max
// defect per unit ln t for the q and sigma channels
std::pair<double, double> trajectory_residual(const Trajectory& traj, const SolverConfig& cfg);

// B_a(q, q+2W) of the trajectory at its nodes (needed by post-processing)
std::vector<RealVectorField> trajectory_G_nodes(const Trajectory& traj,
                                                const TimeKernelQuadrature& quad);

// fresh kernel evaluations over the converged trajectory: G = B_a(q, q+2W)
// and B_b re-evaluated from the integral form (the stored B_b came from the
// previous sweep; the gap between the two is the field-equation defect)
struct FreshFields {
  std::vector<RealVectorField> G, Bb;
};
FreshFields trajectory_fresh_fields(const Trajectory& traj, const SolverConfig& cfg);

// checkpoint I/O: field dumps plus a JSON index
void save_trajectory(const std::string& dir, const Trajectory& traj);
Trajectory load_trajectory(const std::string& dir, std::shared_ptr<const ProfileTable> prof);

} // namespace mss
