// Asymptotic profiles: W = U*(1/t) w_plus, the phase integrals phi and their
// gradient S, the frozen field B_* = B_a(W), and the remainders R1..R3.
#pragma once

#include "mss/potentials.hpp"
#include "mss/spectral_core.hpp"

#include <memory>

namespace mss {

struct AsymptoticState {
  ComplexScalarField w_plus;
  double alpha = 1.5;
  double beta = 0.4;
  double k = 2.0;      // Sobolev index the run works at
  double a_plus = 0.0; // max(|w+|_{k+alpha+1}, |x w+|_{k+alpha}), recorded at build

  static AsymptoticState make(ComplexScalarField w_plus, double alpha, double beta, double k);
};

ComplexScalarField build_W(const AsymptoticState& st, double t);

enum class ProfileVariant { full, simplified, closed_form };

// Standalone profile constructions (fresh kernel evaluations; test-grade).
// nodes_per_decade controls the log-spaced time quadrature of the [1, t] integrals.
RealVectorField build_S(const AsymptoticState& st, const SpectralGrid& g, double t,
                        ProfileVariant variant, const TimeKernelQuadrature& quad,
                        int nodes_per_decade = 40);
ComplexScalarField build_phi(const AsymptoticState& st, const SpectralGrid& g, double t,
                             const TimeKernelQuadrature& quad, int nodes_per_decade = 40);
RealVectorField compute_Bstar(const AsymptoticState& st, const SpectralGrid& g, double t,
                              const TimeKernelQuadrature& quad);

// Precomputed profile trajectory on a log time grid [1, t_hi]; the solver and
// kernel tails read S, B_*, phi from here (pchip in ln t), W is exact.
class ProfileTable {
 public:
  ProfileTable(AsymptoticState st, SpectralGrid g, double t_hi, int nodes_per_decade,
               TimeKernelQuadrature quad);

  const AsymptoticState& state() const { return st_; }
  const SpectralGrid& grid() const { return grid_; }
  double t_hi() const { return times_.back(); }
  const TimeKernelQuadrature& quad() const { return quad_; }

  ComplexScalarField W(double t) const;
  RealVectorField S(double t) const;
  RealVectorField Bstar(double t) const;
  ComplexScalarField phi(double t) const; // real-valued, phi(1) = 0
  // kernel integrand of the profile-closed B_b: Im conj(W) grad W - (S+B_*)|W|^2
  RealVectorField Mb_profile(double t) const;

 private:
  AsymptoticState st_;
  SpectralGrid grid_;
  TimeKernelQuadrature quad_;
  std::vector<double> times_, lnt_;
  std::vector<RealVectorField> bstar_;
  std::vector<ComplexScalarField> phi_;
  std::vector<cdouble> wplus_hat_; // cached spectrum of w_plus
};

struct Remainders {
  ComplexScalarField R1;
  RealVectorField R2, R3;
};

Remainders compute_remainders(const ProfileTable& prof, double t);

// transport term Q(s, w) = s . grad w + (1/2)(div s) w
ComplexScalarField transport_Q(const RealVectorField& s, const ComplexScalarField& w);

} // namespace mss
