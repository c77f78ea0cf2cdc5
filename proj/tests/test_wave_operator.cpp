#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mss/wave_operator.hpp"

#include <cmath>

using namespace mss;

namespace {

const SpectralGrid g{16, 16.0};
const double kAlpha = 1.5, kBeta = 0.4, kOrder = 2.0;

// T_max chosen so [2T, T_max] holds a full decade for the decay fits
SolverConfig wide_config() {
  SolverConfig cfg;
  cfg.T = 20;
  cfg.T_max = 650;
  cfg.rho = 1.25;
  cfg.tail_rho = 1.4;
  cfg.tail_decades = 4;
  cfg.tol = 1e-8;
  cfg.step_tol = 1e-9;
  cfg.quad_panels = 4;
  cfg.quad_gl = 6;
  cfg.profile_nodes_per_decade = 8;
  return cfg;
}

struct WideRun {
  std::shared_ptr<const ProfileTable> prof;
  SolverConfig cfg;
  Trajectory traj;
  PhysicalSolution sol;
};

const WideRun& wide_run() {
  static WideRun run = [] {
    WideRun r;
    r.cfg = wide_config();
    AsymptoticState st =
        AsymptoticState::make(gaussian_field(g, 0.05, 1.5), kAlpha, kBeta, kOrder);
    r.prof = make_profile(st, g, r.cfg);
    r.traj = solve_at_infinity(r.prof, r.cfg);
    r.sol = assemble_solution(r.traj, r.cfg);
    return r;
  }();
  return run;
}

// five-node synthetic solution for the energy oracle; only the fields the
// energy reads are populated
PhysicalSolution synthetic(const std::vector<ComplexScalarField>& v,
                           const std::vector<ComplexScalarField>& w) {
  PhysicalSolution sol;
  sol.grid = g;
  for (int i = 0; i < 5; ++i) {
    sol.times.push_back(10.0 * std::pow(1.2, i));
    sol.lnt.push_back(std::log(sol.times.back()));
    sol.v.push_back(v[i]);
    sol.w.push_back(w[i]);
    sol.B.push_back(RealVectorField(g));
  }
  return sol;
}

} // namespace

TEST_CASE("zero profile assembles to the zero pair") {
  SolverConfig cfg = wide_config();
  AsymptoticState z = AsymptoticState::make(ComplexScalarField(g), kAlpha, kBeta, kOrder);
  auto prof = make_profile(z, g, cfg);
  Trajectory tr = solve_at_infinity(prof, cfg);
  PhysicalSolution sol = assemble_solution(tr, cfg);
  REQUIRE(sol.times.size() >= 8);
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    CHECK(max_abs(sol.v[i]) == 0.0);
    CHECK(max_abs(sol.B[i]) == 0.0);
    CHECK(max_abs(sol.psi[i]) == 0.0);
  }
  int mid = static_cast<int>(sol.times.size()) / 2;
  ResidualPair r = ms_residual(sol, mid);
  CHECK(r.schrodinger == 0.0);
  CHECK(r.maxwell == 0.0);
  CHECK(compute_energy(sol, mid) == 0.0);
  for (const DecayFit& f : verify_asymptotics(sol)) CHECK(f.zero_series);
}

TEST_CASE("energy of a free single mode") {
  double k = 2.0 * 2.0 * M_PI / g.L;
  ComplexScalarField m(g);
  std::size_t q = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      for (int kk = 0; kk < g.n; ++kk, ++q) m.v[q] = std::exp(cdouble(0, k * g.coord(i)));
  // |w|^2 constant: the Hartree, electric and magnetic terms all vanish and
  // only the covariant gradient survives
  PhysicalSolution sol = synthetic(std::vector<ComplexScalarField>(5, m),
                                   std::vector<ComplexScalarField>(5, m));
  double t = sol.times[2];
  double cell = std::pow(g.L, 3.0) / g.size();
  double oracle = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      for (int kk = 0; kk < g.n; ++kk) {
        double y[3] = {g.coord(i), g.coord(j), g.coord(kk)};
        double kv[3] = {k, 0, 0};
        for (int d = 0; d < 3; ++d) oracle += 0.5 * std::pow(kv[d] / t + y[d], 2.0);
      }
  oracle *= cell;
  CHECK(compute_energy(sol, 2) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("energy: Hartree terms against the Parseval oracle") {
  double k = 2.0 * 2.0 * M_PI / g.L;
  ComplexScalarField m(g);
  std::size_t q = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      for (int kk = 0; kk < g.n; ++kk, ++q) m.v[q] = std::exp(cdouble(0, k * g.coord(i)));
  ComplexScalarField wg = gaussian_field(g, 1.0, 1.2);
  ComplexScalarField wc(g);
  for (cdouble& z : wc.v) z = 1.3;
  PhysicalSolution sa = synthetic(std::vector<ComplexScalarField>(5, m),
                                  std::vector<ComplexScalarField>(5, wg));
  PhysicalSolution sb = synthetic(std::vector<ComplexScalarField>(5, m),
                                  std::vector<ComplexScalarField>(5, wc));
  // the two solutions differ only in w: the gap is (||grad gw||^2/2 + int gw
  // |w|^2)/t, both computable from the density spectrum alone
  double diff = compute_energy(sa, 2) - compute_energy(sb, 2);
  ComplexScalarField rho(g);
  for (std::size_t i = 0; i < rho.v.size(); ++i) rho.v[i] = std::norm(wg.v[i]);
  std::vector<cdouble> rh = fft_forward(g, rho.v);
  double acc = 0;
  q = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      for (int kk = 0; kk < g.n; ++kk, ++q) {
        double kx = g.wavenumber(i), ky = g.wavenumber(j), kz = g.wavenumber(kk);
        double k2 = kx * kx + ky * ky + kz * kz;
        // the gradient in the electric term zeroes the unpaired Nyquist mode,
        // the potential in the coupling term does not
        double gx = (i == g.n / 2) ? 0.0 : kx, gy = (j == g.n / 2) ? 0.0 : ky,
               gz = (kk == g.n / 2) ? 0.0 : kz;
        double gk2 = gx * gx + gy * gy + gz * gz;
        if (k2 > 0) acc += std::norm(rh[q]) * (0.5 * gk2 / (k2 * k2) + 1.0 / k2);
      }
  double cell = std::pow(g.L, 3.0) / g.size();
  double t = sa.times[2];
  double oracle = acc * cell / g.size() / t; // electric half + coupling
  CHECK(diff == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("decay fit on synthetic data") {
  std::vector<double> ts = log_spaced(10.0, 1000.0, 20), vs(20);
  for (int i = 0; i < 20; ++i) vs[i] = 3.0 * std::pow(ts[i], -1.3) * std::pow(std::log(ts[i]), 2);
  DecayFit f = fit_decay("syn", ts, vs, -1.3, 2, 10.0, 1000.0);
  CHECK(f.exponent == doctest::Approx(-1.3).epsilon(1e-9));
  CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_FALSE(f.zero_series);

  CHECK(fit_decay("z", ts, std::vector<double>(20, 0.0), -1, 0, 10, 1000).zero_series);
  CHECK_THROWS(fit_decay("few", {ts.begin(), ts.begin() + 6}, {vs.begin(), vs.begin() + 6},
                         -1, 0, 10.0, 1000.0));
  CHECK_THROWS(fit_decay("narrow", ts, vs, -1, 0, 10.0, 50.0));
}

TEST_CASE("assembled pair: unitary factors and gauge structure") {
  const WideRun& run = wide_run();
  const PhysicalSolution& sol = run.sol;
  REQUIRE(sol.times.size() >= 8);
  double ref = l2_norm(sol.v.front());
  CHECK(ref > 0);
  double bmax = 0;
  for (const RealVectorField& B : sol.B) bmax = std::max(bmax, max_abs(B));
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    // the physical L^2 norm is carried by v alone
    CHECK(std::abs(l2_norm(sol.v[i]) / ref - 1.0) < 1e-8);
    CHECK(max_divergence(sol.B[i]) < 1e-10 * bmax);
    // v and w differ by a pure phase
    for (std::size_t q = 0; q < sol.v[i].v.size(); q += 97)
      CHECK(std::abs(std::abs(sol.v[i].v[q]) - std::abs(sol.w[i].v[q])) < 1e-13);
  }
}

TEST_CASE("phase correction gradient matches the transport correction") {
  const WideRun& run = wide_run();
  const PhysicalSolution& sol = run.sol;
  // node nearest 2T
  std::size_t j = 0;
  for (std::size_t i = 0; i < sol.times.size(); ++i)
    if (std::abs(std::log(sol.times[i] / (2 * run.cfg.T))) <
        std::abs(std::log(sol.times[j] / (2 * run.cfg.T))))
      j = i;
  RealVectorField gp = gradient_real(sol.psi[j]);
  RealVectorField sigma = run.traj.states[j].sigma;
  CHECK(l2_norm(gp - sigma) / l2_norm(sigma) < 1e-4);
}

TEST_CASE("residuals of the assembled pair") {
  const WideRun& run = wide_run();
  int mid = static_cast<int>(run.sol.times.size()) / 2;
  CHECK_THROWS(ms_residual(run.sol, 1));
  CHECK_THROWS(ms_residual(run.sol, static_cast<int>(run.sol.times.size()) - 2));
  ResidualPair r = ms_residual(run.sol, mid);
  CHECK(r.schrodinger > 0);
  CHECK(r.schrodinger < 1e-5);
  CHECK(r.maxwell < 10 * run.cfg.tol);
}

TEST_CASE("tracked norm series and their decay fits") {
  const WideRun& run = wide_run();
  NormSeries ser = asymptotic_series(run.sol);
  REQUIRE(ser.names.size() == 11);
  REQUIRE(ser.values.size() == 11);
  for (const auto& v : ser.values) CHECK(v.size() == run.sol.times.size());

  std::vector<DecayFit> fits = verify_asymptotics(run.sol);
  REQUIRE(fits.size() == 11);
  auto find = [&](const std::string& n) -> const DecayFit& {
    for (const DecayFit& f : fits)
      if (f.series_name == n) return f;
    REQUIRE(false);
    return fits.front();
  };
  CHECK_FALSE(find("q_hk").zero_series);
  CHECK(std::abs(find("q_hk").exponent - (-1.0)) < 0.35);
  CHECK(std::abs(find("sigma_kk").exponent - (-1.0)) < 0.35);
  CHECK(std::abs(find("bb_kk1").exponent - (-1.0)) < 0.35);
  for (const DecayFit& f : fits)
    if (!f.zero_series) CHECK(f.r_squared > 0.9);
}
