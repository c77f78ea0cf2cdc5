#include "mss/wave_operator.hpp"

#include <cmath>
#include <stdexcept>

namespace mss {

namespace {

// first-derivative weights of the quadratic through xs at xs[j]
std::array<double, 3> d3_weights(const std::array<double, 3>& xs, int j) {
  std::array<double, 3> w{};
  double p = xs[j];
  w[0] = (2 * p - xs[1] - xs[2]) / ((xs[0] - xs[1]) * (xs[0] - xs[2]));
  w[1] = (2 * p - xs[0] - xs[2]) / ((xs[1] - xs[0]) * (xs[1] - xs[2]));
  w[2] = (2 * p - xs[0] - xs[1]) / ((xs[2] - xs[0]) * (xs[2] - xs[1]));
  return w;
}

// psi integrand in ln t: |s|^2/(2t) + g(q, q+2W) - (x.G)_L, real-valued
ComplexScalarField psi_integrand(const Trajectory& traj, std::size_t i,
                                 const RealVectorField& G) {
  const ProfileTable& prof = *traj.profile;
  const SpectralGrid& g = traj.grid;
  double t = traj.times[i];
  RealVectorField s = prof.S(t) + traj.states[i].sigma;
  ComplexScalarField W = prof.W(t);
  const ComplexScalarField& q = traj.states[i].q;
  ComplexScalarField q2(g);
  for (std::size_t m = 0; m < q2.v.size(); ++m) q2.v[m] = q.v[m] + 2.0 * W.v[m];
  ComplexScalarField F = hartree_g(q, q2);
  ComplexScalarField xg = x_dot(G);
  SplitFields parts = split_short_long(xg, SplitSpec{prof.state().beta, t});
  for (std::size_t m = 0; m < F.v.size(); ++m) {
    double s2 = s.c[0][m] * s.c[0][m] + s.c[1][m] * s.c[1][m] + s.c[2][m] * s.c[2][m];
    F.v[m] = cdouble(F.v[m].real() + s2 / (2.0 * t) - parts.long_part.v[m].real(), 0.0);
  }
  return F;
}

} // namespace

std::vector<ComplexScalarField> build_psi(const Trajectory& traj,
                                          const std::vector<RealVectorField>& G_nodes) {
  const ProfileTable& prof = *traj.profile;
  const SpectralGrid& g = traj.grid;
  const std::size_t nn = traj.times.size();
  if (G_nodes.size() != nn) throw std::invalid_argument("build_psi: G node count mismatch");

  std::vector<ComplexScalarField> psi(nn, ComplexScalarField(g));
  if (max_abs(prof.state().w_plus) == 0.0 && traj.is_zero()) return psi;

  // profile tail: q = 0, G = 0 beyond t_ext, integrand reduces to |S|^2/(2t)
  ComplexScalarField tail(g);
  {
    double lo = std::log(traj.t_ext), hi = std::log(prof.t_hi());
    int panels = std::max(4, (int)std::lround(1.2 * (hi - lo)));
    Quadrature pq = panel_quadrature(log_spaced(lo, hi, panels + 1), 6);
    auto tail_F = [&](double lam) {
      double tp = std::exp(lam);
      RealVectorField S = prof.S(tp);
      ComplexScalarField F(g);
      for (std::size_t m = 0; m < F.v.size(); ++m) {
        double s2 = S.c[0][m] * S.c[0][m] + S.c[1][m] * S.c[1][m] + S.c[2][m] * S.c[2][m];
        F.v[m] = cdouble(s2 / (2.0 * tp), 0.0);
      }
      return F;
    };
    for (std::size_t qi = 0; qi < pq.x.size(); ++qi)
      axpy(cdouble(pq.w[qi], 0), tail_F(pq.x[qi]), tail);
    // the integrand decays like e^{-lambda} (up to logs): close with its value
    axpy(cdouble(1.0, 0), tail_F(hi), tail);
  }

  // node integrands and their ln-t derivatives (3-point stencils)
  std::vector<ComplexScalarField> F(nn);
  for (std::size_t i = 0; i < nn; ++i) F[i] = psi_integrand(traj, i, G_nodes[i]);
  std::vector<ComplexScalarField> Fp(nn, ComplexScalarField(g));
  for (std::size_t i = 0; i < nn; ++i) {
    std::size_t c = std::min(std::max<std::size_t>(i, 1), nn - 2);
    std::array<double, 3> xs = {traj.lnt[c - 1], traj.lnt[c], traj.lnt[c + 1]};
    std::array<double, 3> w = d3_weights(xs, static_cast<int>(i - (c - 1)));
    for (int m = 0; m < 3; ++m) axpy(cdouble(w[m], 0), F[c - 1 + m], Fp[i]);
  }

  psi[nn - 1] = cdouble(-1.0, 0) * tail;
  for (std::size_t i = nn - 1; i-- > 0;) {
    double h = traj.lnt[i + 1] - traj.lnt[i];
    // Hermite-corrected trapezoid over [lnt_i, lnt_{i+1}]
    ComplexScalarField seg(g);
    axpy(cdouble(0.5 * h, 0), F[i], seg);
    axpy(cdouble(0.5 * h, 0), F[i + 1], seg);
    axpy(cdouble(h * h / 12.0, 0), Fp[i], seg);
    axpy(cdouble(-h * h / 12.0, 0), Fp[i + 1], seg);
    psi[i] = psi[i + 1] - seg;
  }
  for (auto& f : psi)
    for (cdouble& z : f.v) z = cdouble(z.real(), 0.0);
  return psi;
}

ComplexScalarField build_psi(const Trajectory& traj, double t, const SolverConfig& cfg) {
  if (t < traj.times.front() * (1.0 - 1e-9) || t > traj.t_ext * (1.0 + 1e-9))
    throw std::invalid_argument("build_psi: time outside trajectory coverage");
  TimeKernelQuadrature quad =
      TimeKernelQuadrature::for_grid(traj.grid, cfg.quad_panels, cfg.quad_gl, 0.0);
  std::vector<ComplexScalarField> psi = build_psi(traj, trajectory_G_nodes(traj, quad));
  return interp_series(traj.lnt, psi, t);
}

PhysicalSolution assemble_solution(const Trajectory& traj, const SolverConfig& cfg) {
  const ProfileTable& prof = *traj.profile;
  PhysicalSolution sol;
  sol.grid = traj.grid;
  sol.profile = traj.profile;
  FreshFields fresh = trajectory_fresh_fields(traj, cfg);
  std::vector<ComplexScalarField> psi = build_psi(traj, fresh.G);
  int nw = traj.window_nodes();
  for (int i = 0; i < nw; ++i) {
    double t = traj.times[i];
    sol.times.push_back(t);
    sol.lnt.push_back(traj.lnt[i]);
    ComplexScalarField W = prof.W(t);
    ComplexScalarField wf = W + traj.states[i].q;
    sol.w.push_back(wf);
    sol.s.push_back(prof.S(t) + traj.states[i].sigma);
    RealVectorField Ba = prof.Bstar(t) + fresh.G[i];
    sol.B.push_back(Ba + traj.states[i].B_b);
    sol.B1.push_back(Ba + fresh.Bb[i]);
    sol.G.push_back(fresh.G[i]);
    sol.Bb.push_back(traj.states[i].B_b);
    ComplexScalarField ph = prof.phi(t);
    sol.phi.push_back(ph);
    sol.psi.push_back(psi[i]);
    ComplexScalarField vf(traj.grid);
    for (std::size_t m = 0; m < vf.v.size(); ++m) {
      double theta = ph.v[m].real() + psi[i].v[m].real();
      vf.v[m] = std::polar(1.0, -theta) * wf.v[m];
    }
    sol.v.push_back(std::move(vf));
  }
  return sol;
}

namespace {

void stencil_check(const PhysicalSolution& sol, int node) {
  if (node < 2 || node + 2 >= static_cast<int>(sol.times.size()))
    throw std::invalid_argument("time stencil needs two neighbors on each side of the node");
}

// d/d ln t of a node series by the centered 5-point stencil
template <typename Series>
auto dlambda(const PhysicalSolution& sol, const Series& f, int node) {
  std::array<double, 5> xs;
  for (int m = 0; m < 5; ++m) xs[m] = sol.lnt[node - 2 + m];
  std::array<double, 5> wgt = fd5_weights(xs, 2);
  auto out = f[node];
  if constexpr (std::is_same_v<decltype(out), ComplexScalarField>) {
    for (cdouble& z : out.v) z = 0;
    for (int m = 0; m < 5; ++m) axpy(cdouble(wgt[m], 0), f[node - 2 + m], out);
  } else {
    for (auto& comp : out.c) comp.assign(comp.size(), 0.0);
    for (int m = 0; m < 5; ++m) axpy(wgt[m], f[node - 2 + m], out);
  }
  return out;
}

} // namespace

ResidualPair ms_residual(const PhysicalSolution& sol, int node) {
  stencil_check(sol, node);
  const SpectralGrid& g = sol.grid;
  double t = sol.times[node];
  const ComplexScalarField& v = sol.v[node];
  const RealVectorField& B = sol.B[node];

  ComplexScalarField dv = dlambda(sol, sol.v, node); // dv/d ln t
  ComplexScalarField lap = apply_multiplier(v, [](double kx, double ky, double kz) {
    return cdouble(-(kx * kx + ky * ky + kz * kz), 0);
  });
  auto gv = gradient(v);
  ComplexScalarField xB = x_dot(B);
  ComplexScalarField gw = hartree_g(sol.w[node]);

  ComplexScalarField Ec(g);
  double it2 = 1.0 / (t * t);
  for (std::size_t m = 0; m < Ec.v.size(); ++m) {
    cdouble bgrad = B.c[0][m] * gv[0].v[m] + B.c[1][m] * gv[1].v[m] + B.c[2][m] * gv[2].v[m];
    double b2 = B.c[0][m] * B.c[0][m] + B.c[1][m] * B.c[1][m] + B.c[2][m] * B.c[2][m];
    Ec.v[m] = cdouble(0, 1.0 / t) * dv.v[m] + 0.5 * it2 * lap.v[m] -
              cdouble(0, it2) * bgrad + (xB.v[m].real() / t) * v.v[m] -
              0.5 * it2 * b2 * v.v[m] - (gw.v[m].real() / t) * v.v[m];
  }
  ResidualPair out;
  out.schrodinger = l2_norm(Ec); // = the physical L^2 defect (M, D unitary)
  double k = sol.profile->state().k;
  out.maxwell = norm(sol.B[node] - sol.B1[node], NormSpec{NormSpec::Kk, k + 1});
  return out;
}

double compute_energy(const PhysicalSolution& sol, int node) {
  stencil_check(sol, node);
  const SpectralGrid& g = sol.grid;
  double t = sol.times[node];
  const ComplexScalarField& v = sol.v[node];
  const RealVectorField& B = sol.B[node];
  double cell = std::pow(g.L, 3.0) / g.size();

  // covariant-gradient term: sum_j || t^{-1}(d_j - i B_j) v + i y_j v ||^2 / 2
  auto gv = gradient(v);
  double kinetic = 0;
  const int n = g.n;
  std::size_t m = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int kk = 0; kk < n; ++kk, ++m) {
        Vec3 y = {g.coord(i), g.coord(j), g.coord(kk)};
        for (int d = 0; d < 3; ++d) {
          cdouble T = (gv[d].v[m] - cdouble(0, B.c[d][m]) * v.v[m]) / t +
                      cdouble(0, y[d]) * v.v[m];
          kinetic += std::norm(T);
        }
      }
  kinetic *= 0.5 * cell;

  // magnetic term
  double magnetic = 0;
  {
    double c = l2_norm(curl(B));
    magnetic = 0.5 * c * c / t;
  }

  // electric term: F_{0j} in comoving variables
  ComplexScalarField gw = hartree_g(sol.w[node]);
  RealVectorField dB = dlambda(sol, sol.B, node); // t dB/dt
  RealVectorField X = B - dB + gradient_real(gw);
  for (int d = 0; d < 3; ++d) {
    ComplexScalarField comp(g);
    for (std::size_t q = 0; q < comp.v.size(); ++q) comp.v[q] = B.c[d][q];
    auto gc = gradient(comp);
    std::size_t q = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int kk = 0; kk < n; ++kk, ++q) {
          Vec3 y = {g.coord(i), g.coord(j), g.coord(kk)};
          X.c[d][q] += y[0] * gc[0].v[q].real() + y[1] * gc[1].v[q].real() +
                       y[2] * gc[2].v[q].real();
        }
  }
  double e = l2_norm(X);
  double electric = 0.5 * e * e / t;

  // Hartree coupling
  double coupling = 0;
  for (std::size_t q = 0; q < gw.v.size(); ++q)
    coupling += gw.v[q].real() * std::norm(sol.w[node].v[q]);
  coupling *= cell / t;

  return kinetic + magnetic + electric + coupling;
}

DecayFit fit_decay(const std::string& name, const std::vector<double>& times,
                   const std::vector<double>& values, double expected, int log_power,
                   double t_lo, double t_hi) {
  DecayFit fit;
  fit.series_name = name;
  fit.log_power = log_power;
  fit.expected = expected;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  double peak = 0;
  for (double v : values) peak = std::max(peak, v);
  if (peak == 0.0) {
    fit.zero_series = true;
    return fit;
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    double t = times[i];
    if (t < t_lo * (1.0 - 1e-9) || t > t_hi * (1.0 + 1e-9) || values[i] <= 0) continue;
    x.push_back(std::log(t));
    y.push_back(std::log(values[i]) - log_power * std::log(std::log(t)));
  }
  if (x.size() < 8 || std::exp(x.back() - x.front()) < 10.0 * (1.0 - 1e-9))
    throw std::invalid_argument("fit_decay: window must hold >= 8 nodes over >= 1 decade");
  LinearFit lf = linear_fit(x, y);
  fit.exponent = lf.slope;
  fit.r_squared = lf.r2;
  return fit;
}

NormSeries asymptotic_series(const PhysicalSolution& sol) {
  const ProfileTable& prof = *sol.profile;
  const SpectralGrid& g = sol.grid;
  double k = prof.state().k;
  NormSpec hk{NormSpec::Hk, k}, hk1{NormSpec::Hk, k + 1};
  NormSpec kk{NormSpec::Kk, k}, kk1{NormSpec::Kk, k + 1};

  const std::size_t nn = sol.times.size();
  std::vector<double> gal_k(nn), gal_k1(nn), lr2(nn), lrinf(nn), field(nn), field_m(nn),
      wdiff(nn), qs(nn), ss(nn), bbs(nn), gpsi(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    double t = sol.times[i];
    ComplexScalarField W = prof.W(t);
    // d = exp(-i psi) w - W: the phase-corrected deviation seen by the
    // Galilei-conjugated norms of the physical solution
    ComplexScalarField d(g);
    for (std::size_t m = 0; m < d.v.size(); ++m)
      d.v[m] = std::polar(1.0, -sol.psi[i].v[m].real()) * sol.w[i].v[m] - W.v[m];
    auto weighted = [&](const NormSpec& spec) {
      double a = norm(d, spec), acc = a * a;
      for (int ax = 0; ax < 3; ++ax) {
        double b = norm(coord_multiply(d, ax), spec);
        acc += b * b;
      }
      return std::sqrt(acc);
    };
    gal_k[i] = weighted(hk);
    gal_k1[i] = weighted(hk1);
    lr2[i] = l2_norm(d);
    lrinf[i] = std::pow(t, -1.5) * max_abs(d);
    RealVectorField dB = sol.G[i] + sol.Bb[i]; // B - B_a(W)
    field[i] = norm(dB, kk1);
    field_m[i] = norm(gradient_real(x_dot(dB)), kk1);
    ComplexScalarField wd = sol.w[i] - prof.state().w_plus;
    wdiff[i] = norm(wd, hk);
    qs[i] = norm(sol.w[i] - W, hk);
    ss[i] = norm(sol.s[i] - prof.S(t), kk);
    bbs[i] = norm(sol.Bb[i], kk1);
    gpsi[i] = l2_norm(gradient_real(sol.psi[i]));
  }

  NormSeries out;
  out.names = {"galilei_k", "galilei_k1", "lr_2",     "lr_inf", "field_k1",    "field_moment",
               "w_minus_wplus", "q_hk",   "sigma_kk", "bb_kk1", "grad_psi_l2"};
  out.values = {gal_k, gal_k1, lr2, lrinf, field, field_m, wdiff, qs, ss, bbs, gpsi};
  return out;
}

std::vector<DecayFit> verify_asymptotics(const PhysicalSolution& sol) {
  NormSeries ser = asymptotic_series(sol);
  double beta = sol.profile->state().beta;
  // envelope exponent and divided-out log power per series
  const double expected[] = {-1.0, -1.0, -1.0, -2.5, -1.0, -1.0, -beta, -1.0, -1.0, -1.0, -1.0};
  const int logs[] = {2, 2, 2, 2, 1, 1, 0, 1, 2, 1, 2};
  double t_lo = 2.0 * sol.times.front(), t_hi = sol.times.back();
  std::vector<DecayFit> fits;
  for (std::size_t j = 0; j < ser.names.size(); ++j)
    fits.push_back(
        fit_decay(ser.names[j], sol.times, ser.values[j], expected[j], logs[j], t_lo, t_hi));
  return fits;
}

} // namespace mss
