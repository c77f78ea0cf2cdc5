#include "mss/cauchy_solver.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

namespace mss {

namespace {

// local 4-node pchip window over a node-indexed series
template <typename Get>
double pchip4(const std::vector<double>& lnt, int i, double x, Get get) {
  int n = static_cast<int>(lnt.size());
  int lo = std::max(0, i - 1), hi = std::min(n - 1, i + 2);
  double xs[4], ys[4];
  int cnt = hi - lo + 1;
  for (int m = 0; m < cnt; ++m) {
    xs[m] = lnt[lo + m];
    ys[m] = get(lo + m);
  }
  return pchip_eval(xs, ys, cnt, x);
}

int locate(const std::vector<double>& lnt, double x) { return pchip_interval(lnt, x); }

} // namespace

int Trajectory::window_nodes() const {
  int c = 0;
  for (double t : times)
    if (t <= T_max * (1.0 + 1e-9)) ++c;
  return c;
}

bool Trajectory::is_zero() const {
  for (const AuxState& s : states)
    if (max_abs(s.q) > 0 || max_abs(s.sigma) > 0 || max_abs(s.B_b) > 0) return false;
  return true;
}

ComplexScalarField Trajectory::q_at(double t) const {
  ComplexScalarField out(grid);
  if (t > t_ext * (1.0 + 1e-12)) return out;
  if (t < times.front() * (1.0 - 1e-12))
    throw std::invalid_argument("Trajectory::q_at: time below coverage");
  double x = std::log(t);
  int i = locate(lnt, x);
  for (std::size_t m = 0; m < out.v.size(); ++m) {
    double re = pchip4(lnt, i, x, [&](int nd) { return states[nd].q.v[m].real(); });
    double im = pchip4(lnt, i, x, [&](int nd) { return states[nd].q.v[m].imag(); });
    out.v[m] = cdouble(re, im);
  }
  return out;
}

RealVectorField Trajectory::sigma_at(double t) const {
  RealVectorField out(grid);
  if (t > t_ext * (1.0 + 1e-12)) return out;
  if (t < times.front() * (1.0 - 1e-12))
    throw std::invalid_argument("Trajectory::sigma_at: time below coverage");
  double x = std::log(t);
  int i = locate(lnt, x);
  for (int d = 0; d < 3; ++d)
    for (std::size_t m = 0; m < out.c[d].size(); ++m)
      out.c[d][m] = pchip4(lnt, i, x, [&](int nd) { return states[nd].sigma.c[d][m]; });
  return out;
}

RealVectorField Trajectory::bb_at(double t) const {
  RealVectorField out(grid);
  out.div_free = true;
  if (t > t_ext * (1.0 + 1e-12)) return out;
  if (t < times.front() * (1.0 - 1e-12))
    throw std::invalid_argument("Trajectory::bb_at: time below coverage");
  double x = std::log(t);
  int i = locate(lnt, x);
  for (int d = 0; d < 3; ++d)
    for (std::size_t m = 0; m < out.c[d].size(); ++m)
      out.c[d][m] = pchip4(lnt, i, x, [&](int nd) { return states[nd].B_b.c[d][m]; });
  return out;
}

// ---- node grid ---------------------------------------------------------------

namespace {

std::vector<double> build_times(const SolverConfig& cfg, double* actual_tmax) {
  if (!(cfg.T > 1.5) || !(cfg.T_max > cfg.T) || !(cfg.rho > 1.0) || !(cfg.tail_rho > 1.0))
    throw std::invalid_argument("SolverConfig: need T > 1.5, T_max > T, rho > 1, tail_rho > 1");
  int nmain = std::max(1, (int)std::lround(std::log(cfg.T_max / cfg.T) / std::log(cfg.rho)));
  std::vector<double> ts;
  for (int i = 0; i <= nmain; ++i) ts.push_back(cfg.T * std::pow(cfg.rho, i));
  *actual_tmax = ts.back();
  double target = ts.back() * std::pow(10.0, cfg.tail_decades);
  double t = ts.back();
  while (t < target * (1.0 - 1e-9)) {
    t *= cfg.tail_rho;
    ts.push_back(t);
  }
  return ts;
}

} // namespace

Trajectory make_zero_trajectory(std::shared_ptr<const ProfileTable> prof,
                                const SolverConfig& cfg) {
  Trajectory tr;
  tr.grid = prof->grid();
  tr.profile = std::move(prof);
  tr.T = cfg.T;
  tr.rho = cfg.rho;
  tr.tail_rho = cfg.tail_rho;
  tr.times = build_times(cfg, &tr.T_max);
  tr.t_ext = tr.times.back();
  tr.lnt.resize(tr.times.size());
  for (std::size_t i = 0; i < tr.times.size(); ++i) tr.lnt[i] = std::log(tr.times[i]);
  tr.states.reserve(tr.times.size());
  for (double t : tr.times) {
    AuxState st;
    st.q = ComplexScalarField(tr.grid);
    st.sigma = RealVectorField(tr.grid);
    st.B_b = RealVectorField(tr.grid);
    st.B_b.div_free = true;
    st.t = t;
    tr.states.push_back(std::move(st));
  }
  return tr;
}

double required_profile_span(const SpectralGrid& g, const SolverConfig& cfg) {
  double tmax;
  std::vector<double> ts = build_times(cfg, &tmax);
  double nu_end = std::max(2.0, 0.5 * g.n);
  TimeKernelQuadrature proto; // defaults carry the mean-extension factor
  return ts.back() * nu_end * proto.mean_extension_factor * 1.05;
}

std::shared_ptr<const ProfileTable> make_profile(const AsymptoticState& st,
                                                 const SpectralGrid& g,
                                                 const SolverConfig& cfg) {
  TimeKernelQuadrature quad =
      TimeKernelQuadrature::for_grid(g, cfg.quad_panels, cfg.quad_gl, 0.0);
  return std::make_shared<ProfileTable>(st, g, required_profile_span(g, cfg),
                                        cfg.profile_nodes_per_decade, quad);
}

// ---- interaction-picture stepper ------------------------------------------------

namespace {

struct PS {
  ComplexScalarField p;
  RealVectorField s;
};

void add_scaled(PS& y, double a, const PS& k) {
  axpy(cdouble(a, 0), k.p, y.p);
  axpy(a, k.s, y.s);
}

double diff_norm(const PS& a, const PS& b) {
  double dq = 0, ds = 0;
  for (std::size_t m = 0; m < a.p.v.size(); ++m) dq += std::norm(a.p.v[m] - b.p.v[m]);
  for (int d = 0; d < 3; ++d)
    for (std::size_t m = 0; m < a.s.c[d].size(); ++m) {
      double e = a.s.c[d][m] - b.s.c[d][m];
      ds += e * e;
    }
  const SpectralGrid& g = a.p.grid;
  double cell = std::pow(g.L, 3.0) / g.size();
  return std::sqrt((dq + ds) * cell);
}

PS rhs(const std::function<const StepBundle&(double)>& bundle_at, double lam, const PS& y) {
  double t = std::exp(lam);
  const StepBundle& b = bundle_at(t);
  const SpectralGrid& g = y.p.grid;
  ComplexScalarField q = free_propagator(y.p, -1.0 / t);
  auto gq = gradient(q);
  ComplexScalarField dq(g);
  double it2 = 1.0 / (t * t);
  for (std::size_t m = 0; m < dq.v.size(); ++m) {
    cdouble trans = b.s_plus_B.c[0][m] * gq[0].v[m] + b.s_plus_B.c[1][m] * gq[1].v[m] +
                    b.s_plus_B.c[2][m] * gq[2].v[m] + 0.5 * b.div_sB.v[m].real() * q.v[m];
    dq.v[m] = it2 * trans - cdouble(0, 0.5 * it2) * b.pot2.v[m].real() * q.v[m] +
              cdouble(0, 1.0 / t) * b.pot.v[m].real() * q.v[m] + b.source_q.v[m];
  }
  PS out;
  out.p = free_propagator(dq, 1.0 / t);
  for (cdouble& z : out.p.v) z *= t; // d/d ln t
  out.s = RealVectorField(g);
  std::array<ComplexScalarField, 3> gs;
  for (int d = 0; d < 3; ++d) {
    ComplexScalarField comp(g);
    for (std::size_t m = 0; m < comp.v.size(); ++m) comp.v[m] = y.s.c[d][m];
    gs = gradient(comp);
    for (std::size_t m = 0; m < out.s.c[d].size(); ++m) {
      double adv = b.s.c[0][m] * gs[0].v[m].real() + b.s.c[1][m] * gs[1].v[m].real() +
                   b.s.c[2][m] * gs[2].v[m].real();
      out.s.c[d][m] = t * (it2 * adv + b.source_sigma.c[d][m]);
    }
  }
  return out;
}

PS rk4(const std::function<const StepBundle&(double)>& B, double lam, double h, const PS& y0) {
  PS k1 = rhs(B, lam, y0);
  PS y = y0;
  add_scaled(y, 0.5 * h, k1);
  PS k2 = rhs(B, lam + 0.5 * h, y);
  y = y0;
  add_scaled(y, 0.5 * h, k2);
  PS k3 = rhs(B, lam + 0.5 * h, y);
  y = y0;
  add_scaled(y, h, k3);
  PS k4 = rhs(B, lam + h, y);
  y = y0;
  add_scaled(y, h / 6.0, k1);
  add_scaled(y, h / 3.0, k2);
  add_scaled(y, h / 3.0, k3);
  add_scaled(y, h / 6.0, k4);
  return y;
}

} // namespace

void step_linearized(const std::function<const StepBundle&(double)>& bundle_at,
                     double step_tol, double t_from, double t_to, ComplexScalarField& q,
                     RealVectorField& sigma) {
  if (t_from == t_to) return;
  double la = std::log(t_from), lb = std::log(t_to);
  PS y{free_propagator(q, 1.0 / t_from), sigma};
  double lam = la;
  double h = lb - la;
  const double hmin = std::abs(lb - la) / 4096.0;
  int guard = 0;
  while (std::abs(lb - lam) > 1e-14 * std::max(1.0, std::abs(lb))) {
    if (++guard > 100000) throw std::runtime_error("step_linearized: step loop stalled");
    double rem = lb - lam;
    if (std::abs(h) > std::abs(rem) || h * rem < 0) h = rem;
    PS y1 = rk4(bundle_at, lam, h, y);
    PS ya = rk4(bundle_at, lam, 0.5 * h, y);
    PS y2 = rk4(bundle_at, lam + 0.5 * h, 0.5 * h, ya);
    double err = diff_norm(y1, y2) / 15.0;
    double budget = step_tol * std::abs(h) + 1e-300;
    if (err > budget && std::abs(h) > hmin) {
      h *= 0.5;
      continue;
    }
    y = std::move(y2);
    lam += h;
    if (err < budget / 64.0) h *= 2.0;
  }
  q = free_propagator(y.p, -1.0 / t_to);
  sigma = std::move(y.s);
}

// ---- frozen-coefficient sweep context --------------------------------------------

namespace {

RealVectorField project_gradient(const RealVectorField& v) {
  // exact complement of the transverse projector: idempotent mode by mode,
  // including the Nyquist shell the odd-derivative multipliers zero out
  RealVectorField out = v - leray_project(v);
  out.div_free = false;
  return out;
}

struct SweepContext {
  const Trajectory* in;
  const ProfileTable* prof;
  SpectralGrid grid;
  TimeKernelQuadrature quad;
  double beta;
  std::vector<RealVectorField> moment_nodes, mb_nodes, G_nodes, Bb_nodes;
  std::vector<double> tail_lnt;
  std::vector<RealVectorField> mb_tail;
  mutable std::map<double, StepBundle> memo;

  explicit SweepContext(const Trajectory& traj, const SolverConfig& cfg)
      : in(&traj), prof(traj.profile.get()), grid(traj.grid) {
    quad = TimeKernelQuadrature::for_grid(grid, cfg.quad_panels, cfg.quad_gl, 0.0);
    beta = prof->state().beta;
    bool zero_profile = (max_abs(prof->state().w_plus) == 0.0);

    // profile closure of the current integrand beyond the data grid
    double span_end = traj.t_ext * quad.nu_end() * quad.mean_extension_factor * 1.02;
    std::vector<double> tail_t = log_spaced(traj.t_ext, span_end, 25);
    tail_lnt.resize(tail_t.size());
    for (std::size_t i = 0; i < tail_t.size(); ++i) tail_lnt[i] = std::log(tail_t[i]);
    mb_tail.reserve(tail_t.size());
    for (double tp : tail_t)
      mb_tail.push_back(zero_profile ? RealVectorField(grid) : prof->Mb_profile(tp));

    const std::size_t nn = traj.times.size();
    bool zero_q = true;
    for (const AuxState& s : traj.states)
      if (max_abs(s.q) > 0) zero_q = false;

    // G = B_a(q, q+2W) from the input iterate
    moment_nodes.reserve(nn);
    for (std::size_t i = 0; i < nn; ++i) {
      if (zero_q) {
        moment_nodes.emplace_back(grid);
        continue;
      }
      ComplexScalarField W = prof->W(traj.times[i]);
      const ComplexScalarField& qf = traj.states[i].q;
      std::vector<double> rho(grid.size());
      for (std::size_t m = 0; m < rho.size(); ++m)
        rho[m] = (std::conj(qf.v[m]) * (qf.v[m] + 2.0 * W.v[m])).real();
      moment_nodes.push_back(coord_weight(rho, grid));
    }
    auto moment_cb = [this](double tp) -> RealVectorField {
      if (tp > in->t_ext * (1.0 + 1e-12)) return RealVectorField(grid);
      return interp_series(in->lnt, moment_nodes, tp);
    };
    G_nodes.reserve(nn);
    for (std::size_t i = 0; i < nn; ++i) {
      if (zero_q) {
        RealVectorField z(grid);
        z.div_free = true;
        G_nodes.push_back(std::move(z));
      } else {
        G_nodes.push_back(leray_project(apply_Fj(moment_cb, 0, traj.times[i], quad, grid)));
      }
    }

    // current of the input iterate (with its own B_b), then the new B_b
    mb_nodes.reserve(nn);
    for (std::size_t i = 0; i < nn; ++i) {
      if (zero_profile && zero_q && max_abs(traj.states[i].sigma) == 0 &&
          max_abs(traj.states[i].B_b) == 0) {
        mb_nodes.emplace_back(grid);
        continue;
      }
      double tn = traj.times[i];
      ComplexScalarField w = prof->W(tn) + traj.states[i].q;
      RealVectorField s = prof->S(tn) + traj.states[i].sigma;
      RealVectorField B = prof->Bstar(tn) + G_nodes[i] + traj.states[i].B_b;
      mb_nodes.push_back(current_Mb(w, s, B));
    }
    auto mb_cb = [this](double tp) -> RealVectorField {
      if (tp > in->t_ext * (1.0 + 1e-12)) return interp_series(tail_lnt, mb_tail, tp);
      return interp_series(in->lnt, mb_nodes, tp);
    };
    Bb_nodes.reserve(nn);
    for (std::size_t i = 0; i < nn; ++i) {
      if (zero_profile) {
        RealVectorField z(grid);
        z.div_free = true;
        Bb_nodes.push_back(std::move(z));
      } else {
        double tn = traj.times[i];
        Bb_nodes.push_back((1.0 / tn) *
                           leray_project(apply_Fj(mb_cb, 1, tn, quad, grid)));
      }
    }
  }

  RealVectorField interp_vec(const std::vector<RealVectorField>& f, double t) const {
    if (t > in->t_ext * (1.0 + 1e-12)) return RealVectorField(grid);
    return interp_series(in->lnt, f, t);
  }

  const StepBundle& at(double t) const {
    auto it = memo.find(t);
    if (it != memo.end()) return it->second;
    if (memo.size() > 64) memo.clear();
    StepBundle b(grid);
    ComplexScalarField W = prof->W(t);
    RealVectorField S = prof->S(t);
    RealVectorField Bstar = prof->Bstar(t);
    RealVectorField G = interp_vec(G_nodes, t);
    RealVectorField Bb = interp_vec(Bb_nodes, t);
    RealVectorField sigma_in = in->sigma_at(t);
    ComplexScalarField q_in = in->q_at(t);

    RealVectorField s_in = S + sigma_in;
    RealVectorField Ba = Bstar + G;
    RealVectorField B = Ba + Bb;
    // b.s stays zero: the whole sigma derivative sits in source_sigma
    // (the frozen-iterate s there already carries the advected part)
    b.s_plus_B = s_in + B;
    b.div_sB = divergence(b.s_plus_B);
    for (std::size_t m = 0; m < b.pot2.v.size(); ++m) {
      double bs = B.c[0][m] * s_in.c[0][m] + B.c[1][m] * s_in.c[1][m] + B.c[2][m] * s_in.c[2][m];
      double b2 = B.c[0][m] * B.c[0][m] + B.c[1][m] * B.c[1][m] + B.c[2][m] * B.c[2][m];
      b.pot2.v[m] = 2.0 * bs + b2;
    }
    ComplexScalarField xba = x_dot(Ba);
    SplitFields parts = split_short_long(xba, SplitSpec{beta, t});
    ComplexScalarField xbb = x_dot(Bb);
    for (std::size_t m = 0; m < b.pot.v.size(); ++m)
      b.pot.v[m] = cdouble(parts.short_part.v[m].real() + xbb.v[m].real(), 0.0);

    // full q source: the frozen-coefficient operator applied to the profile W
    auto gW = gradient(W);
    double it2 = 1.0 / (t * t);
    for (std::size_t m = 0; m < b.source_q.v.size(); ++m) {
      cdouble trans = b.s_plus_B.c[0][m] * gW[0].v[m] + b.s_plus_B.c[1][m] * gW[1].v[m] +
                      b.s_plus_B.c[2][m] * gW[2].v[m] + 0.5 * b.div_sB.v[m].real() * W.v[m];
      b.source_q.v[m] = it2 * trans - cdouble(0, 0.5 * it2) * b.pot2.v[m].real() * W.v[m] +
                        cdouble(0, 1.0 / t) * b.pot.v[m].real() * W.v[m];
    }

    // sigma source: ((sigma_in + S) . grad) S / t^2 + grad(g(q, q+2W) - (x.G)_L) / t
    // gradient form of the (s.grad)s term: discretely the advective form
    // differs by aliasing of the near-Nyquist tail of S, which would break
    // the exact gradient structure grad(psi) = sigma of the phase system
    ComplexScalarField s2(grid);
    for (std::size_t m = 0; m < s2.v.size(); ++m) {
      double a0 = s_in.c[0][m], a1 = s_in.c[1][m], a2 = s_in.c[2][m];
      s2.v[m] = cdouble(0.5 * (a0 * a0 + a1 * a1 + a2 * a2), 0.0);
    }
    RealVectorField gs2 = gradient_real(s2);
    ComplexScalarField q2(grid);
    for (std::size_t m = 0; m < q2.v.size(); ++m) q2.v[m] = q_in.v[m] + 2.0 * W.v[m];
    ComplexScalarField hart = hartree_g(q_in, q2);
    ComplexScalarField xg = x_dot(G);
    SplitFields gparts = split_short_long(xg, SplitSpec{beta, t});
    ComplexScalarField pot_phase = hart - gparts.long_part;
    RealVectorField gp = gradient_real(pot_phase);
    for (int d = 0; d < 3; ++d)
      for (std::size_t m = 0; m < b.source_sigma.c[d].size(); ++m)
        b.source_sigma.c[d][m] = it2 * gs2.c[d][m] + gp.c[d][m] / t;

    auto res = memo.emplace(t, std::move(b));
    return res.first->second;
  }
};

} // namespace

Trajectory gamma_map(const Trajectory& in, const GammaMode& mode, const SolverConfig& cfg) {
  Trajectory out = in;
  const std::size_t nn = in.times.size();
  if (max_abs(in.profile->state().w_plus) == 0.0 && in.is_zero() &&
      (mode.kind != GammaMode::finite_t0 ||
       (max_abs(mode.data->q) == 0 && max_abs(mode.data->sigma) == 0))) {
    return out; // Gamma(0) = 0 when the profiles vanish
  }

  SweepContext ctx(in, cfg);
  std::function<const StepBundle&(double)> bundle_at = [&ctx](double t) -> const StepBundle& {
    return ctx.at(t);
  };

  auto store = [&](std::size_t i, const ComplexScalarField& q, const RealVectorField& sig) {
    out.states[i].q = q;
    out.states[i].sigma = project_gradient(sig);
    out.states[i].B_b = ctx.Bb_nodes[i];
    out.states[i].t = in.times[i];
  };

  if (mode.kind == GammaMode::infinity) {
    ComplexScalarField q(in.grid);
    RealVectorField sig(in.grid);
    {
      // profile closure at t_ext: sigma = grad psi with psi reduced to the
      // -|S|^2/(2t'^2) integral beyond the node grid (same quadrature as the
      // psi tail, so the gradient relation survives the truncation)
      double lo = std::log(in.t_ext), hi = std::log(in.profile->t_hi());
      int panels = std::max(4, (int)std::lround(1.2 * (hi - lo)));
      Quadrature pq = panel_quadrature(log_spaced(lo, hi, panels + 1), 6);
      ComplexScalarField tail(in.grid);
      auto add = [&](double lam, double w) {
        double tp = std::exp(lam);
        RealVectorField S = in.profile->S(tp);
        for (std::size_t m = 0; m < tail.v.size(); ++m) {
          double s2 = S.c[0][m] * S.c[0][m] + S.c[1][m] * S.c[1][m] + S.c[2][m] * S.c[2][m];
          tail.v[m] += cdouble(w * s2 / (2.0 * tp), 0.0);
        }
      };
      for (std::size_t qi = 0; qi < pq.x.size(); ++qi) add(pq.x[qi], pq.w[qi]);
      add(hi, 1.0); // e^{-lambda} decay: close with the endpoint value
      sig = gradient_real(cdouble(-1, 0) * tail);
    }
    store(nn - 1, q, sig);
    for (std::size_t i = nn - 1; i-- > 0;) {
      step_linearized(bundle_at, cfg.step_tol, in.times[i + 1], in.times[i], q, sig);
      store(i, q, sig);
    }
  } else {
    // pin the data at the node nearest t0, integrate both ways
    std::size_t i0 = 0;
    double best = 1e300;
    for (std::size_t i = 0; i < nn; ++i) {
      double d = std::abs(std::log(in.times[i] / mode.t0));
      if (d < best) {
        best = d;
        i0 = i;
      }
    }
    ComplexScalarField q = mode.data->q;
    RealVectorField sig = mode.data->sigma;
    store(i0, q, sig);
    ComplexScalarField qf = q;
    RealVectorField sf = sig;
    for (std::size_t i = i0; i + 1 < nn; ++i) {
      step_linearized(bundle_at, cfg.step_tol, in.times[i], in.times[i + 1], qf, sf);
      store(i + 1, qf, sf);
    }
    ComplexScalarField qb = q;
    RealVectorField sb = sig;
    for (std::size_t i = i0; i-- > 0;) {
      step_linearized(bundle_at, cfg.step_tol, in.times[i + 1], in.times[i], qb, sb);
      store(i, qb, sb);
    }
  }
  return out;
}

// ---- weighted norms --------------------------------------------------------------

namespace {

IterationReport norms_impl(const Trajectory& tr,
                           const std::function<const AuxState&(int)>& other, double sign) {
  const AsymptoticState& st = tr.profile->state();
  double k = st.k, ab = st.alpha * st.beta, beta = st.beta;
  IterationReport rep;
  NormSpec hk{NormSpec::Hk, k}, hk1{NormSpec::Hk, k + 1};
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    double t = tr.times[i], lt = tr.lnt[i];
    ComplexScalarField q = tr.states[i].q;
    RealVectorField sg = tr.states[i].sigma;
    RealVectorField bb = tr.states[i].B_b;
    if (sign != 0) {
      const AuxState& o = other(static_cast<int>(i));
      axpy(cdouble(sign, 0), o.q, q);
      axpy(sign, o.sigma, sg);
      axpy(sign, o.B_b, bb);
    }
    double aq = norm(q, hk);
    double xq2 = 0;
    for (int d = 0; d < 3; ++d) {
      double nd = norm(coord_multiply(q, d), hk);
      xq2 += nd * nd;
    }
    rep.Y = std::max(rep.Y, t / lt * std::max(aq, std::sqrt(xq2)));
    rep.Y1 = std::max(rep.Y1, norm(q, hk1) / (lt / t + std::pow(t, -ab)));
    double* Z[3] = {&rep.Z0, &rep.Z1, &rep.Z2};
    for (int j = 0; j < 3; ++j) {
      NormSpec kk{NormSpec::Kk, k + j};
      double w = t / (lt * (lt + std::pow(t, j * beta)));
      *Z[j] = std::max(*Z[j], w * norm(sg, kk));
    }
    NormSpec kk1{NormSpec::Kk, k + 1};
    double nb = std::max(norm(bb, kk1), norm(x_dot(bb), kk1));
    rep.N = std::max(rep.N, t / lt * nb);
  }
  return rep;
}

double report_max(const IterationReport& r) {
  return std::max({r.Y, r.Y1, r.Z0, r.Z1, r.Z2, r.N});
}

} // namespace

IterationReport weighted_norms(const Trajectory& traj) {
  return norms_impl(traj, {}, 0.0);
}

double weighted_distance(const Trajectory& a, const Trajectory& b) {
  if (a.times.size() != b.times.size())
    throw std::invalid_argument("weighted_distance: node grids differ");
  IterationReport rep =
      norms_impl(a, [&b](int i) -> const AuxState& { return b.states[i]; }, -1.0);
  return report_max(rep);
}

// ---- fixed-point drivers ------------------------------------------------------------

namespace {

Trajectory blend(const Trajectory& prev, Trajectory&& next, double ur) {
  if (ur == 1.0) return std::move(next);
  Trajectory out = std::move(next);
  for (std::size_t i = 0; i < out.states.size(); ++i) {
    AuxState& s = out.states[i];
    const AuxState& p = prev.states[i];
    for (std::size_t m = 0; m < s.q.v.size(); ++m)
      s.q.v[m] = p.q.v[m] + ur * (s.q.v[m] - p.q.v[m]);
    for (int d = 0; d < 3; ++d)
      for (std::size_t m = 0; m < s.sigma.c[d].size(); ++m) {
        s.sigma.c[d][m] = p.sigma.c[d][m] + ur * (s.sigma.c[d][m] - p.sigma.c[d][m]);
        s.B_b.c[d][m] = p.B_b.c[d][m] + ur * (s.B_b.c[d][m] - p.B_b.c[d][m]);
      }
  }
  return out;
}

Trajectory picard(std::shared_ptr<const ProfileTable> prof, const SolverConfig& cfg,
                  const GammaMode& mode, std::vector<IterationReport>* history) {
  Trajectory traj = make_zero_trajectory(std::move(prof), cfg);
  double prev_dist = -1;
  int bad = 0;
  std::vector<double> ratios;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    Trajectory next = blend(traj, gamma_map(traj, mode, cfg), cfg.under_relaxation);
    double dist = weighted_distance(next, traj);
    IterationReport rep = weighted_norms(next);
    rep.iterate_index = it;
    rep.distance = dist;
    if (it >= 2 && prev_dist > 0) {
      rep.contraction_ratio = dist / prev_dist;
      ratios.push_back(rep.contraction_ratio);
    }
    if (history) history->push_back(rep);
    traj = std::move(next);
    if (dist <= cfg.tol) return traj;
    if (it >= 2 && prev_dist > 0) {
      bad = (rep.contraction_ratio >= 1.0) ? bad + 1 : 0;
      if (bad >= 3) throw NonContractionError(ratios);
    }
    prev_dist = dist;
  }
  throw std::runtime_error("fixed point did not reach tolerance within max_iters");
}

} // namespace

Trajectory solve_at_infinity(std::shared_ptr<const ProfileTable> prof, const SolverConfig& cfg,
                             std::vector<IterationReport>* history) {
  GammaMode mode;
  mode.kind = GammaMode::infinity;
  return picard(std::move(prof), cfg, mode, history);
}

Trajectory solve_finite_t0(std::shared_ptr<const ProfileTable> prof, double t0,
                           const AuxState& data, const SolverConfig& cfg,
                           std::vector<IterationReport>* history) {
  if (t0 < cfg.T || t0 > cfg.T_max)
    throw std::invalid_argument("solve_finite_t0: t0 outside [T, T_max]");
  GammaMode mode;
  mode.kind = GammaMode::finite_t0;
  mode.t0 = t0;
  mode.data = &data;
  return picard(std::move(prof), cfg, mode, history);
}

std::pair<double, double> trajectory_residual(const Trajectory& traj, const SolverConfig& cfg) {
  SweepContext ctx(traj, cfg);
  std::function<const StepBundle&(double)> bundle_at = [&ctx](double t) -> const StepBundle& {
    return ctx.at(t);
  };
  double worst_q = 0, worst_s = 0;
  int nw = traj.window_nodes();
  for (int i = 0; i + 1 < nw; ++i) {
    ComplexScalarField q = traj.states[i].q;
    RealVectorField sg = traj.states[i].sigma;
    step_linearized(bundle_at, cfg.step_tol, traj.times[i], traj.times[i + 1], q, sg);
    double h = traj.lnt[i + 1] - traj.lnt[i];
    axpy(cdouble(-1, 0), traj.states[i + 1].q, q);
    axpy(-1.0, traj.states[i + 1].sigma, sg);
    worst_q = std::max(worst_q, l2_norm(q) / h);
    worst_s = std::max(worst_s, l2_norm(sg) / h);
  }
  return {worst_q, worst_s};
}

std::vector<RealVectorField> trajectory_G_nodes(const Trajectory& traj,
                                                const TimeKernelQuadrature& quad) {
  const SpectralGrid& g = traj.grid;
  const ProfileTable& prof = *traj.profile;
  std::vector<RealVectorField> moments;
  bool zero_q = true;
  for (const AuxState& s : traj.states)
    if (max_abs(s.q) > 0) zero_q = false;
  std::vector<RealVectorField> out;
  out.reserve(traj.times.size());
  if (zero_q) {
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      RealVectorField z(g);
      z.div_free = true;
      out.push_back(std::move(z));
    }
    return out;
  }
  moments.reserve(traj.times.size());
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    ComplexScalarField W = prof.W(traj.times[i]);
    const ComplexScalarField& qf = traj.states[i].q;
    std::vector<double> rho(g.size());
    for (std::size_t m = 0; m < rho.size(); ++m)
      rho[m] = (std::conj(qf.v[m]) * (qf.v[m] + 2.0 * W.v[m])).real();
    moments.push_back(coord_weight(rho, g));
  }
  auto moment_cb = [&](double tp) -> RealVectorField {
    if (tp > traj.t_ext * (1.0 + 1e-12)) return RealVectorField(g);
    return interp_series(traj.lnt, moments, tp);
  };
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    out.push_back(leray_project(apply_Fj(moment_cb, 0, traj.times[i], quad, g)));
  return out;
}

FreshFields trajectory_fresh_fields(const Trajectory& traj, const SolverConfig& cfg) {
  SweepContext ctx(traj, cfg);
  FreshFields out;
  out.G = std::move(ctx.G_nodes);
  out.Bb = std::move(ctx.Bb_nodes);
  return out;
}

// ---- checkpoint I/O ----------------------------------------------------------------

void save_trajectory(const std::string& dir, const Trajectory& traj) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json idx;
  idx["n"] = traj.grid.n;
  idx["L"] = traj.grid.L;
  idx["T"] = traj.T;
  idx["T_max"] = traj.T_max;
  idx["rho"] = traj.rho;
  idx["tail_rho"] = traj.tail_rho;
  idx["t_ext"] = traj.t_ext;
  idx["beta"] = traj.profile->state().beta;
  idx["alpha"] = traj.profile->state().alpha;
  idx["k"] = traj.profile->state().k;
  idx["times"] = traj.times;
  std::ofstream f(dir + "/index.json");
  if (!f) throw std::runtime_error("save_trajectory: cannot write " + dir);
  f << idx.dump(2) << "\n";
  char name[64];
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    std::snprintf(name, sizeof name, "/q_%05zu.fld", i);
    write_field(dir + name, traj.states[i].q);
    std::snprintf(name, sizeof name, "/sigma_%05zu.fld", i);
    write_field(dir + name, traj.states[i].sigma);
    std::snprintf(name, sizeof name, "/bb_%05zu.fld", i);
    write_field(dir + name, traj.states[i].B_b);
  }
}

Trajectory load_trajectory(const std::string& dir, std::shared_ptr<const ProfileTable> prof) {
  std::ifstream f(dir + "/index.json");
  if (!f) throw std::runtime_error("load_trajectory: cannot read " + dir);
  nlohmann::json idx = nlohmann::json::parse(f);
  Trajectory tr;
  tr.grid.n = idx.at("n").get<int>();
  tr.grid.L = idx.at("L").get<double>();
  if (tr.grid != prof->grid())
    throw std::runtime_error("load_trajectory: grid does not match the profile table");
  tr.profile = std::move(prof);
  tr.T = idx.at("T").get<double>();
  tr.T_max = idx.at("T_max").get<double>();
  tr.rho = idx.at("rho").get<double>();
  tr.tail_rho = idx.at("tail_rho").get<double>();
  tr.t_ext = idx.at("t_ext").get<double>();
  tr.times = idx.at("times").get<std::vector<double>>();
  tr.lnt.resize(tr.times.size());
  for (std::size_t i = 0; i < tr.times.size(); ++i) tr.lnt[i] = std::log(tr.times[i]);
  char name[64];
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    AuxState st;
    std::snprintf(name, sizeof name, "/q_%05zu.fld", i);
    st.q = read_scalar_field(dir + name);
    std::snprintf(name, sizeof name, "/sigma_%05zu.fld", i);
    st.sigma = read_vector_field(dir + name);
    std::snprintf(name, sizeof name, "/bb_%05zu.fld", i);
    st.B_b = read_vector_field(dir + name);
    st.B_b.div_free = true;
    st.t = tr.times[i];
    tr.states.push_back(std::move(st));
  }
  return tr;
}

} // namespace mss
