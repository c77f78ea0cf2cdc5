#include "mss/profiles.hpp"

#include <cmath>
#include <stdexcept>

namespace mss {

namespace {

double sobolev_weighted(const ComplexScalarField& f, double order) {
  NormSpec spec;
  spec.kind = NormSpec::Hk;
  spec.order = order;
  return norm(f, spec);
}

} // namespace

AsymptoticState AsymptoticState::make(ComplexScalarField w_plus, double alpha, double beta,
                                      double k) {
  if (!(beta > 0.0 && beta < 0.5)) throw std::invalid_argument("AsymptoticState: beta not in (0, 1/2)");
  if (!(alpha > 1.0)) throw std::invalid_argument("AsymptoticState: alpha must exceed 1");
  if (beta * (alpha + 1.0) < 1.0)
    throw std::invalid_argument("AsymptoticState: beta*(alpha+1) must be >= 1");
  if (!(k > 1.5)) throw std::invalid_argument("AsymptoticState: k must exceed 3/2");
  AsymptoticState st;
  st.alpha = alpha;
  st.beta = beta;
  st.k = k;
  double n1 = sobolev_weighted(w_plus, k + alpha + 1.0);
  double n2 = 0;
  for (int d = 0; d < 3; ++d) {
    double nd = sobolev_weighted(coord_multiply(w_plus, d), k + alpha);
    n2 += nd * nd;
  }
  st.a_plus = std::max(n1, std::sqrt(n2));
  st.w_plus = std::move(w_plus);
  return st;
}

ComplexScalarField build_W(const AsymptoticState& st, double t) {
  if (!(t >= 1.0)) throw std::invalid_argument("build_W: t must be >= 1");
  return free_propagator(st.w_plus, -1.0 / t);
}

ComplexScalarField transport_Q(const RealVectorField& s, const ComplexScalarField& w) {
  check_compatible(s.grid, w.grid, "transport_Q");
  auto gw = gradient(w);
  ComplexScalarField div_s = divergence(s);
  ComplexScalarField out(w.grid);
  for (std::size_t m = 0; m < out.v.size(); ++m)
    out.v[m] = s.c[0][m] * gw[0].v[m] + s.c[1][m] * gw[1].v[m] + s.c[2][m] * gw[2].v[m] +
               0.5 * div_s.v[m].real() * w.v[m];
  return out;
}

namespace {

// scalar integrand of the phase integrals: g(W) - (x . B_a(W))_L at time tp
ComplexScalarField phase_integrand(const AsymptoticState& st, double tp,
                                   const std::function<RealVectorField(double)>& bstar_at) {
  ComplexScalarField W = build_W(st, tp);
  ComplexScalarField gW = hartree_g(W);
  ComplexScalarField xba = x_dot(bstar_at(tp));
  SplitSpec split{st.beta, tp};
  SplitFields parts = split_short_long(xba, split);
  return gW - parts.long_part;
}

// cumulative log-time integral of t'^{-1} F(t') over [1, t] (flat measure in ln t')
ComplexScalarField accumulate_phase(const AsymptoticState& st, const SpectralGrid& g, double t,
                                    int nodes_per_decade,
                                    const std::function<RealVectorField(double)>& bstar_at) {
  ComplexScalarField acc(g);
  if (t <= 1.0) return acc;
  int panels = std::max(1, static_cast<int>(std::ceil(nodes_per_decade * std::log10(t) / 4.0)));
  std::vector<double> bounds(panels + 1);
  double lt = std::log(t);
  for (int i = 0; i <= panels; ++i) bounds[i] = lt * i / panels;
  Quadrature gl = gauss_legendre(4);
  for (int p = 0; p < panels; ++p) {
    double mid = 0.5 * (bounds[p] + bounds[p + 1]);
    double half = 0.5 * (bounds[p + 1] - bounds[p]);
    for (std::size_t i = 0; i < gl.x.size(); ++i) {
      double tp = std::exp(mid + half * gl.x[i]);
      axpy(half * gl.w[i], phase_integrand(st, tp, bstar_at), acc);
    }
  }
  return acc;
}

} // namespace

RealVectorField compute_Bstar(const AsymptoticState& st, const SpectralGrid& g, double t,
                              const TimeKernelQuadrature& quad) {
  check_compatible(st.w_plus.grid, g, "compute_Bstar");
  if (max_abs(st.w_plus) == 0.0) {
    RealVectorField z(g);
    z.div_free = true;
    return z;
  }
  AmplitudePair ws;
  ws.w1 = [&st](double tp) { return build_W(st, tp); };
  ws.w2 = ws.w1;
  return compute_Ba(ws, t, quad, g);
}

RealVectorField build_S(const AsymptoticState& st, const SpectralGrid& g, double t,
                        ProfileVariant variant, const TimeKernelQuadrature& quad,
                        int nodes_per_decade) {
  check_compatible(st.w_plus.grid, g, "build_S");
  if (!(t >= 1.0)) throw std::invalid_argument("build_S: t must be >= 1");
  if (max_abs(st.w_plus) == 0.0 || t == 1.0) {
    RealVectorField z(g);
    return z;
  }
  switch (variant) {
    case ProfileVariant::full: {
      auto bstar_at = [&](double tp) { return compute_Bstar(st, g, tp, quad); };
      ComplexScalarField phi = accumulate_phase(st, g, t, nodes_per_decade, bstar_at);
      return gradient_real(phi);
    }
    case ProfileVariant::simplified: {
      // frozen amplitude: B_a(w+) is time-independent, only the cutoff moves
      AmplitudePair ws;
      ws.w1 = [&st](double) { return st.w_plus; };
      ws.w2 = ws.w1;
      RealVectorField bhat = compute_Ba(ws, t, quad, g);
      ComplexScalarField xb = x_dot(bhat);
      ComplexScalarField acc(g);
      int panels = std::max(1, static_cast<int>(std::ceil(nodes_per_decade * std::log10(t) / 4.0)));
      Quadrature gl = gauss_legendre(4);
      double lt = std::log(t);
      for (int p = 0; p < panels; ++p) {
        double a = lt * p / panels, b = lt * (p + 1) / panels;
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t i = 0; i < gl.x.size(); ++i) {
          double tp = std::exp(mid + half * gl.x[i]);
          SplitFields parts = split_short_long(xb, SplitSpec{st.beta, tp});
          axpy(-half * gl.w[i], parts.long_part, acc);
        }
      }
      ComplexScalarField gw = hartree_g(st.w_plus);
      axpy(lt, gw, acc);
      return gradient_real(acc);
    }
    case ProfileVariant::closed_form: {
      AmplitudePair ws;
      ws.w1 = [&st](double) { return st.w_plus; };
      ws.w2 = ws.w1;
      RealVectorField bhat = compute_Ba(ws, t, quad, g);
      ComplexScalarField xb = x_dot(bhat);
      double lt = std::log(t);
      double inv_beta = 1.0 / st.beta;
      ComplexScalarField clipped =
          apply_multiplier(xb, [lt, inv_beta](double kx, double ky, double kz) -> cdouble {
            double kn = std::sqrt(kx * kx + ky * ky + kz * kz);
            double lk = (kn > 1.0) ? std::log(kn) : 0.0;
            return std::max(0.0, lt - inv_beta * lk);
          });
      ComplexScalarField acc = hartree_g(st.w_plus);
      ComplexScalarField total(xb.grid);
      axpy(lt, acc, total);
      axpy(-1.0, clipped, total);
      return gradient_real(total);
    }
  }
  throw std::logic_error("build_S: unreachable");
}

ComplexScalarField build_phi(const AsymptoticState& st, const SpectralGrid& g, double t,
                             const TimeKernelQuadrature& quad, int nodes_per_decade) {
  check_compatible(st.w_plus.grid, g, "build_phi");
  if (!(t >= 1.0)) throw std::invalid_argument("build_phi: t must be >= 1");
  if (max_abs(st.w_plus) == 0.0 || t == 1.0) return ComplexScalarField(g);
  auto bstar_at = [&](double tp) { return compute_Bstar(st, g, tp, quad); };
  return accumulate_phase(st, g, t, nodes_per_decade, bstar_at);
}

// ---- ProfileTable --------------------------------------------------------------

ProfileTable::ProfileTable(AsymptoticState st, SpectralGrid g, double t_hi, int nodes_per_decade,
                           TimeKernelQuadrature quad)
    : st_(std::move(st)), grid_(g), quad_(std::move(quad)) {
  check_compatible(st_.w_plus.grid, g, "ProfileTable");
  if (!(t_hi > 1.0)) throw std::invalid_argument("ProfileTable: t_hi must exceed 1");
  wplus_hat_ = fft_forward(grid_, st_.w_plus.v);
  bool zero = (max_abs(st_.w_plus) == 0.0);
  int count = std::max(3, static_cast<int>(std::ceil(nodes_per_decade * std::log10(t_hi))) + 1);
  times_ = log_spaced(1.0, t_hi, count);
  lnt_.resize(times_.size());
  for (std::size_t i = 0; i < times_.size(); ++i) lnt_[i] = std::log(times_[i]);

  bstar_.reserve(times_.size());
  for (double tn : times_) {
    if (zero) {
      RealVectorField z(grid_);
      z.div_free = true;
      bstar_.push_back(std::move(z));
    } else {
      bstar_.push_back(compute_Bstar(st_, grid_, tn, quad_));
    }
  }

  // cumulative phase integral on the table grid; B_* interpolated from above
  phi_.reserve(times_.size());
  phi_.emplace_back(grid_);
  auto bstar_interp = [this](double tp) { return interp_series(lnt_, bstar_, tp); };
  Quadrature gl = gauss_legendre(4);
  for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
    ComplexScalarField seg = phi_.back();
    if (!zero) {
      double a = lnt_[i], b = lnt_[i + 1];
      double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (std::size_t qi = 0; qi < gl.x.size(); ++qi) {
        double tp = std::exp(mid + half * gl.x[qi]);
        axpy(half * gl.w[qi], phase_integrand(st_, tp, bstar_interp), seg);
      }
    }
    phi_.push_back(std::move(seg));
  }
}

ComplexScalarField ProfileTable::W(double t) const {
  if (!(t >= 1.0)) throw std::invalid_argument("ProfileTable::W: t must be >= 1");
  std::vector<cdouble> c(wplus_hat_.size());
  const int n = grid_.n;
  std::size_t q = 0;
  for (int i = 0; i < n; ++i) {
    double kx = grid_.wavenumber(i);
    for (int j = 0; j < n; ++j) {
      double ky = grid_.wavenumber(j);
      for (int k = 0; k < n; ++k, ++q) {
        double kz = grid_.wavenumber(k);
        c[q] = wplus_hat_[q] * std::polar(1.0, 0.5 * (kx * kx + ky * ky + kz * kz) / t);
      }
    }
  }
  ComplexScalarField out(grid_);
  out.v = fft_inverse(grid_, c);
  return out;
}

ComplexScalarField ProfileTable::phi(double t) const {
  if (t < times_.front() || t > times_.back() * (1.0 + 1e-12))
    throw std::invalid_argument("ProfileTable::phi: time outside table coverage");
  return interp_series(lnt_, phi_, t);
}

RealVectorField ProfileTable::S(double t) const {
  // S = grad phi by construction: evaluating through phi keeps S exactly curl-free
  return gradient_real(phi(t));
}

RealVectorField ProfileTable::Bstar(double t) const {
  if (t < times_.front() || t > times_.back() * (1.0 + 1e-12))
    throw std::invalid_argument("ProfileTable::Bstar: time outside table coverage");
  RealVectorField b = interp_series(lnt_, bstar_, t);
  b.div_free = true;
  return b;
}

RealVectorField ProfileTable::Mb_profile(double t) const {
  ComplexScalarField Wt = W(t);
  RealVectorField sb = S(t);
  axpy(1.0, Bstar(t), sb);
  RealVectorField zero(grid_);
  return current_Mb(Wt, sb, zero);
}

Remainders compute_remainders(const ProfileTable& prof, double t) {
  const AsymptoticState& st = prof.state();
  const SpectralGrid& g = prof.grid();
  Remainders r;
  if (max_abs(st.w_plus) == 0.0) {
    r.R1 = ComplexScalarField(g);
    r.R2 = RealVectorField(g);
    r.R3 = RealVectorField(g);
    return r;
  }
  ComplexScalarField Wt = prof.W(t);
  RealVectorField S = prof.S(t);
  RealVectorField Bs = prof.Bstar(t);
  double it2 = 1.0 / (t * t);

  RealVectorField SB = S + Bs;
  ComplexScalarField q1 = transport_Q(SB, Wt);
  ComplexScalarField xbs = x_dot(Bs);
  SplitFields parts = split_short_long(xbs, SplitSpec{st.beta, t});
  r.R1 = ComplexScalarField(g);
  for (std::size_t m = 0; m < r.R1.v.size(); ++m) {
    double bdots = Bs.c[0][m] * S.c[0][m] + Bs.c[1][m] * S.c[1][m] + Bs.c[2][m] * S.c[2][m];
    double b2 = Bs.c[0][m] * Bs.c[0][m] + Bs.c[1][m] * Bs.c[1][m] + Bs.c[2][m] * Bs.c[2][m];
    r.R1.v[m] = it2 * q1.v[m] - cdouble(0, 0.5 * it2) * (2.0 * bdots + b2) * Wt.v[m] +
                cdouble(0, 1.0 / t) * parts.short_part.v[m].real() * Wt.v[m];
  }

  // R2 = t^{-2} (S . grad) S
  r.R2 = RealVectorField(g);
  for (int d = 0; d < 3; ++d) {
    ComplexScalarField Sd(g);
    for (std::size_t m = 0; m < Sd.v.size(); ++m) Sd.v[m] = S.c[d][m];
    auto gSd = gradient(Sd);
    for (std::size_t m = 0; m < r.R2.c[d].size(); ++m)
      r.R2.c[d][m] = it2 * (S.c[0][m] * gSd[0].v[m].real() + S.c[1][m] * gSd[1].v[m].real() +
                            S.c[2][m] * gSd[2].v[m].real());
  }

  // R3 = t^{-1} P F_1(Mb_profile)
  auto mb = [&prof](double tp) { return prof.Mb_profile(tp); };
  RealVectorField f1 = leray_project(apply_Fj(mb, 1, t, prof.quad(), g));
  r.R3 = (1.0 / t) * f1;
  return r;
}

} // namespace mss
