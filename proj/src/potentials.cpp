#include "mss/potentials.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace mss {

ComplexScalarField hartree_g(const ComplexScalarField& w1, const ComplexScalarField& w2) {
  check_compatible(w1.grid, w2.grid, "hartree_g");
  ComplexScalarField rho(w1.grid);
  for (std::size_t m = 0; m < rho.v.size(); ++m)
    rho.v[m] = (std::conj(w1.v[m]) * w2.v[m]).real();
  // (-Laplace)^{-1}: flip the sign of the Laplace inverse, mean killed
  ComplexScalarField g = inverse_laplacian(rho);
  for (cdouble& z : g.v) z = cdouble(-z.real(), 0.0);
  return g;
}

ComplexScalarField hartree_g(const ComplexScalarField& w) { return hartree_g(w, w); }

RealVectorField current_Ma(const ComplexScalarField& w) {
  const SpectralGrid& g = w.grid;
  std::vector<double> rho(g.size());
  double peak = 0;
  for (std::size_t m = 0; m < rho.size(); ++m) {
    rho[m] = std::norm(w.v[m]);
    peak = std::max(peak, rho[m]);
  }
  // boundary shell check: the |x|-weighted moment is only meaningful if the
  // density has decayed before the periodic wrap
  double edge = 0;
  const int n = g.n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      edge = std::max(edge, rho[g.idx(i, j, 0)]);
      edge = std::max(edge, rho[g.idx(i, 0, j)]);
      edge = std::max(edge, rho[g.idx(0, i, j)]);
    }
  if (peak > 0 && edge > 1e-8 * peak)
    std::fprintf(stderr,
                 "current_Ma: warning: boundary density %.3g of peak exceeds 1e-8 "
                 "(box too small for the coordinate moment)\n",
                 edge / peak);
  return coord_weight(rho, g);
}

RealVectorField current_Mb(const ComplexScalarField& w, const RealVectorField& s,
                           const RealVectorField& B) {
  check_compatible(w.grid, s.grid, "current_Mb");
  check_compatible(w.grid, B.grid, "current_Mb");
  auto gw = gradient(w);
  RealVectorField out(w.grid);
  for (int d = 0; d < 3; ++d)
    for (std::size_t m = 0; m < out.c[d].size(); ++m) {
      double rho = std::norm(w.v[m]);
      out.c[d][m] = (std::conj(w.v[m]) * gw[d].v[m]).imag() - (s.c[d][m] + B.c[d][m]) * rho;
    }
  return out;
}

// ---- quadrature construction ------------------------------------------------

TimeKernelQuadrature TimeKernelQuadrature::make(double nu_end, int panels, int gl_order,
                                                double tail_exponent) {
  if (!(nu_end > 1.0) || panels < 1) throw std::invalid_argument("TimeKernelQuadrature::make");
  TimeKernelQuadrature q;
  q.gl_order = gl_order;
  q.tail_exponent = tail_exponent;
  q.panel_boundaries = log_spaced(1.0, nu_end, panels + 1);
  Quadrature pq = panel_quadrature(q.panel_boundaries, gl_order);
  q.nu_nodes = std::move(pq.x);
  q.weights = std::move(pq.w);
  return q;
}

TimeKernelQuadrature TimeKernelQuadrature::for_grid(const SpectralGrid& g, int panels,
                                                    int gl_order, double tail_exponent) {
  double nu_end = std::max(2.0, 0.5 * g.n);
  return make(nu_end, panels, gl_order, tail_exponent);
}

// ---- I_m ----------------------------------------------------------------------

double ScalarSeries::eval(double tq) const {
  if (t.empty()) throw std::invalid_argument("ScalarSeries::eval: empty series");
  if (t.size() == 1 || tq >= t.back()) {
    double last = v.back();
    return (tq <= t.back()) ? last : last * std::pow(tq / t.back(), -tail_exponent);
  }
  std::vector<double> lnt(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) lnt[i] = std::log(t[i]);
  return pchip_eval(lnt.data(), v.data(), static_cast<int>(t.size()), std::log(tq));
}

double apply_Im(const ScalarSeries& f, double m, double t, const TimeKernelQuadrature& quad,
                bool time_form) {
  if (!f.t.empty() && t > f.t.back())
    throw std::invalid_argument("apply_Im: evaluation time beyond series coverage");
  double p = quad.tail_exponent;
  if (m + p + 0.5 <= 0.0)
    throw std::invalid_argument("apply_Im: divergent tail (m + p + 1/2 <= 0)");
  double acc = 0;
  double nuL = quad.nu_end();
  if (!time_form) {
    for (std::size_t i = 0; i < quad.nu_nodes.size(); ++i) {
      double nu = quad.nu_nodes[i];
      acc += quad.weights[i] * std::pow(nu, -m - 1.5) * f.eval(nu * t);
    }
  } else {
    // equivalent t'-space form with its own (denser) node placement
    std::vector<double> bounds = quad.panel_boundaries;
    for (double& b : bounds) b *= t;
    Quadrature pq = panel_quadrature(bounds, quad.gl_order + 2);
    double pref = std::pow(t, m + 0.5);
    for (std::size_t i = 0; i < pq.x.size(); ++i)
      acc += pref * pq.w[i] * std::pow(pq.x[i], -m - 1.5) * f.eval(pq.x[i]);
  }
  // closed-form power tail beyond the last node
  acc += f.eval(nuL * t) * std::pow(nuL, -m - 0.5) / (m + p + 0.5);
  return acc;
}

// ---- F_j ---------------------------------------------------------------------------

RealVectorField apply_Fj(const std::function<RealVectorField(double)>& M, int j, double t,
                         const TimeKernelQuadrature& quad, const SpectralGrid& g) {
  if (j != 0 && j != 1) throw std::invalid_argument("apply_Fj: j must be 0 or 1");
  const int n = g.n;
  const std::size_t sz = g.size();
  std::array<std::vector<cdouble>, 3> acc;
  for (auto& a : acc) a.assign(sz, cdouble(0, 0));

  // field part: the dilation band mask means only nu <= n/2 can populate
  // nonzero modes, which is exactly the quadrature coverage
  for (std::size_t qi = 0; qi < quad.nu_nodes.size(); ++qi) {
    double nu = quad.nu_nodes[qi];
    double wq = quad.weights[qi] * std::pow(nu, -3.0 - j);
    RealVectorField Mv = M(nu * t);
    check_compatible(Mv.grid, g, "apply_Fj");
    for (int d = 0; d < 3; ++d) {
      std::vector<cdouble> dc = dilate0_spectral(g, Mv.c[d], nu);
      std::size_t q = 0;
      for (int i = 0; i < n; ++i) {
        double kx = g.wavenumber(i);
        for (int jj = 0; jj < n; ++jj) {
          double ky = g.wavenumber(jj);
          for (int kk = 0; kk < n; ++kk, ++q) {
            double kz = g.wavenumber(kk);
            double om = std::sqrt(kx * kx + ky * ky + kz * kz);
            double mult = (om == 0.0) ? (nu - 1.0) : std::sin(om * (nu - 1.0)) / om;
            acc[d][q] += wq * mult * dc[q];
          }
        }
      }
    }
  }

  // zero mode: numeric extension on means, then power-law closure
  double nuL = quad.nu_end();
  {
    std::vector<double> bounds =
        log_spaced(nuL, nuL * quad.mean_extension_factor, quad.mean_extension_panels + 1);
    Quadrature ext = panel_quadrature(bounds, quad.gl_order);
    Vec3 last_mean = {0, 0, 0};
    for (std::size_t qi = 0; qi < ext.x.size(); ++qi) {
      double nu = ext.x[qi];
      RealVectorField Mv = M(nu * t);
      for (int d = 0; d < 3; ++d) {
        double mean = 0;
        for (double x : Mv.c[d]) mean += x;
        mean /= static_cast<double>(sz);
        acc[d][0] += ext.w[qi] * (nu - 1.0) * std::pow(nu, -3.0 - j) * mean *
                     static_cast<double>(sz);
        if (qi + 1 == ext.x.size()) last_mean[d] = mean;
      }
    }
    double nuE = bounds.back();
    double p = quad.tail_exponent;
    if (1.0 + j + p <= 0.0) throw std::invalid_argument("apply_Fj: divergent zero-mode tail");
    double closure = std::pow(nuE, -1.0 - j) / (1.0 + j + p) -
                     std::pow(nuE, -2.0 - j) / (2.0 + j + p);
    for (int d = 0; d < 3; ++d)
      acc[d][0] += closure * last_mean[d] * static_cast<double>(sz);
  }

  RealVectorField out(g);
  for (int d = 0; d < 3; ++d) out.c[d] = fft_inverse_real(g, acc[d]);
  return out;
}

RealVectorField compute_Ba(const AmplitudePair& ws, double t, const TimeKernelQuadrature& quad,
                           const SpectralGrid& g) {
  auto moment = [&ws, &g](double tp) {
    ComplexScalarField w1 = ws.w1(tp);
    ComplexScalarField w2 = ws.w2(tp);
    check_compatible(w1.grid, w2.grid, "compute_Ba");
    std::vector<double> rho(g.size());
    for (std::size_t m = 0; m < rho.size(); ++m)
      rho[m] = (std::conj(w1.v[m]) * w2.v[m]).real();
    return coord_weight(rho, g);
  };
  RealVectorField ba = leray_project(apply_Fj(moment, 0, t, quad, g));
  return ba;
}

RealVectorField compute_Bb(const AuxFieldContext& ctx, double t, const TimeKernelQuadrature& quad,
                           const SpectralGrid& g) {
  auto mb = [&ctx](double tp) { return current_Mb(ctx.w(tp), ctx.s(tp), ctx.B(tp)); };
  RealVectorField bb = leray_project(apply_Fj(mb, 1, t, quad, g));
  return (1.0 / t) * bb;
}

SplitFields split_short_long(const ComplexScalarField& f, const SplitSpec& spec) {
  if (!(spec.t > 0)) throw std::invalid_argument("split_short_long: t must be positive");
  double cutoff = std::pow(spec.t, spec.beta);
  std::vector<cdouble> c = fft_forward(f.grid, f.v);
  std::vector<cdouble> cs(c.size()), cl(c.size());
  const int n = f.grid.n;
  std::size_t q = 0;
  for (int i = 0; i < n; ++i) {
    double kx = f.grid.wavenumber(i);
    for (int j = 0; j < n; ++j) {
      double ky = f.grid.wavenumber(j);
      for (int k = 0; k < n; ++k, ++q) {
        double kz = f.grid.wavenumber(k);
        double kn = std::sqrt(kx * kx + ky * ky + kz * kz);
        if (kn > cutoff) {
          cs[q] = c[q];
          cl[q] = cdouble(0, 0);
        } else {
          cs[q] = cdouble(0, 0);
          cl[q] = c[q];
        }
      }
    }
  }
  SplitFields out;
  out.short_part = ComplexScalarField(f.grid);
  out.long_part = ComplexScalarField(f.grid);
  out.short_part.v = fft_inverse(f.grid, cs);
  out.long_part.v = fft_inverse(f.grid, cl);
  return out;
}

} // namespace mss
