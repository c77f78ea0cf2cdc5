#include "mss/spectral_core.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>

namespace mss {

namespace {

// One cached in-place c2c plan pair per grid resolution. FFTW_ESTIMATE keeps
// planning deterministic (no timing-dependent algorithm choice).
struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  fftw_complex* buf = nullptr;
  std::size_t size = 0;
};

PlanPair& plans_for(int n) {
  static std::map<int, PlanPair> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  PlanPair p;
  p.size = static_cast<std::size_t>(n) * n * n;
  p.buf = fftw_alloc_complex(p.size);
  p.fwd = fftw_plan_dft_3d(n, n, n, p.buf, p.buf, FFTW_FORWARD, FFTW_ESTIMATE);
  p.bwd = fftw_plan_dft_3d(n, n, n, p.buf, p.buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  return cache.emplace(n, p).first->second;
}

// parity twist (-1)^(mx+my+mz): converts between FFT index space and the
// centered chart x in [-L/2, L/2)^3 on both sides of the transform
inline double parity(int i, int j, int k) { return ((i + j + k) & 1) ? -1.0 : 1.0; }

} // namespace

std::vector<cdouble> fft_forward(const SpectralGrid& g, const std::vector<cdouble>& f) {
  if (f.size() != g.size()) throw std::invalid_argument("fft_forward: size mismatch");
  PlanPair& p = plans_for(g.n);
  std::memcpy(p.buf, f.data(), sizeof(cdouble) * f.size());
  fftw_execute(p.fwd);
  std::vector<cdouble> c(g.size());
  const int n = g.n;
  std::size_t q = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k, ++q)
        c[q] = parity(i, j, k) * cdouble(p.buf[q][0], p.buf[q][1]);
  return c;
}

std::vector<cdouble> fft_forward_real(const SpectralGrid& g, const std::vector<double>& f) {
  std::vector<cdouble> tmp(f.begin(), f.end());
  return fft_forward(g, tmp);
}

std::vector<cdouble> fft_inverse(const SpectralGrid& g, const std::vector<cdouble>& c) {
  if (c.size() != g.size()) throw std::invalid_argument("fft_inverse: size mismatch");
  PlanPair& p = plans_for(g.n);
  const int n = g.n;
  std::size_t q = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k, ++q) {
        cdouble z = parity(i, j, k) * c[q];
        p.buf[q][0] = z.real();
        p.buf[q][1] = z.imag();
      }
  fftw_execute(p.bwd);
  std::vector<cdouble> f(g.size());
  const double scale = 1.0 / static_cast<double>(g.size());
  for (std::size_t m = 0; m < f.size(); ++m)
    f[m] = scale * cdouble(p.buf[m][0], p.buf[m][1]);
  return f;
}

std::vector<double> fft_inverse_real(const SpectralGrid& g, const std::vector<cdouble>& c) {
  std::vector<cdouble> f = fft_inverse(g, c);
  std::vector<double> r(f.size());
  for (std::size_t m = 0; m < f.size(); ++m) r[m] = f[m].real();
  return r;
}

void check_finite(const ComplexScalarField& f, const char* who) {
  for (const cdouble& z : f.v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw std::invalid_argument(std::string(who) + ": non-finite input field");
}

void check_compatible(const SpectralGrid& a, const SpectralGrid& b, const char* who) {
  if (a != b) throw std::invalid_argument(std::string(who) + ": incompatible grids");
}

ComplexScalarField operator+(const ComplexScalarField& a, const ComplexScalarField& b) {
  check_compatible(a.grid, b.grid, "operator+");
  ComplexScalarField r(a.grid);
  for (std::size_t m = 0; m < r.v.size(); ++m) r.v[m] = a.v[m] + b.v[m];
  return r;
}

ComplexScalarField operator-(const ComplexScalarField& a, const ComplexScalarField& b) {
  check_compatible(a.grid, b.grid, "operator-");
  ComplexScalarField r(a.grid);
  for (std::size_t m = 0; m < r.v.size(); ++m) r.v[m] = a.v[m] - b.v[m];
  return r;
}

ComplexScalarField operator*(cdouble s, const ComplexScalarField& a) {
  ComplexScalarField r(a.grid);
  for (std::size_t m = 0; m < r.v.size(); ++m) r.v[m] = s * a.v[m];
  return r;
}

RealVectorField operator+(const RealVectorField& a, const RealVectorField& b) {
  check_compatible(a.grid, b.grid, "operator+");
  RealVectorField r(a.grid);
  r.div_free = a.div_free && b.div_free;
  for (int d = 0; d < 3; ++d)
    for (std::size_t m = 0; m < r.c[d].size(); ++m) r.c[d][m] = a.c[d][m] + b.c[d][m];
  return r;
}

RealVectorField operator-(const RealVectorField& a, const RealVectorField& b) {
  check_compatible(a.grid, b.grid, "operator-");
  RealVectorField r(a.grid);
  r.div_free = a.div_free && b.div_free;
  for (int d = 0; d < 3; ++d)
    for (std::size_t m = 0; m < r.c[d].size(); ++m) r.c[d][m] = a.c[d][m] - b.c[d][m];
  return r;
}

RealVectorField operator*(double s, const RealVectorField& a) {
  RealVectorField r(a.grid);
  r.div_free = a.div_free;
  for (int d = 0; d < 3; ++d)
    for (std::size_t m = 0; m < r.c[d].size(); ++m) r.c[d][m] = s * a.c[d][m];
  return r;
}

void axpy(cdouble a, const ComplexScalarField& x, ComplexScalarField& y) {
  check_compatible(x.grid, y.grid, "axpy");
  for (std::size_t m = 0; m < y.v.size(); ++m) y.v[m] += a * x.v[m];
}

void axpy(double a, const RealVectorField& x, RealVectorField& y) {
  check_compatible(x.grid, y.grid, "axpy");
  y.div_free = y.div_free && x.div_free;
  for (int d = 0; d < 3; ++d)
    for (std::size_t m = 0; m < y.c[d].size(); ++m) y.c[d][m] += a * x.c[d][m];
}

double max_abs(const ComplexScalarField& f) {
  double r = 0;
  for (const cdouble& z : f.v) r = std::max(r, std::abs(z));
  return r;
}

double max_abs(const RealVectorField& v) {
  double r = 0;
  for (std::size_t m = 0; m < v.c[0].size(); ++m) {
    double a2 = v.c[0][m] * v.c[0][m] + v.c[1][m] * v.c[1][m] + v.c[2][m] * v.c[2][m];
    r = std::max(r, a2);
  }
  return std::sqrt(r);
}

ComplexScalarField apply_multiplier(const ComplexScalarField& f,
                                    const std::function<cdouble(double, double, double)>& mult) {
  std::vector<cdouble> c = fft_forward(f.grid, f.v);
  const int n = f.grid.n;
  std::size_t q = 0;
  for (int i = 0; i < n; ++i) {
    double kx = f.grid.wavenumber(i);
    for (int j = 0; j < n; ++j) {
      double ky = f.grid.wavenumber(j);
      for (int k = 0; k < n; ++k, ++q) c[q] *= mult(kx, ky, f.grid.wavenumber(k));
    }
  }
  ComplexScalarField out(f.grid);
  out.v = fft_inverse(f.grid, c);
  return out;
}

ComplexScalarField omega_pow(const ComplexScalarField& f, double s) {
  check_finite(f, "omega_pow");
  if (s == 0.0) return f;
  return apply_multiplier(f, [s](double kx, double ky, double kz) -> cdouble {
    double k2 = kx * kx + ky * ky + kz * kz;
    return (k2 == 0.0) ? 0.0 : std::pow(k2, 0.5 * s);
  });
}

ComplexScalarField inverse_laplacian(const ComplexScalarField& f) {
  check_finite(f, "inverse_laplacian");
  return apply_multiplier(f, [](double kx, double ky, double kz) -> cdouble {
    double k2 = kx * kx + ky * ky + kz * kz;
    return (k2 == 0.0) ? 0.0 : -1.0 / k2;
  });
}

namespace {
// odd-derivative multipliers zero the unpaired Nyquist mode so derivatives of
// real fields stay real; the projectors must use the same wavenumbers or they
// lose idempotence on the Nyquist shell
inline double odd_wavenumber(const SpectralGrid& g, int m) {
  return (m == g.n / 2) ? 0.0 : g.wavenumber(m);
}
} // namespace

RealVectorField leray_project(const RealVectorField& v) {
  std::array<std::vector<cdouble>, 3> c;
  for (int d = 0; d < 3; ++d) c[d] = fft_forward_real(v.grid, v.c[d]);
  const int n = v.grid.n;
  std::size_t q = 0;
  for (int i = 0; i < n; ++i) {
    double kx = odd_wavenumber(v.grid, i);
    for (int j = 0; j < n; ++j) {
      double ky = odd_wavenumber(v.grid, j);
      for (int k = 0; k < n; ++k, ++q) {
        double kz = odd_wavenumber(v.grid, k);
        double k2 = kx * kx + ky * ky + kz * kz;
        if (k2 == 0.0) continue; // zero mode passes through
        cdouble dot = (kx * c[0][q] + ky * c[1][q] + kz * c[2][q]) / k2;
        c[0][q] -= kx * dot;
        c[1][q] -= ky * dot;
        c[2][q] -= kz * dot;
      }
    }
  }
  RealVectorField out(v.grid);
  for (int d = 0; d < 3; ++d) out.c[d] = fft_inverse_real(v.grid, c[d]);
  out.div_free = true;
  return out;
}

ComplexScalarField free_propagator(const ComplexScalarField& f, double t) {
  return apply_multiplier(f, [t](double kx, double ky, double kz) -> cdouble {
    double k2 = kx * kx + ky * ky + kz * kz;
    return std::polar(1.0, -0.5 * t * k2);
  });
}

std::array<ComplexScalarField, 3> gradient(const ComplexScalarField& f) {
  std::vector<cdouble> c = fft_forward(f.grid, f.v);
  std::array<ComplexScalarField, 3> out;
  const int n = f.grid.n;
  for (int d = 0; d < 3; ++d) {
    std::vector<cdouble> cd(c.size());
    std::size_t q = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k, ++q) {
          double kd = odd_wavenumber(f.grid, d == 0 ? i : (d == 1 ? j : k));
          cd[q] = cdouble(0.0, kd) * c[q];
        }
    out[d] = ComplexScalarField(f.grid);
    out[d].v = fft_inverse(f.grid, cd);
  }
  return out;
}

RealVectorField gradient_real(const ComplexScalarField& real_scalar) {
  auto g3 = gradient(real_scalar);
  RealVectorField out(real_scalar.grid);
  for (int d = 0; d < 3; ++d)
    for (std::size_t m = 0; m < out.c[d].size(); ++m) out.c[d][m] = g3[d].v[m].real();
  return out;
}

ComplexScalarField divergence(const RealVectorField& v) {
  const int n = v.grid.n;
  std::vector<cdouble> acc(v.grid.size(), 0.0);
  for (int d = 0; d < 3; ++d) {
    std::vector<cdouble> c = fft_forward_real(v.grid, v.c[d]);
    std::size_t q = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k, ++q) {
          double kd = odd_wavenumber(v.grid, d == 0 ? i : (d == 1 ? j : k));
          acc[q] += cdouble(0.0, kd) * c[q];
        }
  }
  ComplexScalarField out(v.grid);
  out.v = fft_inverse(v.grid, acc);
  return out;
}

RealVectorField curl(const RealVectorField& v) {
  std::array<std::vector<cdouble>, 3> c;
  for (int d = 0; d < 3; ++d) c[d] = fft_forward_real(v.grid, v.c[d]);
  std::array<std::vector<cdouble>, 3> r;
  for (int d = 0; d < 3; ++d) r[d].assign(v.grid.size(), 0.0);
  const int n = v.grid.n;
  std::size_t q = 0;
  for (int i = 0; i < n; ++i) {
    double kx = odd_wavenumber(v.grid, i);
    for (int j = 0; j < n; ++j) {
      double ky = odd_wavenumber(v.grid, j);
      for (int k = 0; k < n; ++k, ++q) {
        double kz = odd_wavenumber(v.grid, k);
        cdouble I(0.0, 1.0);
        r[0][q] = I * (ky * c[2][q] - kz * c[1][q]);
        r[1][q] = I * (kz * c[0][q] - kx * c[2][q]);
        r[2][q] = I * (kx * c[1][q] - ky * c[0][q]);
      }
    }
  }
  RealVectorField out(v.grid);
  for (int d = 0; d < 3; ++d) out.c[d] = fft_inverse_real(v.grid, r[d]);
  return out;
}

double max_divergence(const RealVectorField& v) { return max_abs(divergence(v)); }

double max_curl(const RealVectorField& v) { return max_abs(curl(v)); }

ComplexScalarField coord_multiply(const ComplexScalarField& f, int axis) {
  ComplexScalarField out(f.grid);
  const int n = f.grid.n;
  std::size_t q = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k, ++q) {
        double x = f.grid.coord(axis == 0 ? i : (axis == 1 ? j : k));
        out.v[q] = x * f.v[q];
      }
  return out;
}

ComplexScalarField x_dot(const RealVectorField& v) {
  ComplexScalarField out(v.grid);
  const int n = v.grid.n;
  std::size_t q = 0;
  for (int i = 0; i < n; ++i) {
    double x = v.grid.coord(i);
    for (int j = 0; j < n; ++j) {
      double y = v.grid.coord(j);
      for (int k = 0; k < n; ++k, ++q)
        out.v[q] = x * v.c[0][q] + y * v.c[1][q] + v.grid.coord(k) * v.c[2][q];
    }
  }
  return out;
}

RealVectorField coord_weight(const std::vector<double>& density, const SpectralGrid& g) {
  if (density.size() != g.size()) throw std::invalid_argument("coord_weight: size mismatch");
  RealVectorField out(g);
  const int n = g.n;
  std::size_t q = 0;
  for (int i = 0; i < n; ++i) {
    double x = g.coord(i);
    for (int j = 0; j < n; ++j) {
      double y = g.coord(j);
      for (int k = 0; k < n; ++k, ++q) {
        double rho = density[q];
        out.c[0][q] = x * rho;
        out.c[1][q] = y * rho;
        out.c[2][q] = g.coord(k) * rho;
      }
    }
  }
  return out;
}

// ---- dilation --------------------------------------------------------------

namespace {

// per-axis NUDFT matrix row m, column p: e^{-i nu xi_m x_p}; masked rows zeroed
std::vector<cdouble> dilation_matrix(const SpectralGrid& g, double nu) {
  const int n = g.n;
  std::vector<cdouble> E(static_cast<std::size_t>(n) * n);
  const double xi_nyq = g.nyquist() * (1.0 + 1e-12);
  for (int m = 0; m < n; ++m) {
    double xim = nu * g.wavenumber(m);
    bool masked = std::abs(xim) > xi_nyq;
    for (int p = 0; p < n; ++p)
      E[static_cast<std::size_t>(m) * n + p] =
          masked ? cdouble(0.0, 0.0) : std::polar(1.0, -xim * g.coord(p));
  }
  return E;
}

// separable contraction of E against work along the given axis (out-of-place)
void contract_axis(const SpectralGrid& g, const std::vector<cdouble>& E, int axis,
                   const std::vector<cdouble>& in, std::vector<cdouble>& out) {
  const int n = g.n;
  std::fill(out.begin(), out.end(), cdouble(0, 0));
  if (axis == 0) {
    const std::size_t stride = static_cast<std::size_t>(n) * n;
    for (int m = 0; m < n; ++m)
      for (int p = 0; p < n; ++p) {
        cdouble e = E[static_cast<std::size_t>(m) * n + p];
        if (e == cdouble(0, 0)) continue;
        const cdouble* src = &in[p * stride];
        cdouble* dst = &out[m * stride];
        for (std::size_t r = 0; r < stride; ++r) dst[r] += e * src[r];
      }
  } else if (axis == 1) {
    for (int i = 0; i < n; ++i) {
      const std::size_t base = static_cast<std::size_t>(i) * n * n;
      for (int m = 0; m < n; ++m)
        for (int p = 0; p < n; ++p) {
          cdouble e = E[static_cast<std::size_t>(m) * n + p];
          if (e == cdouble(0, 0)) continue;
          const cdouble* src = &in[base + static_cast<std::size_t>(p) * n];
          cdouble* dst = &out[base + static_cast<std::size_t>(m) * n];
          for (int r = 0; r < n; ++r) dst[r] += e * src[r];
        }
    }
  } else {
    const std::size_t rows = static_cast<std::size_t>(n) * n;
    for (std::size_t row = 0; row < rows; ++row) {
      const cdouble* src = &in[row * n];
      cdouble* dst = &out[row * n];
      for (int m = 0; m < n; ++m) {
        cdouble acc(0, 0);
        const cdouble* Em = &E[static_cast<std::size_t>(m) * n];
        for (int p = 0; p < n; ++p) acc += Em[p] * src[p];
        dst[m] = acc;
      }
    }
  }
}

// spectral coefficients of D0(nu) f given physical samples (complex)
std::vector<cdouble> dilate0_coeffs(const SpectralGrid& g, const std::vector<cdouble>& f,
                                    double nu) {
  std::vector<cdouble> E = dilation_matrix(g, nu);
  // the off-lattice sampling below is a Riemann sum of the continuum
  // transform, valid for decaying data; the mean would leak a Dirichlet
  // kernel into every mode, so it is split off and carried exactly
  cdouble mean_sum(0, 0);
  for (const cdouble& z : f) mean_sum += z;
  cdouble mean = mean_sum / static_cast<double>(f.size());
  std::vector<cdouble> a(f), b(f.size());
  for (cdouble& z : a) z -= mean;
  contract_axis(g, E, 0, a, b);
  contract_axis(g, E, 1, b, a);
  contract_axis(g, E, 2, a, b);
  const double nu3 = nu * nu * nu;
  for (cdouble& z : b) z *= nu3;
  // zero-mode pass-through: the mean is kept, not rescaled (keeps constants
  // fixed under D0 and the kernel zero-mode integrals convergent)
  b[0] = mean_sum;
  return b;
}

double spectral_energy(const std::vector<cdouble>& c) {
  double e = 0;
  for (const cdouble& z : c) e += std::norm(z);
  return e;
}

} // namespace

ComplexScalarField dilate0(const ComplexScalarField& f, double nu, double* aliasing_loss) {
  if (!(nu > 0)) throw std::invalid_argument("dilate0: dilation ratio must be positive");
  std::vector<cdouble> c = dilate0_coeffs(f.grid, f.v, nu);
  if (aliasing_loss) {
    // a lossless dilation of a localized band-limited field satisfies
    // ||D0 f||_2^2 = nu^3 ||f||_2^2; report the relative defect
    double ein = 0;
    for (const cdouble& z : f.v) ein += std::norm(z);
    double eout = spectral_energy(c) / f.grid.size();
    double ref = nu * nu * nu * ein;
    *aliasing_loss = (ref > 0) ? std::abs(1.0 - eout / ref) : 0.0;
  }
  ComplexScalarField out(f.grid);
  out.v = fft_inverse(f.grid, c);
  return out;
}

RealVectorField dilate0(const RealVectorField& v, double nu, double* aliasing_loss) {
  RealVectorField out(v.grid);
  out.div_free = v.div_free;
  double loss = 0;
  for (int d = 0; d < 3; ++d) {
    std::vector<cdouble> fd(v.c[d].begin(), v.c[d].end());
    std::vector<cdouble> c = dilate0_coeffs(v.grid, fd, nu);
    if (aliasing_loss) {
      double ein = 0;
      for (double x : v.c[d]) ein += x * x;
      double eout = spectral_energy(c) / v.grid.size();
      double ref = nu * nu * nu * ein;
      if (ref > 0) loss = std::max(loss, std::abs(1.0 - eout / ref));
    }
    out.c[d] = fft_inverse_real(v.grid, c);
  }
  if (aliasing_loss) *aliasing_loss = loss;
  return out;
}

std::vector<cdouble> dilate0_spectral(const SpectralGrid& g, const std::vector<double>& comp,
                                      double nu) {
  std::vector<cdouble> f(comp.begin(), comp.end());
  return dilate0_coeffs(g, f, nu);
}

namespace {

// unitary Fourier transform realized as a spatial field: (Ff)(x) evaluated on
// the grid itself, (2 pi)^{-3/2} h^3 sum_q f_q e^{-i x.x_q}
ComplexScalarField fourier_as_field(const ComplexScalarField& f) {
  const SpectralGrid& g = f.grid;
  const int n = g.n;
  std::vector<cdouble> E(static_cast<std::size_t>(n) * n);
  for (int m = 0; m < n; ++m)
    for (int p = 0; p < n; ++p)
      E[static_cast<std::size_t>(m) * n + p] = std::polar(1.0, -g.coord(m) * g.coord(p));
  std::vector<cdouble> a(f.v), b(f.v.size());
  contract_axis(g, E, 0, a, b);
  contract_axis(g, E, 1, b, a);
  contract_axis(g, E, 2, a, b);
  double scale = std::pow(g.spacing() / std::sqrt(2.0 * M_PI), 3);
  ComplexScalarField out(g);
  out.v = std::move(b);
  for (cdouble& z : out.v) z *= scale;
  return out;
}

ComplexScalarField quadratic_phase(const ComplexScalarField& f, double t) {
  ComplexScalarField out(f.grid);
  const int n = f.grid.n;
  std::size_t q = 0;
  for (int i = 0; i < n; ++i) {
    double x2 = f.grid.coord(i) * f.grid.coord(i);
    for (int j = 0; j < n; ++j) {
      double y2 = f.grid.coord(j) * f.grid.coord(j);
      for (int k = 0; k < n; ++k, ++q) {
        double z = f.grid.coord(k);
        out.v[q] = std::polar(1.0, (x2 + y2 + z * z) / (2.0 * t)) * f.v[q];
      }
    }
  }
  return out;
}

} // namespace

ComplexScalarField mdfm_apply(const ComplexScalarField& f, double t, MdfmPiece piece,
                              double aliasing_tolerance) {
  check_finite(f, "mdfm_apply");
  if (piece != MdfmPiece::D0 && t == 0.0)
    throw std::invalid_argument("mdfm_apply: t must be nonzero");
  auto dilated = [&](const ComplexScalarField& in) {
    double loss = 0;
    ComplexScalarField out = dilate0(in, std::abs(t), &loss);
    if (loss > aliasing_tolerance) {
      char msg[128];
      std::snprintf(msg, sizeof msg,
                    "mdfm_apply: dilation ratio %g aliases %.3g of the spectral energy", t, loss);
      throw std::runtime_error(msg);
    }
    return out;
  };
  switch (piece) {
    case MdfmPiece::M:
      return quadratic_phase(f, t);
    case MdfmPiece::D0:
      return dilated(f);
    case MdfmPiece::D: {
      // principal branch of (it)^{-3/2}, arg(it) in (-pi, pi]
      cdouble pref = std::pow(cdouble(0.0, t), -1.5);
      return pref * dilated(f);
    }
    case MdfmPiece::MDFM: {
      ComplexScalarField r = quadratic_phase(f, t);
      r = fourier_as_field(r);
      cdouble pref = std::pow(cdouble(0.0, t), -1.5);
      r = pref * dilated(r);
      return quadratic_phase(r, t);
    }
  }
  throw std::logic_error("mdfm_apply: unreachable");
}

// ---- norms -------------------------------------------------------------------

namespace {

double parseval_norm(const SpectralGrid& g, const std::vector<cdouble>& c,
                     const std::function<double(double)>& weight2_of_k2, bool skip_zero) {
  const int n = g.n;
  double acc = 0;
  std::size_t q = 0;
  for (int i = 0; i < n; ++i) {
    double kx = g.wavenumber(i);
    for (int j = 0; j < n; ++j) {
      double ky = g.wavenumber(j);
      for (int k = 0; k < n; ++k, ++q) {
        double kz = g.wavenumber(k);
        double k2 = kx * kx + ky * ky + kz * kz;
        if (k2 == 0.0 && skip_zero) continue;
        acc += weight2_of_k2(k2) * std::norm(c[q]);
      }
    }
  }
  double vol = g.L * g.L * g.L;
  double n3 = static_cast<double>(g.size());
  return std::sqrt(acc * vol / (n3 * n3));
}

double spec_norm(const SpectralGrid& g, const std::vector<cdouble>& c, const NormSpec& spec) {
  switch (spec.kind) {
    case NormSpec::Hk: {
      double k = spec.order;
      return parseval_norm(g, c, [k](double k2) { return std::pow(1.0 + k2, k); }, false);
    }
    case NormSpec::HkDot: {
      double k = spec.order;
      if (k < 0.0) {
        double mean = std::abs(c[0]);
        double tot = std::sqrt(spectral_energy(c));
        if (mean > 1e-8 * tot && tot > 0)
          throw std::invalid_argument("norm: negative-order homogeneous norm needs mean-zero input");
      }
      return parseval_norm(g, c, [k](double k2) { return std::pow(k2, k); }, true);
    }
    case NormSpec::Kk: {
      double k = spec.order;
      double h1 = parseval_norm(g, c, [](double k2) { return k2; }, true);
      double hk = parseval_norm(g, c, [k](double k2) { return std::pow(k2, k); }, true);
      return std::max(h1, hk);
    }
    case NormSpec::Lr:
      throw std::logic_error("spec_norm: Lr handled by caller");
  }
  throw std::logic_error("spec_norm: unreachable");
}

} // namespace

double norm(const ComplexScalarField& f, const NormSpec& spec) {
  if (spec.kind == NormSpec::Lr) {
    double r = spec.order;
    if (std::isinf(r)) return max_abs(f);
    double h3 = std::pow(f.grid.spacing(), 3);
    double acc = 0;
    for (const cdouble& z : f.v) acc += std::pow(std::abs(z), r);
    return std::pow(h3 * acc, 1.0 / r);
  }
  return spec_norm(f.grid, fft_forward(f.grid, f.v), spec);
}

double norm(const RealVectorField& v, const NormSpec& spec) {
  if (spec.kind == NormSpec::Lr) {
    double r = spec.order;
    if (std::isinf(r)) return max_abs(v);
    double h3 = std::pow(v.grid.spacing(), 3);
    double acc = 0;
    for (std::size_t m = 0; m < v.c[0].size(); ++m) {
      double a = std::sqrt(v.c[0][m] * v.c[0][m] + v.c[1][m] * v.c[1][m] + v.c[2][m] * v.c[2][m]);
      acc += std::pow(a, r);
    }
    return std::pow(h3 * acc, 1.0 / r);
  }
  double s2 = 0;
  for (int d = 0; d < 3; ++d) {
    double nd = spec_norm(v.grid, fft_forward_real(v.grid, v.c[d]), spec);
    s2 += nd * nd;
  }
  return std::sqrt(s2);
}

double l2_norm(const ComplexScalarField& f) {
  double h3 = std::pow(f.grid.spacing(), 3);
  double acc = 0;
  for (const cdouble& z : f.v) acc += std::norm(z);
  return std::sqrt(h3 * acc);
}

double l2_norm(const RealVectorField& v) {
  double h3 = std::pow(v.grid.spacing(), 3);
  double acc = 0;
  for (int d = 0; d < 3; ++d)
    for (double x : v.c[d]) acc += x * x;
  return std::sqrt(h3 * acc);
}

double galilei_norm(const ComplexScalarField& f, double m, double t, bool homogeneous) {
  if (t == 0.0) throw std::invalid_argument("galilei_norm: t must be nonzero");
  // <J(t)>^m = M(t) D(t) <omega>^m D*(t) M*(t); D*(t) = (it)^{3/2} D0(1/t)
  ComplexScalarField g1 = quadratic_phase(f, -t);
  ComplexScalarField g2 = dilate0(g1, 1.0 / t);
  double scale = std::pow(std::abs(t), 1.5);
  NormSpec spec;
  spec.kind = homogeneous ? NormSpec::HkDot : NormSpec::Hk;
  spec.order = m;
  if (homogeneous && m == 0.0) return scale * l2_norm(g2);
  if (!homogeneous) {
    // <omega>^m with the (1+k^2)^{m/2} weight includes the zero mode
    std::vector<cdouble> c = fft_forward(g2.grid, g2.v);
    return scale * parseval_norm(g2.grid, c,
                                 [m](double k2) { return std::pow(1.0 + k2, m); }, false);
  }
  return scale * norm(g2, spec);
}

// ---- field dump I/O ----------------------------------------------------------

namespace {

constexpr char kMagic[16] = {'M', 'S', 'S', 'C', 'A', 'T', 'T', 'E',
                             'R', '-', 'F', 'L', 'D', '\0', '\0', '\0'};

void write_header(std::ofstream& os, const SpectralGrid& g, std::uint8_t kind) {
  os.write(kMagic, 16);
  std::uint32_t n = static_cast<std::uint32_t>(g.n);
  os.write(reinterpret_cast<const char*>(&n), 4);
  os.write(reinterpret_cast<const char*>(&g.L), 8);
  os.write(reinterpret_cast<const char*>(&kind), 1);
}

SpectralGrid read_header(std::ifstream& is, const std::string& path, std::uint8_t* kind) {
  char magic[16];
  is.read(magic, 16);
  if (!is || std::memcmp(magic, kMagic, 16) != 0)
    throw std::runtime_error("field dump: bad magic in " + path);
  std::uint32_t n = 0;
  double L = 0;
  is.read(reinterpret_cast<char*>(&n), 4);
  is.read(reinterpret_cast<char*>(&L), 8);
  is.read(reinterpret_cast<char*>(kind), 1);
  if (!is) throw std::runtime_error("field dump: truncated header in " + path);
  SpectralGrid g;
  g.n = static_cast<int>(n);
  g.L = L;
  return g;
}

} // namespace

void write_field(const std::string& path, const ComplexScalarField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("field dump: cannot open " + path);
  write_header(os, f.grid, 0);
  os.write(reinterpret_cast<const char*>(f.v.data()), sizeof(cdouble) * f.v.size());
  if (!os) throw std::runtime_error("field dump: write failed for " + path);
}

void write_field(const std::string& path, const RealVectorField& v) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("field dump: cannot open " + path);
  write_header(os, v.grid, 1);
  for (int d = 0; d < 3; ++d)
    os.write(reinterpret_cast<const char*>(v.c[d].data()), sizeof(double) * v.c[d].size());
  if (!os) throw std::runtime_error("field dump: write failed for " + path);
}

int peek_field_kind(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("field dump: cannot open " + path);
  std::uint8_t kind = 0;
  read_header(is, path, &kind);
  return kind;
}

ComplexScalarField read_scalar_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("field dump: cannot open " + path);
  std::uint8_t kind = 0;
  SpectralGrid g = read_header(is, path, &kind);
  if (kind != 0) throw std::runtime_error("field dump: not a complex scalar: " + path);
  ComplexScalarField f(g);
  is.read(reinterpret_cast<char*>(f.v.data()), sizeof(cdouble) * f.v.size());
  if (!is) throw std::runtime_error("field dump: truncated data in " + path);
  return f;
}

RealVectorField read_vector_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("field dump: cannot open " + path);
  std::uint8_t kind = 0;
  SpectralGrid g = read_header(is, path, &kind);
  if (kind != 1) throw std::runtime_error("field dump: not a real 3-vector: " + path);
  RealVectorField v(g);
  for (int d = 0; d < 3; ++d)
    is.read(reinterpret_cast<char*>(v.c[d].data()), sizeof(double) * v.c[d].size());
  if (!is) throw std::runtime_error("field dump: truncated data in " + path);
  return v;
}

// ---- test field factories ------------------------------------------------------

ComplexScalarField gaussian_field(const SpectralGrid& g, double amplitude, double width,
                                  const Vec3& k, const Vec3& center) {
  ComplexScalarField f(g);
  const int n = g.n;
  std::size_t q = 0;
  for (int i = 0; i < n; ++i) {
    double x = g.coord(i) - center[0];
    for (int j = 0; j < n; ++j) {
      double y = g.coord(j) - center[1];
      for (int kk = 0; kk < n; ++kk, ++q) {
        double z = g.coord(kk) - center[2];
        double r2 = x * x + y * y + z * z;
        double phase = k[0] * x + k[1] * y + k[2] * z;
        f.v[q] = amplitude * std::exp(-r2 / (2.0 * width * width)) * std::polar(1.0, phase);
      }
    }
  }
  return f;
}

ComplexScalarField random_band_limited(const SpectralGrid& g, std::uint64_t seed,
                                       double band_fraction) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<cdouble> c(g.size(), 0.0);
  const int n = g.n;
  const double kmax = band_fraction * g.nyquist();
  std::size_t q = 0;
  for (int i = 0; i < n; ++i) {
    double kx = g.wavenumber(i);
    for (int j = 0; j < n; ++j) {
      double ky = g.wavenumber(j);
      for (int k = 0; k < n; ++k, ++q) {
        double kz = g.wavenumber(k);
        double kn = std::sqrt(kx * kx + ky * ky + kz * kz);
        if (kn <= kmax) c[q] = cdouble(gauss(rng), gauss(rng)) * std::exp(-kn * kn);
      }
    }
  }
  ComplexScalarField f(g);
  f.v = fft_inverse(g, c);
  return f;
}

} // namespace mss
