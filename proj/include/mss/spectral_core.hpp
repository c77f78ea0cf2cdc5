// Periodic pseudospectral field algebra on the cubic box [-L/2, L/2)^3:
// grids, FFTs, Fourier multipliers, unitary propagators, dilations, norms.
//
// Conventions (fixed once, asserted by tests):
//   * forward transform unnormalized: c_m = sum_p f(x_p) e^{-i xi_m . x_p},
//     inverse carries 1/n^3; the centered chart is absorbed into a parity twist.
//   * omega^s (s != 0) and the inverse Laplacian kill the zero mode; the Leray
//     projector passes it through.
#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mss {

using cdouble = std::complex<double>;
using Vec3 = std::array<double, 3>;

struct SpectralGrid {
  int n = 0;      // points per axis (power of two)
  double L = 0.0; // box length

  double spacing() const { return L / n; }
  std::size_t size() const { return static_cast<std::size_t>(n) * n * n; }
  std::size_t idx(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n + j) * n + k;
  }
  double coord(int i) const { return -0.5 * L + i * spacing(); }
  // wavenumber in FFT storage order: m -> 2*pi*m~/L, m~ = m or m-n
  double wavenumber(int m) const {
    int s = (m < n / 2) ? m : m - n;
    return 2.0 * M_PI * s / L;
  }
  double nyquist() const { return M_PI * n / L; }
  bool operator==(const SpectralGrid& o) const { return n == o.n && L == o.L; }
  bool operator!=(const SpectralGrid& o) const { return !(*this == o); }
};

struct ComplexScalarField {
  SpectralGrid grid;
  std::vector<cdouble> v;

  ComplexScalarField() = default;
  explicit ComplexScalarField(const SpectralGrid& g) : grid(g), v(g.size()) {}
  cdouble& at(int i, int j, int k) { return v[grid.idx(i, j, k)]; }
  const cdouble& at(int i, int j, int k) const { return v[grid.idx(i, j, k)]; }
};

struct RealVectorField {
  SpectralGrid grid;
  std::array<std::vector<double>, 3> c;
  bool div_free = false;

  RealVectorField() = default;
  explicit RealVectorField(const SpectralGrid& g) : grid(g) {
    for (auto& comp : c) comp.assign(g.size(), 0.0);
  }
};

// ---- transforms ------------------------------------------------------------

// c_m = sum_p f_p e^{-i xi_m . x_p} over the centered chart.
std::vector<cdouble> fft_forward(const SpectralGrid& g, const std::vector<cdouble>& f);
std::vector<cdouble> fft_forward_real(const SpectralGrid& g, const std::vector<double>& f);
// f_p = (1/n^3) sum_m c_m e^{i xi_m . x_p}
std::vector<cdouble> fft_inverse(const SpectralGrid& g, const std::vector<cdouble>& c);
std::vector<double> fft_inverse_real(const SpectralGrid& g, const std::vector<cdouble>& c);

// ---- field algebra helpers -------------------------------------------------

void check_finite(const ComplexScalarField& f, const char* who);
void check_compatible(const SpectralGrid& a, const SpectralGrid& b, const char* who);

ComplexScalarField operator+(const ComplexScalarField& a, const ComplexScalarField& b);
ComplexScalarField operator-(const ComplexScalarField& a, const ComplexScalarField& b);
ComplexScalarField operator*(cdouble s, const ComplexScalarField& a);
RealVectorField operator+(const RealVectorField& a, const RealVectorField& b);
RealVectorField operator-(const RealVectorField& a, const RealVectorField& b);
RealVectorField operator*(double s, const RealVectorField& a);
void axpy(cdouble a, const ComplexScalarField& x, ComplexScalarField& y);
void axpy(double a, const RealVectorField& x, RealVectorField& y);

double max_abs(const ComplexScalarField& f);
double max_abs(const RealVectorField& v);

// ---- multipliers and operators ----------------------------------------------

// mult(kx,ky,kz) applied to the spectral coefficients of f.
ComplexScalarField apply_multiplier(const ComplexScalarField& f,
                                    const std::function<cdouble(double, double, double)>& mult);

ComplexScalarField omega_pow(const ComplexScalarField& f, double s);
ComplexScalarField inverse_laplacian(const ComplexScalarField& f);
RealVectorField leray_project(const RealVectorField& v);
ComplexScalarField free_propagator(const ComplexScalarField& f, double t);

std::array<ComplexScalarField, 3> gradient(const ComplexScalarField& f);
RealVectorField gradient_real(const ComplexScalarField& real_scalar);
ComplexScalarField divergence(const RealVectorField& v); // real-valued output
RealVectorField curl(const RealVectorField& v);

// spectral invariant checks: max |div v| resp. max |curl v| on the grid
double max_divergence(const RealVectorField& v);
double max_curl(const RealVectorField& v);

// coordinate chart multiplications
ComplexScalarField coord_multiply(const ComplexScalarField& f, int axis);
ComplexScalarField x_dot(const RealVectorField& v);                 // sum_j x_j v_j
RealVectorField coord_weight(const std::vector<double>& density, const SpectralGrid& g); // x_j rho

// ---- dilation / MDFM ---------------------------------------------------------

// (D0(nu) f)(x) ~ f(x/nu), realized by band-limited Fourier-domain resampling:
// nonzero output modes d_m = nu^3 sum_p f_p e^{-i nu xi_m . x_p}, masked when
// |nu xi_m| exceeds the per-axis Nyquist; zero mode passes through (mean kept).
// If aliasing_loss is non-null it receives the masked fraction of spectral energy.
ComplexScalarField dilate0(const ComplexScalarField& f, double nu, double* aliasing_loss = nullptr);
RealVectorField dilate0(const RealVectorField& v, double nu, double* aliasing_loss = nullptr);
std::vector<cdouble> dilate0_spectral(const SpectralGrid& g, const std::vector<double>& comp, double nu);

enum class MdfmPiece { M, D, D0, MDFM };
ComplexScalarField mdfm_apply(const ComplexScalarField& f, double t, MdfmPiece piece,
                              double aliasing_tolerance = 0.5);

// ---- norms -------------------------------------------------------------------

struct NormSpec {
  enum Kind { Hk, HkDot, Kk, Lr } kind = Hk;
  double order = 0.0; // k or r (r = inf encoded as INFINITY)
};

double norm(const ComplexScalarField& f, const NormSpec& spec);
double norm(const RealVectorField& v, const NormSpec& spec);
double l2_norm(const ComplexScalarField& f);
double l2_norm(const RealVectorField& v);
// ||<J(t)>^m f||_2 via the D*M* conjugation; homogeneous=true uses |J(t)|^m.
double galilei_norm(const ComplexScalarField& f, double m, double t, bool homogeneous = false);

// ---- field dump I/O ------------------------------------------------------------

void write_field(const std::string& path, const ComplexScalarField& f);
void write_field(const std::string& path, const RealVectorField& v);
// kind tag out: 0 = complex scalar, 1 = real 3-vector
int peek_field_kind(const std::string& path);
ComplexScalarField read_scalar_field(const std::string& path);
RealVectorField read_vector_field(const std::string& path);

// ---- misc -----------------------------------------------------------------------

// smooth localized test fields
ComplexScalarField gaussian_field(const SpectralGrid& g, double amplitude, double width,
                                  const Vec3& k = {0, 0, 0}, const Vec3& center = {0, 0, 0});
ComplexScalarField random_band_limited(const SpectralGrid& g, std::uint64_t seed,
                                       double band_fraction = 0.5);

} // namespace mss
