#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mss/checks.hpp"
#include "mss/spectral_core.hpp"

#include <cmath>
#include <cstdio>

using namespace mss;

namespace {

const SpectralGrid g{16, 16.0};

ComplexScalarField mode(const SpectralGrid& gr, int mx, int my, int mz) {
  ComplexScalarField f(gr);
  double kx = 2.0 * M_PI * mx / gr.L, ky = 2.0 * M_PI * my / gr.L, kz = 2.0 * M_PI * mz / gr.L;
  std::size_t q = 0;
  for (int i = 0; i < gr.n; ++i)
    for (int j = 0; j < gr.n; ++j)
      for (int k = 0; k < gr.n; ++k, ++q)
        f.v[q] = std::exp(cdouble(0, kx * gr.coord(i) + ky * gr.coord(j) + kz * gr.coord(k)));
  return f;
}

double rel(const ComplexScalarField& a, const ComplexScalarField& b) {
  return l2_norm(a - b) / l2_norm(b);
}

} // namespace

TEST_CASE("fft round trip") {
  ComplexScalarField f = random_band_limited(g, 7);
  ComplexScalarField back(g);
  back.v = fft_inverse(g, fft_forward(g, f.v));
  CHECK(rel(back, f) < 1e-12);
}

TEST_CASE("omega_pow on a single mode") {
  ComplexScalarField f = mode(g, 3, 0, 0);
  double k = 2.0 * M_PI * 3 / g.L;
  ComplexScalarField out = omega_pow(f, 1.0);
  CHECK(rel(out, k * f) < 1e-12);
  // s = 0 is the identity, mean included
  ComplexScalarField h = random_band_limited(g, 3);
  CHECK(max_abs(omega_pow(h, 0.0) - h) < 1e-12 * max_abs(h));
}

TEST_CASE("omega_pow squared is minus the Laplacian") {
  ComplexScalarField f = random_band_limited(g, 11);
  // independent oracle: second derivative via two gradient passes
  ComplexScalarField lap(g);
  auto gr = gradient(f);
  for (int d = 0; d < 3; ++d) {
    auto gg = gradient(gr[d]);
    for (std::size_t m = 0; m < lap.v.size(); ++m) lap.v[m] += gg[d].v[m];
  }
  ComplexScalarField f0 = f;
  { // remove the mean: omega^2 kills it, the Laplacian oracle does too
    cdouble mean = 0;
    for (cdouble z : f0.v) mean += z;
    mean /= double(f0.v.size());
    for (cdouble& z : f0.v) z -= mean;
  }
  CHECK(rel(omega_pow(f0, 2.0), cdouble(-1, 0) * lap) < 1e-10);
}

TEST_CASE("inverse laplacian") {
  ComplexScalarField f = mode(g, 1, 0, 0);
  double k = 2.0 * M_PI / g.L;
  CHECK(rel(inverse_laplacian(f), cdouble(-1.0 / (k * k), 0) * f) < 1e-12);

  ComplexScalarField c(g);
  for (cdouble& z : c.v) z = 2.5;
  CHECK(max_abs(inverse_laplacian(c)) < 1e-14);

  // composition: Laplace(inv_laplace(f)) = f - mean(f)
  ComplexScalarField r = random_band_limited(g, 5);
  ComplexScalarField lap = cdouble(-1, 0) * omega_pow(inverse_laplacian(r), 2.0);
  cdouble mean = 0;
  for (cdouble z : r.v) mean += z;
  mean /= double(r.v.size());
  for (cdouble& z : r.v) z -= mean;
  CHECK(rel(lap, r) < 1e-10);
}

TEST_CASE("leray projector") {
  // gradients are annihilated
  ComplexScalarField h = random_band_limited(g, 13);
  for (cdouble& z : h.v) z = z.real();
  RealVectorField gradh = gradient_real(h);
  RealVectorField pg = leray_project(gradh);
  CHECK(max_abs(pg) < 1e-10 * max_abs(gradh));

  // idempotent, and the output passes the div-free check
  RealVectorField v(g);
  for (int d = 0; d < 3; ++d) {
    ComplexScalarField r = random_band_limited(g, 17 + d);
    for (std::size_t m = 0; m < v.c[d].size(); ++m) v.c[d][m] = r.v[m].real();
  }
  RealVectorField pv = leray_project(v);
  CHECK(pv.div_free);
  CHECK(max_divergence(pv) < 1e-10 * max_abs(pv));
  CHECK(max_abs(leray_project(pv) - pv) < 1e-12 * max_abs(pv));

  // curls are untouched
  RealVectorField cv = curl(v);
  CHECK(max_abs(leray_project(cv) - cv) < 1e-12 * max_abs(cv));
}

TEST_CASE("free propagator") {
  ComplexScalarField f = random_band_limited(g, 23);
  CHECK(rel(free_propagator(f, 0.0), f) < 1e-14);

  ComplexScalarField m = mode(g, 0, 2, 0);
  double k = 2.0 * M_PI * 2 / g.L;
  cdouble ph = std::exp(cdouble(0, -3.7 * k * k / 2.0));
  CHECK(rel(free_propagator(m, 3.7), ph * m) < 1e-12);

  CHECK(l2_norm(free_propagator(f, 3.7)) / l2_norm(f) == doctest::Approx(1.0).epsilon(1e-12));

  // one-parameter group
  ComplexScalarField ab = free_propagator(free_propagator(f, 1.3), 2.4);
  CHECK(rel(ab, free_propagator(f, 3.7)) < 1e-12);
}

TEST_CASE("dilation and factorization identities") {
  CHECK(mdfm_apply(random_band_limited(g, 2), 1.0, MdfmPiece::D0) .grid.n == g.n);
  ComplexScalarField f = random_band_limited(g, 29);
  CHECK(rel(dilate0(f, 1.0), f) < 1e-13);

  SpectralGrid g32{32, 16.0};
  CheckResult dil = check_dilation_identity(g32);
  CHECK(dil.value < dil.tolerance);
  CheckResult mdfm = check_mdfm_factorization(g32, 1.0);
  CHECK(mdfm.value < mdfm.tolerance);
}

TEST_CASE("norms") {
  ComplexScalarField f = mode(g, 5, 0, 0);
  double k = 2.0 * M_PI * 5 / g.L;
  double vol = std::pow(g.L, 1.5);
  CHECK(norm(f, {NormSpec::HkDot, 2.0}) == doctest::Approx(k * k * vol).epsilon(1e-12));
  CHECK(norm(f, {NormSpec::Hk, 2.0}) ==
        doctest::Approx(std::pow(1 + k * k, 1.0) * vol).epsilon(1e-12));
  // K^k = max(Hdot^1, Hdot^k)
  CHECK(norm(f, {NormSpec::Kk, 3.0}) ==
        doctest::Approx(std::max(k, k * k * k) * vol).epsilon(1e-12));
  CHECK(norm(f, {NormSpec::Lr, 2.0}) == doctest::Approx(vol).epsilon(1e-12));
}

TEST_CASE("galilei norm vs direct operator") {
  // the conjugation route resamples; n = 16 masks too much of the band
  SpectralGrid g32{32, 16.0};
  ComplexScalarField f = gaussian_field(g32, 1.0, 1.3, {0.8, 0, 0});
  const double t = 1.0;
  // |J(t)| f = x f + i t grad f, evaluated directly on the grid
  auto gr = gradient(f);
  double acc = 0;
  for (int d = 0; d < 3; ++d) {
    ComplexScalarField comp = coord_multiply(f, d);
    axpy(cdouble(0, t), gr[d], comp);
    double nn = l2_norm(comp);
    acc += nn * nn;
  }
  double direct = std::sqrt(acc);
  CHECK(galilei_norm(f, 1.0, t, /*homogeneous=*/true) ==
        doctest::Approx(direct).epsilon(1e-6));
  CHECK(galilei_norm(f, 0.0, t) == doctest::Approx(l2_norm(f)).epsilon(1e-12));
}

TEST_CASE("field dump round trip") {
  ComplexScalarField f = random_band_limited(g, 31);
  write_field("/tmp/mss_test_scalar.fld", f);
  CHECK(peek_field_kind("/tmp/mss_test_scalar.fld") == 0);
  ComplexScalarField back = read_scalar_field("/tmp/mss_test_scalar.fld");
  CHECK(back.grid == g);
  CHECK(max_abs(back - f) == 0.0);

  RealVectorField v(g);
  for (int d = 0; d < 3; ++d)
    for (std::size_t m = 0; m < v.c[d].size(); ++m) v.c[d][m] = std::sin(0.1 * (m + d));
  write_field("/tmp/mss_test_vector.fld", v);
  CHECK(peek_field_kind("/tmp/mss_test_vector.fld") == 1);
  RealVectorField vb = read_vector_field("/tmp/mss_test_vector.fld");
  CHECK(max_abs(vb - v) == 0.0);
  std::remove("/tmp/mss_test_scalar.fld");
  std::remove("/tmp/mss_test_vector.fld");
}

TEST_CASE("random fields are deterministic in the seed") {
  ComplexScalarField a = random_band_limited(g, 42), b = random_band_limited(g, 42);
  CHECK(max_abs(a - b) == 0.0);
  CHECK(max_abs(a - random_band_limited(g, 43)) > 0.0);
}
