#include "mss/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace mss {

namespace {

// Fritsch-Carlson derivative at an interior node from adjacent secant slopes
double fc_derivative(double h0, double h1, double d0, double d1) {
  if (d0 * d1 <= 0.0) return 0.0;
  double w0 = 2.0 * h1 + h0;
  double w1 = h1 + 2.0 * h0;
  return (w0 + w1) / (w0 / d0 + w1 / d1);
}

// one-sided endpoint derivative, shape-limited
double end_derivative(double h0, double h1, double d0, double d1) {
  double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
  if (d * d0 <= 0.0) return 0.0;
  if (d0 * d1 <= 0.0 && std::abs(d) > 3.0 * std::abs(d0)) return 3.0 * d0;
  return d;
}

} // namespace

int pchip_interval(const std::vector<double>& xs, double x) {
  int n = static_cast<int>(xs.size());
  if (n < 2) throw std::invalid_argument("pchip_interval: need at least 2 nodes");
  if (x <= xs.front()) return 0;
  if (x >= xs.back()) return n - 2;
  int lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    (xs[mid] <= x ? lo : hi) = mid;
  }
  return lo;
}

double pchip_eval(const double* xs, const double* ys, int npts, double x) {
  if (npts < 2) throw std::invalid_argument("pchip_eval: need at least 2 nodes");
  int i = 0;
  if (x > xs[0]) {
    int lo = 0, hi = npts - 1;
    if (x >= xs[npts - 1]) {
      i = npts - 2;
    } else {
      while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        (xs[mid] <= x ? lo : hi) = mid;
      }
      i = lo;
    }
  }
  double h = xs[i + 1] - xs[i];
  double delta = (ys[i + 1] - ys[i]) / h;
  double di, dip;
  if (i > 0) {
    double hm = xs[i] - xs[i - 1];
    double dm = (ys[i] - ys[i - 1]) / hm;
    di = fc_derivative(hm, h, dm, delta);
  } else if (npts > 2) {
    double hp = xs[i + 2] - xs[i + 1];
    double dp = (ys[i + 2] - ys[i + 1]) / hp;
    di = end_derivative(h, hp, delta, dp);
  } else {
    di = delta;
  }
  if (i + 2 < npts) {
    double hp = xs[i + 2] - xs[i + 1];
    double dp = (ys[i + 2] - ys[i + 1]) / hp;
    dip = fc_derivative(h, hp, delta, dp);
  } else if (npts > 2) {
    double hm = xs[i] - xs[i - 1];
    double dm = (ys[i] - ys[i - 1]) / hm;
    dip = end_derivative(h, hm, delta, dm);
  } else {
    dip = delta;
  }
  double s = (x - xs[i]) / h;
  double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  double h10 = s * (1 - s) * (1 - s);
  double h01 = s * s * (3 - 2 * s);
  double h11 = s * s * (s - 1);
  return h00 * ys[i] + h10 * h * di + h01 * ys[i + 1] + h11 * h * dip;
}

namespace {

// gather a 4-node neighborhood around the interval and evaluate locally; keeps
// per-grid-point cost flat regardless of trajectory length
template <typename Getter>
double pchip_local(const std::vector<double>& lnt, int i, double x, Getter get) {
  int n = static_cast<int>(lnt.size());
  int lo = std::max(0, i - 1);
  int hi = std::min(n - 1, i + 2);
  double xs[4], ys[4];
  int cnt = hi - lo + 1;
  for (int m = 0; m < cnt; ++m) {
    xs[m] = lnt[lo + m];
    ys[m] = get(lo + m);
  }
  return pchip_eval(xs, ys, cnt, x);
}

} // namespace

ComplexScalarField interp_series(const std::vector<double>& lnt,
                                 const std::vector<ComplexScalarField>& f, double t) {
  if (lnt.size() != f.size() || f.empty())
    throw std::invalid_argument("interp_series: series shape mismatch");
  if (f.size() == 1) return f[0];
  double x = std::log(t);
  int i = pchip_interval(lnt, x);
  ComplexScalarField out(f[0].grid);
  const std::size_t sz = out.v.size();
  for (std::size_t m = 0; m < sz; ++m) {
    double re = pchip_local(lnt, i, x, [&](int node) { return f[node].v[m].real(); });
    double im = pchip_local(lnt, i, x, [&](int node) { return f[node].v[m].imag(); });
    out.v[m] = cdouble(re, im);
  }
  return out;
}

RealVectorField interp_series(const std::vector<double>& lnt,
                              const std::vector<RealVectorField>& f, double t) {
  if (lnt.size() != f.size() || f.empty())
    throw std::invalid_argument("interp_series: series shape mismatch");
  if (f.size() == 1) return f[0];
  double x = std::log(t);
  int i = pchip_interval(lnt, x);
  RealVectorField out(f[0].grid);
  out.div_free = f[0].div_free;
  const std::size_t sz = out.c[0].size();
  for (int d = 0; d < 3; ++d)
    for (std::size_t m = 0; m < sz; ++m)
      out.c[d][m] = pchip_local(lnt, i, x, [&](int node) { return f[node].c[d][m]; });
  return out;
}

Quadrature gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  Quadrature q;
  q.x.resize(order);
  q.w.resize(order);
  for (int i = 0; i < order; ++i) {
    // Newton iteration from the Chebyshev-based initial guess
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = order * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= order; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = order * (x * p1 - p0) / (x * x - 1.0);
    q.x[order - 1 - i] = x;
    q.w[order - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

Quadrature panel_quadrature(const std::vector<double>& boundaries, int order) {
  if (boundaries.size() < 2) throw std::invalid_argument("panel_quadrature: need >= 2 boundaries");
  Quadrature gl = gauss_legendre(order);
  Quadrature q;
  for (std::size_t p = 0; p + 1 < boundaries.size(); ++p) {
    double a = boundaries[p], b = boundaries[p + 1];
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < order; ++i) {
      q.x.push_back(mid + half * gl.x[i]);
      q.w.push_back(half * gl.w[i]);
    }
  }
  return q;
}

std::vector<double> log_spaced(double a, double b, int count) {
  if (count < 2 || a <= 0 || b <= a)
    throw std::invalid_argument("log_spaced: need 0 < a < b and count >= 2");
  std::vector<double> r(count);
  double la = std::log(a), lb = std::log(b);
  for (int i = 0; i < count; ++i) r[i] = std::exp(la + (lb - la) * i / (count - 1));
  r.front() = a;
  r.back() = b;
  return r;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("linear_fit: need >= 2 matched samples");
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  double vxx = sxx - sx * sx / n;
  double vxy = sxy - sx * sy / n;
  double vyy = syy - sy * sy / n;
  LinearFit f;
  f.slope = vxy / vxx;
  f.intercept = (sy - f.slope * sx) / n;
  f.r2 = (vyy > 0) ? (vxy * vxy) / (vxx * vyy) : 1.0;
  return f;
}

std::array<double, 5> fd5_weights(const std::array<double, 5>& xs, int j) {
  std::array<double, 5> w{};
  for (int i = 0; i < 5; ++i) {
    if (i == j) {
      double s = 0;
      for (int m = 0; m < 5; ++m)
        if (m != j) s += 1.0 / (xs[j] - xs[m]);
      w[i] = s;
    } else {
      double num = 1.0, den = 1.0;
      for (int m = 0; m < 5; ++m) {
        if (m == i) continue;
        den *= xs[i] - xs[m];
        if (m != j) num *= xs[j] - xs[m];
      }
      w[i] = num / den;
    }
  }
  return w;
}

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace mss
