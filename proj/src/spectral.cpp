//==============================================================================
// spectral.cpp
// FFTW-backed implementation of the periodic Fourier calculus.
// Notes:
//   • All plans are in-place, FFTW_ESTIMATE | FFTW_UNALIGNED, and executed with
//     fftw_execute_dft on caller buffers, so one plan serves every thread.
//   • Plans are cached per (size, sign); creation is serialized by a mutex.
//==============================================================================

#include "halfwave/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

#include "halfwave/errors.hpp"

namespace hw {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan cached_plan(int n, int sign) {
  static std::map<std::pair<int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto key = std::make_pair(n, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  fftw_complex* buf = fftw_alloc_complex(static_cast<size_t>(n));
  fftw_plan p = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  cache[key] = p;
  return p;
}

void exec_inplace(fftw_plan p, cvec& a) {
  auto* d = reinterpret_cast<fftw_complex*>(a.data());
  fftw_execute_dft(p, d, d);
}

// exp(-1/u) blend: 0 at u <= 0, 1 at u >= 1, C-infinity in between.
double smooth_step(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  double g0 = std::exp(-1.0 / u), g1 = std::exp(-1.0 / (1.0 - u));
  return g0 / (g0 + g1);
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

//------------------------------------------------------------------------------
// Grid
//------------------------------------------------------------------------------
GridPtr Grid::make(int n_points, double length, double window_inner, double window_outer) {
  return GridPtr(new Grid(n_points, length, window_inner, window_outer));
}

Grid::Grid(int n_points, double length, double wa, double wb)
    : n_(n_points), length_(length), dx_(length / n_points), win_a_(wa), win_b_(wb) {
  if (n_points < 8 || !is_pow2(n_points))
    throw Error(ErrorKind::InvalidArgument, "grid size must be a power of two >= 8", n_points);
  if (!(length > 0.0) || !std::isfinite(length))
    throw Error(ErrorKind::InvalidArgument, "grid length must be positive", length);
  if (!(wa > 0.0 && wb > wa && wb < 0.5))
    throw Error(ErrorKind::InvalidArgument, "window fractions must satisfy 0 < a < b < 1/2");

  nodes_.resize(n_);
  freqs_.resize(n_);
  for (int j = 0; j < n_; ++j) {
    nodes_[j] = -0.5 * length_ + j * dx_;
    int k = (j <= n_ / 2 - 1) ? j : j - n_;
    if (j == n_ / 2) k = -n_ / 2;
    freqs_[j] = 2.0 * M_PI * k / length_;
  }
  abs_freqs_ = freqs_.cwiseAbs();

  plan_fwd_ = cached_plan(n_, FFTW_FORWARD);
  plan_bwd_ = cached_plan(n_, FFTW_BACKWARD);

  xw_.resize(n_);
  const double a = wa * length_, b = wb * length_;
  for (int j = 0; j < n_; ++j) {
    double x = nodes_[j];
    double w = smooth_step(1.0 - (std::abs(x) - a) / (b - a));
    xw_[j] = x * w;
  }
  cvec X = xw_.cast<cplx>();
  fft_inplace(X);
  for (int j = 0; j < n_; ++j) X[j] *= cplx(0.0, freqs_[j]);
  X[n_ / 2] = 0.0;
  ifft_inplace(X);
  xw_prime_ = X.real();
}

Grid::~Grid() = default;

cvec Grid::fft(const cvec& in) const {
  cvec a = in;
  fft_inplace(a);
  return a;
}

cvec Grid::ifft(const cvec& in) const {
  cvec a = in;
  ifft_inplace(a);
  return a;
}

void Grid::fft_inplace(cvec& a) const {
  exec_inplace(static_cast<fftw_plan>(plan_fwd_), a);
}

void Grid::ifft_inplace(cvec& a) const {
  exec_inplace(static_cast<fftw_plan>(plan_bwd_), a);
  a /= static_cast<double>(n_);
}

//------------------------------------------------------------------------------
// Field basics
//------------------------------------------------------------------------------
Field::Field(GridPtr g, cvec values) : grid(std::move(g)), v(std::move(values)) {
  if (v.size() != grid->n())
    throw Error(ErrorKind::GridMismatch, "field length does not match grid", v.size());
}

Field Field::from_real(GridPtr g, const rvec& r) { return Field(std::move(g), r.cast<cplx>()); }

Field Field::from_function(GridPtr g, const std::function<cplx(double)>& f) {
  Field out(g);
  for (int j = 0; j < g->n(); ++j) out.v[j] = f(g->nodes()[j]);
  return out;
}

Field Field::real_part() const { return Field::from_real(grid, v.real()); }
Field Field::imag_part() const { return Field::from_real(grid, v.imag()); }

void require_same_grid(const Field& a, const Field& b) {
  if (!a.grid || !b.grid) throw Error(ErrorKind::GridMismatch, "field without grid");
  if (a.grid != b.grid && !a.grid->compatible(*b.grid))
    throw Error(ErrorKind::GridMismatch, "fields live on different grids");
}

Field& Field::operator+=(const Field& o) {
  require_same_grid(*this, o);
  v += o.v;
  return *this;
}

Field& Field::operator-=(const Field& o) {
  require_same_grid(*this, o);
  v -= o.v;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator-(Field a) { a.v = -a.v; return a; }
Field operator*(cplx s, Field a) { a.v *= s; return a; }
Field operator*(double s, Field a) { a.v *= s; return a; }

Field mul(const Field& a, const Field& b) {
  require_same_grid(a, b);
  return Field(a.grid, a.v.cwiseProduct(b.v));
}

Field mul_real(const Field& a, const rvec& w) {
  return Field(a.grid, a.v.cwiseProduct(w.cast<cplx>()));
}

void check_finite(const Field& f, const char* where) {
  if (!f.v.allFinite()) throw Error(ErrorKind::Numerics, std::string("non-finite values in ") + where);
}

//------------------------------------------------------------------------------
// Multipliers
//------------------------------------------------------------------------------
Field apply_multiplier(const Field& f, const std::function<double(double)>& symbol) {
  const auto& xi = f.grid->freqs();
  rvec s(xi.size());
  for (int k = 0; k < xi.size(); ++k) {
    s[k] = symbol(xi[k]);
    if (!std::isfinite(s[k]))
      throw Error(ErrorKind::MultiplierDomain, "symbol not finite at a grid frequency", xi[k]);
  }
  return apply_symbol(f, s);
}

Field apply_symbol(const Field& f, const rvec& symbol) {
  cvec a = f.grid->fft(f.v);
  a.array() *= symbol.array().cast<cplx>();
  f.grid->ifft_inplace(a);
  return Field(f.grid, std::move(a));
}

Field apply_symbol(const Field& f, const cvec& symbol) {
  cvec a = f.grid->fft(f.v);
  a.array() *= symbol.array();
  f.grid->ifft_inplace(a);
  return Field(f.grid, std::move(a));
}

Field frac_d(const Field& f, double s) {
  if (s == 1.0) return apply_symbol(f, f.grid->abs_freqs());
  rvec sym = f.grid->abs_freqs().array().pow(s);
  if (s < 0) sym[0] = 0.0;
  return apply_symbol(f, sym);
}

// Odd-order derivatives drop the unpaired Nyquist mode so real fields stay real.
Field derivative(const Field& f, int order) {
  const auto& xi = f.grid->freqs();
  const int n = f.grid->n();
  cvec sym(n);
  for (int k = 0; k < n; ++k) sym[k] = std::pow(cplx(0.0, xi[k]), order);
  if (order % 2 == 1) sym[n / 2] = 0.0;
  return apply_symbol(f, sym);
}

Field dealias(const Field& f) {
  const int n = f.grid->n();
  cvec a = f.grid->fft(f.v);
  const int kmax = n / 3;
  for (int j = 0; j < n; ++j) {
    int k = (j < n / 2) ? j : j - n;
    if (std::abs(k) > kmax) a[j] = 0.0;
  }
  f.grid->ifft_inplace(a);
  return Field(f.grid, std::move(a));
}

//------------------------------------------------------------------------------
// Inner products and norms
//------------------------------------------------------------------------------
double inner_r(const Field& f, const Field& g) {
  require_same_grid(f, g);
  double s = 0.0;
  for (int j = 0; j < f.size(); ++j)
    s += f.v[j].real() * g.v[j].real() + f.v[j].imag() * g.v[j].imag();
  return s * f.grid->dx();
}

double norm_l2(const Field& f) { return std::sqrt(inner_r(f, f)); }

double integral(const Field& f) { return f.v.real().sum() * f.grid->dx(); }

double sobolev_norm(const Field& f, double s, bool homogeneous) {
  if (s < 0) throw Error(ErrorKind::InvalidArgument, "negative Sobolev index", s);
  cvec a = f.grid->fft(f.v);
  const auto& xi = f.grid->freqs();
  double acc = 0.0;
  for (int k = 0; k < a.size(); ++k) {
    double w;
    if (homogeneous)
      w = (s == 0.0) ? 1.0 : std::pow(std::abs(xi[k]), 2.0 * s);
    else
      w = std::pow(1.0 + xi[k] * xi[k], s);
    acc += w * std::norm(a[k]);
  }
  return std::sqrt(acc * f.grid->dx() / f.grid->n());
}

ConservedQuantities conserved_quantities(const Field& u) {
  ConservedQuantities c;
  const double dx = u.grid->dx();
  cvec a = u.grid->fft(u.v);
  const auto& xi = u.grid->freqs();
  double kin = 0.0, mom = 0.0;
  for (int k = 0; k < a.size(); ++k) {
    double p = std::norm(a[k]);
    kin += std::abs(xi[k]) * p;
    mom += xi[k] * p;
  }
  kin *= dx / u.grid->n();
  mom *= dx / u.grid->n();
  double m = 0.0, q4 = 0.0;
  for (int j = 0; j < u.size(); ++j) {
    double p = std::norm(u.v[j]);
    m += p;
    q4 += p * p;
  }
  c.mass = m * dx;
  // -Re int i u' conj(u) = sum xi |u_hat|^2 (Nyquist mode included with its
  // signed frequency; it is zero for resolved fields)
  c.momentum = mom;
  c.energy = 0.5 * kin - 0.25 * q4 * dx;
  return c;
}

//------------------------------------------------------------------------------
// Scaling generator
//------------------------------------------------------------------------------
Field scaling_generator(const Field& f) {
  const auto& g = *f.grid;
  Field df = derivative(f);
  Field out(f.grid);
  for (int j = 0; j < g.n(); ++j)
    out.v[j] = 0.5 * g.window_coord_prime()[j] * f.v[j] + g.window_coord()[j] * df.v[j];
  return out;
}

Field scaling_generator_plain(const Field& f) {
  const auto& x = f.grid->nodes();
  Field df = derivative(f);
  Field out(f.grid);
  for (int j = 0; j < f.size(); ++j) out.v[j] = 0.5 * f.v[j] + x[j] * df.v[j];
  return out;
}

//------------------------------------------------------------------------------
// Parity and pointwise diagnostics
//------------------------------------------------------------------------------
Field reflect(const Field& f) {
  Field r(f.grid);
  for (int j = 0; j < f.size(); ++j) r.v[j] = f.v[f.grid->mirror(j)];
  return r;
}

Field even_part(const Field& f) { return 0.5 * (f + reflect(f)); }
Field odd_part(const Field& f) { return 0.5 * (f - reflect(f)); }

double asymmetry(const Field& f, int parity) {
  double m = 0.0;
  for (int j = 0; j < f.size(); ++j)
    m = std::max(m, std::abs(f.v[j] - double(parity) * f.v[f.grid->mirror(j)]));
  return m;
}

double max_abs(const Field& f) { return f.v.cwiseAbs().maxCoeff(); }

double boundary_max(const Field& f, double fraction) {
  const double cut = (0.5 - fraction) * f.grid->length();
  double m = 0.0;
  for (int j = 0; j < f.size(); ++j)
    if (std::abs(f.grid->nodes()[j]) >= cut) m = std::max(m, std::abs(f.v[j]));
  return m;
}

Field translate(const Field& f, double shift) {
  const auto& xi = f.grid->freqs();
  const int n = f.grid->n();
  cvec sym(n);
  for (int k = 0; k < n; ++k) sym[k] = std::polar(1.0, -xi[k] * shift);
  sym[n / 2] = std::cos(xi[n / 2] * shift);
  return apply_symbol(f, sym);
}

//------------------------------------------------------------------------------
// Chirp-z evaluation of the trigonometric interpolant on a uniform point set.
// The Nyquist coefficient is split evenly between +-N/2 so the interpolant of
// real data is real.
//------------------------------------------------------------------------------
cvec sample_interpolant(const Field& f, double x0, double h, int m) {
  const Grid& g = *f.grid;
  const int n = g.n();
  const int K = n + 1;
  const int kmin = -n / 2;
  cvec F = g.fft(f.v);

  const long double L = g.length();
  const long double two_pi = 2.0L * 3.141592653589793238462643383279502884L;
  const long double theta = two_pi * static_cast<long double>(h) / L;
  const long double off = static_cast<long double>(x0) - static_cast<long double>(g.nodes()[0]);

  auto phase = [&](long double ph) {
    ph = std::fmod(ph, two_pi);
    return std::polar(1.0, static_cast<double>(ph));
  };

  int P = 1;
  while (P < K + m - 1) P <<= 1;
  cvec U = cvec::Zero(P), V = cvec::Zero(P);
  for (int kp = 0; kp < K; ++kp) {
    int k = kp + kmin;
    cplx a;
    if (k == -n / 2 || k == n / 2)
      a = 0.5 * F[n / 2];
    else
      a = F[(k + n) % n];
    long double kk = kp;
    U[kp] = a * phase(two_pi * static_cast<long double>(k) * off / L) * phase(0.5L * theta * kk * kk);
  }
  for (int q = -(K - 1); q <= m - 1; ++q) {
    long double qq = q;
    V[(q + P) % P] = phase(-0.5L * theta * qq * qq);
  }
  fftw_plan pf = cached_plan(P, FFTW_FORWARD), pb = cached_plan(P, FFTW_BACKWARD);
  exec_inplace(pf, U);
  exec_inplace(pf, V);
  U.array() *= V.array();
  exec_inplace(pb, U);
  U /= static_cast<double>(P);

  cvec out(m);
  for (int j = 0; j < m; ++j) {
    long double jj = j;
    out[j] = U[j] * phase(theta * static_cast<long double>(kmin) * jj) * phase(0.5L * theta * jj * jj) /
             static_cast<double>(n);
  }
  return out;
}

Field render(const Field& profile, const GridPtr& target, double lambda, double xbar, double gamma) {
  if (!(lambda > 0)) throw Error(ErrorKind::InvalidArgument, "render needs lambda > 0", lambda);
  const double y0 = (target->nodes()[0] - xbar) / lambda;
  const double hy = target->dx() / lambda;
  cvec s = sample_interpolant(profile, y0, hy, target->n());
  s *= std::polar(1.0 / std::sqrt(lambda), gamma);
  return Field(target, std::move(s));
}

Field renormalize(const Field& u, const GridPtr& target, double lambda, double xbar, double gamma) {
  if (!(lambda > 0)) throw Error(ErrorKind::InvalidArgument, "renormalize needs lambda > 0", lambda);
  const double x0 = lambda * target->nodes()[0] + xbar;
  const double hx = lambda * target->dx();
  cvec s = sample_interpolant(u, x0, hx, target->n());
  s *= std::polar(std::sqrt(lambda), -gamma);
  return Field(target, std::move(s));
}

}  // namespace hw
