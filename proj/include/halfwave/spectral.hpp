//==============================================================================
// spectral.hpp
// Periodic stand-in for the real line: Grid (nodes, angular frequencies,
// FFTW plans) and Field (complex samples on a Grid), plus the Fourier
// calculus used everywhere else: multipliers, D^s, derivatives, Sobolev
// norms, real inner product, conserved quantities, scaling generator,
// band-limited resampling.
//
// Conventions:
//   nodes  x_j = -L/2 + j dx, j = 0..N-1   (x = 0 sits at j = N/2)
//   freqs  xi_k = 2 pi k / L in FFTW order
//   int f  = dx * sum f_j,   int |f|^2 = (dx/N) sum |F_k|^2
//==============================================================================
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <vector>

namespace hw {

using cplx = std::complex<double>;
using cvec = Eigen::VectorXcd;
using rvec = Eigen::VectorXd;

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

//------------------------------------------------------------------------------
// Grid: immutable after construction. FFT entry points are thread-safe
// (fftw_execute_dft on caller buffers; planning is mutex-guarded).
//------------------------------------------------------------------------------
class Grid {
 public:
  // window_inner/outer: fractions of L where the scaling-generator cutoff
  // starts and reaches zero (see scaling_generator).
  static GridPtr make(int n_points, double length, double window_inner = 0.30,
                      double window_outer = 0.45);
  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  int n() const { return n_; }
  double length() const { return length_; }
  double dx() const { return dx_; }
  const rvec& nodes() const { return nodes_; }
  const rvec& freqs() const { return freqs_; }
  const rvec& abs_freqs() const { return abs_freqs_; }
  const rvec& window_coord() const { return xw_; }
  const rvec& window_coord_prime() const { return xw_prime_; }
  double window_inner() const { return win_a_; }
  double window_outer() const { return win_b_; }
  int origin_index() const { return n_ / 2; }
  int mirror(int j) const { return (n_ - j) % n_; }

  cvec fft(const cvec& in) const;   // unnormalized, e^{-i k x}
  cvec ifft(const cvec& in) const;  // includes 1/N
  void fft_inplace(cvec& a) const;
  void ifft_inplace(cvec& a) const;

  bool compatible(const Grid& o) const {
    return n_ == o.n_ && length_ == o.length_;
  }

 private:
  Grid(int n_points, double length, double wa, double wb);
  int n_;
  double length_, dx_, win_a_, win_b_;
  rvec nodes_, freqs_, abs_freqs_, xw_, xw_prime_;
  void* plan_fwd_ = nullptr;
  void* plan_bwd_ = nullptr;
};

//------------------------------------------------------------------------------
// Field: a grid reference plus N complex samples.
//------------------------------------------------------------------------------
struct Field {
  GridPtr grid;
  cvec v;

  Field() = default;
  explicit Field(GridPtr g) : grid(std::move(g)), v(cvec::Zero(grid->n())) {}
  Field(GridPtr g, cvec values);
  static Field from_real(GridPtr g, const rvec& r);
  static Field from_function(GridPtr g, const std::function<cplx(double)>& f);

  int size() const { return static_cast<int>(v.size()); }
  rvec re() const { return v.real(); }
  rvec im() const { return v.imag(); }
  Field conj() const { return Field(grid, v.conjugate()); }
  Field real_part() const;
  Field imag_part() const;  // returned as a real-valued field

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(cplx s) { v *= s; return *this; }
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator-(Field a);
Field operator*(cplx s, Field a);
Field operator*(double s, Field a);
Field mul(const Field& a, const Field& b);  // pointwise product
Field mul_real(const Field& a, const rvec& w);

void require_same_grid(const Field& a, const Field& b);
void check_finite(const Field& f, const char* where);

//------------------------------------------------------------------------------
// Fourier calculus
//------------------------------------------------------------------------------
Field apply_multiplier(const Field& f, const std::function<double(double)>& symbol);
Field apply_symbol(const Field& f, const rvec& symbol);      // precomputed symbol values
Field apply_symbol(const Field& f, const cvec& symbol);
Field frac_d(const Field& f, double s = 1.0);               // D^s, D = |xi|
Field derivative(const Field& f, int order = 1);
Field dealias(const Field& f);                               // 2/3 rule

double inner_r(const Field& f, const Field& g);               // Re int f conj(g)
double norm_l2(const Field& f);
double sobolev_norm(const Field& f, double s, bool homogeneous);
double integral(const Field& f);                              // Re int f

struct ConservedQuantities {
  double mass = 0, momentum = 0, energy = 0;
};
ConservedQuantities conserved_quantities(const Field& u);

// Lambda f = 1/2 X' f + X f' with X = x w(x): equals 1/2 f + x f' where the
// cutoff w is 1 (|x| <= window_inner L) and is exactly antisymmetric on the
// torus. scaling_generator_plain uses X = x (nodes) as a reference.
Field scaling_generator(const Field& f);
Field scaling_generator_plain(const Field& f);

// Parity helpers; reflection is x -> -x, i.e. j -> (N - j) mod N.
Field reflect(const Field& f);
Field even_part(const Field& f);
Field odd_part(const Field& f);
double asymmetry(const Field& f, int parity);  // max |f(x) - parity f(-x)|
double max_abs(const Field& f);
double boundary_max(const Field& f, double fraction = 0.10);

// Band-limited translation f(x - shift).
Field translate(const Field& f, double shift);

// Values of the trigonometric interpolant of f at x0 + j h, j = 0..m-1,
// computed with a chirp-z (Bluestein) transform.
cvec sample_interpolant(const Field& f, double x0, double h, int m);

// Pushes a profile living on its own grid to `target`:
//   lambda^{-1/2} f((x - xbar)/lambda) e^{i gamma}
Field render(const Field& profile, const GridPtr& target, double lambda, double xbar,
             double gamma);
// Inverse of render: lambda^{1/2} e^{-i gamma} u(lambda y + xbar) on `target`.
Field renormalize(const Field& u, const GridPtr& target, double lambda, double xbar,
                  double gamma);

}  // namespace hw
