//==============================================================================
// linearized.cpp
//==============================================================================

#include "halfwave/linearized.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "halfwave/errors.hpp"

extern "C" {
void dsytrf_(const char* uplo, const int* n, double* a, const int* lda, int* ipiv, double* work,
             const int* lwork, int* info);
void dsytrs_(const char* uplo, const int* n, const int* nrhs, const double* a, const int* lda,
             const int* ipiv, double* b, const int* ldb, int* info);
}

namespace hw {

//------------------------------------------------------------------------------
// Parity orbits: index a and its mirror N - a. Even basis vectors are
// e_0, e_{N/2} and (e_a + e_{N-a})/sqrt2; odd ones (e_a - e_{N-a})/sqrt2.
//------------------------------------------------------------------------------
namespace {

struct Orbit {
  int i0, i1;   // i1 < 0 for fixed points
  double s1;    // sign of the mirrored entry
  double c;     // normalization
};

std::vector<Orbit> orbits(int n, int parity) {
  std::vector<Orbit> out;
  const double r = 1.0 / std::sqrt(2.0);
  if (parity == 0) {
    out.push_back({0, -1, 0.0, 1.0});
    for (int a = 1; a < n / 2; ++a) out.push_back({a, n - a, 1.0, r});
    out.push_back({n / 2, -1, 0.0, 1.0});
  } else {
    for (int a = 1; a < n / 2; ++a) out.push_back({a, n - a, -1.0, r});
  }
  return out;
}

rvec reduce(const std::vector<Orbit>& orb, const rvec& f) {
  rvec r(orb.size());
  for (size_t a = 0; a < orb.size(); ++a) {
    const auto& o = orb[a];
    r[a] = o.c * (f[o.i0] + (o.i1 >= 0 ? o.s1 * f[o.i1] : 0.0));
  }
  return r;
}

void expand_add(const std::vector<Orbit>& orb, const rvec& r, rvec& f) {
  for (size_t a = 0; a < orb.size(); ++a) {
    const auto& o = orb[a];
    f[o.i0] += o.c * r[a];
    if (o.i1 >= 0) f[o.i1] += o.s1 * o.c * r[a];
  }
}

rvec circulant_symbol_row(const GridPtr& g) {
  cvec s = g->abs_freqs().cast<cplx>();
  return g->ifft(s).real();
}

}  // namespace

struct LinearizedOperator::Factor {
  int parity = 0;
  bool bordered = false;
  int dim = 0;
  std::vector<Orbit> orb;
  Eigen::MatrixXd lu;
  std::vector<int> ipiv;
};

LinearizedOperator::~LinearizedOperator() = default;

//------------------------------------------------------------------------------
// build
//------------------------------------------------------------------------------
std::shared_ptr<const LinearizedOperator> LinearizedOperator::build(const GroundState& gs,
                                                                    const LinearizedOptions& opt) {
  if (!gs.q.grid) throw Error(ErrorKind::InvalidArgument, "ground state has no grid");
  std::shared_ptr<LinearizedOperator> op(new LinearizedOperator());
  op->gs_ = gs;
  const GridPtr& g = gs.q.grid;
  const int n = g->n();
  const rvec q = gs.q.re();
  op->grad_q_ = derivative(gs.q).real_part();
  op->v_plus_ = 3.0 * q.array().square();
  op->v_minus_ = q.array().square();

  const rvec c = circulant_symbol_row(g);
  auto entry = [&](const rvec& v, int i, int j) {
    double m = c[((i - j) % n + n) % n];
    if (i == j) m += 1.0 - v[i];
    return m;
  };

  if (opt.store_dense) {
    op->l_plus_.resize(n, n);
    op->l_minus_.resize(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double m = c[((i - j) % n + n) % n];
        op->l_plus_(i, j) = m + (i == j ? 1.0 - op->v_plus_[i] : 0.0);
        op->l_minus_(i, j) = m + (i == j ? 1.0 - op->v_minus_[i] : 0.0);
      }
  }

  // Kernel relations first; a stale ground state makes the bordered
  // factorizations meaningless.
  const double r_minus = norm_l2(op->apply(Block::Minus, gs.q)) / norm_l2(gs.q);
  const double r_plus = norm_l2(op->apply(Block::Plus, op->grad_q_)) / norm_l2(op->grad_q_);
  op->kernel_residuals["L-Q"] = r_minus;
  op->kernel_residuals["L+gradQ"] = r_plus;
  if (r_minus > opt.kernel_tol || r_plus > opt.kernel_tol)
    throw Error(ErrorKind::StaleGroundState, "kernel residual too large", std::max(r_minus, r_plus));

  // Q is even (kernel of L- sits in the even block); Q' is odd.
  for (Block b : {Block::Plus, Block::Minus}) {
    const rvec& v = op->potential(b);
    for (int parity = 0; parity < 2; ++parity) {
      auto f = std::make_unique<Factor>();
      f->parity = parity;
      f->orb = orbits(n, parity);
      const bool kernel_here = (b == Block::Minus && parity == 0) || (b == Block::Plus && parity == 1);
      f->bordered = kernel_here;
      const int m = static_cast<int>(f->orb.size());
      f->dim = m + (kernel_here ? 1 : 0);
      f->lu.setZero(f->dim, f->dim);
      for (int bj = 0; bj < m; ++bj) {
        const Orbit& ob = f->orb[bj];
        for (int ai = 0; ai < m; ++ai) {
          const Orbit& oa = f->orb[ai];
          double s = entry(v, oa.i0, ob.i0);
          if (ob.i1 >= 0) s += ob.s1 * entry(v, oa.i0, ob.i1);
          if (oa.i1 >= 0) {
            s += oa.s1 * entry(v, oa.i1, ob.i0);
            if (ob.i1 >= 0) s += oa.s1 * ob.s1 * entry(v, oa.i1, ob.i1);
          }
          f->lu(ai, bj) = oa.c * ob.c * s;
        }
      }
      if (kernel_here) {
        rvec k = reduce(f->orb, op->kernel(b).re());
        k /= k.norm();
        f->lu.block(0, m, m, 1) = k;
        f->lu.block(m, 0, 1, m) = k.transpose();
      }
      f->ipiv.resize(f->dim);
      int info = 0, lwork = -1;
      double wq = 0;
      const char uplo = 'L';
      dsytrf_(&uplo, &f->dim, f->lu.data(), &f->dim, f->ipiv.data(), &wq, &lwork, &info);
      lwork = std::max(1, static_cast<int>(wq));
      std::vector<double> work(lwork);
      dsytrf_(&uplo, &f->dim, f->lu.data(), &f->dim, f->ipiv.data(), work.data(), &lwork, &info);
      if (info != 0)
        throw Error(ErrorKind::Degeneracy, "singular parity block in the linearized operator", info);
      op->factors_.push_back(std::move(f));
    }
  }
  return op;
}

//------------------------------------------------------------------------------
// apply
//------------------------------------------------------------------------------
Field LinearizedOperator::apply(Block b, const Field& f) const {
  require_same_grid(f, gs_.q);
  Field out = frac_d(f) + f;
  const rvec& v = potential(b);
  for (int j = 0; j < out.size(); ++j) out.v[j] -= v[j] * f.v[j];
  return out;
}

Field LinearizedOperator::apply_full(const Field& f) const {
  Field re = apply(Block::Plus, f.real_part());
  Field im = apply(Block::Minus, f.imag_part());
  Field out(grid());
  out.v.real() = re.v.real();
  out.v.imag() = im.v.real();
  return out;
}

//------------------------------------------------------------------------------
// solve
//------------------------------------------------------------------------------
rvec LinearizedOperator::solve_parity(Block b, int parity, const rvec& rhs) const {
  const Factor& f = *factors_[(b == Block::Plus ? 0 : 2) + parity];
  rvec r = rvec::Zero(f.dim);
  r.head(f.orb.size()) = reduce(f.orb, rhs);
  int nrhs = 1, info = 0;
  const char uplo = 'L';
  dsytrs_(&uplo, &f.dim, &nrhs, f.lu.data(), &f.dim, f.ipiv.data(), r.data(), &f.dim, &info);
  if (info != 0) throw Error(ErrorKind::Numerics, "dsytrs failed", info);
  rvec x = rvec::Zero(rhs.size());
  expand_add(f.orb, r.head(f.orb.size()), x);
  return x;
}

Field LinearizedOperator::solve(Block b, const Field& rhs, const std::vector<Field>& orthogonal_to,
                                double solvability_tol) const {
  require_same_grid(rhs, gs_.q);
  const double rn = norm_l2(rhs);
  if (rhs.im().norm() > 1e-12 * std::max(1.0, rhs.re().norm()))
    throw Error(ErrorKind::InvalidArgument, "block solve needs a real right-hand side");
  const GridPtr& g = grid();
  if (rn == 0.0) return Field(g);

  const Field& k = kernel(b);
  const double kk = inner_r(k, k);
  const double rk = inner_r(rhs, k);
  const double viol = std::abs(rk) / (rn * std::sqrt(kk));
  if (viol > solvability_tol)
    throw Error(ErrorKind::Solvability, "right-hand side not orthogonal to the block kernel", rk);
  rvec r = rhs.re() - (rk / kk) * k.re();

  // x -> -x splitting
  rvec re(r.size()), ro(r.size());
  for (int j = 0; j < r.size(); ++j) {
    re[j] = 0.5 * (r[j] + r[g->mirror(j)]);
    ro[j] = 0.5 * (r[j] - r[g->mirror(j)]);
  }
  rvec x = solve_parity(b, 0, re) + solve_parity(b, 1, ro);
  Field xf = Field::from_real(g, x);

  if (!orthogonal_to.empty()) {
    double num = 0, den = 0, scale = 0;
    for (const auto& o : orthogonal_to) {
      require_same_grid(o, gs_.q);
      const double ko = inner_r(k, o);
      num += inner_r(xf, o) * ko;
      den += ko * ko;
      scale += kk * inner_r(o, o);
    }
    if (den <= 1e-20 * scale)
      throw Error(ErrorKind::Degeneracy, "orthogonality set does not fix the kernel component", den);
    xf -= (num / den) * k;
  }
  return xf;
}

Field solve_constrained(const LinearizedOperator& op, Block b, const Field& rhs,
                        const std::vector<Field>& orthogonal_to, double solvability_tol) {
  return op.solve(b, rhs, orthogonal_to, solvability_tol);
}

//------------------------------------------------------------------------------
// generalized kernel
//------------------------------------------------------------------------------
KernelElements kernel_elements(const LinearizedOperator& op) {
  KernelElements ke;
  const Field& q = op.q();
  ke.grad_q = op.grad_q();
  ke.lambda_q = scaling_generator(q).real_part();
  ke.s1 = op.solve(Block::Minus, ke.lambda_q, {q});
  ke.g1 = op.solve(Block::Minus, -1.0 * ke.grad_q, {q});
  ke.rho1 = op.solve(Block::Plus, ke.s1, {ke.grad_q});

  auto& ip = ke.inner_products;
  ip["(LambdaQ,S1)"] = inner_r(ke.lambda_q, ke.s1);
  ip["(gradQ,G1)"] = inner_r(ke.grad_q, ke.g1);
  ip["(Q,rho1)"] = inner_r(q, ke.rho1);
  ip["(S1,S1)"] = inner_r(ke.s1, ke.s1);
  ip["(G1,G1)"] = inner_r(ke.g1, ke.g1);
  ip["(rho1,rho1)"] = inner_r(ke.rho1, ke.rho1);
  ip["(L-S1,S1)"] = inner_r(op.apply(Block::Minus, ke.s1), ke.s1);
  ip["(L-G1,G1)"] = inner_r(op.apply(Block::Minus, ke.g1), ke.g1);
  ip["(Q,Q)"] = inner_r(q, q);
  ip["(LambdaQ,Q)"] = inner_r(ke.lambda_q, q);
  ip["(gradQ,gradQ)"] = inner_r(ke.grad_q, ke.grad_q);
  ip["(S1,rho1)"] = inner_r(ke.s1, ke.rho1);

  auto rel = [](const Field& r, const Field& ref) { return norm_l2(r) / norm_l2(ref); };
  auto& rr = ke.relation_residuals;
  rr["L_Q[iQ] = 0"] = rel(op.apply(Block::Minus, q), q);
  rr["L_Q[gradQ] = 0"] = rel(op.apply(Block::Plus, ke.grad_q), ke.grad_q);
  rr["L_Q[LambdaQ] = -Q"] = rel(op.apply(Block::Plus, ke.lambda_q) + q, q);
  rr["L_Q[iG1] = -i gradQ"] = rel(op.apply(Block::Minus, ke.g1) + ke.grad_q, ke.grad_q);
  rr["L_Q[iS1] = i LambdaQ"] = rel(op.apply(Block::Minus, ke.s1) - ke.lambda_q, ke.lambda_q);
  rr["L_Q[rho1] = S1"] = rel(op.apply(Block::Plus, ke.rho1) - ke.s1, ke.s1);
  return ke;
}

//------------------------------------------------------------------------------
// Lanczos on a real-linear symmetric operator over complex fields, inner
// product Re sum u conj(v), restricted to the orthogonal complement of an
// orthonormal set.
//------------------------------------------------------------------------------
namespace {

double rdot(const cvec& a, const cvec& b) { return (a.real().dot(b.real()) + a.imag().dot(b.imag())); }

struct LanczosOut {
  double theta = 0, resid = 0;
  int iters = 0;
  cvec vec;
};

LanczosOut lanczos_min(const std::function<cvec(const cvec&)>& A, const std::vector<cvec>& basis,
                       cvec start, int max_iter, double tol) {
  auto project = [&](cvec& u) {
    for (const auto& d : basis) u -= rdot(u, d) * d;
  };
  project(start);
  start /= std::sqrt(rdot(start, start));
  std::vector<cvec> V{start};
  std::vector<double> alpha, beta;
  LanczosOut out;
  double prev = 1e300;
  for (int j = 0; j < max_iter; ++j) {
    cvec w = A(V[j]);
    project(w);
    const double a = rdot(w, V[j]);
    alpha.push_back(a);
    // two passes of full reorthogonalization
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& vi : V) w -= rdot(w, vi) * vi;
      project(w);
    }
    const double bnext = std::sqrt(rdot(w, w));

    const int m = static_cast<int>(alpha.size());
    Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1))
                                : Eigen::VectorXd();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const double theta = es.eigenvalues()[0];
    const double res = std::abs(bnext * es.eigenvectors()(m - 1, 0));
    out.iters = m;
    out.theta = theta;
    out.resid = res;
    const bool done = res < tol * std::max(1.0, std::abs(theta)) ||
                      (m > 20 && std::abs(theta - prev) < 1e-15 && res < 1e-6) || bnext < 1e-14;
    prev = theta;
    if (done || j + 1 == max_iter) {
      cvec x = cvec::Zero(start.size());
      for (int i = 0; i < m; ++i) x += es.eigenvectors()(i, 0) * V[i];
      out.vec = x;
      return out;
    }
    beta.push_back(bnext);
    V.push_back(w / bnext);
  }
  return out;
}

cvec random_start(int n, uint64_t seed, bool real_only) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  cvec s(n);
  for (int j = 0; j < n; ++j) s[j] = cplx(nd(rng), real_only ? 0.0 : nd(rng));
  return s;
}

}  // namespace

SpectrumResult coercivity_spectrum(const LinearizedOperator& op, const std::vector<Field>& constraints,
                                   int max_iter, double tol, uint64_t seed) {
  const GridPtr& g = op.grid();
  rvec w(g->n());
  for (int k = 0; k < g->n(); ++k) w[k] = std::pow(1.0 + g->freqs()[k] * g->freqs()[k], -0.25);

  // Gram-Schmidt on the weighted constraint directions
  std::vector<cvec> basis;
  for (const auto& c : constraints) {
    require_same_grid(c, op.q());
    cvec d = apply_symbol(c, w).v;
    for (const auto& e : basis) d -= rdot(d, e) * e;
    const double nd = std::sqrt(rdot(d, d));
    if (nd < 1e-10 * std::max(1.0, c.v.norm()))
      throw Error(ErrorKind::Degeneracy, "linearly dependent orthogonality set");
    basis.push_back(d / nd);
  }
  auto A = [&](const cvec& u) {
    Field f = apply_symbol(Field(g, u), w);
    return apply_symbol(op.apply_full(f), w).v;
  };

  // symmetry spot check of the projected form
  {
    cvec a = random_start(g->n(), seed + 101, false), b = random_start(g->n(), seed + 202, false);
    for (const auto& d : basis) {
      a -= rdot(a, d) * d;
      b -= rdot(b, d) * d;
    }
    const double asym = std::abs(rdot(A(a), b) - rdot(a, A(b)));
    const double scale = std::sqrt(rdot(a, a) * rdot(b, b));
    if (asym > 1e-9 * scale) throw Error(ErrorKind::Numerics, "projected form is not symmetric", asym / scale);
  }

  LanczosOut lo = lanczos_min(A, basis, random_start(g->n(), seed, false), max_iter, tol);
  SpectrumResult r;
  r.min_eigenvalue = lo.theta;
  r.kappa_estimate = lo.theta;
  r.ritz_residual = lo.resid;
  r.iterations = lo.iters;
  r.eigenvector = apply_symbol(Field(g, lo.vec), w);
  return r;
}

SpectrumResult ground_eigenfunction(const LinearizedOperator& op, int max_iter, double tol) {
  const GridPtr& g = op.grid();
  auto A = [&](const cvec& u) { return op.apply(Block::Plus, Field(g, u)).v; };
  // The minimizer is even and positive; an even start suffices.
  cvec s = random_start(g->n(), 11, true);
  cvec q = op.q().v;
  for (int j = 0; j < g->n(); ++j) s[j] = 0.1 * (s[j] + s[g->mirror(j)]) + q[j];
  LanczosOut lo = lanczos_min(A, {}, s, max_iter, tol);
  SpectrumResult r;
  r.min_eigenvalue = lo.theta;
  r.kappa_estimate = lo.theta;
  r.ritz_residual = lo.resid;
  r.iterations = lo.iters;
  Field phi(g, lo.vec);
  phi = phi.real_part();
  const double sgn = integral(phi) < 0 ? -1.0 : 1.0;
  r.eigenvector = (sgn / norm_l2(phi)) * phi;
  return r;
}

}  // namespace hw
