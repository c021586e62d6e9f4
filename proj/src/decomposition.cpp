//==============================================================================
// decomposition.cpp
//==============================================================================

#include "halfwave/decomposition.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "halfwave/errors.hpp"

namespace hw {

namespace {

const cplx I(0, 1);

double max_abs5(const std::array<double, 5>& a) {
  double r = 0;
  for (double x : a) r = std::max(r, std::abs(x));
  return r;
}

// Residual evaluator with the renormalized field cached on (lambda, xbar);
// gamma enters as a phase only.
struct Evaluator {
  const Field& v;  // u - z
  const ProfileSet& ps;
  double eta;
  double c_lambda = -1, c_xbar = 0;
  Field base;

  const Field& renorm(double lambda, double xbar) {
    if (lambda != c_lambda || xbar != c_xbar) {
      base = renormalize(v, ps.grid, lambda, xbar, 0.0);
      c_lambda = lambda;
      c_xbar = xbar;
    }
    return base;
  }

  Field eps(const ModState& p) {
    Field e = std::polar(1.0, -p.gamma) * Field(renorm(p.lambda, p.xbar));
    e -= assemble_qp(ps, p.b, p.nu, eta);
    return e;
  }

  std::array<double, 5> residual(const ModState& p) {
    Field e = eps(p);
    std::array<Field, 5> dirs = orthogonality_directions(ps, p.b, p.nu, eta);
    std::array<double, 5> f;
    for (int k = 0; k < 5; ++k) f[k] = inner_r(e, dirs[k]);
    return f;
  }
};

double& coord(ModState& s, int k) {
  switch (k) {
    case 0: return s.lambda;
    case 1: return s.xbar;
    case 2: return s.gamma;
    case 3: return s.b;
    default: return s.nu;
  }
}

Eigen::Matrix<double, 5, 5> fd_jacobian(Evaluator& ev, const ModState& p, double h) {
  Eigen::Matrix<double, 5, 5> j;
  for (int k = 0; k < 5; ++k) {
    const double step = (k <= 1 ? p.lambda : 1.0) * h;
    ModState a = p, b = p;
    coord(a, k) += step;
    coord(b, k) -= step;
    std::array<double, 5> fa = ev.residual(a), fb = ev.residual(b);
    for (int r = 0; r < 5; ++r) j(r, k) = (fa[r] - fb[r]) / (2 * step);
  }
  return j;
}

}  // namespace

//------------------------------------------------------------------------------
// Directions and residuals
//------------------------------------------------------------------------------
std::array<Field, 5> orthogonality_directions(const ProfileSet& ps, double b, double nu, double eta) {
  Field qp = assemble_qp(ps, b, nu, eta);
  return {I * scaling_generator(qp), I * qp_derivative(ps, b, nu, eta, 0), I * qp_derivative(ps, b, nu, eta, 2),
          I * derivative(qp), I * qp_derivative(ps, b, nu, eta, 1)};
}

Field epsilon_for(const Field& u, const Field& z, const ModState& p, const ProfileSet& ps) {
  Field v = z.grid ? u - z : u;
  Evaluator ev{v, ps, p.eta};
  return ev.eps(p);
}

std::array<double, 5> orthogonality_residuals(const Field& u, const Field& z, const ModState& p,
                                              const ProfileSet& ps) {
  Field v = z.grid ? u - z : u;
  Evaluator ev{v, ps, p.eta};
  return ev.residual(p);
}

Field render_profile(const ProfileSet& ps, const ModState& p, const GridPtr& grid) {
  return render(assemble_qp(ps, p.b, p.nu, p.eta), grid, p.lambda, p.xbar, p.gamma);
}

//------------------------------------------------------------------------------
// Newton solve
//------------------------------------------------------------------------------
DecompResult decompose(const Field& u, const Field& z, const ModState& guess, const ProfileSet& ps,
                       const DecompOptions& opt) {
  check_finite(u, "decompose");
  if (!(guess.lambda > 0)) throw Error(ErrorKind::InvalidArgument, "decompose needs lambda > 0", guess.lambda);
  if (z.grid) require_same_grid(u, z);
  const Field v = z.grid ? u - z : u;
  Evaluator ev{v, ps, guess.eta};

  DecompResult res;
  ModState p = guess;
  std::array<double, 5> f = ev.residual(p);
  auto target = [&](const ModState& s) { return opt.tol + opt.rel_tol * norm_l2(ev.eps(s)); };
  res.residual_history.push_back(max_abs5(f));

  Eigen::Matrix<double, 5, 5> jac;
  int it = 0;
  for (; it < opt.max_iter && max_abs5(f) > target(p); ++it) {
    jac = fd_jacobian(ev, p, opt.fd_step);
    Eigen::Matrix<double, 5, 1> rhs;
    for (int k = 0; k < 5; ++k) rhs[k] = -f[k];
    Eigen::Matrix<double, 5, 1> step = jac.fullPivLu().solve(rhs);
    if (!step.allFinite()) throw Error(ErrorKind::Basin, "singular decomposition Jacobian", max_abs5(f));
    // keep lambda positive
    double tau = 1.0;
    if (step[0] < -0.5 * p.lambda) tau = -0.5 * p.lambda / step[0];
    ModState next = p;
    for (int k = 0; k < 5; ++k) coord(next, k) += tau * step[k];
    std::array<double, 5> fn = ev.residual(next);
    for (int ls = 0; ls < 12 && max_abs5(fn) > max_abs5(f); ++ls) {
      tau *= 0.5;
      next = p;
      for (int k = 0; k < 5; ++k) coord(next, k) += tau * step[k];
      fn = ev.residual(next);
    }
    p = next;
    f = fn;
    res.residual_history.push_back(max_abs5(f));
  }
  if (max_abs5(f) > target(p) || !(p.lambda > 0)) {
    std::ostringstream os;
    os << "decomposition Newton did not converge in " << opt.max_iter << " iterations; residuals";
    for (double x : f) os << ' ' << x;
    throw Error(ErrorKind::Basin, os.str(), max_abs5(f));
  }
  jac = fd_jacobian(ev, p, opt.fd_step);
  Eigen::JacobiSVD<Eigen::Matrix<double, 5, 5>> svd(jac);
  const auto& sv = svd.singularValues();
  res.jacobian_condition = sv[0] / std::max(sv[4], 1e-300);
  if (res.jacobian_condition > opt.cond_warn) res.warnings.push_back("decomposition Jacobian nearly singular");

  res.params = p;
  res.iterations = it;
  res.ortho_residuals = f;
  res.epsilon = ev.eps(p);
  DecompDiagnostics& d = res.diagnostics;
  d.eps_l2 = norm_l2(res.epsilon);
  d.eps_h12 = sobolev_norm(res.epsilon, 0.5, false);
  d.eps_qp_inner = inner_r(res.epsilon, assemble_qp(ps, p.b, p.nu, p.eta));
  d.eps_h12_delta = sobolev_norm(v - render_profile(ps, p, u.grid), 0.5 + opt.delta, false);
  return res;
}

//------------------------------------------------------------------------------
// Block Jacobian
//------------------------------------------------------------------------------
BlockJacobian block_jacobian(const ProfileSet& ps, const LinearizedOperator& op, double eta, double nu,
                             double fd_step) {
  const Field sigma = assemble_qp(ps, 0.0, nu, eta);
  Evaluator ev{sigma, ps, eta};
  ModState p;
  p.lambda = 1;
  p.nu = nu;
  p.eta = eta;
  Eigen::Matrix<double, 5, 5> mine = fd_jacobian(ev, p, fd_step);
  // (lambda~, y~, gamma~) = (lambda, -xbar, -gamma); rows reordered
  const int row_of[5] = {0, 3, 2, 1, 4};
  const double col_sign[5] = {1, -1, -1, 1, 1};
  BlockJacobian bj;
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) bj.numeric(r, c) = mine(row_of[r], c) * col_sign[c];

  const Field& r100 = ps.R(1, 0, 0);
  const Field& r010 = ps.R(0, 1, 0);
  const Field& r001 = ps.R(0, 0, 1);
  const double lm_s = inner_r(op.apply(Block::Minus, r100), r100);
  const double lm_g = inner_r(op.apply(Block::Minus, r010), r010);
  bj.expected = {{"A14", -lm_s}, {"A25", -lm_g}, {"A33", inner_r(ps.q, r001)},
                 {"A34", -inner_r(r100, r001)}, {"A41", -lm_s}, {"A52", -lm_g}};
  const std::map<std::string, std::pair<int, int>> pos = {{"A14", {0, 3}}, {"A25", {1, 4}}, {"A33", {2, 2}},
                                                          {"A34", {2, 3}}, {"A41", {3, 0}}, {"A52", {4, 1}}};
  for (const auto& [k, rc] : pos) {
    bj.entries[k] = bj.numeric(rc.first, rc.second);
    bj.max_deviation = std::max(bj.max_deviation, std::abs(bj.entries[k] - bj.expected[k]));
  }
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) {
      bool listed = false;
      for (const auto& [k, rc] : pos) listed |= rc.first == r && rc.second == c;
      if (!listed) bj.max_off_block = std::max(bj.max_off_block, std::abs(bj.numeric(r, c)));
    }
  return bj;
}

//------------------------------------------------------------------------------
// Modulation vector
//------------------------------------------------------------------------------
std::array<double, 5> mod_vector(const ModState& prev, double t_prev, const ModState& cur, double t_cur,
                                 const ModState& next, double t_next, const ModConstants& c, double max_ds) {
  if (!(t_prev < t_cur && t_cur < t_next))
    throw Error(ErrorKind::Differencing, "mod_vector needs t_prev < t_cur < t_next");
  const double h1 = t_cur - t_prev, h2 = t_next - t_cur;
  if ((h1 + h2) / cur.lambda > max_ds)
    throw Error(ErrorKind::Differencing, "time gap too large for differencing", (h1 + h2) / cur.lambda);
  // three-point derivative on a nonuniform stencil
  auto d = [&](double a, double b0, double b1) {
    return (-h2 / (h1 * (h1 + h2))) * a + ((h2 - h1) / (h1 * h2)) * b0 + (h1 / (h2 * (h1 + h2))) * b1;
  };
  const double lt = d(prev.lambda, cur.lambda, next.lambda);
  const double xt = d(prev.xbar, cur.xbar, next.xbar);
  const double gt = d(prev.gamma, cur.gamma, next.gamma);
  const double bt = d(prev.b, cur.b, next.b);
  const double nt = d(prev.nu, cur.nu, next.nu);
  const double l = cur.lambda, b = cur.b, nu = cur.nu, eta = cur.eta;
  return {lt + b,
          xt - nu - c.c2 * b * b * nu,
          l * gt - 1.0,
          l * bt + (0.5 + c.c3 * eta) * b * b + eta + c.c1 * std::pow(b, 4) + c.c4 * nu * nu,
          l * nt + b * nu};
}

//------------------------------------------------------------------------------
// Cutoff and J_A
//------------------------------------------------------------------------------
namespace {

// quintic Hermite on [1,2] for phi' with (value, slope, curvature) matched
double blend(double y, int deriv) {
  const double e2 = std::exp(-2.0);
  const double g0 = 1, d0 = 1, s0 = 0;
  const double g1 = 3 - e2, d1 = e2, s1 = -e2;
  const double t = y - 1;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  if (deriv == 0) {
    const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5, h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
    const double h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5, h3 = 0.5 * t3 - t4 + 0.5 * t5;
    const double h4 = -4 * t3 + 7 * t4 - 3 * t5, h5 = 10 * t3 - 15 * t4 + 6 * t5;
    return g0 * h0 + d0 * h1 + s0 * h2 + s1 * h3 + d1 * h4 + g1 * h5;
  }
  const double h0 = -30 * t2 + 60 * t3 - 30 * t4, h1 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
  const double h2 = t - 4.5 * t2 + 6 * t3 - 2.5 * t4, h3 = 1.5 * t2 - 4 * t3 + 2.5 * t4;
  const double h4 = -12 * t2 + 28 * t3 - 15 * t4, h5 = 30 * t2 - 60 * t3 + 30 * t4;
  return g0 * h0 + d0 * h1 + s0 * h2 + s1 * h3 + d1 * h4 + g1 * h5;
}

}  // namespace

double phi_prime(double y) {
  const double a = std::abs(y), s = y < 0 ? -1.0 : 1.0;
  if (a <= 1) return y;
  if (a >= 2) return s * (3 - std::exp(-a));
  return s * blend(a, 0);
}

double phi_second(double y) {
  const double a = std::abs(y);
  if (a <= 1) return 1.0;
  if (a >= 2) return std::exp(-a);
  return blend(a, 1);
}

double cutoff_convexity_min(double y_max, int samples) {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) m = std::min(m, phi_second(-y_max + 2 * y_max * k / (samples - 1)));
  return m;
}

JaTerms evaluate_ja(const Field& u, const DecompResult& res, const Field& z, double a_param,
                    const ProfileSet& ps) {
  if (!(a_param > 0)) throw Error(ErrorKind::InvalidArgument, "J_A needs A > 0", a_param);
  const ModState& p = res.params;
  const GridPtr& g = u.grid;
  Field w = render_profile(ps, p, g);
  if (z.grid) w += z;
  Field e = u - w;

  JaTerms t;
  const double dh = sobolev_norm(e, 0.5, true);
  t.kinetic = 0.5 * dh * dh;
  t.mass = 0.5 / p.lambda * inner_r(e, e);
  const auto& wa = w.v.array();
  const auto& ea = e.v.array();
  rvec w2 = wa.abs2(), we2 = (wa + ea).abs2();
  rvec integrand = 0.25 * we2.array().square() - 0.25 * w2.array().square() -
                   w2.array() * (wa * ea.conjugate()).real();
  t.nonlinear = -g->dx() * integrand.sum();

  const double len = g->length();
  rvec cut(g->n());
  for (int j = 0; j < g->n(); ++j) {
    double y = g->nodes()[j] - p.xbar;
    y -= len * std::round(y / len);
    cut[j] = a_param * phi_prime(y / (a_param * p.lambda));
  }
  Field de = derivative(e);
  t.virial = 0.5 * p.b * g->dx() * (cut.array().cast<cplx>() * de.v.array() * e.v.array().conjugate()).imag().sum();
  t.total = t.kinetic + t.mass + t.nonlinear + t.virial;
  return t;
}

JaProbe ja_coercivity_probe(const ProfileSet& ps, const LinearizedOperator& op, double eta, int trials,
                            uint64_t seed, double amplitude) {
  const GridPtr& g = ps.grid;
  std::array<Field, 5> dirs = orthogonality_directions(ps, 0.0, 0.0, eta);
  // Gram matrix of the directions for the projection
  Eigen::Matrix<double, 5, 5> gram;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) gram(a, b) = inner_r(dirs[a], dirs[b]);
  auto project = [&](Field e) {
    Eigen::Matrix<double, 5, 1> r;
    for (int a = 0; a < 5; ++a) r[a] = inner_r(e, dirs[a]);
    Eigen::Matrix<double, 5, 1> c = gram.ldlt().solve(r);
    for (int a = 0; a < 5; ++a) e -= c[a] * dirs[a];
    return e;
  };

  DecompResult base;
  base.params.lambda = 1;
  base.params.eta = eta;
  const Field qp = assemble_qp(ps, 0.0, 0.0, eta);
  auto ratio = [&](const Field& e) {
    const double h = sobolev_norm(e, 0.5, false);
    return evaluate_ja(qp + e, base, Field(), 1.0, ps).total / (h * h);
  };

  JaProbe pr;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    std::vector<cplx> c(8);
    for (auto& x : c) x = cplx(gauss(rng), gauss(rng));
    const double sigma = 1.0 + 2.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    Field e = Field::from_function(g, [&](double y) {
      cplx s = 0, pw = 1;
      for (const auto& x : c) {
        s += x * pw;
        pw *= y / sigma;
      }
      return s * std::exp(-y * y / (2 * sigma * sigma));
    });
    e = project(e);
    e *= amplitude / norm_l2(e);
    pr.ratios.push_back(ratio(e));
  }
  pr.kappa = *std::min_element(pr.ratios.begin(), pr.ratios.end());

  std::vector<Field> cons(dirs.begin(), dirs.end());
  pr.projected_min_eigenvalue = coercivity_spectrum(op, cons).min_eigenvalue;
  cons.push_back(ps.q);
  pr.projected_min_with_q = coercivity_spectrum(op, cons).min_eigenvalue;

  Field phi = ground_eigenfunction(op).eigenvector;
  phi *= amplitude / norm_l2(phi);
  pr.phi_ratio = ratio(phi);
  pr.ok = pr.kappa > 0 && pr.phi_ratio < 0;
  return pr;
}

json decomp_to_json(const DecompResult& r) {
  const ModState& p = r.params;
  return {{"lambda", p.lambda},
          {"xbar", p.xbar},
          {"gamma", p.gamma},
          {"b", p.b},
          {"nu", p.nu},
          {"eta", p.eta},
          {"ortho_residuals", r.ortho_residuals},
          {"iterations", r.iterations},
          {"residual_history", r.residual_history},
          {"jacobian_condition", r.jacobian_condition},
          {"eps_l2", r.diagnostics.eps_l2},
          {"eps_h12", r.diagnostics.eps_h12},
          {"eps_h12_delta", r.diagnostics.eps_h12_delta},
          {"eps_qp_inner", r.diagnostics.eps_qp_inner},
          {"ja_value", r.diagnostics.ja_value},
          {"warnings", r.warnings}};
}

}  // namespace hw
