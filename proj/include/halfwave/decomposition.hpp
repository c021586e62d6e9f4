//==============================================================================
// decomposition.hpp
// Modulation-parameter extraction
//   u = lambda^{-1/2} [Q_P(b,nu,eta) + eps]((x - xbar)/lambda) e^{i gamma} + z
// with eps orthogonal (real inner product) to
//   i Lambda Q_P, i d_b Q_P, i d_eta Q_P, i grad Q_P, i d_nu Q_P,
// solved by Newton on (lambda, xbar, gamma, b, nu) with a finite-difference
// Jacobian. eps lives in the profile frame (s,y); eps# = u - W in (t,x).
//==============================================================================
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "halfwave/field_io.hpp"
#include "halfwave/linearized.hpp"
#include "halfwave/modulation.hpp"
#include "halfwave/profiles.hpp"

namespace hw {

struct DecompOptions {
  int max_iter = 50;
  double tol = 1e-12;          // absolute floor on max |orthogonality residual|
  double rel_tol = 1e-10;      // ... plus rel_tol * ||eps||_{L2}
  double fd_step = 1e-6;
  double cond_warn = 1e10;
  double delta = 1.0 / 16.0;   // eps# is also measured in H^{1/2+delta}
};

struct DecompDiagnostics {
  double eps_l2 = 0;
  double eps_h12 = 0;          // ||eps||_{H^{1/2}}, frame (s,y)
  double eps_h12_delta = 0;    // ||eps#||_{H^{1/2+delta}}, frame (t,x)
  double eps_qp_inner = 0;     // (eps, Q_P)_r, frame (s,y)
  double ja_value = 0;         // filled by evaluate_ja callers
};

struct DecompResult {
  ModState params;
  Field epsilon;                        // frame (s,y), profile grid
  std::array<double, 5> ortho_residuals{};  // (eps, i Lambda Q_P), (eps, i d_b Q_P), (eps, i d_eta Q_P), (eps, i grad Q_P), (eps, i d_nu Q_P)
  std::vector<double> residual_history;     // max |F| per Newton iterate
  int iterations = 0;
  double jacobian_condition = 0;
  DecompDiagnostics diagnostics;
  std::vector<std::string> warnings;
};

// The five directions at (b, nu, eta), in the order of ortho_residuals.
std::array<Field, 5> orthogonality_directions(const ProfileSet& ps, double b, double nu, double eta);

// eps for the given parameters (no solve).
Field epsilon_for(const Field& u, const Field& z, const ModState& p, const ProfileSet& ps);
std::array<double, 5> orthogonality_residuals(const Field& u, const Field& z, const ModState& p,
                                              const ProfileSet& ps);

// z may be an empty Field (no radiation). guess.eta is the fixed eta.
DecompResult decompose(const Field& u, const Field& z, const ModState& guess, const ProfileSet& ps,
                       const DecompOptions& opt = {});

// Rendered profile lambda^{-1/2} Q_P((x - xbar)/lambda) e^{i gamma} on `grid`.
Field render_profile(const ProfileSet& ps, const ModState& p, const GridPtr& grid);

//------------------------------------------------------------------------------
// Jacobian against the block structure at (Q_P(0, nu, eta), 1, 0, 0, 0, nu)
// in the variables (lambda~, y~, gamma~, b, nu), rows F1..F5 =
// (i Lambda Q_P, i grad Q_P, i d_eta Q_P, i d_b Q_P, i d_nu Q_P).
//------------------------------------------------------------------------------
struct BlockJacobian {
  Eigen::Matrix<double, 5, 5> numeric;
  std::map<std::string, double> entries;   // "A14" ... numeric
  std::map<std::string, double> expected;  // from the inner-product table
  double max_deviation = 0;                // max |numeric - expected| over the six entries
  double max_off_block = 0;                // max |numeric| outside the six entries
};
BlockJacobian block_jacobian(const ProfileSet& ps, const LinearizedOperator& op, double eta, double nu,
                             double fd_step = 1e-6);

//------------------------------------------------------------------------------
// Modulation vector by three-point differences in t (d/ds = lambda d/dt):
//   (lambda_s/lambda + b, xbar_s/lambda - nu - c2 b^2 nu, gamma_s - 1,
//    b_s + (1/2 + c3 eta) b^2 + eta + c1 b^4 + c4 nu^2, nu_s + b nu)
//------------------------------------------------------------------------------
std::array<double, 5> mod_vector(const ModState& prev, double t_prev, const ModState& cur, double t_cur,
                                 const ModState& next, double t_next, const ModConstants& c,
                                 double max_ds = 0.25);

//------------------------------------------------------------------------------
// Localized energy functional
//   J_A = 1/2 int |D^{1/2} eps#|^2 + 1/(2 lambda) int |eps#|^2
//         - int [F(W + eps#) - F(W) - F'(W).eps#]
//         + b/2 Im int A phi'((x - xbar)/(A lambda)) grad eps# conj(eps#)
// with F(u) = |u|^4/4, W = Q_P# + z. phi' is odd, equal to y on [0,1] and
// 3 - e^{-y} on [2, inf), with a quintic Hermite blend on [1,2].
//------------------------------------------------------------------------------
double phi_prime(double y);
double phi_second(double y);
double cutoff_convexity_min(double y_max = 6.0, int samples = 60001);

struct JaTerms {
  double kinetic = 0, mass = 0, nonlinear = 0, virial = 0, total = 0;
};
JaTerms evaluate_ja(const Field& u, const DecompResult& res, const Field& z, double a_param,
                    const ProfileSet& ps);

struct JaProbe {
  std::vector<double> ratios;      // J_A / (||eps||^2_{H^{1/2}} / lambda)
  double kappa = 0;                // min ratio
  double projected_min_eigenvalue = 0;  // H^{1/2}-weighted L_Q on the five-direction complement
  double projected_min_with_q = 0;      // same with (eps, Q)_r = 0 added
  double phi_ratio = 0;            // same ratio along the unprojected negative direction of L+
  bool ok = false;                 // kappa > 0 and phi_ratio < 0
};
JaProbe ja_coercivity_probe(const ProfileSet& ps, const LinearizedOperator& op, double eta, int trials = 50,
                            uint64_t seed = 11, double amplitude = 1e-4);

json decomp_to_json(const DecompResult& r);

}  // namespace hw
