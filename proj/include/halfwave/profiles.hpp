//==============================================================================
// profiles.hpp
// Modified blow-up profile
//     Q_P(b, nu, eta) = Q + sum (ib)^p (i nu)^q eta^r R_{p,q,r},  p + 2q + 2r <= 5
// built order by order from the profile equation
//     Psi_P = i L_Q P - i N_P + b Lambda Q_P - (nu + c2 b^2 nu) Q_P'
//             - (b^2/2 + eta + c1 b^4 + c3 b^2 eta + c4 nu^2) d_b Q_P
//             - b nu d_nu Q_P
// with N_P = Q (2 Re(P) P + |P|^2) + |P|^2 P.  The monomial b^p nu^q eta^r
// of Psi_P vanishes for every (p,q,r) in the index set once
//     L_block R_{p,q,r} = RHS_{p,q,r},   block = plus (p+q even) / minus (odd)
//==============================================================================
#pragma once

#include <array>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "halfwave/field_io.hpp"
#include "halfwave/linearized.hpp"

namespace hw {

struct Mono {
  int p = 0, q = 0, r = 0;
  int order() const { return p + 2 * q + 2 * r; }
  int phase() const { return p + q; }  // C = i^{p+q} R
  bool operator<(const Mono& o) const { return std::tie(p, q, r) < std::tie(o.p, o.q, o.r); }
  bool operator==(const Mono& o) const { return p == o.p && q == o.q && r == o.r; }
  std::string name() const;
};

// All (p,q,r) with 1 <= p + 2q + 2r <= max_order, sorted by order.
std::vector<Mono> profile_index_set(int max_order = 5);

enum class SolvabilityPolicy { Warn, Throw };
enum class ConstantsMethod { ClosedForm, Solvability };

struct ProfileOptions {
  SolvabilityPolicy policy = SolvabilityPolicy::Warn;
  ConstantsMethod constants = ConstantsMethod::ClosedForm;
  double imposed_tol = 1e-6;      // normalized kernel inner products of imposed conditions
  double consistency_tol = 1e-5;  // measured order-5 consistency conditions
  bool dealias = true;            // 2/3 rule on N_P
};

struct ProfileSet {
  GridPtr grid;
  Field q;
  std::map<Mono, Field> correctors;  // real fields R_{p,q,r}
  double c1 = 0, c2 = 0, c3 = 0, c4 = 0;
  std::array<double, 4> c_solvability{};  // constants from the order-5 affine system
  bool dealias = true;
  std::map<std::string, double> identity_residuals;
  std::map<std::string, double> inner_products;  // kernel table carried along
  std::vector<std::string> warnings;

  const Field& R(int p, int q, int r) const;
  std::array<double, 4> constants() const { return {c1, c2, c3, c4}; }
};

ProfileSet build_profiles(const LinearizedOperator& op, const ProfileOptions& opt = {});

// Q + sum (ib)^p (i nu)^q eta^r R_{p,q,r}
Field assemble_qp(const ProfileSet& ps, double b, double nu, double eta);
// d/db, d/dnu, d/deta of Q_P
Field qp_derivative(const ProfileSet& ps, double b, double nu, double eta, int which);

struct ProfileError {
  Field psi;
  double l2 = 0, h1 = 0;
  double weighted_sup = 0;  // max <y>^2 |Psi| on the inner 80% of the box
};
ProfileError profile_error(const ProfileSet& ps, const LinearizedOperator& op, double b, double nu,
                           double eta);

// Linear-in-parameter checks
struct FitReport {
  double fitted = 0, predicted = 0, rel_error = 0;
  double remainder_scale = 0;  // max |residual| / parameter^2 (or ^3 for even fits)
  std::vector<double> samples;
  bool ok = false;
};
FitReport energy_expansion_check(const ProfileSet& ps);
FitReport momentum_expansion_check(const ProfileSet& ps);
FitReport mass_derivative_check(const ProfileSet& ps, double h = 1e-3);

struct SlopeReport {
  std::vector<double> s, l2;
  double slope = 0, intercept = 0;
  bool ok = false;
};
SlopeReport profile_error_scaling(const ProfileSet& ps, const LinearizedOperator& op, double b0 = 1.0,
                                  double nu0 = 1.0, double eta0 = 1.0,
                                  std::vector<double> s = {0.04, 0.06, 0.08, 0.1, 0.14, 0.2});

// Persistence: one field container per corrector plus manifest.json.
void save_profiles(const ProfileSet& ps, const std::string& dir);
ProfileSet load_profiles(const std::string& dir, const GridPtr& grid_hint = nullptr);
json profiles_to_json(const ProfileSet& ps);

}  // namespace hw
