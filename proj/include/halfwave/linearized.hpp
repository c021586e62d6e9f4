//==============================================================================
// linearized.hpp
// Linearization of the half-wave flow at the ground state. For real Q the
// real-linear operator L_Q splits into
//     L+ = D + 1 - 3Q^2   acting on real parts
//     L- = D + 1 -  Q^2   acting on imaginary parts
// with kernels span{Q'} (L+) and span{Q} (L-).
//
// Solves use LU factors of the parity-reduced dense blocks (even/odd under
// x -> -x, both operators commute with the reflection). The block holding
// the kernel is bordered by the kernel vector, which makes it nonsingular
// and returns the solution orthogonal to the kernel.
//==============================================================================
#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "halfwave/ground_state.hpp"
#include "halfwave/spectral.hpp"

namespace hw {

enum class Block { Plus, Minus };

struct LinearizedOptions {
  bool store_dense = true;     // keep the full N x N matrices (2 x 8 N^2 bytes)
  double kernel_tol = 1e-6;    // stale-ground-state threshold on kernel residuals
};

class LinearizedOperator {
 public:
  static std::shared_ptr<const LinearizedOperator> build(const GroundState& gs,
                                                         const LinearizedOptions& opt = {});
  ~LinearizedOperator();

  const GroundState& ground_state() const { return gs_; }
  const GridPtr& grid() const { return gs_.q.grid; }
  const Field& q() const { return gs_.q; }
  const Field& grad_q() const { return grad_q_; }
  bool has_dense() const { return l_plus_.size() > 0; }
  const Eigen::MatrixXd& l_plus() const { return l_plus_; }
  const Eigen::MatrixXd& l_minus() const { return l_minus_; }
  const rvec& potential(Block b) const { return b == Block::Plus ? v_plus_ : v_minus_; }
  const Field& kernel(Block b) const { return b == Block::Plus ? grad_q_ : gs_.q; }

  // (D + 1 - V) f applied spectrally; f is treated as real-linear per component.
  Field apply(Block b, const Field& f) const;
  // Full complex operator: L+ Re f + i L- Im f.
  Field apply_full(const Field& f) const;

  // Solve L_b x = rhs (rhs real). Throws Solvability if the normalized
  // kernel inner product exceeds solvability_tol; otherwise the residual
  // kernel component is projected out. The kernel multiple in x is then
  // fixed by least-squares orthogonality to `orthogonal_to`.
  Field solve(Block b, const Field& rhs, const std::vector<Field>& orthogonal_to,
              double solvability_tol = 1e-8) const;

  std::map<std::string, double> kernel_residuals;  // set by build

 private:
  struct Factor;
  LinearizedOperator() = default;
  rvec solve_parity(Block b, int parity, const rvec& rhs) const;

  GroundState gs_;
  Field grad_q_;
  rvec v_plus_, v_minus_;
  Eigen::MatrixXd l_plus_, l_minus_;
  std::vector<std::unique_ptr<Factor>> factors_;  // [plus even, plus odd, minus even, minus odd]
};

using OperatorPtr = std::shared_ptr<const LinearizedOperator>;

Field solve_constrained(const LinearizedOperator& op, Block b, const Field& rhs,
                        const std::vector<Field>& orthogonal_to, double solvability_tol = 1e-8);

//------------------------------------------------------------------------------
// Generalized kernel: S1 = R100, G1 = R010, rho1 = R001
//   L- S1 = Lambda Q,  L- G1 = -Q',  L+ rho1 = S1
//------------------------------------------------------------------------------
struct KernelElements {
  Field s1, g1, rho1, lambda_q, grad_q;
  std::map<std::string, double> inner_products;
  std::map<std::string, double> relation_residuals;  // the six kernel relations
};

KernelElements kernel_elements(const LinearizedOperator& op);

//------------------------------------------------------------------------------
// Spectral diagnostics by Lanczos with full reorthogonalization.
//------------------------------------------------------------------------------
struct SpectrumResult {
  double min_eigenvalue = 0;
  double kappa_estimate = 0;
  double ritz_residual = 0;
  int iterations = 0;
  Field eigenvector;
};

// Smallest eigenvalue of the H^{1/2}-weighted form (L_Q e, e) / ||e||^2_{H^{1/2}}
// on {e : (e, c)_r = 0 for c in constraints}; constraints are complex fields,
// so real directions act on the L+ block and imaginary ones on L-.
SpectrumResult coercivity_spectrum(const LinearizedOperator& op, const std::vector<Field>& constraints,
                                   int max_iter = 600, double tol = 1e-10, uint64_t seed = 7);

// Minimizer of the unweighted Rayleigh quotient of L+ (real fields).
SpectrumResult ground_eigenfunction(const LinearizedOperator& op, int max_iter = 800, double tol = 1e-10);

}  // namespace hw
