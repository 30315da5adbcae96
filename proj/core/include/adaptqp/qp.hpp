#pragma once

#include <optional>

#include "adaptqp/types.hpp"

namespace adaptqp {

/// minimize 0.5 a'Qa + g'a  subject to  lower <= a <= upper.
struct BoxQp {
  Matrix q;      // n x n, symmetric PSD
  Vector g;
  Vector lower;
  Vector upper;

  Eigen::Index size() const { return g.size(); }
  void validate() const;
};

struct BoxQpResult {
  Vector solution;       // always inside the box, bounds hit exactly
  double objective = 0;  // 0.5 a'Qa + g'a at the solution
  double kkt_residual = 0;
  bool converged = false;
  int sweeps = 0;
};

/// Cyclic coordinate descent with exact single-coordinate minimization and
/// clipping. Each update is closed form: Q_ii > 0 gives the parabola vertex,
/// Q_ii == 0 moves to the bound selected by the sign of the gradient (no move
/// on an exactly zero gradient). The objective never increases across sweeps.
///
/// The KKT residual is the projected-gradient measure
///   max_i | clamp(a_i - grad_i, lower_i, upper_i) - a_i |.
/// Exceeding max_sweeps returns the best iterate flagged non-converged; it is
/// not an error. max_sweeps <= 0 selects the default max(1000, 10 n).
BoxQpResult solve_box_qp(const BoxQp& p, double tol = 1e-6, int max_sweeps = 0,
                         const std::optional<Vector>& initial = std::nullopt);

/// minimize 0.5 z'Hz + f'z  subject to  A z >= b, and z_i >= 0 for every
/// index i with nonneg_mask[i] != 0 (the mask may be empty).
struct InequalityQp {
  Matrix h;  // n x n, symmetric PSD on the feasible set
  Vector f;
  Matrix a;  // m x n, row semantics a_i' z >= b_i
  Vector b;
  Eigen::VectorXi nonneg_mask;  // size n or empty

  Eigen::Index n_variables() const { return f.size(); }
  Eigen::Index n_constraints() const;  // rows of A plus masked coordinates
  void validate() const;
};

struct InequalityQpResult {
  Vector solution;
  double objective = 0;
  Vector multipliers;  // one per constraint: rows of A first, then mask
  double kkt_residual = 0;
  bool converged = false;
  int iterations = 0;
};

/// Primal-dual (Mehrotra predictor-corrector) interior-point solve. On exit
/// the result satisfies stationarity, primal feasibility and complementary
/// slackness within tol (relative). Throws InfeasibleError when the iterates
/// certify an empty feasible set; hitting the iteration cap returns the last
/// iterate flagged non-converged.
InequalityQpResult solve_inequality_qp(const InequalityQp& p,
                                       double tol = 1e-8,
                                       int max_iterations = 200);

}  // namespace adaptqp
