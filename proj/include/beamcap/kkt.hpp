#pragma once

#include <Eigen/Dense>
#include <vector>

#include "beamcap/channel.hpp"
#include "beamcap/solver.hpp"

namespace beamcap {

// Lagrange multipliers reconstructed from a candidate solution plus the
// residual of every optimality condition that the reconstruction does not
// enforce by construction. Stationarity is zero by definition of M; the
// remaining conditions are checked numerically by certify().
struct KktCertificate {
  double lambda = 0.0;           // total-power multiplier
  std::vector<double> lambda_i;  // per-antenna multipliers, user order
  Eigen::MatrixXcd m_matrix;     // M = -h h^+ + lambda I + diag(lambda_i)
  double a_scalar = 0.0;         // |h^+ u|

  double stationarity = 0.0;
  double comp_slack_tp = 0.0;   // |lambda (tr R - P_T)|
  double comp_slack_pa = 0.0;   // max_i |lambda_i (r_ii - P_i)|
  double comp_slack_rm = 0.0;   // ||M u||_2 (R M = 0 for rank-1 R)
  double primal_tp = 0.0;       // relative total-power violation, clamped at 0
  double primal_pa = 0.0;       // worst relative per-antenna violation
  double unit_norm_error = 0.0; // | ||u||_2 - 1 |
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double min_lambda_i = 0.0;
  int rank = 0;
  int expected_rank = 0;
  bool rank_checked = false;  // only when >= 2 nonzero gains
  bool pass = false;
};

// Builds lambda, lambda_i and M from the candidate. With TP slack
// (P_T >= sum of caps) the lambda = 0 branch is used; otherwise
// lambda = a / c2 and lambda_i = a |h_i| / c_{1i} - lambda on the active set.
// force_zero_lambda selects the lambda = 0 branch explicitly (boundary case).
KktCertificate reconstruct_multipliers(const ChannelVector& h, const BeamformingSolution& sol,
                                       const PowerBudget& budget,
                                       bool force_zero_lambda = false);

// Evaluates the residual checks on an already-reconstructed certificate and
// sets cert.pass. Failures are reported through the residuals, never thrown.
bool certify(const ChannelVector& h, const BeamformingSolution& sol, const PowerBudget& budget,
             KktCertificate& cert);

// reconstruct + certify. At the P_T = sum(P_i) boundary the multipliers are
// not unique; if the primary branch fails there, the lambda = 0 branch is
// tried before reporting failure.
KktCertificate certify_solution(const ChannelVector& h, const BeamformingSolution& sol,
                                const PowerBudget& budget);

}  // namespace beamcap
