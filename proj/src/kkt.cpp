#include "beamcap/kkt.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace beamcap {

namespace {

double sum_nonzero_caps(const ChannelVector& h, const PowerBudget& budget) {
  const auto& mags = h.magnitudes();
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (mags[i] > 0.0) s += budget.limit(i);
  }
  return s;
}

}  // namespace

KktCertificate reconstruct_multipliers(const ChannelVector& h, const BeamformingSolution& sol,
                                       const PowerBudget& budget, bool force_zero_lambda) {
  if (!budget.uniform_limits() && budget.limit_count() != h.size()) {
    throw std::invalid_argument("kkt: budget does not match channel length");
  }
  if (sol.u.size() != h.size()) {
    throw std::invalid_argument("kkt: solution does not match channel length");
  }
  const std::size_t m = h.size();
  KktCertificate cert;
  cert.lambda_i.assign(m, 0.0);
  cert.m_matrix = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m),
                                         static_cast<Eigen::Index>(m));
  if (sol.degenerate || h.all_zero()) {
    return cert;  // zero channel: every multiplier vanishes and M = 0
  }

  std::complex<double> hu{0.0, 0.0};
  for (std::size_t i = 0; i < m; ++i) hu += std::conj(h.gains()[i]) * sol.u[i];
  cert.a_scalar = std::abs(hu);
  const double a = cert.a_scalar;

  const auto order = activation_order(h, budget);
  const std::size_t n = order.size();
  const std::size_t k = std::min(sol.k, n);
  const bool all_active = (k == n);

  const bool zero_lambda = force_zero_lambda || all_active;
  if (zero_lambda) {
    cert.lambda = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t i = order[j];
      const double c1 = std::sqrt(budget.limit(i) / sol.p_star);
      cert.lambda_i[i] = a * h.magnitudes()[i] / c1;
    }
  } else {
    cert.lambda = (sol.c2 > 0.0) ? a / sol.c2 : 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = order[j];
      const double c1 = std::sqrt(budget.limit(i) / sol.p_star);
      cert.lambda_i[i] = a * h.magnitudes()[i] / c1 - cert.lambda;
    }
  }

  cert.min_lambda_i = *std::min_element(cert.lambda_i.begin(), cert.lambda_i.end());
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      cert.m_matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          -h.gains()[r] * std::conj(h.gains()[c]);
    }
    cert.m_matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r)) +=
        cert.lambda + cert.lambda_i[r];
  }
  return cert;
}

bool certify(const ChannelVector& h, const BeamformingSolution& sol, const PowerBudget& budget,
             KktCertificate& cert) {
  const std::size_t m = h.size();
  const double h_sq = h.norm2_sq();

  double u_sq = 0.0;
  for (const auto& ui : sol.u) u_sq += std::norm(ui);
  cert.unit_norm_error = sol.degenerate ? 0.0 : std::abs(std::sqrt(u_sq) - 1.0);

  const double tr_r = sol.p_star * u_sq;
  cert.comp_slack_tp = std::abs(cert.lambda * (tr_r - budget.total()));
  cert.primal_tp = std::max(0.0, (tr_r - budget.total()) / budget.total());
  cert.comp_slack_pa = 0.0;
  cert.primal_pa = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r_ii = sol.p_star * std::norm(sol.u[i]);
    const double cap = budget.limit(i);
    cert.comp_slack_pa = std::max(cert.comp_slack_pa, std::abs(cert.lambda_i[i] * (r_ii - cap)));
    cert.primal_pa = std::max(cert.primal_pa, (r_ii - cap) / cap);
  }
  cert.primal_pa = std::max(0.0, cert.primal_pa);

  Eigen::VectorXcd u(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) u(static_cast<Eigen::Index>(i)) = sol.u[i];
  cert.comp_slack_rm = (cert.m_matrix * u).norm();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cert.m_matrix, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  cert.min_eigenvalue = ev(0);
  cert.max_eigenvalue = ev(ev.size() - 1);

  double lam_max = 0.0;
  for (const double l : cert.lambda_i) lam_max = std::max(lam_max, l);
  const double m_scale = h_sq + cert.lambda + lam_max;

  // Numerical rank: eigenvalues above 1e-8 * max eigenvalue, floored so the
  // all-zero M of a scalar channel counts as rank 0.
  const double rank_tol = std::max(1e-8 * std::max(cert.max_eigenvalue, 0.0), 1e-12 * m_scale);
  cert.rank = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > rank_tol) ++cert.rank;
  }
  const std::size_t nonzero = h.nonzero_count();
  cert.expected_rank =
      static_cast<int>((cert.lambda > 0.0 ? m : nonzero)) - (nonzero > 0 ? 1 : 0);
  cert.rank_checked = nonzero >= 2;

  const double psd_tol = 1e-9 * std::max(cert.max_eigenvalue, 0.0) + 1e-13 * m_scale;
  const bool dual_ok = cert.min_eigenvalue >= -psd_tol && cert.min_lambda_i >= -1e-9 &&
                       cert.lambda >= -1e-9;
  const bool slack_ok = cert.comp_slack_tp <= 1e-9 && cert.comp_slack_pa <= 1e-9 &&
                        cert.comp_slack_rm <= 1e-9 * h_sq;
  const bool primal_ok = cert.primal_tp <= 1e-9 && cert.primal_pa <= 1e-9 &&
                         cert.unit_norm_error <= 1e-12;
  const bool rank_ok = !cert.rank_checked || cert.rank == cert.expected_rank;
  cert.pass = dual_ok && slack_ok && primal_ok && rank_ok;
  return cert.pass;
}

KktCertificate certify_solution(const ChannelVector& h, const BeamformingSolution& sol,
                                const PowerBudget& budget) {
  KktCertificate cert = reconstruct_multipliers(h, sol, budget);
  certify(h, sol, budget, cert);
  if (!cert.pass && !h.all_zero()) {
    // Multipliers are not unique at the P_T = sum(P_i) boundary; the lambda=0
    // branch may certify a candidate the primary branch rejects.
    const double caps = sum_nonzero_caps(h, budget);
    if (budget.total() >= caps * (1.0 - 1e-9)) {
      KktCertificate retry = reconstruct_multipliers(h, sol, budget, true);
      if (certify(h, sol, budget, retry)) return retry;
    }
  }
  return cert;
}

}  // namespace beamcap
