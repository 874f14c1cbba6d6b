#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "beamcap/rng.hpp"

namespace beamcap {

enum class FadingKind { iid_rayleigh, semi_correlated, tx_correlated };

// Fading channel sampler. The iid and semi-correlated (receive-side
// Kronecker) draws are right unitary-invariant; the transmit-correlated
// model is the control case that is not.
class FadingModel {
 public:
  static FadingModel iid(int n_rx, int m_tx);
  static FadingModel semi_correlated(const Eigen::MatrixXcd& r_rx, int m_tx);
  static FadingModel tx_correlated(int n_rx, const Eigen::MatrixXcd& r_tx);

  FadingKind kind() const { return kind_; }
  int n_rx() const { return n_; }
  int m_tx() const { return m_; }
  bool right_unitary_invariant() const { return kind_ != FadingKind::tx_correlated; }

  // Channel draw `index`: H0 entries are CN(0,1) from the generator, then the
  // correlation square root is applied on the matching side. A draw depends
  // only on (generator seed, index).
  Eigen::MatrixXcd sample(const Philox& gen, std::uint64_t index) const;

 private:
  FadingModel(FadingKind kind, int n, int m, Eigen::MatrixXcd sqrt_corr);

  FadingKind kind_;
  int n_ = 0;
  int m_ = 0;
  Eigen::MatrixXcd sqrt_corr_;  // 0x0 when no correlation is applied
};

// Hermitian PSD square root via eigendecomposition (supports singular
// matrices). Throws if the input is not Hermitian PSD within tol (relative).
Eigen::MatrixXcd hermitian_sqrt(const Eigen::MatrixXcd& a, double tol = 1e-10);

// min(P, P_T / m): the per-antenna power of the optimal isotropic policy.
double isotropic_power(double p_per_antenna, double p_total, int m_tx);

struct ErgodicEstimate {
  double capacity_nats = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double p_star = 0.0;
};

// Transmit covariance used by the Monte Carlo estimator: either isotropic
// P* I or an explicit feasible matrix.
class CovariancePolicy {
 public:
  static CovariancePolicy isotropic(double p_star);
  // Validates Hermitian PSD, trace <= P_T and diagonal <= P within tol.
  static CovariancePolicy explicit_cov(const Eigen::MatrixXcd& r, double p_total,
                                       double p_per_antenna, double tol = 1e-10);

  bool is_isotropic() const { return isotropic_; }
  double p_star() const { return p_star_; }
  const Eigen::MatrixXcd& covariance() const { return r_; }

 private:
  CovariancePolicy(bool iso, double p_star, Eigen::MatrixXcd r);

  bool isotropic_ = true;
  double p_star_ = 0.0;
  Eigen::MatrixXcd r_;
};

// ln det(I + H R H^+) through a Cholesky factorization of the positive
// definite argument.
double capacity_sample(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& r);
double capacity_sample(const Eigen::MatrixXcd& h, const CovariancePolicy& policy);

// Sample mean of ln det(I + H R H^+) over seeded draws. Sampling may run on
// several workers; the reduction is pairwise in index order, so the estimate
// is bit-stable for a given seed regardless of the worker count.
ErgodicEstimate ergodic_capacity(const FadingModel& model, const CovariancePolicy& policy,
                                 std::size_t samples, std::uint64_t seed);

struct PairedComparison {
  ErgodicEstimate first;
  ErgodicEstimate second;
  double mean_diff = 0.0;  // first minus second, common random numbers
  double paired_std_error = 0.0;
  double sigmas = 0.0;  // mean_diff / paired_std_error (0 when exact tie)
  bool first_wins_3sigma = false;
  bool first_not_worse_3sigma = false;
};

// Estimates C(P* I) vs C(diag(lam)) with identical channel draws, where
// P* = trace(lam)/m is the permutation average of lam. The isotropic policy
// is `first`.
PairedComparison isotropic_dominance_test(const FadingModel& model, const Eigen::VectorXd& lam,
                                          std::size_t samples, std::uint64_t seed);

// Control experiment with R_t = diag(1, 0, ..., 0): the concentrated policy
// diag(min(P_T, P), 0, ..., 0) (`first`) against isotropic min(P, P_T/m) I.
PairedComparison tx_correlated_counterexample(double p_total, double p_per_antenna, int m_tx,
                                              int n_rx, std::size_t samples, std::uint64_t seed);

}  // namespace beamcap
