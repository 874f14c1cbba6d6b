#include "beamcap/fading.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "beamcap/parallel.hpp"

namespace beamcap {

namespace {

void check_hermitian(const Eigen::MatrixXcd& a, double tol) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw std::invalid_argument("correlation matrix must be square and non-empty");
  }
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() > tol * scale) {
    throw std::invalid_argument("correlation matrix must be Hermitian");
  }
}

bool is_exact_identity(const Eigen::MatrixXcd& a) {
  return a == Eigen::MatrixXcd::Identity(a.rows(), a.cols());
}

struct SampleStats {
  double mean = 0.0;
  double std_error = 0.0;
};

SampleStats reduce(const std::vector<double>& vals) {
  SampleStats s;
  const auto n = vals.size();
  s.mean = pairwise_sum(vals) / static_cast<double>(n);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = vals[i] - s.mean;
    sq[i] = d * d;
  }
  const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
  s.std_error = std::sqrt(var / static_cast<double>(n));
  return s;
}

}  // namespace

Eigen::MatrixXcd hermitian_sqrt(const Eigen::MatrixXcd& a, double tol) {
  check_hermitian(a, tol);
  if (a.isDiagonal(0.0)) {  // exact element-wise root for exact diagonals
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double d = a(i, i).real();
      if (d < 0.0) {
        throw std::invalid_argument("correlation matrix must be positive semi-definite");
      }
      s(i, i) = std::sqrt(d);
    }
    return s;
  }
  const Eigen::MatrixXcd herm = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double top = std::max(0.0, ev(ev.size() - 1));
  Eigen::VectorXd root(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -tol * std::max(1.0, top)) {
      throw std::invalid_argument("correlation matrix must be positive semi-definite");
    }
    root(i) = std::sqrt(std::max(0.0, ev(i)));
  }
  Eigen::MatrixXcd s = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
  return 0.5 * (s + s.adjoint());
}

FadingModel::FadingModel(FadingKind kind, int n, int m, Eigen::MatrixXcd sqrt_corr)
    : kind_(kind), n_(n), m_(m), sqrt_corr_(std::move(sqrt_corr)) {
  if (n_ <= 0 || m_ <= 0) {
    throw std::invalid_argument("fading model: dimensions must be positive");
  }
}

FadingModel FadingModel::iid(int n_rx, int m_tx) {
  return FadingModel(FadingKind::iid_rayleigh, n_rx, m_tx, {});
}

FadingModel FadingModel::semi_correlated(const Eigen::MatrixXcd& r_rx, int m_tx) {
  check_hermitian(r_rx, 1e-10);
  // An exact identity reduces to iid sampling bit for bit.
  if (is_exact_identity(r_rx)) {
    return FadingModel(FadingKind::semi_correlated, static_cast<int>(r_rx.rows()), m_tx, {});
  }
  return FadingModel(FadingKind::semi_correlated, static_cast<int>(r_rx.rows()), m_tx,
                     hermitian_sqrt(r_rx));
}

FadingModel FadingModel::tx_correlated(int n_rx, const Eigen::MatrixXcd& r_tx) {
  check_hermitian(r_tx, 1e-10);
  if (is_exact_identity(r_tx)) {
    return FadingModel(FadingKind::tx_correlated, n_rx, static_cast<int>(r_tx.rows()), {});
  }
  return FadingModel(FadingKind::tx_correlated, n_rx, static_cast<int>(r_tx.rows()),
                     hermitian_sqrt(r_tx));
}

Eigen::MatrixXcd FadingModel::sample(const Philox& gen, std::uint64_t index) const {
  Eigen::MatrixXcd h0(n_, m_);
  const std::uint64_t base = index * static_cast<std::uint64_t>(n_) * static_cast<std::uint64_t>(m_);
  for (int r = 0; r < n_; ++r) {
    for (int c = 0; c < m_; ++c) {
      h0(r, c) = gen.complex_normal(0, base + static_cast<std::uint64_t>(r * m_ + c));
    }
  }
  if (sqrt_corr_.size() == 0) return h0;
  if (kind_ == FadingKind::tx_correlated) return h0 * sqrt_corr_;
  return sqrt_corr_ * h0;
}

double isotropic_power(double p_per_antenna, double p_total, int m_tx) {
  if (m_tx <= 0) throw std::invalid_argument("isotropic_power: antenna count must be positive");
  return std::min(p_per_antenna, p_total / static_cast<double>(m_tx));
}

CovariancePolicy::CovariancePolicy(bool iso, double p_star, Eigen::MatrixXcd r)
    : isotropic_(iso), p_star_(p_star), r_(std::move(r)) {}

CovariancePolicy CovariancePolicy::isotropic(double p_star) {
  if (!(p_star >= 0.0) || !std::isfinite(p_star)) {
    throw std::invalid_argument("policy: isotropic power must be non-negative");
  }
  return CovariancePolicy(true, p_star, {});
}

CovariancePolicy CovariancePolicy::explicit_cov(const Eigen::MatrixXcd& r, double p_total,
                                                double p_per_antenna, double tol) {
  check_hermitian(r, tol);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r, Eigen::EigenvaluesOnly);
  const double top = std::max(0.0, es.eigenvalues()(r.rows() - 1));
  if (es.eigenvalues()(0) < -tol * std::max(1.0, top)) {
    throw std::invalid_argument("policy: covariance must be positive semi-definite");
  }
  if (r.trace().real() > p_total * (1.0 + tol)) {
    throw std::invalid_argument("policy: covariance trace exceeds the total power cap");
  }
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    if (r(i, i).real() > p_per_antenna * (1.0 + tol)) {
      throw std::invalid_argument("policy: covariance diagonal exceeds a per-antenna cap");
    }
  }
  const double p_star = r.trace().real() / static_cast<double>(r.rows());
  return CovariancePolicy(false, p_star, r);
}

double capacity_sample(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& r) {
  const Eigen::Index n = h.rows();
  Eigen::MatrixXcd arg = Eigen::MatrixXcd::Identity(n, n) + h * r * h.adjoint();
  Eigen::LLT<Eigen::MatrixXcd> llt(arg);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(llt.matrixL()(i, i).real());
  return 2.0 * logdet;
}

double capacity_sample(const Eigen::MatrixXcd& h, const CovariancePolicy& policy) {
  const Eigen::Index n = h.rows();
  if (policy.is_isotropic()) {
    Eigen::MatrixXcd arg =
        Eigen::MatrixXcd::Identity(n, n) + policy.p_star() * (h * h.adjoint());
    Eigen::LLT<Eigen::MatrixXcd> llt(arg);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(llt.matrixL()(i, i).real());
    return 2.0 * logdet;
  }
  return capacity_sample(h, policy.covariance());
}

ErgodicEstimate ergodic_capacity(const FadingModel& model, const CovariancePolicy& policy,
                                 std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("ergodic_capacity: at least 2 samples required");
  if (!policy.is_isotropic() && policy.covariance().rows() != model.m_tx()) {
    throw std::invalid_argument("ergodic_capacity: covariance does not match transmit count");
  }
  const Philox gen(seed);
  std::vector<double> vals(samples);
  parallel_for(samples, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      vals[i] = capacity_sample(model.sample(gen, i), policy);
    }
  });
  const SampleStats stats = reduce(vals);
  ErgodicEstimate est;
  est.capacity_nats = stats.mean;
  est.std_error = stats.std_error;
  est.samples = samples;
  est.seed = seed;
  est.p_star = policy.p_star();
  return est;
}

namespace {

PairedComparison paired_estimate(const FadingModel& model, const Eigen::MatrixXcd& r_first,
                                 const Eigen::MatrixXcd& r_second, double p_first,
                                 double p_second, std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("paired comparison: at least 2 samples required");
  const Philox gen(seed);
  std::vector<double> v1(samples), v2(samples), diff(samples);
  parallel_for(samples, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Eigen::MatrixXcd h = model.sample(gen, i);
      v1[i] = capacity_sample(h, r_first);
      v2[i] = capacity_sample(h, r_second);
      diff[i] = v1[i] - v2[i];
    }
  });
  const SampleStats s1 = reduce(v1);
  const SampleStats s2 = reduce(v2);
  const SampleStats sd = reduce(diff);

  PairedComparison cmp;
  cmp.first = {s1.mean, s1.std_error, samples, seed, p_first};
  cmp.second = {s2.mean, s2.std_error, samples, seed, p_second};
  cmp.mean_diff = sd.mean;
  cmp.paired_std_error = sd.std_error;
  cmp.sigmas = sd.std_error > 0.0 ? sd.mean / sd.std_error : 0.0;
  cmp.first_wins_3sigma = cmp.mean_diff > 3.0 * cmp.paired_std_error;
  cmp.first_not_worse_3sigma = cmp.mean_diff >= -3.0 * cmp.paired_std_error;
  return cmp;
}

}  // namespace

PairedComparison isotropic_dominance_test(const FadingModel& model, const Eigen::VectorXd& lam,
                                          std::size_t samples, std::uint64_t seed) {
  if (!model.right_unitary_invariant()) {
    throw std::invalid_argument("dominance test: model must be right unitary-invariant");
  }
  if (lam.size() != model.m_tx()) {
    throw std::invalid_argument("dominance test: diagonal does not match transmit count");
  }
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) < 0.0) throw std::invalid_argument("dominance test: diagonal must be PSD");
  }
  const double p_star = lam.sum() / static_cast<double>(model.m_tx());
  const Eigen::MatrixXcd r_iso =
      p_star * Eigen::MatrixXcd::Identity(model.m_tx(), model.m_tx());
  const Eigen::MatrixXcd r_lam = lam.cast<std::complex<double>>().asDiagonal();
  return paired_estimate(model, r_iso, r_lam, p_star, p_star, samples, seed);
}

PairedComparison tx_correlated_counterexample(double p_total, double p_per_antenna, int m_tx,
                                              int n_rx, std::size_t samples,
                                              std::uint64_t seed) {
  if (!(p_total > 0.0) || !(p_per_antenna > 0.0)) {
    throw std::invalid_argument("counterexample: powers must be positive");
  }
  Eigen::MatrixXcd r_t = Eigen::MatrixXcd::Zero(m_tx, m_tx);
  r_t(0, 0) = 1.0;
  const FadingModel model = FadingModel::tx_correlated(n_rx, r_t);

  const double p_conc = std::min(p_total, p_per_antenna);
  Eigen::MatrixXcd r_conc = Eigen::MatrixXcd::Zero(m_tx, m_tx);
  r_conc(0, 0) = p_conc;
  const double p_iso = isotropic_power(p_per_antenna, p_total, m_tx);
  const Eigen::MatrixXcd r_iso = p_iso * Eigen::MatrixXcd::Identity(m_tx, m_tx);
  return paired_estimate(model, r_conc, r_iso, p_conc, p_iso, samples, seed);
}

}  // namespace beamcap
