#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace beamcap {

// Complex MISO channel, noise-normalized (unit noise variance). Magnitudes
// and phases are derived at construction; sort_perm maps sorted position
// (strongest magnitude first, ties broken by original index) back to the
// caller's antenna order. Zero-magnitude entries are kept but flagged so the
// solver core can exclude them.
class ChannelVector {
 public:
  explicit ChannelVector(std::vector<std::complex<double>> gains);

  static ChannelVector from_polar(const std::vector<double>& magnitudes,
                                  const std::vector<double>& phases);
  static ChannelVector from_real(const std::vector<double>& gains);

  std::size_t size() const { return gains_.size(); }
  const std::vector<std::complex<double>>& gains() const { return gains_; }
  const std::vector<double>& magnitudes() const { return mags_; }
  const std::vector<double>& phases() const { return phases_; }

  // sort_perm()[j] is the user index of the j-th strongest antenna.
  const std::vector<std::size_t>& sort_perm() const { return perm_; }
  std::vector<double> sorted_magnitudes() const;

  std::size_t nonzero_count() const { return nonzero_; }
  bool all_zero() const { return nonzero_ == 0; }

  double norm1() const { return norm1_; }
  double norm2_sq() const { return norm2_sq_; }
  double norm2() const;

 private:
  std::vector<std::complex<double>> gains_;
  std::vector<double> mags_;
  std::vector<double> phases_;
  std::vector<std::size_t> perm_;
  std::size_t nonzero_ = 0;
  double norm1_ = 0.0;
  double norm2_sq_ = 0.0;
};

// Joint power budget: total cap P_T plus either one shared per-antenna cap or
// one cap per antenna. Linear scale, strictly positive entries.
class PowerBudget {
 public:
  static PowerBudget uniform(double total, double per_antenna);
  static PowerBudget heterogeneous(double total, std::vector<double> limits);

  bool uniform_limits() const { return limits_.empty(); }
  double total() const { return total_; }
  double shared_limit() const;
  double limit(std::size_t i) const;
  // Number of explicit limits; 0 for a uniform budget (any antenna count).
  std::size_t limit_count() const { return limits_.size(); }
  const std::vector<double>& limits() const { return limits_; }

  double sum_limits(std::size_t m) const;
  // P* = min(P_T, sum of per-antenna caps).
  double effective_total(std::size_t m) const;

 private:
  PowerBudget(double total, double shared, std::vector<double> limits);

  double total_ = 0.0;
  double shared_ = 0.0;
  std::vector<double> limits_;
};

// l1 norm of the head and l2 norm of the tail of a sorted magnitude vector,
// split before index k. Empty ranges have norm 0.
struct TruncatedChannel {
  std::size_t start = 0;
  double head_norm1 = 0.0;
  double tail_norm2 = 0.0;
};

TruncatedChannel truncate_at(std::span<const double> sorted_mags, std::size_t k);

// ln(1 + P_T |h|_2^2): capacity under the total power constraint alone.
double capacity_mrt(const ChannelVector& h, double p_total);

// ln(1 + P |h|_1^2): capacity under a uniform per-antenna constraint alone.
double capacity_egt(const ChannelVector& h, double p_per_antenna);

}  // namespace beamcap
