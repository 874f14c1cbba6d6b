#include "beamcap/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace beamcap {

ChannelVector::ChannelVector(std::vector<std::complex<double>> gains)
    : gains_(std::move(gains)) {
  if (gains_.empty()) {
    throw std::invalid_argument("channel: at least one antenna required");
  }
  const std::size_t m = gains_.size();
  mags_.resize(m);
  phases_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    mags_[i] = std::abs(gains_[i]);
    if (!std::isfinite(mags_[i])) {
      throw std::invalid_argument("channel: gains must be finite");
    }
    phases_[i] = std::arg(gains_[i]);
    norm1_ += mags_[i];
    norm2_sq_ += mags_[i] * mags_[i];
  }
  perm_.resize(m);
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  std::stable_sort(perm_.begin(), perm_.end(),
                   [this](std::size_t a, std::size_t b) { return mags_[a] > mags_[b]; });
  nonzero_ = static_cast<std::size_t>(
      std::count_if(mags_.begin(), mags_.end(), [](double v) { return v > 0.0; }));
}

ChannelVector ChannelVector::from_polar(const std::vector<double>& magnitudes,
                                        const std::vector<double>& phases) {
  if (magnitudes.size() != phases.size()) {
    throw std::invalid_argument("channel: magnitudes and phases must have equal length");
  }
  std::vector<std::complex<double>> gains(magnitudes.size());
  for (std::size_t i = 0; i < gains.size(); ++i) {
    if (magnitudes[i] < 0.0) {
      throw std::invalid_argument("channel: magnitudes must be non-negative");
    }
    gains[i] = std::polar(magnitudes[i], phases[i]);
  }
  return ChannelVector(std::move(gains));
}

ChannelVector ChannelVector::from_real(const std::vector<double>& gains) {
  std::vector<std::complex<double>> g(gains.begin(), gains.end());
  return ChannelVector(std::move(g));
}

std::vector<double> ChannelVector::sorted_magnitudes() const {
  std::vector<double> out(perm_.size());
  for (std::size_t j = 0; j < perm_.size(); ++j) out[j] = mags_[perm_[j]];
  return out;
}

double ChannelVector::norm2() const { return std::sqrt(norm2_sq_); }

PowerBudget::PowerBudget(double total, double shared, std::vector<double> limits)
    : total_(total), shared_(shared), limits_(std::move(limits)) {}

PowerBudget PowerBudget::uniform(double total, double per_antenna) {
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::invalid_argument("budget: total power must be positive");
  }
  if (!(per_antenna > 0.0) || !std::isfinite(per_antenna)) {
    throw std::invalid_argument("budget: per-antenna power must be positive");
  }
  return PowerBudget(total, per_antenna, {});
}

PowerBudget PowerBudget::heterogeneous(double total, std::vector<double> limits) {
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::invalid_argument("budget: total power must be positive");
  }
  if (limits.empty()) {
    throw std::invalid_argument("budget: at least one per-antenna limit required");
  }
  for (const double p : limits) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("budget: per-antenna limits must be positive");
    }
  }
  return PowerBudget(total, 0.0, std::move(limits));
}

double PowerBudget::shared_limit() const {
  if (!uniform_limits()) {
    throw std::logic_error("budget: shared_limit() on a heterogeneous budget");
  }
  return shared_;
}

double PowerBudget::limit(std::size_t i) const {
  if (uniform_limits()) return shared_;
  if (i >= limits_.size()) {
    throw std::out_of_range("budget: antenna index out of range");
  }
  return limits_[i];
}

double PowerBudget::sum_limits(std::size_t m) const {
  if (uniform_limits()) return static_cast<double>(m) * shared_;
  if (m != limits_.size()) {
    throw std::invalid_argument("budget: antenna count does not match limit list");
  }
  double s = 0.0;
  for (const double p : limits_) s += p;
  return s;
}

double PowerBudget::effective_total(std::size_t m) const {
  return std::min(total_, sum_limits(m));
}

TruncatedChannel truncate_at(std::span<const double> sorted_mags, std::size_t k) {
  if (k > sorted_mags.size()) {
    throw std::out_of_range("truncate_at: split index beyond vector length");
  }
  TruncatedChannel t;
  t.start = k;
  for (std::size_t i = 0; i < k; ++i) t.head_norm1 += sorted_mags[i];
  double sq = 0.0;
  for (std::size_t i = sorted_mags.size(); i-- > k;) sq += sorted_mags[i] * sorted_mags[i];
  t.tail_norm2 = std::sqrt(sq);
  return t;
}

double capacity_mrt(const ChannelVector& h, double p_total) {
  if (!(p_total > 0.0) || !std::isfinite(p_total)) {
    throw std::invalid_argument("capacity_mrt: total power must be positive");
  }
  return std::log1p(p_total * h.norm2_sq());
}

double capacity_egt(const ChannelVector& h, double p_per_antenna) {
  if (!(p_per_antenna > 0.0) || !std::isfinite(p_per_antenna)) {
    throw std::invalid_argument("capacity_egt: per-antenna power must be positive");
  }
  return std::log1p(p_per_antenna * h.norm1() * h.norm1());
}

}  // namespace beamcap
