#include "beamcap/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace beamcap {

namespace {

constexpr double kPredicateSlack = 1e-12;  // relative slack for boolean predicates

// Solver-order view of the usable (nonzero) antennas, sorted by the
// activation key |h_i|/sqrt(P_i) in decreasing order, ties by user index.
struct SolverOrder {
  std::vector<std::size_t> user_index;  // solver position -> user index
  std::vector<double> mag;              // |h| in solver order
  std::vector<double> cap;              // per-antenna limit in solver order
  std::vector<double> suffix_sq;        // suffix_sq[j] = sum_{t>=j} mag[t]^2
  std::vector<double> prefix_cap;       // prefix_cap[j] = sum_{t<j} cap[t]
  double cap_sum = 0.0;
};

SolverOrder make_order(const ChannelVector& h, std::span<const double> limits) {
  const auto& mags = h.magnitudes();
  SolverOrder o;
  o.user_index.reserve(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (mags[i] > 0.0) o.user_index.push_back(i);
  }
  std::stable_sort(o.user_index.begin(), o.user_index.end(),
                   [&](std::size_t a, std::size_t b) {
                     return mags[a] * mags[a] * limits[b] > mags[b] * mags[b] * limits[a];
                   });
  const std::size_t n = o.user_index.size();
  o.mag.resize(n);
  o.cap.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    o.mag[j] = mags[o.user_index[j]];
    o.cap[j] = limits[o.user_index[j]];
  }
  o.suffix_sq.assign(n + 1, 0.0);
  for (std::size_t j = n; j-- > 0;) o.suffix_sq[j] = o.suffix_sq[j + 1] + o.mag[j] * o.mag[j];
  o.prefix_cap.assign(n + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) o.prefix_cap[j + 1] = o.prefix_cap[j] + o.cap[j];
  o.cap_sum = o.prefix_cap[n];
  return o;
}

// Least k with (|h_{k+1}|^2 / P_{k+1}) (P_T - sum_{i<=k} P_i) <= sum_{i>k} |h_i|^2.
// Requires P_T < sum of caps; a solution always exists before the active caps
// exhaust P_T.
std::size_t active_count(const SolverOrder& o, double p_total) {
  for (std::size_t k = 0; k < o.mag.size(); ++k) {
    const double lhs = (o.mag[k] * o.mag[k] / o.cap[k]) * (p_total - o.prefix_cap[k]);
    if (lhs <= o.suffix_sq[k]) return k;
  }
  throw std::logic_error("solver: no active-constraint count found; invalid input state");
}

BeamformingSolution degenerate_solution(const ChannelVector& h) {
  BeamformingSolution s;
  s.degenerate = true;
  s.u.assign(h.size(), {0.0, 0.0});
  s.amplitudes.assign(h.size(), 0.0);
  return s;
}

void validate_budget(double p_total, std::span<const double> limits, std::size_t m) {
  if (!(p_total > 0.0) || !std::isfinite(p_total)) {
    throw std::invalid_argument("solver: total power must be positive");
  }
  if (limits.size() != m) {
    throw std::invalid_argument("solver: channel and per-antenna limit lengths differ");
  }
  for (const double p : limits) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("solver: per-antenna limits must be positive");
    }
  }
}

}  // namespace

std::size_t find_active_count(std::span<const double> sorted_mags, double m_star) {
  const std::size_t m = sorted_mags.size();
  if (m == 0) throw std::invalid_argument("find_active_count: empty channel");
  if (!(m_star > 0.0) || m_star > static_cast<double>(m)) {
    throw std::invalid_argument("find_active_count: m_star must lie in (0, m]");
  }
  std::vector<double> suffix(m + 1, 0.0);
  for (std::size_t j = m; j-- > 0;) suffix[j] = suffix[j + 1] + sorted_mags[j] * sorted_mags[j];
  const std::size_t k_max =
      std::min<std::size_t>(m, static_cast<std::size_t>(std::floor(m_star)));
  for (std::size_t k = 0; k <= k_max; ++k) {
    if (k == m) return m;  // empty tail: trivially satisfied
    const double lhs = sorted_mags[k] * sorted_mags[k] * (m_star - static_cast<double>(k));
    if (lhs <= suffix[k]) return k;
  }
  throw std::logic_error("find_active_count: no solution in range; invalid input state");
}

std::vector<std::size_t> activation_order(const ChannelVector& h, const PowerBudget& budget) {
  const auto& mags = h.magnitudes();
  std::vector<std::size_t> order;
  order.reserve(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (mags[i] > 0.0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return mags[a] * mags[a] * budget.limit(b) > mags[b] * mags[b] * budget.limit(a);
  });
  return order;
}

BeamformingSolution solve_heterogeneous(const ChannelVector& h, double p_total,
                                        std::span<const double> limits) {
  validate_budget(p_total, limits, h.size());
  if (h.all_zero()) return degenerate_solution(h);

  const SolverOrder o = make_order(h, limits);
  const std::size_t n = o.mag.size();
  const double p_star = std::min(p_total, o.cap_sum);
  const std::size_t k = (p_total >= o.cap_sum) ? n : active_count(o, p_total);

  BeamformingSolution s;
  s.p_star = p_star;
  s.k = k;
  s.c1.resize(k);
  std::vector<double> amp(n, 0.0);
  double gain_sum = 0.0;  // sum over active of c_{1i} |h_i|
  for (std::size_t j = 0; j < k; ++j) {
    s.c1[j] = std::sqrt(o.cap[j] / p_star);
    amp[j] = s.c1[j];
    gain_sum += s.c1[j] * o.mag[j];
  }
  if (k < n) {
    // Power fraction left for the tail, as sqrt((P* - sum of active caps)/P*);
    // algebraically sqrt(1 - k/m*) but defined at k = 0 as well.
    const double tail_norm = std::sqrt(o.suffix_sq[k]);
    s.c2 = std::sqrt((p_star - o.prefix_cap[k]) / p_star) / tail_norm;
    for (std::size_t j = k; j < n; ++j) amp[j] = s.c2 * o.mag[j];
    gain_sum += s.c2 * o.suffix_sq[k];
    s.h_threshold = tail_norm / std::sqrt(p_total - o.prefix_cap[k]);
  }
  s.snr = p_star * gain_sum * gain_sum;
  s.capacity_nats = std::log1p(s.snr);

  s.amplitudes.assign(h.size(), 0.0);
  s.u.assign(h.size(), {0.0, 0.0});
  const auto& phases = h.phases();
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t i = o.user_index[j];
    s.amplitudes[i] = amp[j];
    s.u[i] = std::polar(amp[j], phases[i]);
  }
  return s;
}

BeamformingSolution solve_uniform(const ChannelVector& h, double p_total, double p) {
  if (!(p > 0.0) || !std::isfinite(p)) {
    throw std::invalid_argument("solver: per-antenna power must be positive");
  }
  const std::vector<double> limits(h.size(), p);
  BeamformingSolution s = solve_heterogeneous(h, p_total, limits);
  s.h_threshold *= std::sqrt(p);  // key scale -> gain scale
  return s;
}

BeamformingSolution solve(const ChannelVector& h, const PowerBudget& budget) {
  if (budget.uniform_limits()) {
    return solve_uniform(h, budget.total(), budget.shared_limit());
  }
  return solve_heterogeneous(h, budget.total(), budget.limits());
}

bool is_mrt_optimal(const ChannelVector& h, const PowerBudget& budget) {
  if (!budget.uniform_limits() && budget.limit_count() != h.size()) {
    throw std::invalid_argument("is_mrt_optimal: budget does not match channel length");
  }
  if (h.all_zero()) return true;
  const auto& mags = h.magnitudes();
  // Antenna maximizing |h_i|^2 / P_i.
  std::size_t best = 0;
  double best_key = -1.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double key = mags[i] * mags[i] / budget.limit(i);
    if (key > best_key) {
      best_key = key;
      best = i;
    }
  }
  const double lhs = mags[best] * mags[best] * budget.total();
  const double rhs = h.norm2_sq() * budget.limit(best);
  return lhs <= rhs * (1.0 + kPredicateSlack);
}

bool is_egt_optimal(const PowerBudget& budget, std::size_t m) {
  if (m == 0) throw std::invalid_argument("is_egt_optimal: empty channel");
  const double sum = budget.sum_limits(m);
  return budget.total() >= sum * (1.0 - kPredicateSlack);
}

CapacityApprox capacity_approx(const ChannelVector& h, double p_total, double p) {
  CapacityApprox r;
  const double c_mrt = capacity_mrt(h, p_total);
  const double c_egt = capacity_egt(h, p);
  r.upper_bound_nats = std::min(c_mrt, c_egt);
  r.approx_nats = r.upper_bound_nats;
  const PowerBudget budget = PowerBudget::uniform(p_total, p);
  bool equal_mags = !h.all_zero();
  if (equal_mags) {
    const auto sorted = h.sorted_magnitudes();
    const double hi = sorted.front();
    const double lo = sorted[h.nonzero_count() - 1];
    equal_mags = (hi - lo) <= kPredicateSlack * hi;
  }
  r.exact = is_mrt_optimal(h, budget) || is_egt_optimal(budget, h.size()) || equal_mags;
  return r;
}

}  // namespace beamcap
