#include "beamcap/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "beamcap/rng.hpp"
#include "beamcap/solver.hpp"

namespace beamcap {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> clamp_box(std::vector<double> v, std::span<const double> upper) {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i], 0.0, upper[i]);
  return v;
}

}  // namespace

std::vector<double> project_box_ball(std::vector<double> z, std::span<const double> upper,
                                     int max_iterations, double tol) {
  const std::size_t n = z.size();
  std::vector<double> zc(n);  // negative parts never return, so drop them now
  for (std::size_t i = 0; i < n; ++i) zc[i] = std::max(z[i], 0.0);
  std::vector<double> x = clamp_box(zc, upper);
  if (dot(x, x) <= 1.0) return x;  // the ball constraint is slack

  // Stationarity of the projection gives x_i = clamp(z_i/(1+mu), 0, b_i) with
  // mu > 0 on the ball boundary; ||x(mu)|| decreases in mu, so bisect.
  auto norm_sq_at = [&](double mu) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = std::min(zc[i] / (1.0 + mu), upper[i]);
      s += v * v;
    }
    return s;
  };
  double lo = 0.0;
  double hi = std::sqrt(dot(zc, zc));  // ||z/(1+hi)|| <= 1 since ||clamp(z)|| > 1
  for (int it = 0; it < max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    (norm_sq_at(mid) > 1.0 ? lo : hi) = mid;
    if (hi - lo <= tol * (1.0 + hi)) break;
  }
  for (std::size_t i = 0; i < n; ++i) x[i] = std::min(zc[i] / (1.0 + hi), upper[i]);
  return x;
}

OracleResult maximize_snr(const ChannelVector& h, const PowerBudget& budget,
                          const OracleOptions& options) {
  if (!budget.uniform_limits() && budget.limit_count() != h.size()) {
    throw std::invalid_argument("oracle: budget does not match channel length");
  }
  OracleResult result;
  result.amplitudes.assign(h.size(), 0.0);
  if (h.all_zero()) {
    result.converged = true;
    return result;
  }

  const auto& mags = h.magnitudes();
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (mags[i] > 0.0) idx.push_back(i);
  }
  const std::size_t n = idx.size();
  std::vector<double> w(n), upper(n);
  double cap_sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    w[j] = mags[idx[j]];
    cap_sum += budget.limit(idx[j]);
  }
  const double p_star = std::min(budget.total(), cap_sum);
  for (std::size_t j = 0; j < n; ++j) {
    upper[j] = std::min(1.0, std::sqrt(budget.limit(idx[j]) / p_star));
  }

  const double w_sq = dot(w, w);
  auto objective = [&](std::span<const double> a) {
    const double g = dot(w, a);
    return g * g;
  };

  std::vector<double> best_a;
  double best_f = -1.0;
  std::size_t total_iters = 0;
  bool any_converged = false;
  int restarts = std::max(1, options.max_restarts);

  for (int r = 0; r < restarts; ++r) {
    std::vector<double> a(n, 0.0);
    switch (r) {
      case 0:
        a.assign(n, 1.0 / std::sqrt(static_cast<double>(n)));
        break;
      case 1:
        for (std::size_t j = 0; j < n; ++j) a[j] = w[j] / std::sqrt(w_sq);
        break;
      case 2:
        a.assign(upper.begin(), upper.end());
        break;
      default: {
        RngStream rng(options.seed, static_cast<std::uint64_t>(r));
        for (std::size_t j = 0; j < n; ++j) a[j] = rng.uniform() * upper[j];
        break;
      }
    }
    a = project_box_ball(std::move(a), upper);

    double f = objective(a);
    double step = 1.0 / std::max(w_sq, 1e-300);
    std::vector<double> a_prev, grad_prev;
    int flat_hits = 0;
    bool converged = false;

    for (std::size_t it = 0; it < options.max_iterations; ++it) {
      ++total_iters;
      const double g = dot(w, a);
      std::vector<double> grad(n);
      for (std::size_t j = 0; j < n; ++j) grad[j] = 2.0 * g * w[j];

      if (!a_prev.empty()) {
        double ss = 0.0, sy = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double s = a[j] - a_prev[j];
          const double y = grad[j] - grad_prev[j];
          ss += s * s;
          sy += s * y;
        }
        if (std::abs(sy) > 1e-300 && ss > 0.0) step = std::abs(ss / sy);
      }

      a_prev = a;
      grad_prev = grad;

      // Backtracking: halve until the projected step does not descend.
      double t = step;
      std::vector<double> a_next;
      double f_next = f;
      for (int half = 0; half < 60; ++half) {
        std::vector<double> trial(n);
        for (std::size_t j = 0; j < n; ++j) trial[j] = a[j] + t * grad[j];
        trial = project_box_ball(std::move(trial), upper);
        const double f_trial = objective(trial);
        if (f_trial >= f) {
          a_next = std::move(trial);
          f_next = f_trial;
          break;
        }
        t *= 0.5;
      }
      if (a_next.empty()) break;  // no ascent step found

      const double df = f_next - f;
      a = std::move(a_next);
      f = f_next;
      if (df < options.tol * std::max(1.0, f)) {
        if (++flat_hits >= 2) {
          converged = true;
          break;
        }
      } else {
        flat_hits = 0;
      }
    }

    any_converged = any_converged || converged;
    if (f > best_f) {
      best_f = f;
      best_a = a;
      result.restarts_used = r + 1;
    }
  }

  result.iterations = total_iters;
  result.converged = any_converged;
  result.snr = p_star * best_f;
  for (std::size_t j = 0; j < n; ++j) result.amplitudes[idx[j]] = best_a[j];
  return result;
}

GridSearchResult grid_search_snr_2(const ChannelVector& h, const PowerBudget& budget,
                                   std::size_t phase_points, std::size_t amp_points) {
  if (h.size() != 2) throw std::invalid_argument("grid_search_snr_2: needs exactly 2 antennas");
  const double m0 = h.magnitudes()[0];
  const double m1 = h.magnitudes()[1];
  const double cap_sum = budget.limit(0) + budget.limit(1);
  const double p_star = std::min(budget.total(), cap_sum);
  const double u0_max = std::min(1.0, std::sqrt(budget.limit(0) / p_star));
  const double u1_max = std::min(1.0, std::sqrt(budget.limit(1) / p_star));

  GridSearchResult best;
  constexpr double two_pi = 6.28318530717958647692;
  for (std::size_t ia = 0; ia < amp_points; ++ia) {
    const double a0 = u0_max * static_cast<double>(ia) / static_cast<double>(amp_points - 1);
    // Objective grows with both amplitudes, so only the feasibility frontier
    // in a1 matters.
    const double a1 = std::min(u1_max, std::sqrt(std::max(0.0, 1.0 - a0 * a0)));
    for (std::size_t ip = 0; ip < phase_points; ++ip) {
      const double psi = two_pi * static_cast<double>(ip) / static_cast<double>(phase_points);
      const double cross = 2.0 * m0 * m1 * a0 * a1 * std::cos(psi);
      const double val = m0 * m0 * a0 * a0 + m1 * m1 * a1 * a1 + cross;
      const double snr = p_star * val;
      if (snr > best.snr) {
        best.snr = snr;
        best.best_phase_offset = psi > 3.14159265358979323846 ? psi - two_pi : psi;
      }
    }
  }
  return best;
}

KSearchReport validate_k_search(std::span<const double> sorted_mags, double m_star) {
  const std::size_t m = sorted_mags.size();
  if (m == 0) throw std::invalid_argument("validate_k_search: empty channel");
  if (!(m_star > 0.0) || m_star > static_cast<double>(m)) {
    throw std::invalid_argument("validate_k_search: m_star must lie in (0, m]");
  }
  std::vector<double> suffix(m + 1, 0.0);
  for (std::size_t j = m; j-- > 0;) suffix[j] = suffix[j + 1] + sorted_mags[j] * sorted_mags[j];

  KSearchReport rep;
  const std::size_t k_max =
      std::min<std::size_t>(m, static_cast<std::size_t>(std::floor(m_star)));
  rep.tail_holds.resize(k_max + 1);
  rep.head_holds.resize(k_max + 1);
  for (std::size_t k = 0; k <= k_max; ++k) {
    const double slack = m_star - static_cast<double>(k);
    rep.tail_holds[k] = (k == m) || sorted_mags[k] * sorted_mags[k] * slack <= suffix[k];
    rep.head_holds[k] = (k == 0) || sorted_mags[k - 1] * sorted_mags[k - 1] * slack > suffix[k];
    if (rep.tail_holds[k] && rep.head_holds[k]) rep.both.push_back(k);
  }

  // The tail solution set must be a contiguous run ending at floor(m_star).
  std::size_t first_true = k_max + 1;
  rep.up_closed = true;
  for (std::size_t k = 0; k <= k_max; ++k) {
    if (rep.tail_holds[k]) {
      if (first_true > k_max) first_true = k;
    } else if (first_true <= k_max) {
      rep.up_closed = false;
    }
  }
  rep.up_closed = rep.up_closed && first_true <= k_max && rep.tail_holds[k_max];

  rep.unique_both = rep.both.size() == 1;
  rep.k_search = find_active_count(sorted_mags, m_star);
  rep.matches_search = rep.unique_both && rep.both.front() == rep.k_search &&
                       rep.k_search == first_true;
  rep.ok = rep.up_closed && rep.unique_both && rep.matches_search;
  return rep;
}

}  // namespace beamcap
