#include "beamcap/validation.hpp"

#include <algorithm>
#include <cmath>

#include "beamcap/parallel.hpp"

namespace beamcap {

RandomInstance random_instance(RngStream& rng, std::size_t max_m, bool allow_heterogeneous) {
  const std::size_t m = 1 + static_cast<std::size_t>(rng.index_below(max_m));
  std::vector<std::complex<double>> gains(m);
  for (auto& g : gains) g = rng.complex_normal();
  ChannelVector h(std::move(gains));
  while (h.all_zero()) {  // essentially unreachable
    std::vector<std::complex<double>> retry(m);
    for (auto& g : retry) g = rng.complex_normal();
    h = ChannelVector(std::move(retry));
  }
  const double p_total = rng.log_uniform(0.01, 100.0);
  if (allow_heterogeneous && rng.uniform() < 0.5) {
    std::vector<double> limits(m);
    for (auto& p : limits) p = rng.log_uniform(0.01, 100.0);
    return {std::move(h), PowerBudget::heterogeneous(p_total, std::move(limits))};
  }
  return {std::move(h), PowerBudget::uniform(p_total, rng.log_uniform(0.01, 100.0))};
}

std::optional<BeamformingSolution> solution_with_forced_k(const ChannelVector& h,
                                                          const PowerBudget& budget,
                                                          std::size_t k) {
  const auto order = activation_order(h, budget);
  const std::size_t n = order.size();
  if (k >= n) return std::nullopt;  // forcing k = n coincides with the short-circuit

  const auto& mags = h.magnitudes();
  double cap_sum = 0.0;
  for (const std::size_t i : order) cap_sum += budget.limit(i);
  const double p_star = std::min(budget.total(), cap_sum);

  double prefix = 0.0;
  for (std::size_t j = 0; j < k; ++j) prefix += budget.limit(order[j]);
  const double residual = p_star - prefix;
  if (!(residual > 1e-12 * p_star)) return std::nullopt;  // no power left for the tail

  double tail_sq = 0.0;
  for (std::size_t j = k; j < n; ++j) tail_sq += mags[order[j]] * mags[order[j]];

  BeamformingSolution s;
  s.p_star = p_star;
  s.k = k;
  s.c1.resize(k);
  s.c2 = std::sqrt(residual / p_star) / std::sqrt(tail_sq);
  s.amplitudes.assign(h.size(), 0.0);
  s.u.assign(h.size(), {0.0, 0.0});
  double gain_sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t i = order[j];
    double amp;
    if (j < k) {
      s.c1[j] = std::sqrt(budget.limit(i) / p_star);
      amp = s.c1[j];
      gain_sum += s.c1[j] * mags[i];
    } else {
      amp = s.c2 * mags[i];
    }
    s.amplitudes[i] = amp;
    s.u[i] = std::polar(amp, h.phases()[i]);
  }
  gain_sum += s.c2 * tail_sq;
  s.snr = p_star * gain_sum * gain_sum;
  s.capacity_nats = std::log1p(s.snr);
  s.h_threshold = std::sqrt(tail_sq) / std::sqrt(std::max(budget.total() - prefix, 0.0));
  return s;
}

std::optional<BeamformingSolution> perturbed_solution(const ChannelVector& h,
                                                      const BeamformingSolution& sol,
                                                      double factor) {
  if (h.nonzero_count() < 2 || sol.degenerate) return std::nullopt;
  BeamformingSolution s = sol;
  const std::size_t worst = static_cast<std::size_t>(
      std::max_element(s.amplitudes.begin(), s.amplitudes.end()) - s.amplitudes.begin());
  s.amplitudes[worst] *= factor;
  double norm_sq = 0.0;
  for (const double a : s.amplitudes) norm_sq += a * a;
  const double norm = std::sqrt(norm_sq);
  for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
    s.amplitudes[i] /= norm;
    s.u[i] = std::polar(s.amplitudes[i], h.phases()[i]);
  }
  return s;
}

namespace {

bool amplitudes_differ(const BeamformingSolution& a, const BeamformingSolution& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i) {
    diff = std::max(diff, std::abs(a.amplitudes[i] - b.amplitudes[i]));
    scale = std::max(scale, std::abs(a.amplitudes[i]));
  }
  return diff > 1e-9 * std::max(1.0, scale);
}

}  // namespace

InstanceCheck check_instance(const RandomInstance& inst, const VerifyOptions& options) {
  InstanceCheck out;
  const BeamformingSolution sol = solve(inst.h, inst.budget);

  if (options.check_oracle) {
    OracleOptions oopt;
    oopt.seed = mix_seed(options.seed, 0xBEA3);
    const OracleResult oracle = maximize_snr(inst.h, inst.budget, oopt);
    out.snr_gap = std::abs(sol.snr - oracle.snr) / std::max(1.0, sol.snr);
    out.oracle_ok = oracle.converged && out.snr_gap <= options.snr_tol;
  }

  if (options.check_kkt) {
    const KktCertificate cert = certify_solution(inst.h, sol, inst.budget);
    out.rm_residual = cert.comp_slack_rm / std::max(inst.h.norm2_sq(), 1e-300);
    out.kkt_ok = cert.pass;

    if (options.negative_controls) {
      if (auto bad = perturbed_solution(inst.h, sol)) {
        ++out.controls_attempted;
        if (!certify_solution(inst.h, *bad, inst.budget).pass) ++out.controls_caught;
      }
      for (const std::size_t k_wrong : {sol.k + 1, sol.k - 1}) {
        if (k_wrong == static_cast<std::size_t>(-1)) continue;
        if (auto bad = solution_with_forced_k(inst.h, inst.budget, k_wrong)) {
          if (!amplitudes_differ(*bad, sol)) continue;
          ++out.controls_attempted;
          if (!certify_solution(inst.h, *bad, inst.budget).pass) ++out.controls_caught;
        }
      }
    }
  }

  if (options.check_k_search && inst.budget.uniform_limits() && !inst.h.all_zero()) {
    const std::size_t nz = inst.h.nonzero_count();
    const auto sorted = inst.h.sorted_magnitudes();
    const std::vector<double> mags(sorted.begin(), sorted.begin() + static_cast<long>(nz));
    const double cap = inst.budget.shared_limit();
    const double m_star = std::min(std::min(inst.budget.total(), static_cast<double>(nz) * cap) / cap,
                                   static_cast<double>(nz));
    out.k_search_ok = validate_k_search(mags, m_star).ok;
  }
  return out;
}

VerifyReport run_verification(const VerifyOptions& options) {
  VerifyReport rep;
  rep.instances = options.instances;
  rep.seed = options.seed;
  rep.max_m = options.max_m;

  std::vector<RandomInstance> instances;
  instances.reserve(options.instances);
  for (std::size_t i = 0; i < options.instances; ++i) {
    RngStream rng(options.seed, i);
    instances.push_back(random_instance(rng, options.max_m, true));
  }

  std::vector<InstanceCheck> checks(options.instances);
  parallel_for(options.instances, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      checks[i] = check_instance(instances[i], options);
    }
  });

  for (std::size_t i = 0; i < options.instances; ++i) {
    const InstanceCheck& c = checks[i];
    rep.worst_snr_gap = std::max(rep.worst_snr_gap, c.snr_gap);
    rep.worst_rm_residual = std::max(rep.worst_rm_residual, c.rm_residual);
    rep.control_total += c.controls_attempted;
    rep.control_caught += c.controls_caught;
    if (!c.oracle_ok) ++rep.oracle_failures;
    if (!c.kkt_ok) ++rep.kkt_failures;
    if (!c.k_search_ok) ++rep.k_search_failures;
    const bool instance_ok = c.oracle_ok && c.kkt_ok && c.k_search_ok &&
                             c.controls_caught == c.controls_attempted;
    if (!instance_ok && !rep.failing) {
      rep.failing = instances[i];
      if (!c.oracle_ok) {
        rep.failing_check = "oracle";
      } else if (!c.kkt_ok) {
        rep.failing_check = "kkt";
      } else if (!c.k_search_ok) {
        rep.failing_check = "k_search";
      } else {
        rep.failing_check = "negative_control";
      }
    }
  }

  if (options.check_grid) {
    for (std::size_t g = 0; g < options.grid_cases; ++g) {
      RngStream rng(mix_seed(options.seed, 0x67D1), g);
      std::vector<std::complex<double>> gains{rng.complex_normal(), rng.complex_normal()};
      const ChannelVector h2(std::move(gains));
      if (h2.nonzero_count() < 2) continue;
      PowerBudget budget = rng.uniform() < 0.5
                               ? PowerBudget::uniform(rng.log_uniform(0.01, 100.0),
                                                      rng.log_uniform(0.01, 100.0))
                               : PowerBudget::heterogeneous(
                                     rng.log_uniform(0.01, 100.0),
                                     {rng.log_uniform(0.01, 100.0), rng.log_uniform(0.01, 100.0)});
      const BeamformingSolution sol = solve(h2, budget);
      const GridSearchResult grid = grid_search_snr_2(h2, budget);
      const double excess = (grid.snr - sol.snr) / std::max(1.0, sol.snr);
      rep.worst_grid_excess = std::max(rep.worst_grid_excess, excess);
      ++rep.grid_cases;
    }
  }

  rep.pass = rep.oracle_failures == 0 && rep.kkt_failures == 0 && rep.k_search_failures == 0 &&
             rep.control_caught == rep.control_total && rep.worst_grid_excess <= 1e-9;
  return rep;
}

}  // namespace beamcap
