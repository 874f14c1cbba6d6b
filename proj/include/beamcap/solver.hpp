#pragma once

#include <complex>
#include <span>
#include <vector>

#include "beamcap/channel.hpp"

namespace beamcap {

// Optimal rank-1 signaling under joint total + per-antenna power constraints.
// The optimal covariance is R = p_star * u u^+. Antennas whose per-antenna
// constraint is active transmit at their cap (equal amplitudes c1 when the
// caps are equal); the remaining antennas get amplitudes proportional to
// their channel gains (scale c2). k counts the active per-antenna
// constraints; for channels with zero-magnitude entries it counts only the
// usable antennas, which also bound p_star.
struct BeamformingSolution {
  double p_star = 0.0;
  std::vector<std::complex<double>> u;  // unit beamforming vector, user order
  std::size_t k = 0;
  std::vector<double> amplitudes;  // |u_i|, user order
  std::vector<double> c1;          // cap-scaled amplitudes of active antennas, solver order
  double c2 = 0.0;
  double snr = 0.0;            // gamma* = h^+ R h
  double capacity_nats = 0.0;  // ln(1 + snr)
  // Activation threshold. Gain scale (|h|) for uniform budgets; |h|/sqrt(P)
  // scale for heterogeneous ones. Zero when every constraint is active.
  double h_threshold = 0.0;
  bool degenerate = false;  // all-zero channel: u is undefined (all zeros)
};

// Least k in {0..floor(m_star)} with |h_{k+1}|^2 (m_star - k) <= sum_{i>k} |h_i|^2,
// scanning upward. Ties stop the scan. The caller handles P_T >= mP (k = m).
// Magnitudes must be sorted non-increasing and positive; m_star = P*/P.
std::size_t find_active_count(std::span<const double> sorted_mags, double m_star);

// User indices of the usable (nonzero) antennas sorted by the activation key
// |h_i|/sqrt(P_i) in decreasing order, ties by user index: per-antenna
// constraints activate in this order as P_T grows.
std::vector<std::size_t> activation_order(const ChannelVector& h, const PowerBudget& budget);

BeamformingSolution solve_uniform(const ChannelVector& h, double p_total, double p);
BeamformingSolution solve_heterogeneous(const ChannelVector& h, double p_total,
                                        std::span<const double> limits);
BeamformingSolution solve(const ChannelVector& h, const PowerBudget& budget);

// Maximum ratio transmission is optimal iff |h_1| <= |h|_2 sqrt(P_1/P_T),
// where antenna 1 maximizes |h_i|/sqrt(P_i). Predicate uses 1e-12 relative
// slack; agrees with solve() returning k = 0.
bool is_mrt_optimal(const ChannelVector& h, const PowerBudget& budget);

// Equal gain transmission is optimal iff P_T >= sum of per-antenna caps;
// channel-independent.
bool is_egt_optimal(const PowerBudget& budget, std::size_t m);

struct CapacityApprox {
  double approx_nats = 0.0;
  double upper_bound_nats = 0.0;
  bool exact = false;
};

// min(C_MRT, C_EGT): an upper bound on the joint-constraint capacity and an
// accurate approximation away from the transition region. Exact when MRT or
// EGT is optimal, or when all magnitudes are equal.
CapacityApprox capacity_approx(const ChannelVector& h, double p_total, double p);

}  // namespace beamcap
