#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "beamcap/channel.hpp"

namespace beamcap {

struct OracleResult {
  std::vector<double> amplitudes;  // user order; zeros on zero-gain antennas
  double snr = 0.0;
  std::size_t iterations = 0;  // projected-gradient iterations over all restarts
  bool converged = false;
  int restarts_used = 0;
};

struct OracleOptions {
  double tol = 1e-12;
  int max_restarts = 8;
  std::size_t max_iterations = 4000;  // per restart
  std::uint64_t seed = 0;
};

// Exact projection onto {a : 0 <= a_i <= upper_i, ||a||_2 <= 1}. The
// projection satisfies x_i = clamp(z_i/(1+mu), 0, upper_i) with mu >= 0 zero
// unless the ball binds, so a monotone bisection on mu resolves it to full
// precision. Idempotent on feasible points.
std::vector<double> project_box_ball(std::vector<double> z, std::span<const double> upper,
                                     int max_iterations = 500, double tol = 1e-14);

// Brute-force maximizer of the receive SNR over the joint constraint set.
// Rank-1 signaling and channel-phase alignment reduce the search to the
// amplitude vector: maximize P* (sum a_i |h_i|)^2 over the box-ball set with
// upper_i = sqrt(P_i / P*). Projected-gradient ascent with Barzilai-Borwein
// steps, backtracking to enforce ascent, and deterministic multi-start.
OracleResult maximize_snr(const ChannelVector& h, const PowerBudget& budget,
                          const OracleOptions& options = {});

// Exhaustive complex search for m = 2: amplitude frontier times a full phase
// grid. Guards the phase-alignment reduction used by maximize_snr.
struct GridSearchResult {
  double snr = 0.0;
  double best_phase_offset = 0.0;  // relative phase minus channel alignment
};
GridSearchResult grid_search_snr_2(const ChannelVector& h, const PowerBudget& budget,
                                   std::size_t phase_points = 720, std::size_t amp_points = 500);

// Exhaustive validation of the active-count characterization on one sorted
// magnitude vector: the non-strict tail inequality has an up-closed solution
// set ending at floor(m_star), exactly one k also satisfies the strict head
// inequality, and that k is what find_active_count returns.
struct KSearchReport {
  std::vector<bool> tail_holds;  // |h_{k+1}|^2 (m*-k) <= sum_{i>k} |h_i|^2
  std::vector<bool> head_holds;  // |h_k|^2 (m*-k)   >  sum_{i>k} |h_i|^2
  std::vector<std::size_t> both;
  bool up_closed = false;
  bool unique_both = false;
  std::size_t k_search = 0;
  bool matches_search = false;
  bool ok = false;
};
KSearchReport validate_k_search(std::span<const double> sorted_mags, double m_star);

}  // namespace beamcap
