#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "beamcap/channel.hpp"
#include "beamcap/kkt.hpp"
#include "beamcap/oracle.hpp"
#include "beamcap/rng.hpp"
#include "beamcap/solver.hpp"

namespace beamcap {

struct RandomInstance {
  ChannelVector h;
  PowerBudget budget;
};

// Gaussian channel of 1..max_m antennas with log-uniform powers in
// [0.01, 100]; roughly half the instances get heterogeneous budgets when
// allowed.
RandomInstance random_instance(RngStream& rng, std::size_t max_m, bool allow_heterogeneous);

// Closed-form solution with the active count forced to `k`. Empty when that
// k does not yield a well-formed candidate (out of range, no remaining
// power, or indistinguishable from the optimum).
std::optional<BeamformingSolution> solution_with_forced_k(const ChannelVector& h,
                                                          const PowerBudget& budget,
                                                          std::size_t k);

// Candidate with one amplitude scaled by `factor` and the vector
// renormalized; empty when the perturbation cannot change the solution
// (fewer than 2 usable antennas).
std::optional<BeamformingSolution> perturbed_solution(const ChannelVector& h,
                                                      const BeamformingSolution& sol,
                                                      double factor = 1.05);

struct VerifyOptions {
  std::size_t instances = 1000;
  std::uint64_t seed = 0;
  std::size_t max_m = 8;
  bool check_oracle = true;
  bool check_kkt = true;
  bool check_k_search = true;
  bool check_grid = false;  // m = 2 exhaustive complex grid
  bool negative_controls = true;
  double snr_tol = 1e-6;  // |closed - oracle| <= snr_tol * max(1, closed)
  std::size_t grid_cases = 25;
};

struct VerifyReport {
  bool pass = false;
  std::size_t instances = 0;
  std::uint64_t seed = 0;
  std::size_t max_m = 0;
  double worst_snr_gap = 0.0;       // scaled by max(1, gamma*)
  double worst_rm_residual = 0.0;   // ||M u|| / |h|^2 over passing certificates
  double worst_grid_excess = 0.0;   // grid SNR minus closed form, scaled
  std::size_t oracle_failures = 0;
  std::size_t kkt_failures = 0;
  std::size_t k_search_failures = 0;
  std::size_t control_total = 0;
  std::size_t control_caught = 0;
  std::size_t grid_cases = 0;
  std::optional<RandomInstance> failing;  // first failing instance, for replay
  std::string failing_check;
};

VerifyReport run_verification(const VerifyOptions& options);

struct InstanceCheck {
  bool oracle_ok = true;
  bool kkt_ok = true;
  bool k_search_ok = true;
  std::size_t controls_attempted = 0;
  std::size_t controls_caught = 0;
  double snr_gap = 0.0;
  double rm_residual = 0.0;
};

// All verification checks on one instance; used by the randomized sweep and
// by `verify --replay`.
InstanceCheck check_instance(const RandomInstance& inst, const VerifyOptions& options);

}  // namespace beamcap
