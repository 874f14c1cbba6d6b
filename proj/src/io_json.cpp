#include "beamcap/io_json.hpp"

#include <stdexcept>

namespace beamcap {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

std::complex<double> pair_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw std::invalid_argument("expected a [re, im] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json pair_to_json(const std::complex<double>& z) { return json::array({z.real(), z.imag()}); }

double in_units(double nats, bool bits) { return bits ? nats / kLn2 : nats; }

}  // namespace

ChannelVector channel_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("channel JSON must be an object");
  if (j.contains("gains")) {
    const auto& arr = j.at("gains");
    if (!arr.is_array() || arr.empty()) {
      throw std::invalid_argument("channel \"gains\" must be a non-empty array");
    }
    std::vector<std::complex<double>> gains;
    gains.reserve(arr.size());
    for (const auto& g : arr) gains.push_back(pair_from_json(g));
    return ChannelVector(std::move(gains));
  }
  if (j.contains("magnitudes") && j.contains("phases")) {
    return ChannelVector::from_polar(j.at("magnitudes").get<std::vector<double>>(),
                                     j.at("phases").get<std::vector<double>>());
  }
  throw std::invalid_argument("channel JSON needs \"gains\" or \"magnitudes\"+\"phases\"");
}

json channel_to_json(const ChannelVector& h) {
  json gains = json::array();
  for (const auto& g : h.gains()) gains.push_back(pair_to_json(g));
  return json{{"gains", std::move(gains)}};
}

Eigen::MatrixXcd complex_matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument("matrix JSON must be a non-empty array of rows");
  }
  const std::size_t n = j.size();
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || row.size() != n) {
      throw std::invalid_argument("matrix JSON rows must form a square matrix");
    }
    for (std::size_t c = 0; c < n; ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = pair_from_json(row[c]);
    }
  }
  return out;
}

json solution_to_json(const BeamformingSolution& sol, bool bits) {
  json u = json::array();
  for (const auto& ui : sol.u) u.push_back(pair_to_json(ui));
  json out{{"p_star", sol.p_star},
           {"k", sol.k},
           {"snr", sol.snr},
           {bits ? "capacity_bits" : "capacity_nats", in_units(sol.capacity_nats, bits)},
           {"amplitudes", sol.amplitudes},
           {"u", std::move(u)},
           {"c1", sol.c1},
           {"c2", sol.c2},
           {"h_threshold", sol.h_threshold},
           {"degenerate", sol.degenerate}};
  return out;
}

json certificate_to_json(const KktCertificate& cert) {
  json residuals{{"stationarity", cert.stationarity},
                 {"comp_slack_tp", cert.comp_slack_tp},
                 {"comp_slack_pa", cert.comp_slack_pa},
                 {"comp_slack_rm", cert.comp_slack_rm},
                 {"primal_tp", cert.primal_tp},
                 {"primal_pa", cert.primal_pa},
                 {"unit_norm_error", cert.unit_norm_error},
                 {"min_eigenvalue", cert.min_eigenvalue},
                 {"max_eigenvalue", cert.max_eigenvalue},
                 {"min_lambda_i", cert.min_lambda_i}};
  json out{{"pass", cert.pass},
           {"lambda", cert.lambda},
           {"lambda_i", cert.lambda_i},
           {"a", cert.a_scalar},
           {"rank", cert.rank},
           {"expected_rank", cert.expected_rank},
           {"rank_checked", cert.rank_checked},
           {"residuals", std::move(residuals)}};
  return out;
}

json estimate_to_json(const ErgodicEstimate& est, bool bits) {
  return json{{bits ? "capacity_bits" : "capacity_nats", in_units(est.capacity_nats, bits)},
              {"std_error", in_units(est.std_error, bits)},
              {"samples", est.samples},
              {"seed", est.seed},
              {"p_star", est.p_star}};
}

json comparison_to_json(const PairedComparison& cmp, const char* first_name,
                        const char* second_name) {
  return json{{first_name, estimate_to_json(cmp.first, false)},
              {second_name, estimate_to_json(cmp.second, false)},
              {"mean_diff", cmp.mean_diff},
              {"paired_std_error", cmp.paired_std_error},
              {"sigmas", cmp.sigmas},
              {"first_wins_3sigma", cmp.first_wins_3sigma},
              {"first_not_worse_3sigma", cmp.first_not_worse_3sigma}};
}

json instance_to_json(const RandomInstance& inst) {
  json out{{"channel", channel_to_json(inst.h)}, {"tp", inst.budget.total()}};
  if (inst.budget.uniform_limits()) {
    out["pa"] = inst.budget.shared_limit();
  } else {
    out["pa_list"] = inst.budget.limits();
  }
  return out;
}

RandomInstance instance_from_json(const json& j) {
  ChannelVector h = channel_from_json(j.at("channel"));
  const double tp = j.at("tp").get<double>();
  if (j.contains("pa_list")) {
    return {std::move(h),
            PowerBudget::heterogeneous(tp, j.at("pa_list").get<std::vector<double>>())};
  }
  return {std::move(h), PowerBudget::uniform(tp, j.at("pa").get<double>())};
}

}  // namespace beamcap
