#pragma once

#include <json.hpp>

#include <Eigen/Dense>

#include "beamcap/channel.hpp"
#include "beamcap/fading.hpp"
#include "beamcap/kkt.hpp"
#include "beamcap/solver.hpp"
#include "beamcap/validation.hpp"

namespace beamcap {

using json = nlohmann::ordered_json;

// Channel JSON: {"gains": [[re, im], ...]} or
// {"magnitudes": [...], "phases": [...]}.
ChannelVector channel_from_json(const json& j);
json channel_to_json(const ChannelVector& h);

// Square complex matrix as rows of [re, im] pairs.
Eigen::MatrixXcd complex_matrix_from_json(const json& j);

json solution_to_json(const BeamformingSolution& sol, bool bits);
json certificate_to_json(const KktCertificate& cert);
json estimate_to_json(const ErgodicEstimate& est, bool bits);
json comparison_to_json(const PairedComparison& cmp, const char* first_name,
                        const char* second_name);
json instance_to_json(const RandomInstance& inst);
RandomInstance instance_from_json(const json& j);

}  // namespace beamcap
