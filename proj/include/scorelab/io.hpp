// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scorelab/analytic.hpp"
#include "scorelab/sampler.hpp"
#include "scorelab/schedule.hpp"

namespace scorelab {

// Shortest decimal string that parses back to the same double; "nan", "inf"
// and "-inf" for non-finite values.
std::string format_double(double v);
std::string format_optional(const std::optional<double>& v);

// One level per line.
std::string schedule_to_text(const NoiseSchedule& s);

// Trace schema: config, schedule, seed, chain, oracle, initial_state,
// steps[], final_state, diverged, amplification_warning. Non-finite numbers
// are written as null.
nlohmann::json to_json(const SamplerConfig& cfg);
nlohmann::json to_json(const NoiseSchedule& s);
nlohmann::json to_json(const ChainTrace& trace);
nlohmann::json to_json(const ConsistencyReport& r);

// Columns: step,sigma_prescribed,tau_effective,rel_deviation
std::string report_to_csv(const ConsistencyReport& r);

}  // namespace scorelab
