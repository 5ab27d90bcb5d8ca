// SPDX-License-Identifier: Apache-2.0
#include "scorelab/io.hpp"

#include <charconv>
#include <cmath>

namespace scorelab {

namespace {

nlohmann::json number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

nlohmann::json vector_json(const Vec& v) {
    auto arr = nlohmann::json::array();
    for (double x : v) arr.push_back(number(x));
    return arr;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; }

std::string schedule_to_text(const NoiseSchedule& s) {
    std::string out;
    for (double level : s.levels()) out += format_double(level) + "\n";
    return out;
}

nlohmann::json to_json(const SamplerConfig& cfg) {
    return {{"scheme", std::string(scheme_name(cfg.scheme))},
            {"epsilon", number(cfg.epsilon)},
            {"corrector_steps", cfg.corrector_steps},
            {"final_denoise", cfg.final_denoise},
            {"steps_per_level", cfg.steps_per_level},
            {"als_alpha_squared", cfg.als_alpha_squared}};
}

nlohmann::json to_json(const NoiseSchedule& s) {
    return {{"levels", vector_json(Vec(s.levels().begin(), s.levels().end()))},
            {"gamma", s.gamma()},
            {"n", s.size()}};
}

nlohmann::json to_json(const ChainTrace& trace) {
    auto steps = nlohmann::json::array();
    for (const auto& st : trace.steps) {
        steps.push_back({{"index", st.index},
                         {"level", st.level},
                         {"kind", std::string(step_kind_name(st.kind))},
                         {"sigma_i", number(st.sigma_i)},
                         {"sigma_next", number(st.sigma_next)},
                         {st.kind == StepKind::Langevin ? "alpha" : "eta", number(st.eta)},
                         {"beta", number(st.beta)},
                         {"state_before", vector_json(st.state_before)},
                         {"state_after", vector_json(st.state_after)},
                         {"noise_draw_consumed", st.noise_draw_consumed}});
    }
    return {{"config", to_json(trace.config)},
            {"schedule", to_json(trace.schedule)},
            {"oracle", trace.oracle},
            {"seed", trace.seed},
            {"chain", trace.chain},
            {"initial_state", vector_json(trace.initial_state)},
            {"steps", std::move(steps)},
            {"final_state", vector_json(trace.final_state)},
            {"diverged", trace.diverged},
            {"amplification_warning", trace.amplification_warning}};
}

nlohmann::json to_json(const ConsistencyReport& r) {
    auto rows = nlohmann::json::array();
    for (std::size_t k = 0; k < r.step.size(); ++k) {
        rows.push_back({{"step", r.step[k]},
                        {"sigma_prescribed", number(r.sigma_prescribed[k])},
                        {"tau_effective", number(r.tau_effective[k])},
                        {"rel_deviation", number(r.rel_deviation[k])}});
    }
    return {{"rows", std::move(rows)}, {"max_deviation", number(r.max_deviation)}};
}

std::string report_to_csv(const ConsistencyReport& r) {
    std::string out = "step,sigma_prescribed,tau_effective,rel_deviation\n";
    for (std::size_t k = 0; k < r.step.size(); ++k) {
        out += std::to_string(r.step[k]) + "," + format_double(r.sigma_prescribed[k]) + "," +
               format_double(r.tau_effective[k]) + "," + format_double(r.rel_deviation[k]) + "\n";
    }
    return out;
}

}  // namespace scorelab
