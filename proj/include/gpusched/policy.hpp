#pragma once
#ifndef GPUSCHED_POLICY_HPP
#define GPUSCHED_POLICY_HPP

#include <array>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"

#include "gpusched/policies_static.hpp"
#include "gpusched/policy_hps.hpp"
#include "gpusched/policy_pbs.hpp"
#include "gpusched/policy_sbs.hpp"

namespace gpusched {

inline constexpr std::array<std::string_view, 7> kSchedulerNames{"fifo", "sjf", "shortest", "shortest-gpu",
                                                                 "hps",  "pbs", "sbs"};

inline bool is_scheduler_name(std::string_view s)
{
    return std::find(kSchedulerNames.begin(), kSchedulerNames.end(), s) != kSchedulerNames.end();
}

inline std::string scheduler_names_joined()
{
    std::string out;
    for (auto n : kSchedulerNames) {
        if (!out.empty()) out += ", ";
        out += n;
    }
    return out;
}

/// All tunable policy parameters, with defaults materialized.
struct PolicyConfig {
    HpsParams hps;
    PbsParams pbs;
    SbsParams sbs;

    bool operator==(const PolicyConfig&) const = default;
};

inline void validate(const PolicyConfig& c)
{
    validate(c.hps);
    validate(c.pbs);
    validate(c.sbs);
}

namespace detail {

inline double parse_double(std::string_view key, std::string_view v)
{
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out))
        throw ValidationError(std::string(key) + ": expected a number, got \"" + std::string(v) + "\"");
    return out;
}

inline long long parse_int(std::string_view key, std::string_view v)
{
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ValidationError(std::string(key) + ": expected an integer, got \"" + std::string(v) + "\"");
    return out;
}

inline bool parse_bool(std::string_view key, std::string_view v)
{
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw ValidationError(std::string(key) + ": expected true/false, got \"" + std::string(v) + "\"");
}

inline std::size_t parse_count(std::string_view key, std::string_view v)
{
    const auto n = parse_int(key, v);
    if (n < 0) throw ValidationError(std::string(key) + ": must be non-negative");
    return static_cast<std::size_t>(n);
}

}  // namespace detail

/// Applies one `section.key=value` override. Unknown keys are rejected.
inline void apply_override(PolicyConfig& c, std::string_view key, std::string_view value)
{
    using namespace detail;
    if (key == "hps.aging_threshold_s") c.hps.aging_threshold_s = parse_double(key, value);
    else if (key == "hps.aging_boost") c.hps.aging_boost = parse_double(key, value);
    else if (key == "hps.max_wait_s") c.hps.max_wait_s = parse_double(key, value);
    else if (key == "hps.clamp_aging_to_one") c.hps.clamp_aging_to_one = parse_bool(key, value);
    else if (key == "pbs.tau") c.pbs.tau = parse_double(key, value);
    else if (key == "pbs.gamma_gpus") c.pbs.gamma_gpus = static_cast<int>(parse_int(key, value));
    else if (key == "pbs.medium_T_s") c.pbs.medium_T_s = parse_double(key, value);
    else if (key == "pbs.pair_delta") c.pbs.pair_delta = parse_double(key, value);
    else if (key == "pbs.pairing_enabled") c.pbs.pairing_enabled = parse_bool(key, value);
    else if (key == "pbs.candidate_cap") c.pbs.candidate_cap = parse_count(key, value);
    else if (key == "pbs.pair_gpu_time_mode") {
        if (value == "sum") c.pbs.pair_gpu_time_mode = PairGpuTimeMode::SumOfJobs;
        else if (value == "max") c.pbs.pair_gpu_time_mode = PairGpuTimeMode::CombinedMaxTime;
        else throw ValidationError("pbs.pair_gpu_time_mode: expected sum|max");
    }
    else if (key == "sbs.g_max") c.sbs.g_max = static_cast<int>(parse_int(key, value));
    else if (key == "sbs.theta") c.sbs.theta = parse_double(key, value);
    else if (key == "sbs.time_unit_s") c.sbs.time_unit_s = parse_double(key, value);
    else if (key == "sbs.max_batch_size") c.sbs.max_batch_size = parse_count(key, value);
    else if (key == "sbs.candidate_cap") c.sbs.candidate_cap = parse_count(key, value);
    else throw ValidationError("unknown config key \"" + std::string(key) + "\"");
}

/// Parses "key=value" and applies it.
inline void apply_assignment(PolicyConfig& c, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0)
        throw ValidationError("expected KEY=VALUE, got \"" + std::string(assignment) + "\"");
    apply_override(c, assignment.substr(0, eq), assignment.substr(eq + 1));
}

inline nlohmann::json to_json(const PolicyConfig& c)
{
    return {
        {"hps",
         {{"aging_threshold_s", c.hps.aging_threshold_s},
          {"aging_boost", c.hps.aging_boost},
          {"max_wait_s", c.hps.max_wait_s},
          {"clamp_aging_to_one", c.hps.clamp_aging_to_one}}},
        {"pbs",
         {{"tau", c.pbs.tau},
          {"gamma_gpus", c.pbs.gamma_gpus},
          {"medium_T_s", c.pbs.medium_T_s},
          {"pair_delta", c.pbs.pair_delta},
          {"pairing_enabled", c.pbs.pairing_enabled},
          {"pair_gpu_time_mode", to_string(c.pbs.pair_gpu_time_mode)},
          {"candidate_cap", c.pbs.candidate_cap}}},
        {"sbs",
         {{"g_max", c.sbs.g_max},
          {"theta", c.sbs.theta},
          {"time_unit_s", c.sbs.time_unit_s},
          {"max_batch_size", c.sbs.max_batch_size},
          {"candidate_cap", c.sbs.candidate_cap}}},
    };
}

/// Closed set of the seven schedulers behind one SchedulingPolicy.
class AnyPolicy {
public:
    using Variant = std::variant<StaticPolicy, HpsPolicy, PbsPolicy, SbsPolicy>;

    explicit AnyPolicy(Variant v) : impl_(std::move(v)) {}

    std::string_view name() const
    {
        return std::visit([](const auto& p) { return p.name(); }, impl_);
    }
    bool head_of_line_only() const
    {
        return std::visit([](const auto& p) { return gpusched::head_of_line_only(p); }, impl_);
    }
    SchedulingDecision decide(QueueView queue, const ClusterState& cluster, double now) const
    {
        return std::visit([&](const auto& p) { return p.decide(queue, cluster, now); }, impl_);
    }
    const Variant& variant() const { return impl_; }

private:
    Variant impl_;
};

inline AnyPolicy make_policy(std::string_view name, const PolicyConfig& config = {})
{
    validate(config);
    if (name == "fifo") return AnyPolicy(StaticPolicy{StaticPolicyKind::Fifo});
    if (name == "sjf") return AnyPolicy(StaticPolicy{StaticPolicyKind::FewestGpu});
    if (name == "shortest") return AnyPolicy(StaticPolicy{StaticPolicyKind::ShortestRemaining});
    if (name == "shortest-gpu") return AnyPolicy(StaticPolicy{StaticPolicyKind::GpuTimeProduct});
    if (name == "hps") return AnyPolicy(HpsPolicy{config.hps});
    if (name == "pbs") return AnyPolicy(PbsPolicy{config.pbs});
    if (name == "sbs") return AnyPolicy(SbsPolicy{config.sbs});
    throw ValidationError("unknown scheduler \"" + std::string(name) + "\"; valid: " + scheduler_names_joined());
}

inline bool is_dynamic(std::string_view name) { return name == "hps" || name == "pbs" || name == "sbs"; }

}  // namespace gpusched

#endif  // GPUSCHED_POLICY_HPP
