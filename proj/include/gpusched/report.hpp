#pragma once
#ifndef GPUSCHED_REPORT_HPP
#define GPUSCHED_REPORT_HPP

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "gpusched/engine.hpp"
#include "gpusched/metrics.hpp"
#include "gpusched/policy.hpp"
#include "gpusched/workload.hpp"

namespace gpusched {

/// One scheduler run plus everything needed to reproduce it.
struct RunRecord {
    std::string scheduler;
    std::uint64_t seed = 0;
    MetricsReport metrics;
    SimConfig sim;
    PolicyConfig policy;
    WorkloadSpec workload;
    std::vector<std::string> overrides;
};

inline std::string format_number(double v, int precision = 10)
{
    if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

inline nlohmann::json to_json(const SimConfig& c)
{
    nlohmann::json j;
    j["horizon_s"] = std::isfinite(c.horizon_s) ? nlohmann::json(c.horizon_s) : nlohmann::json(nullptr);
    j["nodes"] = c.nodes;
    j["gpus_per_node"] = c.gpus_per_node;
    return j;
}

inline SimConfig sim_config_from_json(const nlohmann::json& j)
{
    SimConfig c;
    if (j.contains("horizon_s"))
        c.horizon_s = j["horizon_s"].is_null() ? std::numeric_limits<double>::infinity() : j["horizon_s"].get<double>();
    if (j.contains("nodes")) c.nodes = j["nodes"].get<int>();
    if (j.contains("gpus_per_node")) c.gpus_per_node = j["gpus_per_node"].get<int>();
    return c;
}

/// Flat report object: scheduler, seed, every MetricsReport field in
/// declaration order, then the resolved configuration.
inline nlohmann::ordered_json to_ordered_json(const RunRecord& r)
{
    const MetricsReport& m = r.metrics;
    nlohmann::ordered_json o;
    o["scheduler"] = r.scheduler;
    o["seed"] = r.seed;
    o["throughput_jobs_per_hour"] = m.throughput_jobs_per_hour;
    o["avg_wait_s"] = m.avg_wait_s;
    o["avg_jct_s"] = m.avg_jct_s;
    o["gpu_utilization"] = m.gpu_utilization;
    o["resource_efficiency"] = m.resource_efficiency;
    o["fairness_variance_s2"] = m.fairness_variance_s2;
    o["starvation_count"] = m.starvation_count;
    o["min_wait_s"] = m.min_wait_s;
    o["max_wait_s"] = m.max_wait_s;
    o["success_rate"] = m.success_rate;
    o["makespan_s"] = m.makespan_s;
    o["avg_fragmentation"] = m.avg_fragmentation;
    auto series = nlohmann::ordered_json::array();
    for (const auto& s : m.queue_length_series) series.push_back({s.time_s, s.queue_length});
    o["queue_length_series"] = std::move(series);
    o["preemption_count"] = m.preemption_count;
    o["submitted"] = m.submitted;
    o["completed"] = m.completed;
    o["failed"] = m.failed;
    const nlohmann::json config{{"sim", to_json(r.sim)},
                                {"policy", to_json(r.policy)},
                                {"workload", to_json(r.workload)},
                                {"overrides", r.overrides}};
    o["config"] = nlohmann::ordered_json::parse(config.dump());
    return o;
}

inline std::string dump_report(const RunRecord& r) { return to_ordered_json(r).dump(2) + "\n"; }

inline RunRecord record_from_json(const nlohmann::json& j)
{
    auto need = [&](const char* k) -> const nlohmann::json& {
        if (!j.contains(k)) throw ValidationError(std::string("report: missing field \"") + k + "\"");
        return j[k];
    };
    RunRecord r;
    r.scheduler = need("scheduler").get<std::string>();
    r.seed = need("seed").get<std::uint64_t>();
    MetricsReport& m = r.metrics;
    m.throughput_jobs_per_hour = need("throughput_jobs_per_hour").get<double>();
    m.avg_wait_s = need("avg_wait_s").get<double>();
    m.avg_jct_s = need("avg_jct_s").get<double>();
    m.gpu_utilization = need("gpu_utilization").get<double>();
    m.resource_efficiency = need("resource_efficiency").get<double>();
    m.fairness_variance_s2 = need("fairness_variance_s2").get<double>();
    m.starvation_count = need("starvation_count").get<std::size_t>();
    m.min_wait_s = need("min_wait_s").get<double>();
    m.max_wait_s = need("max_wait_s").get<double>();
    m.success_rate = need("success_rate").get<double>();
    m.makespan_s = need("makespan_s").get<double>();
    m.avg_fragmentation = need("avg_fragmentation").get<double>();
    for (const auto& p : need("queue_length_series"))
        m.queue_length_series.push_back({p.at(0).get<double>(), p.at(1).get<int>()});
    m.preemption_count = need("preemption_count").get<std::size_t>();
    if (j.contains("submitted")) m.submitted = j["submitted"].get<std::size_t>();
    if (j.contains("completed")) m.completed = j["completed"].get<std::size_t>();
    if (j.contains("failed")) m.failed = j["failed"].get<std::size_t>();
    if (j.contains("config")) {
        const auto& c = j["config"];
        if (c.contains("sim")) r.sim = sim_config_from_json(c["sim"]);
        if (c.contains("workload")) r.workload = spec_from_json(c["workload"]);
        if (c.contains("overrides")) r.overrides = c["overrides"].get<std::vector<std::string>>();
        if (c.contains("policy")) {
            for (const auto& [section, body] : c["policy"].items())
                for (const auto& [key, value] : body.items())
                    apply_override(r.policy, section + "." + key,
                                   value.is_string() ? value.get<std::string>() : value.dump());
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Tables

/// Table II columns first, then the remaining scalar metrics in report order.
inline const std::vector<std::string>& csv_columns()
{
    static const std::vector<std::string> cols{
        "scheduler",         "seed",         "throughput_jobs_per_hour", "gpu_utilization", "avg_wait_s",
        "fairness_variance_s2", "starvation_count", "avg_jct_s",          "resource_efficiency", "min_wait_s",
        "max_wait_s",        "success_rate", "makespan_s",               "avg_fragmentation", "preemption_count",
    };
    return cols;
}

inline std::string csv_row(const RunRecord& r)
{
    const MetricsReport& m = r.metrics;
    std::vector<std::string> cells{
        r.scheduler,
        std::to_string(r.seed),
        format_number(m.throughput_jobs_per_hour),
        format_number(m.gpu_utilization),
        format_number(m.avg_wait_s),
        format_number(m.fairness_variance_s2),
        std::to_string(m.starvation_count),
        format_number(m.avg_jct_s),
        format_number(m.resource_efficiency),
        format_number(m.min_wait_s),
        format_number(m.max_wait_s),
        format_number(m.success_rate),
        format_number(m.makespan_s),
        format_number(m.avg_fragmentation),
        std::to_string(m.preemption_count),
    };
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + cells[i];
    return line;
}

inline std::string csv_table(const std::vector<RunRecord>& runs)
{
    std::string out;
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
    out += "\n";
    for (const auto& r : runs) out += csv_row(r) + "\n";
    return out;
}

struct MeanStderr {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Sample mean and standard error of the mean (zero for a single value).
inline MeanStderr mean_stderr(const std::vector<double>& xs)
{
    MeanStderr out;
    if (xs.empty()) return out;
    for (double x : xs) out.mean += x;
    out.mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return out;
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    return out;
}

struct SchedulerSummary {
    std::string scheduler;
    std::size_t trials = 0;
    MeanStderr throughput, utilization, wait, fairness, starved;
};

/// Aggregates runs per scheduler, preserving first-appearance order.
inline std::vector<SchedulerSummary> summarize(const std::vector<RunRecord>& runs)
{
    std::vector<std::string> order;
    std::map<std::string, std::vector<const RunRecord*>> by_name;
    for (const auto& r : runs) {
        if (!by_name.contains(r.scheduler)) order.push_back(r.scheduler);
        by_name[r.scheduler].push_back(&r);
    }
    std::vector<SchedulerSummary> out;
    for (const auto& name : order) {
        const auto& rs = by_name[name];
        auto collect = [&](auto f) {
            std::vector<double> v;
            for (const RunRecord* r : rs) v.push_back(f(r->metrics));
            return mean_stderr(v);
        };
        SchedulerSummary s;
        s.scheduler = name;
        s.trials = rs.size();
        s.throughput = collect([](const MetricsReport& m) { return m.throughput_jobs_per_hour; });
        s.utilization = collect([](const MetricsReport& m) { return m.gpu_utilization; });
        s.wait = collect([](const MetricsReport& m) { return m.avg_wait_s; });
        s.fairness = collect([](const MetricsReport& m) { return m.fairness_variance_s2; });
        s.starved = collect([](const MetricsReport& m) { return static_cast<double>(m.starvation_count); });
        out.push_back(std::move(s));
    }
    return out;
}

inline std::string summary_csv(const std::vector<SchedulerSummary>& rows)
{
    std::string out =
        "scheduler,trials,jobs_per_hour_mean,jobs_per_hour_stderr,gpu_util_mean,gpu_util_stderr,wait_s_mean,"
        "wait_s_stderr,fairness_mean,fairness_stderr,starved_mean,starved_stderr\n";
    for (const auto& s : rows) {
        out += s.scheduler + "," + std::to_string(s.trials);
        for (const MeanStderr* v : {&s.throughput, &s.utilization, &s.wait, &s.fairness, &s.starved})
            out += "," + format_number(v->mean) + "," + format_number(v->std_error);
        out += "\n";
    }
    return out;
}

inline nlohmann::json summary_json(const std::vector<SchedulerSummary>& rows)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& s : rows) {
        auto cell = [](const MeanStderr& v) { return nlohmann::json{{"mean", v.mean}, {"stderr", v.std_error}}; };
        out.push_back({{"scheduler", s.scheduler},
                       {"trials", s.trials},
                       {"jobs_per_hour", cell(s.throughput)},
                       {"gpu_utilization", cell(s.utilization)},
                       {"avg_wait_s", cell(s.wait)},
                       {"fairness_variance_s2", cell(s.fairness)},
                       {"starvation_count", cell(s.starved)}});
    }
    return out;
}

inline std::string summary_markdown(const std::vector<SchedulerSummary>& rows)
{
    auto cell = [](const MeanStderr& v, int prec) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.*f ± %.*f", prec, v.mean, prec, v.std_error);
        return std::string(buf);
    };
    std::string out = "| Scheduler | Jobs/hr | GPU Util. | Wait (s) | Fairness | Starved |\n"
                      "|---|---|---|---|---|---|\n";
    for (const auto& s : rows) {
        MeanStderr util_pct{s.utilization.mean * 100.0, s.utilization.std_error * 100.0};
        out += "| " + s.scheduler + " | " + cell(s.throughput, 2) + " | " + cell(util_pct, 1) + "% | " +
               cell(s.wait, 0) + " | " + cell(s.fairness, 0) + " | " + cell(s.starved, 1) + " |\n";
    }
    return out;
}

}  // namespace gpusched

#endif  // GPUSCHED_REPORT_HPP
