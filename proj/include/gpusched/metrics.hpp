#pragma once
#ifndef GPUSCHED_METRICS_HPP
#define GPUSCHED_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "gpusched/engine.hpp"

namespace gpusched {

inline constexpr double kStarvationThresholdS = 1800.0;

struct QueueSample {
    double time_s;
    int queue_length;
    bool operator==(const QueueSample&) const = default;
};

struct MetricsReport {
    double throughput_jobs_per_hour = 0.0;
    double avg_wait_s = 0.0;
    double avg_jct_s = 0.0;
    double gpu_utilization = 0.0;
    double resource_efficiency = 0.0;  // iterations per GPU-hour
    double fairness_variance_s2 = 0.0;
    std::size_t starvation_count = 0;
    double min_wait_s = 0.0;
    double max_wait_s = 0.0;
    double success_rate = 0.0;
    double makespan_s = 0.0;
    double avg_fragmentation = 0.0;
    std::vector<QueueSample> queue_length_series;
    std::size_t preemption_count = 0;  // non-preemptive model

    // Supporting counts.
    std::size_t submitted = 0;
    std::size_t completed = 0;
    std::size_t failed = 0;

    bool operator==(const MetricsReport&) const = default;
};

/// Population variance, sum((x - mean)^2) / n.
inline double wait_variance(std::span<const double> waits)
{
    if (waits.empty()) throw ContractViolation("wait_variance: needs at least one value");
    double mean = 0.0;
    for (double w : waits) mean += w;
    mean /= static_cast<double>(waits.size());
    double acc = 0.0;
    for (double w : waits) acc += (w - mean) * (w - mean);
    return acc / static_cast<double>(waits.size());
}

inline double first_arrival(const RunTrace& t) { return t.jobs.empty() ? 0.0 : t.jobs.front().arrival_s; }

inline double makespan(const RunTrace& t) { return t.jobs.empty() ? 0.0 : std::max(0.0, t.end_s - first_arrival(t)); }

/// Seconds a job held its GPUs within the measured window.
inline double run_seconds(const Job& j, const RunTrace& t)
{
    if (!j.start_s) return 0.0;
    const double stop = j.end_s ? *j.end_s : t.end_s;
    return std::max(0.0, stop - *j.start_s);
}

/// Start minus arrival for started jobs; censored at the end of the run
/// otherwise.
inline double observed_wait(const Job& j, const RunTrace& t)
{
    if (j.start_s) return *j.start_s - j.arrival_s;
    return std::max(0.0, t.end_s - j.arrival_s);
}

inline std::vector<double> observed_waits(const RunTrace& t)
{
    std::vector<double> w;
    w.reserve(t.jobs.size());
    for (const Job& j : t.jobs) w.push_back(observed_wait(j, t));
    return w;
}

inline double utilization(const RunTrace& t)
{
    const double span = makespan(t);
    if (span <= 0.0 || t.total_gpus == 0) return 0.0;
    double gpu_s = 0.0;
    for (const Job& j : t.jobs) gpu_s += j.num_gpu * run_seconds(j, t);
    return gpu_s / (t.total_gpus * span);
}

inline std::size_t starvation_count(const RunTrace& t, double threshold_s = kStarvationThresholdS)
{
    std::size_t n = 0;
    for (const Job& j : t.jobs) n += observed_wait(j, t) > threshold_s ? 1 : 0;
    return n;
}

/// Time-weighted mean of a trace-point field over [first arrival, end].
template <typename Field>
double time_weighted_mean(const RunTrace& t, Field field)
{
    const double span = makespan(t);
    if (span <= 0.0 || t.series.empty()) return 0.0;
    const double start = first_arrival(t);
    double acc = 0.0;
    for (std::size_t i = 0; i < t.series.size(); ++i) {
        const double from = std::max(start, t.series[i].time_s);
        const double to = i + 1 < t.series.size() ? t.series[i + 1].time_s : t.end_s;
        if (to > from) acc += field(t.series[i]) * (to - from);
    }
    return acc / span;
}

inline double avg_fragmentation(const RunTrace& t)
{
    return time_weighted_mean(t, [](const TracePoint& p) { return p.fragmentation; });
}

inline MetricsReport compute_report(const RunTrace& t)
{
    MetricsReport r;
    r.submitted = t.jobs.size();
    if (t.jobs.empty()) return r;

    double jct_sum = 0.0;
    double work_done = 0.0;
    double gpu_hours = 0.0;
    for (const Job& j : t.jobs) {
        if (j.state == JobState::Completed) {
            ++r.completed;
            jct_sum += *j.end_s - j.arrival_s;
            work_done += j.iterations;
        } else {
            ++r.failed;
        }
        gpu_hours += j.num_gpu * run_seconds(j, t) / 3600.0;
    }

    const auto waits = observed_waits(t);
    double wait_sum = 0.0;
    for (double w : waits) wait_sum += w;

    r.makespan_s = makespan(t);
    r.throughput_jobs_per_hour = r.makespan_s > 0.0 ? r.completed / (r.makespan_s / 3600.0) : 0.0;
    r.avg_wait_s = wait_sum / static_cast<double>(waits.size());
    r.avg_jct_s = r.completed > 0 ? jct_sum / static_cast<double>(r.completed) : 0.0;
    r.gpu_utilization = utilization(t);
    r.resource_efficiency = gpu_hours > 0.0 ? work_done / gpu_hours : 0.0;
    r.fairness_variance_s2 = wait_variance(waits);
    r.starvation_count = starvation_count(t);
    r.min_wait_s = *std::min_element(waits.begin(), waits.end());
    r.max_wait_s = *std::max_element(waits.begin(), waits.end());
    r.success_rate = static_cast<double>(r.completed) / static_cast<double>(r.submitted);
    r.avg_fragmentation = avg_fragmentation(t);
    r.queue_length_series.reserve(t.series.size());
    for (const auto& p : t.series) r.queue_length_series.push_back({p.time_s, p.queue_length});
    return r;
}

}  // namespace gpusched

#endif  // GPUSCHED_METRICS_HPP
