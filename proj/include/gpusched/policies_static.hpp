#pragma once
#ifndef GPUSCHED_POLICIES_STATIC_HPP
#define GPUSCHED_POLICIES_STATIC_HPP

#include <optional>
#include <string_view>

#include "gpusched/engine.hpp"

namespace gpusched {

/// Single-objective baselines. CLI names in parentheses:
///   Fifo              (fifo)          arrival order, head-of-line blocking
///   FewestGpu         (sjf)           minimum num_gpu
///   ShortestRemaining (shortest)      minimum remaining time
///   GpuTimeProduct    (shortest-gpu)  minimum num_gpu x remaining time
enum class StaticPolicyKind { Fifo, FewestGpu, ShortestRemaining, GpuTimeProduct };

inline std::string_view cli_name(StaticPolicyKind k)
{
    switch (k) {
    case StaticPolicyKind::Fifo: return "fifo";
    case StaticPolicyKind::FewestGpu: return "sjf";
    case StaticPolicyKind::ShortestRemaining: return "shortest";
    case StaticPolicyKind::GpuTimeProduct: return "shortest-gpu";
    }
    return "?";
}

namespace detail {

/// Argmin of `key` over the jobs that fit; queue order breaks ties.
template <typename Key>
std::optional<JobId> argmin_fitting(QueueView queue, const ClusterState& cluster, Key key)
{
    const Job* best = nullptr;
    double best_key = 0.0;
    for (const Job* j : queue) {
        if (!cluster.can_fit(j->num_gpu)) continue;
        const double k = key(*j);
        if (best == nullptr || k < best_key || (k == best_key && arrives_before(*j, *best))) {
            best = j;
            best_key = k;
        }
    }
    if (best == nullptr) return std::nullopt;
    return best->id;
}

}  // namespace detail

inline SchedulingDecision select_static(StaticPolicyKind kind, QueueView queue, const ClusterState& cluster)
{
    if (queue.empty()) return Hold{};

    std::optional<JobId> pick;
    switch (kind) {
    case StaticPolicyKind::Fifo:
        if (cluster.can_fit(queue.front()->num_gpu)) pick = queue.front()->id;
        break;
    case StaticPolicyKind::FewestGpu:
        pick = detail::argmin_fitting(queue, cluster, [](const Job& j) { return static_cast<double>(j.num_gpu); });
        break;
    case StaticPolicyKind::ShortestRemaining:
        pick = detail::argmin_fitting(queue, cluster, [](const Job& j) { return j.remaining_s(); });
        break;
    case StaticPolicyKind::GpuTimeProduct:
        pick = detail::argmin_fitting(queue, cluster, [](const Job& j) { return j.num_gpu * j.remaining_s(); });
        break;
    }
    if (!pick) return Hold{};
    return Select{*pick};
}

struct StaticPolicy {
    StaticPolicyKind kind = StaticPolicyKind::Fifo;

    std::string_view name() const { return cli_name(kind); }
    bool head_of_line_only() const { return kind == StaticPolicyKind::Fifo; }
    SchedulingDecision decide(QueueView queue, const ClusterState& cluster, double /*now*/) const
    {
        return select_static(kind, queue, cluster);
    }
};

}  // namespace gpusched

#endif  // GPUSCHED_POLICIES_STATIC_HPP
