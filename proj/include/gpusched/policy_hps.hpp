#pragma once
#ifndef GPUSCHED_POLICY_HPS_HPP
#define GPUSCHED_POLICY_HPS_HPP

#include <algorithm>
#include <string_view>
#include <vector>

#include "gpusched/engine.hpp"

namespace gpusched {

struct HpsParams {
    double aging_threshold_s = 300.0;
    double aging_boost = 2.0;
    double max_wait_s = 1800.0;
    /// Off: aging factor exactly as defined, which dips below 1 just past the
    /// threshold. On: the factor is floored at 1.
    bool clamp_aging_to_one = false;

    bool operator==(const HpsParams&) const = default;
};

inline void validate(const HpsParams& p)
{
    if (!(p.aging_threshold_s > 0.0) || !(p.aging_boost > 0.0) || !(p.max_wait_s > 0.0))
        throw ValidationError("hps: parameters must be strictly positive");
    if (!(p.aging_threshold_s < p.max_wait_s)) throw ValidationError("hps: aging_threshold_s must be < max_wait_s");
}

/// Smoothed inverse-time efficiency term, 1 / (1 + remaining / 1h).
inline double base_score(double remaining_s)
{
    if (!(remaining_s >= 0.0)) throw ContractViolation("base_score: remaining time must be >= 0");
    return 1.0 / (1.0 + remaining_s / 3600.0);
}

inline double aging_score(double wait_s, const HpsParams& p)
{
    if (!(wait_s >= 0.0)) throw ContractViolation("aging_score: wait must be >= 0");
    if (wait_s <= p.aging_threshold_s) return 1.0;
    const double boosted = p.aging_boost * std::min(wait_s / p.max_wait_s, 1.0);
    return p.clamp_aging_to_one ? std::max(1.0, boosted) : boosted;
}

inline double gpu_penalty(int num_gpu)
{
    if (num_gpu < 1) throw ContractViolation("gpu_penalty: num_gpu must be >= 1");
    return 1.0 / (1.0 + num_gpu / 4.0);
}

inline double hps_score(const Job& job, double now, const HpsParams& p)
{
    return base_score(job.remaining_s()) * aging_score(job.wait_at(now), p) * gpu_penalty(job.num_gpu);
}

/// Walks jobs in descending score order. The first one that fits is selected;
/// a non-fitting job that has waited at least max_wait_s holds the cluster
/// for itself; other non-fitting jobs are skipped.
inline SchedulingDecision select_hps(QueueView queue, const ClusterState& cluster, double now, const HpsParams& p)
{
    struct Scored {
        const Job* job;
        double score;
    };
    std::vector<Scored> ranked;
    ranked.reserve(queue.size());
    for (const Job* j : queue) ranked.push_back({j, hps_score(*j, now, p)});
    std::stable_sort(ranked.begin(), ranked.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return arrives_before(*a.job, *b.job);
    });

    for (const auto& [job, score] : ranked) {
        if (cluster.can_fit(job->num_gpu)) return Select{job->id};
        if (job->wait_at(now) >= p.max_wait_s) return Hold{};
    }
    return Hold{};
}

struct HpsPolicy {
    HpsParams params;

    std::string_view name() const { return "hps"; }
    SchedulingDecision decide(QueueView queue, const ClusterState& cluster, double now) const
    {
        return select_hps(queue, cluster, now, params);
    }
};

}  // namespace gpusched

#endif  // GPUSCHED_POLICY_HPS_HPP
