#pragma once
#ifndef GPUSCHED_POLICY_SBS_HPP
#define GPUSCHED_POLICY_SBS_HPP

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gpusched/engine.hpp"
#include "gpusched/policy_pbs.hpp"

namespace gpusched {

struct SbsParams {
    int g_max = 8;
    double theta = 0.5;
    /// Remaining times are expressed in this unit before taking variances.
    double time_unit_s = 3600.0;
    std::size_t max_batch_size = 4;
    std::size_t candidate_cap = 64;

    bool operator==(const SbsParams&) const = default;
};

inline void validate(const SbsParams& p)
{
    if (p.g_max < 1) throw ValidationError("sbs: g_max must be >= 1");
    if (!(p.theta >= 0.0 && p.theta <= 1.0)) throw ValidationError("sbs: theta must be in [0, 1]");
    if (!(p.time_unit_s > 0.0)) throw ValidationError("sbs: time_unit_s must be > 0");
    if (p.max_batch_size < 2) throw ValidationError("sbs: max_batch_size must be >= 2");
    if (p.candidate_cap < 2) throw ValidationError("sbs: candidate_cap must be >= 2");
}

using Batch = std::vector<const Job*>;

namespace detail {

template <typename Value>
double population_variance(std::span<const Job* const> batch, Value value)
{
    double mean = 0.0;
    for (const Job* j : batch) mean += value(*j);
    mean /= static_cast<double>(batch.size());
    double acc = 0.0;
    for (const Job* j : batch) {
        const double d = value(*j) - mean;
        acc += d * d;
    }
    return acc / static_cast<double>(batch.size());
}

inline int gpu_sum(std::span<const Job* const> batch)
{
    int s = 0;
    for (const Job* j : batch) s += j->num_gpu;
    return s;
}

}  // namespace detail

/// 1 / (1 + var(remaining time in time units) + var(num_gpu)).
inline double similarity(std::span<const Job* const> batch, double time_unit_s = 3600.0)
{
    if (batch.size() < 2) throw ContractViolation("similarity: batch needs at least two jobs");
    for (const Job* j : batch)
        if (j->model_family != batch.front()->model_family)
            throw ContractViolation("similarity: batch mixes model families");
    const double var_t =
        detail::population_variance(batch, [&](const Job& j) { return j.remaining_s() / time_unit_s; });
    const double var_g = detail::population_variance(batch, [](const Job& j) { return static_cast<double>(j.num_gpu); });
    return 1.0 / (1.0 + var_t + var_g);
}

/// Total work over (total GPUs x longest remaining time).
inline double batch_efficiency(std::span<const Job* const> batch)
{
    if (batch.empty()) throw ContractViolation("batch_efficiency: empty batch");
    double work = 0.0;
    double longest = 0.0;
    for (const Job* j : batch) {
        work += j->iterations;
        longest = std::max(longest, j->remaining_s());
    }
    return work / (detail::gpu_sum(batch) * longest);
}

inline double batch_score(std::span<const Job* const> batch, double time_unit_s = 3600.0)
{
    return batch_efficiency(batch) * similarity(batch, time_unit_s);
}

/// Fallback single-job score: efficiency damped by GPU demand.
inline double sbs_single_score(const Job& j) { return efficiency(j) / (1.0 + j.num_gpu / 4.0); }

/// Greedy seed-and-grow batch discovery. Within each model family of fitting
/// jobs, every job seeds a batch that repeatedly absorbs the member keeping
/// similarity highest, subject to the GPU budget. Every intermediate batch of
/// size >= 2 that clears theta and fits on one node is returned, in discovery
/// order, without duplicates.
inline std::vector<Batch> form_batches(QueueView queue, const ClusterState& cluster, const SbsParams& p)
{
    std::vector<const Job*> fit;
    for (const Job* j : queue) {
        if (fit.size() >= p.candidate_cap) break;
        if (cluster.can_fit(j->num_gpu)) fit.push_back(j);
    }

    std::map<int, std::vector<const Job*>> families;
    for (const Job* j : fit) families[j->model_family].push_back(j);

    // Growing past the roomiest node can never be placed, so cap there.
    const int node_budget = std::min(p.g_max, cluster.max_node_free());
    std::vector<Batch> out;
    std::vector<std::vector<JobId>> seen;

    for (const auto& [family, members] : families) {
        if (members.size() < 2) continue;
        for (const Job* seed : members) {
            if (seed->num_gpu > node_budget) continue;
            Batch batch{seed};
            int gpus = seed->num_gpu;
            while (batch.size() < p.max_batch_size) {
                const Job* best = nullptr;
                double best_sim = -1.0;
                for (const Job* c : members) {
                    if (std::find(batch.begin(), batch.end(), c) != batch.end()) continue;
                    if (gpus + c->num_gpu > node_budget) continue;
                    batch.push_back(c);
                    const double s = similarity(batch, p.time_unit_s);
                    batch.pop_back();
                    if (s > best_sim) {
                        best = c;
                        best_sim = s;
                    }
                }
                if (best == nullptr) break;
                batch.push_back(best);
                gpus += best->num_gpu;

                if (best_sim < p.theta) continue;
                std::vector<JobId> key;
                for (const Job* j : batch) key.push_back(j->id);
                std::sort(key.begin(), key.end());
                if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
                seen.push_back(std::move(key));
                out.push_back(batch);
            }
        }
    }
    return out;
}

inline SchedulingDecision select_sbs_single(QueueView queue, const ClusterState& cluster)
{
    const Job* best = nullptr;
    double best_score = 0.0;
    for (const Job* j : queue) {
        if (!cluster.can_fit(j->num_gpu)) continue;
        const double s = sbs_single_score(*j);
        if (best == nullptr || s > best_score) {
            best = j;
            best_score = s;
        }
    }
    if (best == nullptr) return Hold{};
    return Select{best->id};
}

inline SchedulingDecision select_sbs(QueueView queue, const ClusterState& cluster, const SbsParams& p)
{
    const auto batches = form_batches(queue, cluster, p);
    const Batch* best = nullptr;
    double best_score = 0.0;
    for (const auto& b : batches) {
        const double s = batch_score(b, p.time_unit_s);
        if (best == nullptr || s > best_score) {
            best = &b;
            best_score = s;
        }
    }
    if (best != nullptr) {
        SelectBatch out;
        for (const Job* j : *best) out.ids.push_back(j->id);
        return out;
    }
    return select_sbs_single(queue, cluster);
}

struct SbsPolicy {
    SbsParams params;

    std::string_view name() const { return "sbs"; }
    SchedulingDecision decide(QueueView queue, const ClusterState& cluster, double /*now*/) const
    {
        return select_sbs(queue, cluster, params);
    }
};

}  // namespace gpusched

#endif  // GPUSCHED_POLICY_SBS_HPP
