#pragma once
#ifndef GPUSCHED_POLICY_PBS_HPP
#define GPUSCHED_POLICY_PBS_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

#include "gpusched/engine.hpp"

namespace gpusched {

enum class PairGpuTimeMode {
    SumOfJobs,        // g1*t1 + g2*t2
    CombinedMaxTime,  // (g1+g2) * max(t1, t2)
};

inline std::string_view to_string(PairGpuTimeMode m)
{
    return m == PairGpuTimeMode::SumOfJobs ? "sum" : "max";
}

struct PbsParams {
    double tau = 0.1;
    int gamma_gpus = 2;
    double medium_T_s = 7200.0;
    double pair_delta = 0.3;
    bool pairing_enabled = true;
    PairGpuTimeMode pair_gpu_time_mode = PairGpuTimeMode::SumOfJobs;
    /// Pair enumeration considers at most this many fitting jobs (longest
    /// waiting first).
    std::size_t candidate_cap = 64;

    bool operator==(const PbsParams&) const = default;
};

inline void validate(const PbsParams& p)
{
    if (!(p.tau >= 0.0)) throw ValidationError("pbs: tau must be >= 0");
    if (p.gamma_gpus < 1) throw ValidationError("pbs: gamma_gpus must be >= 1");
    if (!(p.medium_T_s > 0.0)) throw ValidationError("pbs: medium_T_s must be > 0");
    if (!(p.pair_delta >= 0.0 && p.pair_delta <= 1.0)) throw ValidationError("pbs: pair_delta must be in [0, 1]");
    if (p.candidate_cap < 2) throw ValidationError("pbs: candidate_cap must be >= 2");
}

/// Work per GPU per second.
inline double efficiency(const Job& job)
{
    if (job.num_gpu < 1 || !(job.duration_s > 0.0))
        throw ContractViolation("efficiency: job " + std::to_string(job.id) + " needs num_gpu >= 1 and duration > 0");
    return job.iterations / (job.num_gpu * job.remaining_s());
}

namespace detail {

inline constexpr double kRelEps = 1e-12;

/// a >= b up to a relative epsilon.
inline bool at_least(double a, double b) { return a >= b - kRelEps * std::max(std::abs(a), std::abs(b)); }

inline std::vector<const Job*> fitting_jobs(QueueView queue, const ClusterState& cluster)
{
    std::vector<const Job*> out;
    for (const Job* j : queue)
        if (cluster.can_fit(j->num_gpu)) out.push_back(j);
    return out;
}

/// Picks the job minimizing `less`-ordering, queue order as the last tie break.
template <typename Less>
const Job* best_by(const std::vector<const Job*>& jobs, Less less)
{
    const Job* best = nullptr;
    for (const Job* j : jobs) {
        if (best == nullptr || less(*j, *best) || (!less(*best, *j) && arrives_before(*j, *best))) best = j;
    }
    return best;
}

}  // namespace detail

/// Which rule of the single-job cascade produced a selection.
enum class PbsRule { EfficiencyMargin = 1, GapFill = 2, BlockingAvoidance = 3, Fallback = 4 };

struct PbsChoice {
    const Job* job = nullptr;
    PbsRule rule = PbsRule::Fallback;
};

/// Single-job cascade over the jobs that currently fit. Empty result iff
/// nothing fits.
inline std::optional<PbsChoice> pbs_single_choice(QueueView queue, const ClusterState& cluster, const PbsParams& p)
{
    const auto fit = detail::fitting_jobs(queue, cluster);
    if (fit.empty()) return std::nullopt;

    // Rule 1: best efficiency must beat the runner-up by a (1 + tau) margin.
    std::vector<const Job*> by_eff = fit;
    std::stable_sort(by_eff.begin(), by_eff.end(), [](const Job* a, const Job* b) {
        return efficiency(*a) > efficiency(*b);
    });
    if (by_eff.size() == 1 || detail::at_least(efficiency(*by_eff[0]), (1.0 + p.tau) * efficiency(*by_eff[1])))
        return PbsChoice{by_eff[0], PbsRule::EfficiencyMargin};

    auto shorter = [](const Job& a, const Job& b) { return a.remaining_s() < b.remaining_s(); };

    // Rule 2: small jobs, shortest first.
    std::vector<const Job*> small;
    for (const Job* j : fit)
        if (j->num_gpu < p.gamma_gpus) small.push_back(j);
    if (!small.empty()) return PbsChoice{detail::best_by(small, shorter), PbsRule::GapFill};

    // Rule 3: medium-duration jobs, smallest footprint first.
    std::vector<const Job*> medium;
    for (const Job* j : fit)
        if (j->remaining_s() < p.medium_T_s) medium.push_back(j);
    if (!medium.empty()) {
        auto footprint = [](const Job& a, const Job& b) {
            if (a.num_gpu != b.num_gpu) return a.num_gpu < b.num_gpu;
            return a.remaining_s() < b.remaining_s();
        };
        return PbsChoice{detail::best_by(medium, footprint), PbsRule::BlockingAvoidance};
    }

    // Rule 4.
    return PbsChoice{detail::best_by(fit, shorter), PbsRule::Fallback};
}

inline SchedulingDecision select_pbs(QueueView queue, const ClusterState& cluster, const PbsParams& p)
{
    auto choice = pbs_single_choice(queue, cluster, p);
    if (!choice) return Hold{};
    return Select{choice->job->id};
}

inline bool pair_feasible(const Job& a, const Job& b, const ClusterState& cluster, const PbsParams& p)
{
    if (a.id == b.id) throw ContractViolation("pair_feasible: a job cannot pair with itself");
    const int sum = a.num_gpu + b.num_gpu;
    if (sum > cluster.gpus_per_node() || !cluster.can_fit(sum)) return false;
    const double ta = a.remaining_s();
    const double tb = b.remaining_s();
    return std::abs(ta - tb) <= p.pair_delta * std::max(ta, tb);
}

/// Total work over total GPU-time of the two jobs.
inline double pair_score(const Job& a, const Job& b, PairGpuTimeMode mode = PairGpuTimeMode::SumOfJobs)
{
    const double work = a.iterations + b.iterations;
    const double gpu_time = mode == PairGpuTimeMode::SumOfJobs
                                ? a.num_gpu * a.remaining_s() + b.num_gpu * b.remaining_s()
                                : (a.num_gpu + b.num_gpu) * std::max(a.remaining_s(), b.remaining_s());
    if (!(gpu_time > 0.0)) throw ContractViolation("pair_score: zero GPU-time");
    return work / gpu_time;
}

struct ScoredPair {
    const Job* first;
    const Job* second;
    double score;
};

/// Best feasible pair among the first `candidate_cap` fitting jobs; ties go to
/// the lexicographically earliest pair in queue order.
inline std::optional<ScoredPair> best_pair(QueueView queue, const ClusterState& cluster, const PbsParams& p)
{
    auto fit = detail::fitting_jobs(queue, cluster);
    if (fit.size() > p.candidate_cap) fit.resize(p.candidate_cap);
    std::optional<ScoredPair> best;
    for (std::size_t i = 0; i < fit.size(); ++i) {
        for (std::size_t k = i + 1; k < fit.size(); ++k) {
            if (!pair_feasible(*fit[i], *fit[k], cluster, p)) continue;
            const double s = pair_score(*fit[i], *fit[k], p.pair_gpu_time_mode);
            if (!best || s > best->score) best = ScoredPair{fit[i], fit[k], s};
        }
    }
    return best;
}

/// The best pair competes against the job the single-job cascade would pick;
/// the pair wins only with a strictly higher score than that job's efficiency.
inline SchedulingDecision select_pbs_with_pairing(QueueView queue, const ClusterState& cluster, const PbsParams& p)
{
    auto single = pbs_single_choice(queue, cluster, p);
    if (!single) return Hold{};
    if (p.pairing_enabled) {
        if (auto pair = best_pair(queue, cluster, p); pair && pair->score > efficiency(*single->job))
            return SelectBatch{{pair->first->id, pair->second->id}};
    }
    return Select{single->job->id};
}

struct PbsPolicy {
    PbsParams params;

    std::string_view name() const { return "pbs"; }
    SchedulingDecision decide(QueueView queue, const ClusterState& cluster, double /*now*/) const
    {
        return select_pbs_with_pairing(queue, cluster, params);
    }
};

}  // namespace gpusched

#endif  // GPUSCHED_POLICY_PBS_HPP
