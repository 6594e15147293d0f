#pragma once

#include <vector>

#include "gpusched/core.hpp"
#include "gpusched/engine.hpp"
#include "gpusched/workload.hpp"

namespace gpusched::testing {

inline Job make_job(JobId id, int num_gpu, double duration_s, double iterations = -1.0, double arrival_s = 0.0,
                    int family = 0)
{
    Job j;
    j.id = id;
    j.num_gpu = num_gpu;
    j.duration_s = duration_s;
    j.iterations = iterations < 0.0 ? duration_s : iterations;
    j.arrival_s = arrival_s;
    j.model_family = family;
    return j;
}

inline std::vector<const Job*> view(const std::vector<Job>& jobs)
{
    std::vector<const Job*> out;
    for (const auto& j : jobs) out.push_back(&j);
    return out;
}

inline constexpr JobId kFillerBase = 1'000'000;

/// Cluster where node i has exactly free[i] free GPUs, occupied by filler jobs
/// with ids kFillerBase + i.
inline ClusterState cluster_with_free(const std::vector<int>& free, int gpus_per_node = 8)
{
    ClusterState c(static_cast<int>(free.size()), gpus_per_node);
    for (std::size_t i = 0; i < free.size(); ++i) {
        const int busy = gpus_per_node - free[i];
        if (busy > 0) c.allocate_on_node(kFillerBase + static_cast<JobId>(i), static_cast<int>(i), busy);
    }
    return c;
}

inline WorkloadFile workload_of(std::vector<Job> jobs)
{
    WorkloadFile wf;
    wf.spec.num_jobs = jobs.size();
    for (std::size_t i = 0; i < jobs.size(); ++i) jobs[i].id = static_cast<JobId>(i);
    wf.jobs = std::move(jobs);
    return wf;
}

}  // namespace gpusched::testing
