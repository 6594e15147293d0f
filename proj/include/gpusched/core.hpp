#pragma once
#ifndef GPUSCHED_CORE_HPP
#define GPUSCHED_CORE_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gpusched {

using JobId = std::int64_t;

/// Raised when a caller breaks an operation's precondition (unknown job id,
/// policy nominating a job that is not queued, negative time, ...).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Raised for invalid user-supplied data (specs, workload files, config).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class JobType { Inference, Training, Research };
enum class JobState { Queued, Running, Completed, Failed };

inline std::string_view to_string(JobType t)
{
    switch (t) {
    case JobType::Inference: return "inference";
    case JobType::Training: return "training";
    case JobType::Research: return "research";
    }
    return "?";
}

inline std::optional<JobType> parse_job_type(std::string_view s)
{
    if (s == "inference") return JobType::Inference;
    if (s == "training") return JobType::Training;
    if (s == "research") return JobType::Research;
    return std::nullopt;
}

inline std::string_view to_string(JobState s)
{
    switch (s) {
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Completed: return "completed";
    case JobState::Failed: return "failed";
    }
    return "?";
}

struct Job {
    JobId id = 0;
    double arrival_s = 0.0;
    JobType type = JobType::Inference;
    int num_gpu = 1;
    double duration_s = 0.0;
    double iterations = 0.0;
    int model_family = 0;

    JobState state = JobState::Queued;
    std::optional<double> start_s;
    std::optional<double> end_s;

    /// Non-preemptive model: a queued job's remaining time is its full duration.
    double remaining_s() const { return duration_s; }
    double wait_at(double now) const { return std::max(0.0, now - arrival_s); }
    double gpu_seconds() const { return static_cast<double>(num_gpu) * duration_s; }
};

/// Queue order used by every policy for tie breaking: earlier arrival, then lower id.
inline bool arrives_before(const Job& a, const Job& b)
{
    if (a.arrival_s != b.arrival_s) return a.arrival_s < b.arrival_s;
    return a.id < b.id;
}

struct Node {
    int node_id = 0;
    int capacity = 8;
    int free_gpus = 8;

    bool fully_free() const { return free_gpus == capacity; }
    bool partially_occupied() const { return free_gpus > 0 && free_gpus < capacity; }
    bool operator==(const Node&) const = default;
};

struct NodeShare {
    int node_id = 0;
    int gpu_count = 0;
    bool operator==(const NodeShare&) const = default;
};

using Allocation = std::vector<NodeShare>;

/// Node inventory plus the job -> slots map. Jobs with at most one node's worth
/// of GPUs are placed on a single node (best fit); larger jobs span nodes.
/// Every allocation is all-or-nothing and released in one step.
class ClusterState {
public:
    explicit ClusterState(int num_nodes = 8, int gpus_per_node = 8)
        : gpus_per_node_(gpus_per_node)
    {
        if (num_nodes < 1 || gpus_per_node < 1)
            throw ValidationError("cluster shape must have at least one node and one GPU per node");
        nodes_.reserve(static_cast<std::size_t>(num_nodes));
        for (int i = 0; i < num_nodes; ++i) nodes_.push_back(Node{i, gpus_per_node, gpus_per_node});
    }

    std::span<const Node> nodes() const { return nodes_; }
    const std::map<JobId, Allocation>& allocations() const { return allocations_; }
    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    int gpus_per_node() const { return gpus_per_node_; }
    int total_gpus() const { return num_nodes() * gpus_per_node_; }

    int free_gpus() const
    {
        return std::accumulate(nodes_.begin(), nodes_.end(), 0,
                               [](int acc, const Node& n) { return acc + n.free_gpus; });
    }
    int busy_gpus() const { return total_gpus() - free_gpus(); }
    bool holds(JobId id) const { return allocations_.contains(id); }

    /// Largest free count on any single node.
    int max_node_free() const
    {
        int best = 0;
        for (const auto& n : nodes_) best = std::max(best, n.free_gpus);
        return best;
    }

    bool can_fit(int num_gpu) const
    {
        if (num_gpu < 1) throw ContractViolation("can_fit: num_gpu must be >= 1");
        if (num_gpu <= gpus_per_node_) return max_node_free() >= num_gpu;
        return free_gpus() >= num_gpu;
    }

    /// Smallest sufficient free count, ties to the lowest node id.
    std::optional<int> best_fit_node(int num_gpu) const
    {
        std::optional<int> best;
        for (const auto& n : nodes_) {
            if (n.free_gpus < num_gpu) continue;
            if (!best || n.free_gpus < nodes_[static_cast<std::size_t>(*best)].free_gpus) best = n.node_id;
        }
        return best;
    }

    /// Returns std::nullopt ("does not fit") without touching state when the
    /// request cannot be satisfied.
    std::optional<Allocation> allocate(JobId id, int num_gpu)
    {
        if (num_gpu < 1) throw ContractViolation("allocate: num_gpu must be >= 1");
        if (holds(id)) throw ContractViolation("allocate: job " + std::to_string(id) + " already holds GPUs");
        if (!can_fit(num_gpu)) return std::nullopt;

        Allocation alloc;
        if (num_gpu <= gpus_per_node_) {
            alloc.push_back({*best_fit_node(num_gpu), num_gpu});
        } else {
            alloc = spanning_plan(num_gpu);
        }
        commit(id, alloc);
        return alloc;
    }

    std::optional<Allocation> allocate(const Job& job) { return allocate(job.id, job.num_gpu); }

    /// Explicit placement on one node, bypassing best fit.
    std::optional<Allocation> allocate_on_node(JobId id, int node_id, int num_gpu)
    {
        if (num_gpu < 1) throw ContractViolation("allocate_on_node: num_gpu must be >= 1");
        if (node_id < 0 || node_id >= num_nodes()) throw ContractViolation("allocate_on_node: no such node");
        if (holds(id)) throw ContractViolation("allocate_on_node: job " + std::to_string(id) + " already holds GPUs");
        if (nodes_[static_cast<std::size_t>(node_id)].free_gpus < num_gpu) return std::nullopt;
        Allocation alloc{{node_id, num_gpu}};
        commit(id, alloc);
        return alloc;
    }

    /// Places every member on one node (the best fit for the summed demand).
    /// All members start or none do.
    std::optional<std::vector<Allocation>> allocate_batch(std::span<const Job* const> members)
    {
        if (members.empty()) throw ContractViolation("allocate_batch: empty batch");
        int total = 0;
        std::vector<JobId> seen;
        for (const Job* j : members) {
            if (j->num_gpu < 1) throw ContractViolation("allocate_batch: num_gpu must be >= 1");
            if (holds(j->id) || std::find(seen.begin(), seen.end(), j->id) != seen.end())
                throw ContractViolation("allocate_batch: duplicate or running job " + std::to_string(j->id));
            seen.push_back(j->id);
            total += j->num_gpu;
        }
        if (total > gpus_per_node_) return std::nullopt;
        auto node = best_fit_node(total);
        if (!node) return std::nullopt;

        std::vector<Allocation> out;
        out.reserve(members.size());
        for (const Job* j : members) {
            Allocation a{{*node, j->num_gpu}};
            commit(j->id, a);
            out.push_back(std::move(a));
        }
        return out;
    }

    void release(JobId id)
    {
        auto it = allocations_.find(id);
        if (it == allocations_.end())
            throw ContractViolation("release: job " + std::to_string(id) + " holds no allocation");
        for (const auto& share : it->second) nodes_[static_cast<std::size_t>(share.node_id)].free_gpus += share.gpu_count;
        allocations_.erase(it);
    }

    bool operator==(const ClusterState&) const = default;

private:
    // Fully free nodes first (lowest id), then partial nodes by descending free
    // count for the remainder.
    Allocation spanning_plan(int num_gpu) const
    {
        Allocation plan;
        std::vector<bool> used(nodes_.size(), false);
        int remaining = num_gpu;
        for (const auto& n : nodes_) {
            if (remaining < gpus_per_node_) break;
            if (!n.fully_free()) continue;
            plan.push_back({n.node_id, n.capacity});
            used[static_cast<std::size_t>(n.node_id)] = true;
            remaining -= n.capacity;
        }
        std::vector<const Node*> rest;
        for (const auto& n : nodes_)
            if (!used[static_cast<std::size_t>(n.node_id)] && n.free_gpus > 0) rest.push_back(&n);
        std::stable_sort(rest.begin(), rest.end(), [](const Node* a, const Node* b) {
            if (a->partially_occupied() != b->partially_occupied()) return a->partially_occupied();
            return a->free_gpus > b->free_gpus;
        });
        for (const Node* n : rest) {
            if (remaining == 0) break;
            int take = std::min(remaining, n->free_gpus);
            plan.push_back({n->node_id, take});
            remaining -= take;
        }
        return plan;
    }

    void commit(JobId id, const Allocation& alloc)
    {
        for (const auto& share : alloc) nodes_[static_cast<std::size_t>(share.node_id)].free_gpus -= share.gpu_count;
        allocations_.emplace(id, alloc);
    }

    int gpus_per_node_;
    std::vector<Node> nodes_;
    std::map<JobId, Allocation> allocations_;
};

/// Free GPUs sitting on partially occupied nodes, as a fraction of all free
/// GPUs. Zero when nothing is free.
inline double fragmentation(const ClusterState& cluster)
{
    int free_total = 0;
    int stranded = 0;
    for (const auto& n : cluster.nodes()) {
        free_total += n.free_gpus;
        if (n.partially_occupied()) stranded += n.free_gpus;
    }
    return free_total == 0 ? 0.0 : static_cast<double>(stranded) / free_total;
}

}  // namespace gpusched

#endif  // GPUSCHED_CORE_HPP
