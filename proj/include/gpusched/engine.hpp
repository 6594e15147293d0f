#pragma once
#ifndef GPUSCHED_ENGINE_HPP
#define GPUSCHED_ENGINE_HPP

#include <cmath>
#include <concepts>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "gpusched/core.hpp"
#include "gpusched/workload.hpp"

namespace gpusched {

// ---------------------------------------------------------------------------
// Decisions

struct Hold {
    bool operator==(const Hold&) const = default;
};
struct Select {
    JobId id;
    bool operator==(const Select&) const = default;
};
struct SelectBatch {
    std::vector<JobId> ids;
    bool operator==(const SelectBatch&) const = default;
};

using SchedulingDecision = std::variant<Hold, Select, SelectBatch>;

/// Ready jobs in arrival order (ties by id).
using QueueView = std::span<const Job* const>;

template <typename P>
concept SchedulingPolicy = requires(const P& p, QueueView q, const ClusterState& c, double now) {
    { p.decide(q, c, now) } -> std::convertible_to<SchedulingDecision>;
    { p.name() } -> std::convertible_to<std::string_view>;
};

/// Policies restricted to nominating the queue head (FIFO) expose
/// `head_of_line_only()`; the dispatch loop enforces it.
template <typename P>
bool head_of_line_only(const P& p)
{
    if constexpr (requires { { p.head_of_line_only() } -> std::convertible_to<bool>; })
        return p.head_of_line_only();
    else
        return false;
}

// ---------------------------------------------------------------------------
// Events

enum class EventKind { Completion = 0, Arrival = 1 };

struct SimEvent {
    double time_s = 0.0;
    EventKind kind = EventKind::Arrival;
    JobId job_id = 0;

    /// Total order: time, completions before arrivals, then job id.
    friend bool operator<(const SimEvent& a, const SimEvent& b)
    {
        if (a.time_s != b.time_s) return a.time_s < b.time_s;
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.job_id < b.job_id;
    }
};

class EventQueue {
public:
    void push(SimEvent e) { heap_.push(e); }
    bool empty() const { return heap_.empty(); }
    const SimEvent& top() const { return heap_.top(); }
    SimEvent pop()
    {
        SimEvent e = heap_.top();
        heap_.pop();
        return e;
    }
    std::size_t size() const { return heap_.size(); }

private:
    struct Later {
        bool operator()(const SimEvent& a, const SimEvent& b) const { return b < a; }
    };
    std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
};

// ---------------------------------------------------------------------------
// Configuration & trace

struct SimConfig {
    /// +infinity runs until the event queue drains.
    double horizon_s = 172800.0;
    int nodes = 8;
    int gpus_per_node = 8;
};

inline void validate(const SimConfig& c)
{
    if (!(c.horizon_s > 0.0)) throw ValidationError("horizon_s must be > 0");
    if (c.nodes < 1 || c.gpus_per_node < 1) throw ValidationError("cluster shape must be positive");
}

struct Dispatch {
    double time_s = 0.0;
    std::vector<JobId> jobs;
    std::vector<Allocation> allocations;
};

/// Cluster observation taken after the dispatch loop at each event instant.
struct TracePoint {
    double time_s = 0.0;
    int queue_length = 0;
    int running_jobs = 0;
    int busy_gpus = 0;
    double fragmentation = 0.0;
};

struct RunTrace {
    std::string scheduler;
    SimConfig config;
    int total_gpus = 0;
    std::vector<Job> jobs;  // final per-job records, indexed by id
    std::vector<TracePoint> series;
    std::vector<Dispatch> dispatches;
    std::size_t events_processed = 0;
    /// Instant the run stopped: last completion when every job finished,
    /// otherwise the horizon (or the last event when the horizon is infinite).
    double end_s = 0.0;
};

// ---------------------------------------------------------------------------
// Dispatch loop

template <SchedulingPolicy P>
struct DispatchLoop {
    const P& policy;

    /// Asks the policy for decisions until it holds or the queue empties.
    /// Dispatched jobs are removed from `queue`; `cluster` holds their GPUs.
    std::vector<Dispatch> operator()(std::vector<const Job*>& queue, ClusterState& cluster, double now) const
    {
        std::vector<Dispatch> out;
        while (!queue.empty()) {
            const SchedulingDecision decision = policy.decide(QueueView(queue), cluster, now);
            if (std::holds_alternative<Hold>(decision)) break;

            std::vector<JobId> ids;
            if (const auto* s = std::get_if<Select>(&decision)) ids.push_back(s->id);
            else ids = std::get<SelectBatch>(decision).ids;
            if (ids.empty()) throw ContractViolation(std::string(policy.name()) + ": empty batch");

            std::vector<const Job*> members;
            members.reserve(ids.size());
            for (JobId id : ids) {
                auto it = std::find_if(queue.begin(), queue.end(), [id](const Job* j) { return j->id == id; });
                if (it == queue.end())
                    throw ContractViolation(std::string(policy.name()) + ": selected job " + std::to_string(id) +
                                            " is not in the ready queue");
                if (std::find(members.begin(), members.end(), *it) != members.end())
                    throw ContractViolation(std::string(policy.name()) + ": duplicate job in batch");
                members.push_back(*it);
            }
            if (head_of_line_only(policy) && (members.size() != 1 || members.front() != queue.front()))
                throw ContractViolation(std::string(policy.name()) + ": may only nominate the queue head");

            Dispatch d;
            d.time_s = now;
            d.jobs = ids;
            if (members.size() == 1) {
                auto alloc = cluster.allocate(*members.front());
                if (!alloc)
                    throw ContractViolation(std::string(policy.name()) + ": job " + std::to_string(ids.front()) +
                                            " does not fit");
                d.allocations.push_back(std::move(*alloc));
            } else {
                auto allocs = cluster.allocate_batch(members);
                if (!allocs) throw ContractViolation(std::string(policy.name()) + ": batch does not fit on one node");
                d.allocations = std::move(*allocs);
            }
            std::erase_if(queue, [&](const Job* j) {
                return std::find(members.begin(), members.end(), j) != members.end();
            });
            out.push_back(std::move(d));
        }
        return out;
    }
};

template <SchedulingPolicy P>
std::vector<Dispatch> dispatch_loop(std::vector<const Job*>& queue, ClusterState& cluster, const P& policy,
                                    double now)
{
    return DispatchLoop<P>{policy}(queue, cluster, now);
}

// ---------------------------------------------------------------------------
// Engine

/// Callback invoked after each event instant's dispatch loop. Tests use it to
/// check invariants at every step.
struct NullObserver {
    void operator()(double /*now*/, const ClusterState&, std::span<const Job>, std::span<const Job* const>) const {}
};

template <SchedulingPolicy P, typename Observer = NullObserver>
RunTrace run(const WorkloadFile& workload, const SimConfig& config, const P& policy, Observer&& observe = {})
{
    validate(config);
    validate_jobs(workload.jobs);

    RunTrace trace;
    trace.scheduler = std::string(policy.name());
    trace.config = config;
    trace.jobs = workload.jobs;
    for (Job& j : trace.jobs) {
        j.state = JobState::Queued;
        j.start_s.reset();
        j.end_s.reset();
    }

    ClusterState cluster(config.nodes, config.gpus_per_node);
    trace.total_gpus = cluster.total_gpus();

    EventQueue events;
    for (const Job& j : trace.jobs) events.push({j.arrival_s, EventKind::Arrival, j.id});

    std::vector<const Job*> ready;
    auto job_at = [&](JobId id) -> Job& { return trace.jobs[static_cast<std::size_t>(id)]; };
    double last_time = trace.jobs.empty() ? 0.0 : trace.jobs.front().arrival_s;
    double last_completion = last_time;

    while (!events.empty() && events.top().time_s <= config.horizon_s) {
        const double now = events.top().time_s;
        if (now < last_time) throw ContractViolation("engine: event time went backwards");
        last_time = now;

        while (!events.empty() && events.top().time_s == now) {
            const SimEvent e = events.pop();
            ++trace.events_processed;
            Job& job = job_at(e.job_id);
            if (e.kind == EventKind::Completion) {
                cluster.release(job.id);
                job.state = JobState::Completed;
                job.end_s = now;
                last_completion = now;
            } else {
                auto pos = std::upper_bound(ready.begin(), ready.end(), &job,
                                            [](const Job* a, const Job* b) { return arrives_before(*a, *b); });
                ready.insert(pos, &job);
            }
        }

        for (Dispatch& d : dispatch_loop(ready, cluster, policy, now)) {
            for (JobId id : d.jobs) {
                Job& job = job_at(id);
                job.state = JobState::Running;
                job.start_s = now;
                events.push({now + job.duration_s, EventKind::Completion, id});
            }
            trace.dispatches.push_back(std::move(d));
        }

        int running = 0;
        for (const Job& j : trace.jobs) running += j.state == JobState::Running ? 1 : 0;
        trace.series.push_back({now, static_cast<int>(ready.size()), running, cluster.busy_gpus(),
                                fragmentation(cluster)});
        observe(now, cluster, std::span<const Job>(trace.jobs), QueueView(ready));
    }

    bool unfinished = false;
    for (Job& j : trace.jobs) {
        if (j.state == JobState::Completed) continue;
        unfinished = true;
        j.state = JobState::Failed;
    }
    if (!unfinished) trace.end_s = last_completion;
    else trace.end_s = std::isfinite(config.horizon_s) ? config.horizon_s : last_time;
    return trace;
}

}  // namespace gpusched

#endif  // GPUSCHED_ENGINE_HPP
