#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "gpusched/engine.hpp"
#include "gpusched/metrics.hpp"
#include "gpusched/policy.hpp"

using namespace gpusched;
using gpusched::testing::cluster_with_free;
using gpusched::testing::make_job;
using gpusched::testing::view;
using gpusched::testing::workload_of;

namespace {

struct RogueSelect {
    JobId id;
    std::string_view name() const { return "rogue"; }
    SchedulingDecision decide(QueueView, const ClusterState&, double) const { return Select{id}; }
};

struct FifoCheating {
    std::string_view name() const { return "cheat"; }
    bool head_of_line_only() const { return true; }
    SchedulingDecision decide(QueueView q, const ClusterState&, double) const { return Select{q.back()->id}; }
};

}  // namespace

class EveryPolicy : public ::testing::TestWithParam<std::string_view> {};

TEST_P(EveryPolicy, EmptyWorkload)
{
    const auto t = run(workload_of({}), SimConfig{}, make_policy(GetParam()));
    const auto m = compute_report(t);
    EXPECT_EQ(m.completed, 0u);
    EXPECT_EQ(m.gpu_utilization, 0.0);
    EXPECT_EQ(m.makespan_s, 0.0);
    EXPECT_EQ(t.events_processed, 0u);
}

TEST_P(EveryPolicy, SingleJob)
{
    const auto t = run(workload_of({make_job(0, 1, 600.0)}), SimConfig{}, make_policy(GetParam()));
    const auto m = compute_report(t);
    ASSERT_EQ(m.completed, 1u);
    EXPECT_EQ(m.avg_wait_s, 0.0);
    EXPECT_EQ(m.avg_jct_s, 600.0);
    EXPECT_NEAR(m.gpu_utilization, 1.0 / 64.0, 1e-12);
    EXPECT_EQ(m.makespan_s, 600.0);
}

TEST_P(EveryPolicy, FullClusterJobsSerialize)
{
    const auto t = run(workload_of({make_job(0, 64, 3600.0), make_job(1, 64, 3600.0)}), SimConfig{},
                       make_policy(GetParam()));
    ASSERT_TRUE(t.jobs[0].start_s && t.jobs[1].start_s);
    EXPECT_EQ(*t.jobs[0].start_s, 0.0);
    EXPECT_EQ(*t.jobs[1].start_s, 3600.0);
    EXPECT_NEAR(compute_report(t).gpu_utilization, 1.0, 1e-12);
}

INSTANTIATE_TEST_SUITE_P(All, EveryPolicy, ::testing::ValuesIn(kSchedulerNames), [](const auto& info) {
    std::string s(info.param);
    for (char& c : s)
        if (c == '-') c = '_';
    return s;
});

TEST(DispatchLoop, FifoHoldsBehindBlockedHead)
{
    auto c = cluster_with_free({4, 0, 0, 0, 0, 0, 0, 0});
    std::vector<Job> jobs{make_job(0, 8, 100), make_job(1, 1, 100)};
    auto q = view(jobs);
    const auto d = dispatch_loop(q, c, make_policy("fifo"), 0.0);
    EXPECT_TRUE(d.empty());
    EXPECT_EQ(q.size(), 2u);
}

TEST(DispatchLoop, SkipCapablePoliciesBackfill)
{
    for (auto name : {"sjf", "shortest", "shortest-gpu", "hps", "pbs", "sbs"}) {
        auto c = cluster_with_free({4, 0, 0, 0, 0, 0, 0, 0});
        std::vector<Job> jobs{make_job(0, 8, 100), make_job(1, 1, 100, -1, 0.0, 1)};
        auto q = view(jobs);
        const auto d = dispatch_loop(q, c, make_policy(name), 0.0);
        ASSERT_EQ(d.size(), 1u) << name;
        EXPECT_EQ(d[0].jobs, std::vector<JobId>{1}) << name;
        ASSERT_EQ(q.size(), 1u);
        EXPECT_EQ(q[0]->id, 0);
    }
}

TEST(DispatchLoop, EmptyQueueNoDispatch)
{
    ClusterState c;
    std::vector<const Job*> q;
    EXPECT_TRUE(dispatch_loop(q, c, make_policy("hps"), 0.0).empty());
}

TEST(DispatchLoop, RunsUntilHold)
{
    ClusterState c;
    std::vector<Job> jobs;
    for (int i = 0; i < 10; ++i) jobs.push_back(make_job(i, 8, 100));
    auto q = view(jobs);
    const auto d = dispatch_loop(q, c, make_policy("fifo"), 0.0);
    EXPECT_EQ(d.size(), 8u);
    EXPECT_EQ(q.size(), 2u);
    EXPECT_EQ(c.free_gpus(), 0);
}

TEST(DispatchLoop, UnknownIdIsContractViolation)
{
    ClusterState c;
    std::vector<Job> jobs{make_job(0, 1, 100)};
    auto q = view(jobs);
    EXPECT_THROW(dispatch_loop(q, c, RogueSelect{77}, 0.0), ContractViolation);
}

TEST(DispatchLoop, NonFittingPickIsContractViolation)
{
    auto c = cluster_with_free({2, 0, 0, 0, 0, 0, 0, 0});
    std::vector<Job> jobs{make_job(0, 4, 100)};
    auto q = view(jobs);
    EXPECT_THROW(dispatch_loop(q, c, RogueSelect{0}, 0.0), ContractViolation);
}

TEST(DispatchLoop, HeadOnlyPolicyMayNotSkip)
{
    ClusterState c;
    std::vector<Job> jobs{make_job(0, 1, 100), make_job(1, 1, 100)};
    auto q = view(jobs);
    EXPECT_THROW(dispatch_loop(q, c, FifoCheating{}, 0.0), ContractViolation);
}

TEST(Engine, ContractViolationPropagatesFromRun)
{
    const auto wf = workload_of({make_job(0, 1, 100)});
    EXPECT_THROW(run(wf, SimConfig{}, RogueSelect{5}), ContractViolation);
}

TEST(EventOrder, CompletionBeforeArrivalAtSameInstant)
{
    EventQueue q;
    q.push({10.0, EventKind::Arrival, 1});
    q.push({10.0, EventKind::Completion, 9});
    q.push({5.0, EventKind::Arrival, 3});
    q.push({10.0, EventKind::Arrival, 0});
    EXPECT_EQ(q.pop().job_id, 3);
    const auto a = q.pop();
    EXPECT_EQ(a.kind, EventKind::Completion);
    EXPECT_EQ(q.pop().job_id, 0);
    EXPECT_EQ(q.pop().job_id, 1);
    EXPECT_TRUE(q.empty());
}

// A job arriving exactly when capacity frees up starts at that instant.
TEST(Engine, FreedCapacityUsedAtSameInstant)
{
    const auto wf = workload_of({make_job(0, 64, 100.0, -1, 0.0), make_job(1, 64, 50.0, -1, 100.0)});
    const auto t = run(wf, SimConfig{}, make_policy("fifo"));
    EXPECT_EQ(*t.jobs[1].start_s, 100.0);
    EXPECT_EQ(*t.jobs[1].end_s, 150.0);
}

TEST(Engine, HorizonMarksUnfinishedFailed)
{
    SimConfig cfg;
    cfg.horizon_s = 1000.0;
    const auto wf = workload_of({make_job(0, 64, 900.0), make_job(1, 64, 900.0)});
    const auto t = run(wf, cfg, make_policy("fifo"));
    EXPECT_EQ(t.jobs[0].state, JobState::Completed);
    EXPECT_EQ(t.jobs[1].state, JobState::Failed);
    EXPECT_TRUE(t.jobs[1].start_s);
    EXPECT_EQ(t.end_s, 1000.0);
    const auto m = compute_report(t);
    EXPECT_EQ(m.completed, 1u);
    EXPECT_EQ(m.failed, 1u);
    EXPECT_NEAR(m.gpu_utilization, 1.0, 1e-12);
}

TEST(Engine, InfiniteHorizonDrainsQueue)
{
    SimConfig cfg;
    cfg.horizon_s = std::numeric_limits<double>::infinity();
    WorkloadSpec s;
    s.num_jobs = 150;
    s.seed = 1;
    const auto t = run(generate(s), cfg, make_policy("sjf"));
    for (const auto& j : t.jobs) EXPECT_EQ(j.state, JobState::Completed);
}

TEST(Engine, DeterministicReplay)
{
    WorkloadSpec s;
    s.num_jobs = 300;
    s.seed = 4;
    const auto wf = generate(s);
    for (auto name : kSchedulerNames) {
        const auto a = compute_report(run(wf, SimConfig{}, make_policy(name)));
        const auto b = compute_report(run(wf, SimConfig{}, make_policy(name)));
        EXPECT_EQ(a, b) << name;
    }
}

TEST(Engine, BatchDispatchStartsMembersTogether)
{
    std::vector<Job> jobs;
    for (int i = 0; i < 3; ++i) jobs.push_back(make_job(i, 2, 3600.0, -1, 0.0, 5));
    const auto t = run(workload_of(jobs), SimConfig{}, make_policy("sbs"));
    ASSERT_FALSE(t.dispatches.empty());
    EXPECT_GE(t.dispatches[0].jobs.size(), 2u);
    for (const auto& a : t.dispatches[0].allocations) EXPECT_EQ(a[0].node_id, t.dispatches[0].allocations[0][0].node_id);
}
