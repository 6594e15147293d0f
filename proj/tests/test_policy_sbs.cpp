#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "gpusched/engine.hpp"
#include "gpusched/policy_sbs.hpp"

using namespace gpusched;
using gpusched::testing::cluster_with_free;
using gpusched::testing::make_job;
using gpusched::testing::view;

constexpr double kTol = 1e-9;

namespace {

struct SingleOnly {
    std::string_view name() const { return "sbs-single"; }
    SchedulingDecision decide(QueueView q, const ClusterState& c, double) const { return select_sbs_single(q, c); }
};

bool has_batch(const std::vector<Batch>& batches, std::vector<JobId> ids)
{
    std::sort(ids.begin(), ids.end());
    for (const auto& b : batches) {
        std::vector<JobId> got;
        for (const Job* j : b) got.push_back(j->id);
        std::sort(got.begin(), got.end());
        if (got == ids) return true;
    }
    return false;
}

}  // namespace

TEST(SbsSimilarity, Values)
{
    const std::vector<Job> same{make_job(0, 2, 3600.0), make_job(1, 2, 3600.0)};
    EXPECT_NEAR(similarity(view(same)), 1.0, kTol);
    const std::vector<Job> times{make_job(0, 2, 3600.0), make_job(1, 2, 7200.0)};
    EXPECT_NEAR(similarity(view(times)), 0.8, kTol);
    const std::vector<Job> gpus{make_job(0, 1, 3600.0), make_job(1, 8, 3600.0)};
    EXPECT_NEAR(similarity(view(gpus)), 1.0 / 13.25, kTol);
}

TEST(SbsSimilarity, Errors)
{
    const std::vector<Job> mixed{make_job(0, 2, 3600.0, -1, 0.0, 0), make_job(1, 2, 3600.0, -1, 0.0, 1)};
    EXPECT_THROW(similarity(view(mixed)), ContractViolation);
    const std::vector<Job> one{make_job(0, 2, 3600.0)};
    EXPECT_THROW(similarity(view(one)), ContractViolation);
}

TEST(SbsEfficiency, Values)
{
    const std::vector<Job> one{make_job(0, 2, 3600.0, 7200.0)};
    EXPECT_NEAR(batch_efficiency(view(one)), 1.0, kTol);
    const std::vector<Job> two{make_job(0, 2, 3600.0, 7200.0), make_job(1, 2, 3600.0, 7200.0)};
    EXPECT_NEAR(batch_efficiency(view(two)), 1.0, kTol);
    const std::vector<Job> mixed{make_job(0, 2, 3600.0, 7200.0), make_job(1, 2, 1800.0, 1800.0)};
    EXPECT_NEAR(batch_efficiency(view(mixed)), 0.625, kTol);
}

TEST(SbsScore, Values)
{
    const std::vector<Job> two{make_job(0, 2, 3600.0, 7200.0), make_job(1, 2, 3600.0, 7200.0)};
    EXPECT_NEAR(batch_score(view(two)), 1.0, kTol);
    // Eff 0.625 and Sim 0.8 together.
    const std::vector<Job> b{make_job(0, 2, 3600.0, 7200.0), make_job(1, 2, 7200.0, 10800.0)};
    EXPECT_NEAR(batch_efficiency(view(b)), 0.625, kTol);
    EXPECT_NEAR(similarity(view(b)), 0.8, kTol);
    EXPECT_NEAR(batch_score(view(b)), 0.5, kTol);
}

TEST(SbsFormBatches, ThreeIdenticalJobsFormTriple)
{
    const std::vector<Job> jobs{make_job(0, 2, 3600.0), make_job(1, 2, 3600.0), make_job(2, 2, 3600.0)};
    const auto batches = form_batches(view(jobs), ClusterState{}, SbsParams{});
    EXPECT_TRUE(has_batch(batches, {0, 1, 2}));
    for (const auto& b : batches) EXPECT_NEAR(similarity(b), 1.0, kTol);
}

TEST(SbsFormBatches, DistinctFamiliesGiveNothing)
{
    std::vector<Job> jobs;
    for (int i = 0; i < 5; ++i) jobs.push_back(make_job(i, 2, 3600.0, -1, 0.0, i));
    EXPECT_TRUE(form_batches(view(jobs), ClusterState{}, SbsParams{}).empty());
}

TEST(SbsFormBatches, OverBudgetGivesNothing)
{
    const std::vector<Job> jobs{make_job(0, 8, 3600.0), make_job(1, 8, 3600.0)};
    EXPECT_TRUE(form_batches(view(jobs), ClusterState{}, SbsParams{}).empty());
}

TEST(SbsFormBatches, ThetaGatesDissimilarBatches)
{
    const std::vector<Job> jobs{make_job(0, 1, 3600.0), make_job(1, 7, 3600.0)};
    EXPECT_LT(similarity(view(jobs)), 0.5);
    EXPECT_TRUE(form_batches(view(jobs), ClusterState{}, SbsParams{}).empty());
    SbsParams loose;
    loose.theta = 0.0;
    EXPECT_TRUE(has_batch(form_batches(view(jobs), ClusterState{}, loose), {0, 1}));
}

TEST(SbsFormBatches, RespectsNodeRoomAndBatchCap)
{
    const auto cl = cluster_with_free({4, 0, 0, 0, 0, 0, 0, 0});
    std::vector<Job> jobs;
    for (int i = 0; i < 6; ++i) jobs.push_back(make_job(i, 1, 3600.0));
    for (const auto& b : form_batches(view(jobs), cl, SbsParams{})) {
        EXPECT_LE(b.size(), 4u);
        int g = 0;
        for (const Job* j : b) g += j->num_gpu;
        EXPECT_LE(g, 4);
    }
    const auto cl2 = cluster_with_free({3, 0, 0, 0, 0, 0, 0, 0});
    for (const auto& b : form_batches(view(jobs), cl2, SbsParams{})) EXPECT_LE(b.size(), 3u);
}

TEST(SbsSelect, HigherScoreBatchWins)
{
    const std::vector<Job> jobs{make_job(0, 2, 3600.0, 7200.0, 0.0, 1), make_job(1, 2, 7200.0, 10800.0, 0.0, 1),
                                make_job(2, 2, 3600.0, 7200.0, 0.0, 2), make_job(3, 2, 3600.0, 7200.0, 0.0, 2)};
    EXPECT_EQ(select_sbs(view(jobs), ClusterState{}, SbsParams{}), SchedulingDecision(SelectBatch{{2, 3}}));
}

TEST(SbsSelect, FallbackSingleScore)
{
    // scores 0.8 (1 GPU, eff 1) and 0.4 (4 GPU, eff 0.8)
    const std::vector<Job> jobs{make_job(0, 1, 3600.0, 3600.0, 0.0, 0), make_job(1, 4, 3600.0, 11520.0, 0.0, 1)};
    EXPECT_NEAR(sbs_single_score(jobs[0]), 0.8, kTol);
    EXPECT_NEAR(sbs_single_score(jobs[1]), 0.4, kTol);
    EXPECT_EQ(select_sbs(view(jobs), ClusterState{}, SbsParams{}), SchedulingDecision(Select{0}));
}

TEST(SbsSelect, HoldWhenNothingFits)
{
    const auto cl = cluster_with_free({1, 0, 0, 0, 0, 0, 0, 0});
    const std::vector<Job> jobs{make_job(0, 2, 3600.0), make_job(1, 2, 3600.0)};
    EXPECT_EQ(select_sbs(view(jobs), cl, SbsParams{}), SchedulingDecision(Hold{}));
    EXPECT_EQ(select_sbs({}, cl, SbsParams{}), SchedulingDecision(Hold{}));
}

// Without same-family pairs SBS reduces to its single-job fallback for the
// whole run.
TEST(SbsSelect, FamilyDisjointRunEqualsFallback)
{
    WorkloadSpec s;
    s.num_jobs = 400;
    s.seed = 17;
    auto wf = generate(s);
    for (auto& j : wf.jobs) j.model_family = static_cast<int>(j.id);
    const auto a = run(wf, SimConfig{}, SbsPolicy{});
    const auto b = run(wf, SimConfig{}, SingleOnly{});
    ASSERT_EQ(a.jobs.size(), b.jobs.size());
    for (std::size_t i = 0; i < a.jobs.size(); ++i) {
        ASSERT_EQ(a.jobs[i].start_s, b.jobs[i].start_s) << i;
        ASSERT_EQ(a.jobs[i].state, b.jobs[i].state) << i;
    }
    for (const auto& d : a.dispatches) ASSERT_EQ(d.jobs.size(), 1u);
}

TEST(SbsParams, Validation)
{
    SbsParams p;
    p.max_batch_size = 1;
    EXPECT_THROW(validate(p), ValidationError);
    SbsParams q;
    q.theta = 1.5;
    EXPECT_THROW(validate(q), ValidationError);
    EXPECT_NO_THROW(validate(SbsParams{}));
}
