#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "gpusched/core.hpp"

using namespace gpusched;
using gpusched::testing::cluster_with_free;

TEST(CanFit, EmptyClusterFitsFullNode)
{
    ClusterState c;
    EXPECT_TRUE(c.can_fit(8));
    EXPECT_TRUE(c.can_fit(64));
    EXPECT_FALSE(c.can_fit(65));
}

TEST(CanFit, HalfFreeEverywhereBlocksSingleNodeJob)
{
    const auto c = cluster_with_free({4, 4, 4, 4, 4, 4, 4, 4});
    EXPECT_EQ(c.free_gpus(), 32);
    EXPECT_FALSE(c.can_fit(8));
    EXPECT_TRUE(c.can_fit(16));
    EXPECT_TRUE(c.can_fit(4));
}

TEST(CanFit, RejectsNonPositive)
{
    ClusterState c;
    EXPECT_THROW(c.can_fit(0), ContractViolation);
}

TEST(Allocate, BestFitPicksTightestNode)
{
    auto c = cluster_with_free({8, 3, 5, 8, 8, 8, 8, 8});
    auto a = c.allocate(1, 3);
    ASSERT_TRUE(a);
    ASSERT_EQ(a->size(), 1u);
    EXPECT_EQ((*a)[0].node_id, 1);
    EXPECT_EQ(c.nodes()[1].free_gpus, 0);
}

TEST(Allocate, BestFitTieGoesToLowestId)
{
    auto c = cluster_with_free({8, 5, 5, 8, 8, 8, 8, 8});
    auto a = c.allocate(1, 4);
    ASSERT_TRUE(a);
    EXPECT_EQ((*a)[0].node_id, 1);
}

TEST(Allocate, SpanningJobTakesFullyFreeNodes)
{
    auto c = cluster_with_free({8, 8, 2, 8, 8, 8, 8, 8});
    auto a = c.allocate(1, 16);
    ASSERT_TRUE(a);
    ASSERT_EQ(a->size(), 2u);
    EXPECT_EQ((*a)[0].node_id, 0);
    EXPECT_EQ((*a)[1].node_id, 1);
    EXPECT_EQ((*a)[0].gpu_count + (*a)[1].gpu_count, 16);
    EXPECT_EQ(c.nodes()[2].free_gpus, 2);
}

TEST(Allocate, SpanningRemainderUsesPartialNodesLargestFirst)
{
    auto c = cluster_with_free({8, 3, 6, 2, 0, 0, 0, 0});
    auto a = c.allocate(1, 16);
    ASSERT_TRUE(a);
    ASSERT_EQ(a->size(), 3u);
    EXPECT_EQ((*a)[0].node_id, 0);
    EXPECT_EQ((*a)[1].node_id, 2);
    EXPECT_EQ((*a)[1].gpu_count, 6);
    EXPECT_EQ((*a)[2].node_id, 1);
    EXPECT_EQ((*a)[2].gpu_count, 2);
}

TEST(Allocate, DoesNotFitLeavesStateUntouched)
{
    auto c = cluster_with_free({4, 4, 4, 4, 4, 4, 4, 4});
    const auto before = c;
    EXPECT_FALSE(c.allocate(1, 8));
    EXPECT_EQ(c, before);
}

TEST(Allocate, DoubleAllocateIsContractViolation)
{
    ClusterState c;
    ASSERT_TRUE(c.allocate(1, 2));
    EXPECT_THROW(c.allocate(1, 2), ContractViolation);
}

TEST(Release, InverseOfAllocate)
{
    auto c = cluster_with_free({8, 3, 5, 8, 1, 8, 8, 6});
    const auto before = c;
    ASSERT_TRUE(c.allocate(7, 20));
    c.release(7);
    EXPECT_EQ(c, before);
}

TEST(Release, TwiceThrows)
{
    ClusterState c;
    ASSERT_TRUE(c.allocate(1, 4));
    c.release(1);
    EXPECT_THROW(c.release(1), ContractViolation);
}

TEST(Release, UnknownIdThrows)
{
    ClusterState c;
    EXPECT_THROW(c.release(42), ContractViolation);
}

TEST(AllocateBatch, AllOrNothingOnOneNode)
{
    auto c = cluster_with_free({8, 6, 8, 8, 8, 8, 8, 8});
    Job a = gpusched::testing::make_job(1, 2, 100);
    Job b = gpusched::testing::make_job(2, 4, 100);
    std::vector<const Job*> members{&a, &b};
    auto out = c.allocate_batch(members);
    ASSERT_TRUE(out);
    EXPECT_EQ((*out)[0][0].node_id, 1);
    EXPECT_EQ((*out)[1][0].node_id, 1);
    EXPECT_EQ(c.nodes()[1].free_gpus, 0);

    Job d = gpusched::testing::make_job(3, 6, 100);
    Job e = gpusched::testing::make_job(4, 4, 100);
    std::vector<const Job*> too_big{&d, &e};
    const auto before = c;
    EXPECT_FALSE(c.allocate_batch(too_big));
    EXPECT_EQ(c, before);
}

TEST(Fragmentation, Cases)
{
    EXPECT_DOUBLE_EQ(fragmentation(ClusterState{}), 0.0);
    EXPECT_DOUBLE_EQ(fragmentation(cluster_with_free({4, 4, 4, 4, 4, 4, 4, 4})), 1.0);
    EXPECT_DOUBLE_EQ(fragmentation(cluster_with_free({0, 8, 8, 8, 8, 8, 8, 8})), 0.0);
    EXPECT_DOUBLE_EQ(fragmentation(cluster_with_free({0, 0, 0, 0, 0, 0, 0, 0})), 0.0);
    EXPECT_DOUBLE_EQ(fragmentation(cluster_with_free({2, 8, 0, 0, 0, 0, 0, 0})), 0.2);
}

// Random allocate/release sequences keep per-node accounting consistent and
// never over-allocate.
TEST(ClusterProperty, RandomAllocateReleaseKeepsAccounting)
{
    std::mt19937_64 rng(7);
    const int sizes[] = {1, 2, 3, 4, 8, 16, 32};
    for (int trial = 0; trial < 50; ++trial) {
        ClusterState c;
        std::vector<JobId> live;
        JobId next = 0;
        for (int step = 0; step < 400; ++step) {
            if (!live.empty() && rng() % 3 == 0) {
                const std::size_t k = rng() % live.size();
                c.release(live[k]);
                live.erase(live.begin() + static_cast<std::ptrdiff_t>(k));
            } else {
                const int g = sizes[rng() % std::size(sizes)];
                const bool expect = c.can_fit(g);
                auto a = c.allocate(next, g);
                ASSERT_EQ(a.has_value(), expect);
                if (a) {
                    int sum = 0;
                    for (const auto& s : *a) sum += s.gpu_count;
                    ASSERT_EQ(sum, g);
                    if (g <= c.gpus_per_node()) {
                        ASSERT_EQ(a->size(), 1u);
                    }
                    live.push_back(next);
                }
                ++next;
            }
            int held = 0;
            for (const auto& [id, alloc] : c.allocations())
                for (const auto& s : alloc) held += s.gpu_count;
            for (const auto& n : c.nodes()) {
                ASSERT_GE(n.free_gpus, 0);
                ASSERT_LE(n.free_gpus, n.capacity);
            }
            ASSERT_EQ(held, c.busy_gpus());
        }
        for (JobId id : live) c.release(id);
        ASSERT_EQ(c, ClusterState{});
    }
}

// Monotone within the single-node range and within the spanning range; the
// boundary itself is not monotone (that is fragmentation).
TEST(ClusterProperty, CanFitMonotoneWithinEachRange)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> free(8);
        for (int& f : free) f = static_cast<int>(rng() % 9);
        const auto c = cluster_with_free(free);
        for (int g = 1; g < 64; ++g) {
            if (g == 8) continue;
            if (!c.can_fit(g)) {
                ASSERT_FALSE(c.can_fit(g + 1)) << "g=" << g;
            }
        }
    }
}

TEST(Job, WaitAndGpuSeconds)
{
    auto j = gpusched::testing::make_job(0, 4, 100.0, -1, 50.0);
    EXPECT_DOUBLE_EQ(j.wait_at(80.0), 30.0);
    EXPECT_DOUBLE_EQ(j.wait_at(10.0), 0.0);
    EXPECT_DOUBLE_EQ(j.gpu_seconds(), 400.0);
    EXPECT_DOUBLE_EQ(j.remaining_s(), 100.0);
}

TEST(JobType, ParseRoundTrip)
{
    for (auto t : {JobType::Inference, JobType::Training, JobType::Research})
        EXPECT_EQ(parse_job_type(to_string(t)), t);
    EXPECT_FALSE(parse_job_type("batch"));
}
