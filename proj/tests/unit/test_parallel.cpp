#include "dqpt/parallel.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <stdexcept>
#include <string>

using namespace dqpt;

TEST(ParallelMap, KeepsIndexOrder)
{
    for (unsigned workers : {1u, 2u, 7u, 64u}) {
        const auto out = parallel_map(100, workers, [](std::size_t i) { return static_cast<int>(i * i); });
        ASSERT_EQ(out.size(), 100u);
        for (std::size_t i = 0; i < out.size(); ++i) {
            EXPECT_EQ(out[i], static_cast<int>(i * i));
        }
    }
}

TEST(ParallelMap, EmptyAndZeroWorkers)
{
    EXPECT_TRUE(parallel_map(0, 4, [](std::size_t) { return 1; }).empty());
    EXPECT_EQ(parallel_map(3, 0, [](std::size_t i) { return i; }).size(), 3u);
}

TEST(ParallelMap, RethrowsLowestFailingIndex)
{
    for (unsigned workers : {1u, 4u}) {
        try {
            (void)parallel_map(50, workers, [](std::size_t i) {
                if (i == 13 || i == 40) {
                    throw std::runtime_error("task " + std::to_string(i));
                }
                return i;
            });
            FAIL() << "no exception";
        } catch (const std::runtime_error& e) {
            EXPECT_STREQ(e.what(), "task 13");
        }
    }
}

TEST(ParallelMap, RunsEveryTaskOnce)
{
    std::atomic<int> calls{0};
    (void)parallel_map(200, 5, [&](std::size_t) { return ++calls; });
    EXPECT_EQ(calls.load(), 200);
}
