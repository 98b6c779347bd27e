#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "wtb/environment.hpp"
#include "wtb/instances.hpp"
#include "wtb/oracle.hpp"

using namespace wtb;

namespace {

// Random instance with table losses over every reachable tally.
WtbInstance random_instance(std::size_t K, std::size_t m, Rng& rng) {
    std::vector<std::vector<double>> w(K, std::vector<double>(m));
    std::vector<LossFunction> h;
    for (std::size_t x = 0; x < K; ++x) {
        for (auto& v : w[x]) v = 0.05 + 0.95 * uniform01(rng);
        LossFunction f;
        for_each_context_tally(w[x], [&](double z) { f.add_entry(z, uniform01(rng)); });
        // Ties between tallies are possible only by coincidence; the table
        // keeps the last value, which is still a valid loss function.
        h.push_back(f);
    }
    return WtbInstance(m, std::move(w), std::move(h), FeedbackLaw::bernoulli());
}

}  // namespace

TEST(Oracle, TwoActionMemoryTwoTinyCase) {
    const auto inst = make_synthetic_unweighted(2, 2);
    const auto dp = optimal_value_dp(inst, 5);
    EXPECT_NEAR(dp.value, 1.9, 1e-12);
    EXPECT_NEAR(optimal_value_bruteforce(inst, 5).value, 1.9, 1e-12);
    EXPECT_EQ(dp.optimal_sequence, (std::vector<Action>{0, 0, 0, 0, 0}));
}

TEST(Oracle, DpMatchesBruteForceOnRandomInstances) {
    Rng rng = make_rng(5, "oracle", 0);
    for (int i = 0; i < 60; ++i) {
        const std::size_t K = 1 + static_cast<std::size_t>(uniform01(rng) * 3);
        const std::size_t m = 1 + static_cast<std::size_t>(uniform01(rng) * 3);
        const std::size_t T = 1 + static_cast<std::size_t>(uniform01(rng) * 8);
        const auto inst = random_instance(K, m, rng);
        const auto dp = optimal_value_dp(inst, T);
        const auto bf = optimal_value_bruteforce(inst, T);
        ASSERT_NEAR(dp.value, bf.value, 1e-12) << "K=" << K << " m=" << m << " T=" << T;
        // The DP's sequence attains its value and is the lexicographic first optimum.
        ASSERT_NEAR(sequence_loss(inst, dp.optimal_sequence), dp.value, 1e-12);
        ASSERT_EQ(dp.optimal_sequence, bf.optimal_sequence);
    }
}

TEST(Oracle, CurveIsPrefixOptimal) {
    const auto inst = make_synthetic_alpha(3, 3);
    const auto curve = optimal_value_curve(inst, 7);
    for (std::size_t t = 1; t <= 7; ++t) {
        EXPECT_NEAR(curve[t - 1], optimal_value_bruteforce(inst, t).value, 1e-12);
    }
}

TEST(Oracle, MemoryOneIsSumOfMinima) {
    const auto inst = make_synthetic_unweighted(4, 1);
    EXPECT_NEAR(optimal_value_dp(inst, 100).value, 35.0, 1e-9);
}

TEST(Oracle, Prop1CycleIsOptimalAtSmallHorizon) {
    const auto inst = make_prop1(3, {1, 0});
    const auto bf = optimal_value_bruteforce(inst, 9);
    EXPECT_NEAR(optimal_value_dp(inst, 9).value, bf.value, 1e-12);
    // cycle (x1, x2, x2) repeated: one zero-loss step per period after the first
    std::vector<Action> seq;
    for (int r = 0; r < 3; ++r) {
        for (Action a : prop1_cycle({1, 0})) seq.push_back(a);
    }
    EXPECT_EQ(prop1_cycle({1, 0}), (std::vector<Action>{0, 1, 1}));
    EXPECT_NEAR(sequence_loss(inst, seq), 9.0 - 3.0, 1e-12);
    EXPECT_LE(bf.value, 6.0 + 1e-12);
}

TEST(Oracle, BudgetsRaiseCapacityError) {
    const auto inst = make_synthetic_unweighted(5, 8);
    EXPECT_THROW(optimal_value_dp(inst, 1000000), CapacityError);
    EXPECT_THROW(optimal_value_bruteforce(make_synthetic_unweighted(5, 2), 20), CapacityError);
    EXPECT_THROW(optimal_value_curve(inst, 0), ParameterError);
}

TEST(Oracle, CprOfOptimalSequenceIsZero) {
    const auto inst = make_synthetic_weighted(3, 3);
    const auto pv = optimal_value_dp(inst, 40);
    SimulatedEnvironment env(inst, make_rng(0, "env", 0));
    const auto trace = run_fixed_sequence(env, pv.optimal_sequence);
    EXPECT_NEAR(cpr(trace, pv), 0.0, 1e-12);
}

TEST(Oracle, CprShapeAndInconsistencyChecks) {
    const auto inst = make_synthetic_unweighted(2, 2);
    const auto pv = optimal_value_dp(inst, 5);
    SimulatedEnvironment env(inst, make_rng(0, "env", 0));
    EXPECT_THROW(cpr(run_fixed_sequence(env, {0, 0, 0}), pv), ShapeError);
    PolicyValue fake = pv;
    fake.value = 100.0;
    SimulatedEnvironment env2(inst, make_rng(0, "env", 0));
    EXPECT_THROW(cpr(run_fixed_sequence(env2, {0, 0, 0, 0, 0}), fake), Error);
}

TEST(Oracle, ReoFloorOnBundledInstances) {
    for (const auto& ni : bundled_instances()) {
        if (ni.instance.memory_capacity() > 6) continue;
        for (std::size_t T : {1u, 10u, 100u}) {
            EXPECT_TRUE(reo_floor_check(ni.instance, T)) << ni.name << " T=" << T;
        }
    }
}
