#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <vector>

#include "wtb/environment.hpp"
#include "wtb/instance.hpp"
#include "wtb/instance_json.hpp"
#include "wtb/instances.hpp"
#include "wtb/reo.hpp"

using namespace wtb;

namespace {

WtbInstance two_action_unweighted(std::size_t m, FeedbackLaw fb = FeedbackLaw::deterministic()) {
    std::vector<LossFunction> h{LossFunction::constant(0.5), LossFunction::constant(0.5)};
    h[0].add_entry(static_cast<double>(m), 0.35);
    return WtbInstance(m, std::vector<std::vector<double>>(2, std::vector<double>(m, 1.0)), h, fb);
}

// Tally vector straight from the definition, on the full action list.
std::vector<int> tally_by_definition(const std::vector<Action>& played, Action x, std::size_t m) {
    std::vector<int> y(m, 0);
    const std::size_t t = played.size();
    for (std::size_t i = 1; i <= m; ++i) {
        if (t >= i && played[t - i] == x) y[i - 1] = 1;
    }
    return y;
}

// Minimal alpha by a plain double loop over actions and all 2^(m-1) contexts.
double alpha_by_double_loop(const WtbInstance& inst) {
    const std::size_t m = inst.memory_capacity();
    double lo = std::numeric_limits<double>::infinity();
    for (Action x = 0; x < inst.num_actions(); ++x) {
        for (std::size_t mask = 0; mask < (std::size_t{1} << (m - 1)); ++mask) {
            std::vector<int> y(m, 0);
            y[0] = 1;
            for (std::size_t i = 1; i < m; ++i) y[i] = (mask >> (i - 1)) & 1;
            lo = std::min(lo, loss_at_context(inst, x, y));
        }
    }
    double mu = std::numeric_limits<double>::infinity();
    for (Action x = 0; x < inst.num_actions(); ++x) mu = std::min(mu, eventual_loss(inst, x));
    return std::max(0.0, mu - lo);
}

}  // namespace

TEST(Rng, SameLabelAndIndexGiveSameStream) {
    Rng a = make_rng(7, "se", 3), b = make_rng(7, "se", 3), c = make_rng(7, "exp3", 3), d = make_rng(7, "se", 4);
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
    EXPECT_NE(x, d());
}

TEST(Rng, Uniform01InUnitInterval) {
    Rng r = make_rng(1, "u", 0);
    for (int i = 0; i < 10000; ++i) {
        const double u = uniform01(r);
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(History, RecentAndEviction) {
    HistoryWindow h(3);
    EXPECT_TRUE(h.empty());
    for (Action a : {1, 2, 3, 4}) h.push(a);
    EXPECT_EQ(h.size(), 3u);
    EXPECT_EQ(h.recent(1), 4u);
    EXPECT_EQ(h.recent(3), 2u);
    EXPECT_EQ(h.to_vector(), (std::vector<Action>{2, 3, 4}));
    h.clear();
    EXPECT_EQ(h.size(), 0u);
    EXPECT_THROW(HistoryWindow(0), ParameterError);
}

TEST(LossFunction, TableBeatsRuleAndToleranceMatches) {
    auto f = LossFunction::affine(1.0, -1.0);
    f.add_entry(0.25, 0.6);
    EXPECT_DOUBLE_EQ(f(0.25 + 1e-12), 0.6);
    EXPECT_DOUBLE_EQ(f(0.5), 0.5);
    auto g = LossFunction::from_table({{1.0, 0.7}});
    EXPECT_THROW(g(2.0), Error);
}

TEST(LossFunction, DyadicRuleIsExact) {
    const DyadicMatchRule r{3, 5, 0.0, 1.0};  // 5/8
    EXPECT_EQ(r(0.625), 0.0);
    EXPECT_EQ(r(std::nextafter(0.625, 1.0)), 1.0);
}

TEST(Tally, MatchesDefinitionOnRandomSequences) {
    Rng rng = make_rng(11, "tally", 0);
    for (std::size_t m : {1u, 2u, 4u, 7u}) {
        HistoryWindow h(m);
        std::vector<Action> played;
        for (int t = 0; t < 60; ++t) {
            const Action a = static_cast<Action>(uniform01(rng) * 3);
            h.push(a);
            played.push_back(a);
            for (Action x = 0; x < 3; ++x) {
                ASSERT_EQ(tally_vector(h, x, m, 3), tally_by_definition(played, x, m));
            }
        }
    }
}

TEST(Tally, ZeroPaddedAtGameStart) {
    HistoryWindow h(4);
    h.push(1);
    EXPECT_EQ(tally_vector(h, 1, 4, 2), (std::vector<int>{1, 0, 0, 0}));
    EXPECT_EQ(tally_vector(h, 0, 4, 2), (std::vector<int>{0, 0, 0, 0}));
    EXPECT_THROW(tally_vector(h, 5, 4, 2), InvalidActionError);
}

TEST(Instance, ShapeChecks) {
    std::vector<LossFunction> h{LossFunction::constant(0.5)};
    EXPECT_THROW(WtbInstance(2, {{1.0}}, h, FeedbackLaw::bernoulli()), ParameterError);
    EXPECT_THROW(WtbInstance(1, {{0.0}}, h, FeedbackLaw::bernoulli()), ParameterError);
    EXPECT_THROW(WtbInstance(1, {{1.5}}, h, FeedbackLaw::bernoulli()), ParameterError);
    EXPECT_THROW(WtbInstance(1, {{1.0}}, h, FeedbackLaw::clamped_gaussian({})), ParameterError);
    EXPECT_THROW(WtbInstance(0, {{}}, h, FeedbackLaw::bernoulli()), ParameterError);
}

TEST(Instance, ValidateRejectsLossOutsideUnitInterval) {
    std::vector<LossFunction> h{LossFunction::affine(0.5, 1.0)};
    WtbInstance inst(2, {{1.0, 1.0}}, h, FeedbackLaw::bernoulli());
    EXPECT_THROW(inst.validate(), Error);
}

TEST(Instance, EventualLossAndExpectedLoss) {
    const auto inst = two_action_unweighted(2);
    EXPECT_DOUBLE_EQ(eventual_loss(inst, 0), 0.35);
    EXPECT_DOUBLE_EQ(eventual_loss(inst, 1), 0.5);
    HistoryWindow h(2);
    h.push(0);
    EXPECT_DOUBLE_EQ(expected_loss(inst, h, 0), 0.5);
    h.push(0);
    EXPECT_DOUBLE_EQ(expected_loss(inst, h, 0), 0.35);
    EXPECT_THROW(inst.checked(2), InvalidActionError);
}

TEST(Feedback, DeterministicReturnsExpected) {
    auto inst = two_action_unweighted(2);
    SimulatedEnvironment env(inst, make_rng(0, "env", 0));
    for (int i = 0; i < 5; ++i) {
        const auto o = env.play(0);
        EXPECT_EQ(o.observed_loss, o.expected_loss);
    }
}

TEST(Feedback, BernoulliMeanWithinThreeStandardErrors) {
    Rng rng = make_rng(3, "bern", 0);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = sample_feedback(FeedbackLaw::bernoulli(), 0, 0.35, rng);
        ASSERT_TRUE(v == 0.0 || v == 1.0);
        sum += v;
    }
    const double se = std::sqrt(0.35 * 0.65 / n);
    EXPECT_NEAR(sum / n, 0.35, 3 * se);
}

TEST(Feedback, ClampedGaussianMeanAndRange) {
    Rng rng = make_rng(3, "gauss", 0);
    const auto law = FeedbackLaw::clamped_gaussian({0.05});
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = sample_feedback(law, 0, 0.5, rng);
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 1.0);
        sum += v;
    }
    EXPECT_NEAR(sum / n, 0.5, 0.01);
    // Near the boundary clipping shows up as bias but stays in range.
    for (int i = 0; i < 1000; ++i) {
        const double v = sample_feedback(FeedbackLaw::clamped_gaussian({0.3}), 0, 0.0, rng);
        ASSERT_GE(v, 0.0);
    }
}

TEST(Reo, MatchesDoubleLoopOnBundledInstances) {
    for (const auto& ni : bundled_instances()) {
        SCOPED_TRACE(ni.name);
        EXPECT_NEAR(minimal_reo_alpha(ni.instance).alpha, alpha_by_double_loop(ni.instance), 1e-15);
    }
}

TEST(Reo, SmallHandExample) {
    // x0: h(1)=0.6, h(2)=0.2; x1: h(1)=0.3, h(2)=0.4  -> mu* = 0.2, min = 0.2
    std::vector<LossFunction> h{LossFunction::from_table({{1.0, 0.6}, {2.0, 0.2}}),
                                LossFunction::from_table({{1.0, 0.3}, {2.0, 0.4}})};
    WtbInstance a(2, {{1.0, 1.0}, {1.0, 1.0}}, h, FeedbackLaw::deterministic());
    EXPECT_EQ(minimal_reo_alpha(a).best_action, 0u);
    EXPECT_DOUBLE_EQ(minimal_reo_alpha(a).alpha, 0.0);
    // lower x1's single-play loss below mu*: alpha = 0.2 - 0.05
    h[1].add_entry(1.0, 0.05);
    WtbInstance b(2, {{1.0, 1.0}, {1.0, 1.0}}, h, FeedbackLaw::deterministic());
    EXPECT_NEAR(minimal_reo_alpha(b).alpha, 0.15, 1e-15);
}

TEST(Reo, CapacityCap) {
    EXPECT_THROW(minimal_reo_alpha(make_synthetic_unweighted(2, 21)), CapacityError);
    EXPECT_NO_THROW(minimal_reo_alpha(make_synthetic_unweighted(2, 12)));
}

TEST(Environment, FixedSequenceTraceAccounting) {
    const auto inst = two_action_unweighted(2);
    SimulatedEnvironment env(inst, make_rng(0, "env", 0));
    const auto tr = run_fixed_sequence(env, {1, 0, 0, 0, 0}, "fixed");
    EXPECT_EQ(tr.size(), 5u);
    EXPECT_DOUBLE_EQ(tr.total_expected_loss(), 0.5 + 0.5 + 3 * 0.35);
    EXPECT_EQ(tr.cumulative_expected_loss().back(), tr.total_expected_loss());
}

TEST(Json, RoundTripEveryBundledInstance) {
    for (const auto& ni : bundled_instances()) {
        SCOPED_TRACE(ni.name);
        const auto back = instance_from_json(Json::parse(to_json(ni.instance).dump()));
        EXPECT_TRUE(back == ni.instance);
    }
    WtbInstance g(1, {{1.0}, {1.0}}, {LossFunction::constant(0.2), LossFunction::constant(0.4)},
                  FeedbackLaw::clamped_gaussian({0.1, 0.2}), 1000);
    EXPECT_TRUE(instance_from_json(to_json(g)) == g);
}

TEST(Json, BadInputsRaiseParseError) {
    EXPECT_THROW(instance_from_json(Json::parse(R"({"K": 1})")), ParseError);
    EXPECT_THROW(instance_from_json(Json::parse(
                     R"({"K":1,"m":1,"weights":[[1]],"losses":[{}],"feedback":{"kind":"bernoulli"}})")),
                 ParseError);
    EXPECT_THROW(instance_from_json(Json::parse(
                     R"({"K":1,"m":1,"weights":[[1]],"losses":[{"loss_rule":{"kind":"cubic"}}],"feedback":{"kind":"bernoulli"}})")),
                 ParseError);
    EXPECT_THROW(load_instance("/nonexistent/instance.json"), ParseError);
}

TEST(Json, ConstantRuleAlias) {
    const auto inst = instance_from_json(Json::parse(
        R"({"K":1,"m":2,"weights":[[1,0.5]],"losses":[{"loss_rule":{"kind":"constant","value":0.3}}],
            "feedback":{"kind":"deterministic"}})"));
    EXPECT_DOUBLE_EQ(eventual_loss(inst, 0), 0.3);
}
