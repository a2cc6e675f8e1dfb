#include "moqc/error.hpp"
#include "moqc/query_engine.hpp"
#include "oracles/query_oracle.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace moqc;
using moqc::test::error_kind_of;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

SolverConfig config(std::size_t workers = 1) {
    SolverConfig c;
    c.workers = workers;
    return c;
}

ConvexQuerySpec point_query(Vector target, Box box, double epsilon) {
    ConvexQuerySpec q;
    q.loss.kind = LossKind::SqDistToPoint;
    q.loss.target = std::move(target);
    q.box = std::move(box);
    q.epsilon = epsilon;
    return q;
}

AchievabilitySpec thresholds(Vector t, ThresholdDirection d) {
    AchievabilitySpec a;
    a.directions.assign(static_cast<std::size_t>(t.size()), d);
    a.thresholds = std::move(t);
    return a;
}

} // namespace

TEST(ConvexQuery, TwoArmNearestPointToOrigin) {
    const auto m = test::two_arm();
    const AnalysisModel model(m.mdp, m.rewards);
    const auto out = convex_query(model, point_query(vec({0, 0}), Box{vec({-kInf, -kInf}), vec({0.6, 0.6})}, 1e-6),
                                  config());
    ASSERT_EQ(out.status, QueryStatus::Optimal);
    EXPECT_NEAR(out.point(0), 0.5, 1e-3);
    EXPECT_NEAR(out.point(1), 0.5, 1e-3);
    EXPECT_NEAR(out.value, 0.5, 1e-6);
    EXPECT_LE(out.gap, 1e-6);
    double wa = 0, wb = 0;
    for (const auto& c : out.mixture.components) (c.scheduler.choice_per_state[0] == 0 ? wa : wb) += c.weight;
    EXPECT_NEAR(wa, 0.5, 1e-3);
    EXPECT_NEAR(wb, 0.5, 1e-3);
}

TEST(ConvexQuery, TwoArmInfeasibleBox) {
    const auto m = test::two_arm();
    const AnalysisModel model(m.mdp, m.rewards);
    const auto out = convex_query(model, point_query(vec({0, 0}), Box{vec({-kInf, -kInf}), vec({0.4, 0.4})}, 1e-6),
                                  config());
    EXPECT_EQ(out.status, QueryStatus::Infeasible);
}

TEST(ConvexQuery, AchievableTargetHasZeroLoss) {
    std::mt19937 rng(61);
    auto m = test::random_model(rng, 6, 3, 3);
    test::make_finite(m);
    const AnalysisModel model(m.mdp, m.rewards);
    const auto vertex = support_point(model, vec({1, 0, 0}), config()).point;
    const auto out = convex_query(model, point_query(vertex, Box::unbounded(3), 1e-8), config());
    ASSERT_EQ(out.status, QueryStatus::Optimal);
    EXPECT_LE(out.value, 1e-8);
}

TEST(ConvexQuery, RejectsBadSpecs) {
    const auto m = test::two_arm();
    const AnalysisModel model(m.mdp, m.rewards);
    auto q = point_query(vec({0, 0, 0}), Box::unbounded(2), 1e-4);
    EXPECT_EQ(error_kind_of([&] { convex_query(model, q, config()); }), ErrorKind::ShapeMismatch);
    q = point_query(vec({0, 0}), Box::unbounded(2), -1.0);
    EXPECT_EQ(error_kind_of([&] { convex_query(model, q, config()); }), ErrorKind::InvalidArgument);
    q = point_query(vec({0, 0}), Box::unbounded(2), 1e-4);
    q.objectives = {"first"};
    EXPECT_EQ(error_kind_of([&] { convex_query(model, q, config()); }), ErrorKind::ShapeMismatch);
}

TEST(ConvexQuery, IterationCapReportsBestPoint) {
    std::mt19937 rng(67);
    auto m = test::random_model(rng, 6, 3, 3);
    test::make_finite(m);
    const AnalysisModel model(m.mdp, m.rewards);
    auto q = point_query(vec({-1, -1, -1}), Box::unbounded(3), 0.0);
    q.max_outer_iters = 1;
    const auto out = convex_query(model, q, config());
    if (out.status == QueryStatus::IterationCapReached) {
        EXPECT_EQ(out.iterations, 1u);
        EXPECT_EQ(out.point.size(), 3);
        EXPECT_GE(out.gap, 0.0);
    } else {
        EXPECT_EQ(out.status, QueryStatus::Optimal);
    }
}

TEST(ConvexQuery, MatchesBruteForceOracle) {
    std::mt19937 rng(71);
    int infeasible = 0;
    std::size_t most_iterations = 0;
    for (int i = 0; i < 48; ++i) {
        const auto inst = oracle::make_query_instance(rng, i, 1e-6, true);
        const AnalysisModel model(inst.model.mdp, inst.model.rewards);
        const auto out = convex_query(model, inst.spec, config());
        const auto expect = oracle::query_oracle(inst);
        if (!expect) {
            ++infeasible;
            EXPECT_EQ(out.status, QueryStatus::Infeasible) << "instance " << i << " " << inst.shape;
            continue;
        }
        ASSERT_EQ(out.status, QueryStatus::Optimal) << "instance " << i << " " << inst.shape;
        most_iterations = std::max(most_iterations, out.iterations);
        EXPECT_NEAR(out.value, *expect, inst.spec.epsilon + 1e-6) << "instance " << i << " " << inst.shape;
        EXPECT_LE(out.gap, inst.spec.epsilon);
        EXPECT_TRUE(inst.spec.box.contains(out.point, 1e-8));
        EXPECT_LE(oracle::sandwich_violation(out), 1e-8);
        const auto replay = evaluate_query(inst.model.mdp, inst.model.rewards, out.mixture, config());
        EXPECT_LE((replay - out.point).lpNorm<Eigen::Infinity>(), 1e-6);
    }
    EXPECT_GE(infeasible, 6);
    EXPECT_GE(most_iterations, 4u);
}

TEST(Achievability, TwoArmExamples) {
    const auto m = test::two_arm();
    const AnalysisModel model(m.mdp, m.rewards);
    auto yes = achievability_query(model, thresholds(vec({0.6, 0.6}), ThresholdDirection::AtMost), config());
    EXPECT_TRUE(yes.achievable);
    EXPECT_TRUE(yes.decided);
    EXPECT_LE(yes.point(0), 0.6 + 1e-6);
    EXPECT_LE(yes.point(1), 0.6 + 1e-6);
    const auto replay = evaluate_query(m.mdp, m.rewards, yes.mixture, config());
    EXPECT_LE((replay - yes.point).lpNorm<Eigen::Infinity>(), 1e-9);

    const auto no = achievability_query(model, thresholds(vec({0.4, 0.4}), ThresholdDirection::AtMost), config());
    EXPECT_FALSE(no.achievable);
    EXPECT_TRUE(no.decided);

    const auto flipped = achievability_query(model, thresholds(vec({0.3, 0.3}), ThresholdDirection::AtLeast), config());
    EXPECT_TRUE(flipped.achievable);
    EXPECT_GE(flipped.point(0), 0.3 - 1e-6);
    EXPECT_GE(flipped.point(1), 0.3 - 1e-6);
}

TEST(Achievability, AgreesWithHullTest) {
    std::mt19937 rng(73);
    int boundary = 0, yes = 0, no = 0;
    for (int i = 0; i < 60; ++i) {
        const auto inst = oracle::make_query_instance(rng, i, 1e-6);
        const AnalysisModel model(inst.model.mdp, inst.model.rewards);
        const auto m = static_cast<std::size_t>(inst.values.front().size());
        AchievabilitySpec spec;
        spec.thresholds = Vector(static_cast<Eigen::Index>(m));
        std::uniform_real_distribution<double> u(0, 1);
        const auto& p = inst.values[rng() % inst.values.size()];
        for (std::size_t k = 0; k < m; ++k) {
            spec.directions.push_back(u(rng) < 0.7 ? ThresholdDirection::AtMost : ThresholdDirection::AtLeast);
            const double shift = (u(rng) - 0.6) * 0.5 * (1.0 + std::abs(p(static_cast<Eigen::Index>(k))));
            spec.thresholds(static_cast<Eigen::Index>(k)) =
                p(static_cast<Eigen::Index>(k)) +
                (spec.directions.back() == ThresholdDirection::AtMost ? shift : -shift);
        }
        const auto verdict = oracle::achievability_oracle(inst.values, spec);
        const auto got = achievability_query(model, spec, config());
        if (verdict == oracle::Verdict::Boundary) {
            ++boundary;
            continue;
        }
        (verdict == oracle::Verdict::Yes ? yes : no) += 1;
        EXPECT_EQ(got.achievable, verdict == oracle::Verdict::Yes) << "instance " << i;
        EXPECT_TRUE(got.decided) << "instance " << i;
    }
    EXPECT_GE(yes, 10);
    EXPECT_GE(no, 10);
}

TEST(EvaluateQuery, AllSchedulerKinds) {
    const auto m = test::two_arm();
    const MixtureScheduler mix{{{0.5, {{0, 0}}}, {0.5, {{1, 0}}}}};
    EXPECT_LE((evaluate_query(m.mdp, m.rewards, mix, config()) - vec({0.5, 0.5})).norm(), 1e-12);
    EXPECT_LE((evaluate_query(m.mdp, m.rewards, RandomizedScheduler::uniform(m.mdp), config()) - vec({0.5, 0.5})).norm(),
              1e-12);
    EXPECT_LE((evaluate_query(m.mdp, m.rewards, DeterministicScheduler{{1, 0}}, config()) - vec({0, 1})).norm(), 1e-12);
    EXPECT_EQ(error_kind_of([&] { evaluate_query(m.mdp, m.rewards, DeterministicScheduler{{0}}, config()); }),
              ErrorKind::ShapeMismatch);
}

TEST(OptimizeSingle, MaxAndMin) {
    const auto m = test::two_arm();
    const AnalysisModel model(m.mdp, m.rewards);
    const auto hi = optimize_single(model, 0, Sense::Maximize, config());
    EXPECT_NEAR(hi.value, 1.0, 1e-12);
    EXPECT_EQ(hi.scheduler.choice_per_state[0], 0u);
    const auto lo = optimize_single(model, 0, Sense::Minimize, config());
    EXPECT_NEAR(lo.value, 0.0, 1e-12);
    EXPECT_EQ(lo.scheduler.choice_per_state[0], 1u);
    EXPECT_NEAR(lo.point(1), 1.0, 1e-12);
    EXPECT_EQ(error_kind_of([&] { optimize_single(model, 5, Sense::Maximize, config()); }), ErrorKind::ShapeMismatch);
}

TEST(ConvexQuery, WorkerCountDoesNotChangeOutputs) {
    std::mt19937 rng(79);
    for (int i = 0; i < 12; ++i) {
        const auto inst = oracle::make_query_instance(rng, i, 1e-6);
        const AnalysisModel model(inst.model.mdp, inst.model.rewards);
        const auto a = convex_query(model, inst.spec, config(1));
        const auto b = convex_query(model, inst.spec, config(8));
        ASSERT_EQ(a.status, b.status);
        EXPECT_EQ(a.iterations, b.iterations);
        if (a.status == QueryStatus::Infeasible) continue;
        EXPECT_LE((a.point - b.point).lpNorm<Eigen::Infinity>(), 1e-12);
        EXPECT_LE(std::abs(a.value - b.value), 1e-12);
        EXPECT_EQ(a.mixture, b.mixture);
    }
}
