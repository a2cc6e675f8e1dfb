#include "moqc/convex_geometry.hpp"
#include "moqc/error.hpp"
#include "oracles/geometry_oracle.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <optional>

using namespace moqc;
using moqc::test::error_kind_of;
using namespace moqc::oracle;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

Halfspace hs(Vector w, Vector r) {
    const double n = w.lpNorm<1>();
    return {w / n, std::move(r)};
}

/// Random bounded region: a box in [-3, 3]^m cut by up to `cuts` halfspaces through
/// random points.
std::pair<HRep, Box> random_region(std::mt19937& rng, std::size_t m, std::size_t cuts) {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::normal_distribution<double> g;
    Box box{Vector(static_cast<Eigen::Index>(m)), Vector(static_cast<Eigen::Index>(m))};
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m); ++i) {
        const double a = u(rng), b = u(rng);
        box.lower(i) = std::min(a, b);
        box.upper(i) = std::max(a, b) + 0.1;
    }
    HRep hrep;
    const std::size_t k = rng() % (cuts + 1);
    for (std::size_t j = 0; j < k; ++j) {
        Vector w(static_cast<Eigen::Index>(m)), r(static_cast<Eigen::Index>(m));
        for (auto& x : w) x = g(rng);
        for (auto& x : r) x = u(rng);
        hrep.halfspaces.push_back(hs(w, r));
    }
    return {hrep, box};
}

} // namespace

TEST(Box, ContainsAndClamp) {
    const Box b{vec({0, -kInf}), vec({1, 2})};
    EXPECT_TRUE(b.contains(vec({0.5, -100}), 0.0));
    EXPECT_FALSE(b.contains(vec({1.1, 0}), 0.05));
    EXPECT_TRUE(b.contains(vec({1.1, 0}), 0.2));
    EXPECT_EQ(b.clamp(vec({2, 3})), vec({1, 2}));
    EXPECT_EQ(error_kind_of([] { Box{vec({1}), vec({0})}.validate(); }), ErrorKind::InvalidArgument);
}

TEST(LpSolve, Examples) {
    HRep h{{hs(vec({0.5, 0.5}), vec({1, 1}))}};
    auto r = lp_solve(h, Box{vec({0, 0}), vec({kInf, kInf})}, vec({1, 0}), Sense::Minimize);
    ASSERT_EQ(r.status, LpStatus::Feasible);
    EXPECT_NEAR(r.value, 0.0, 1e-12);
    EXPECT_NEAR(r.point(0), 0.0, 1e-12);
    EXPECT_NEAR(r.point(1), 0.0, 1e-12);

    HRep ge{{{vec({-1, 0}), vec({2, 0})}}};
    EXPECT_EQ(lp_solve(ge, Box{vec({-kInf, -kInf}), vec({1, kInf})}, vec({1, 0}), Sense::Minimize).status,
              LpStatus::Infeasible);

    r = lp_solve(HRep{}, Box{vec({0, 0}), vec({1, 1})}, vec({1, 1}), Sense::Minimize);
    ASSERT_EQ(r.status, LpStatus::Feasible);
    EXPECT_NEAR(r.value, 0.0, 1e-12);
    r = lp_solve(HRep{}, Box{vec({0, 0}), vec({1, 1})}, vec({1, 1}), Sense::Maximize);
    EXPECT_NEAR(r.value, 2.0, 1e-12);

    EXPECT_EQ(lp_solve(h, Box{vec({0, 0}), vec({kInf, kInf})}, vec({-1, 1}), Sense::Minimize).status,
              LpStatus::Feasible);
    EXPECT_EQ(lp_solve(HRep{}, Box::unbounded(2), vec({1, 0}), Sense::Minimize).status, LpStatus::Unbounded);
    EXPECT_EQ(lp_solve(h, Box{vec({-kInf, 0}), vec({kInf, kInf})}, vec({1, 0}), Sense::Minimize).status,
              LpStatus::Unbounded);
}

TEST(LpSolve, MatchesVertexEnumeration) {
    std::mt19937 rng(41);
    int feasible_cases = 0, infeasible_cases = 0;
    for (int trial = 0; trial < 600; ++trial) {
        const std::size_t m = 2 + trial % 2;
        auto [hrep, box] = random_region(rng, m, 6);
        Vector c(static_cast<Eigen::Index>(m));
        std::normal_distribution<double> g;
        for (auto& x : c) x = g(rng);
        const auto oracle = lp_oracle(hrep, box, c);
        const auto r = lp_solve(hrep, box, c, Sense::Minimize);
        if (!oracle) {
            ++infeasible_cases;
            EXPECT_EQ(r.status, LpStatus::Infeasible) << "trial " << trial;
            continue;
        }
        ++feasible_cases;
        ASSERT_EQ(r.status, LpStatus::Feasible) << "trial " << trial;
        EXPECT_NEAR(r.value, *oracle, 1e-8) << "trial " << trial;
        EXPECT_TRUE(feasible(rows_of(hrep, box), r.point, 1e-8));
        const auto rmax = lp_solve(hrep, box, c, Sense::Maximize);
        EXPECT_NEAR(rmax.value, -*lp_oracle(hrep, box, -c), 1e-8);
    }
    EXPECT_GT(feasible_cases, 100);
    EXPECT_GT(infeasible_cases, 20);
}

TEST(LpSolve, DegenerateVerticesTerminate) {
    // Many halfspaces through the same vertex (1, 1).
    HRep h;
    for (int k = 1; k <= 12; ++k) h.halfspaces.push_back(hs(vec({1.0, k / 6.0}), vec({1, 1})));
    const auto r = lp_solve(h, Box{vec({0, 0}), vec({5, 5})}, vec({-1, -1}), Sense::Minimize);
    ASSERT_EQ(r.status, LpStatus::Feasible);
    EXPECT_NEAR(r.value, *lp_oracle(h, Box{vec({0, 0}), vec({5, 5})}, vec({-1, -1})), 1e-9);
}

TEST(MinNormPoint, Examples) {
    auto p = min_norm_point({vec({1, 0}), vec({0, 1})}, vec({0, 0}));
    EXPECT_NEAR(p.point(0), 0.5, 1e-12);
    EXPECT_NEAR(p.weights[1], 0.5, 1e-12);
    p = min_norm_point({vec({1, 0}), vec({0, 1})}, vec({1, 0.5}));
    EXPECT_NEAR(p.point(0), 0.75, 1e-12);
    EXPECT_NEAR(p.point(1), 0.25, 1e-12);
    EXPECT_NEAR(p.weights[0], 0.75, 1e-12);
    p = min_norm_point({vec({2, 2})}, vec({0, 0}));
    EXPECT_EQ(p.point, vec({2, 2}));
    EXPECT_EQ(p.weights, std::vector<double>{1.0});
    // anchor inside the hull
    p = min_norm_point({vec({0, 0}), vec({2, 0}), vec({0, 2})}, vec({0.5, 0.5}));
    EXPECT_NEAR((p.point - vec({0.5, 0.5})).norm(), 0.0, 1e-12);
    // duplicates and collinear points
    p = min_norm_point({vec({1, 1}), vec({1, 1}), vec({2, 2}), vec({3, 3})}, vec({0, 0}));
    EXPECT_NEAR((p.point - vec({1, 1})).norm(), 0.0, 1e-12);
}

TEST(MinNormPoint, OptimalityCertificate) {
    std::mt19937 rng(43);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 500; ++trial) {
        const auto m = static_cast<Eigen::Index>(1 + trial % 6);
        const std::size_t k = 1 + rng() % 12;
        std::vector<Vector> pts;
        for (std::size_t i = 0; i < k; ++i) {
            Vector v(m);
            for (auto& x : v) x = g(rng);
            pts.push_back(v);
        }
        Vector anchor(m);
        for (auto& x : anchor) x = 2 * g(rng);
        const auto p = min_norm_point(pts, anchor);
        double total = 0;
        Vector combo = Vector::Zero(m);
        for (std::size_t i = 0; i < k; ++i) {
            EXPECT_GE(p.weights[i], 0.0);
            total += p.weights[i];
            combo += p.weights[i] * pts[i];
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
        EXPECT_LE((combo - p.point).norm(), 1e-12);
        for (const auto& r : pts) EXPECT_LE((anchor - p.point).dot(r - p.point), 1e-8) << "trial " << trial;
    }
}

TEST(MinNormPoint, MatchesSimplexGridSearch) {
    std::mt19937 rng(47);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 22; ++trial) {
        const auto m = static_cast<Eigen::Index>(2 + trial % 2);
        const std::size_t k = trial < 20 ? 2 + trial % 2 : 4;
        std::vector<Vector> pts;
        for (std::size_t i = 0; i < k; ++i) {
            Vector v(m);
            for (auto& x : v) x = u(rng);
            pts.push_back(v);
        }
        Vector anchor(m);
        for (auto& x : anchor) x = u(rng);
        const double got = (min_norm_point(pts, anchor).point - anchor).norm();

        // Grid over the simplex at step 1e-3; the last weight is implied.
        const int steps = 1000;
        const auto dim = static_cast<std::size_t>(m);
        std::vector<double> flat;
        for (const auto& v : pts)
            for (std::size_t i = 0; i < dim; ++i) flat.push_back(v(static_cast<Eigen::Index>(i)) - anchor(static_cast<Eigen::Index>(i)));
        double best = kInf;
        std::vector<double> acc((k + 1) * dim, 0.0);  // partial sums per depth
        std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
            double* cur = &acc[i * dim];
            if (i + 1 == k) {
                double sq = 0;
                for (std::size_t d = 0; d < dim; ++d) {
                    const double x = cur[d] + (left / double(steps)) * flat[i * dim + d];
                    sq += x * x;
                }
                best = std::min(best, sq);
                return;
            }
            double* next = &acc[(i + 1) * dim];
            for (int v = 0; v <= left; ++v) {
                for (std::size_t d = 0; d < dim; ++d) next[d] = cur[d] + (v / double(steps)) * flat[i * dim + d];
                rec(i + 1, left - v);
            }
        };
        rec(0, steps);
        best = std::sqrt(best);
        EXPECT_LE(got, best + 1e-12);
        EXPECT_NEAR(got, best, 2e-3);
    }
}

TEST(MinimizeLoss, Examples) {
    // x1 + x2 >= 1 within [0,10]^2, nearest to the origin
    HRep h{{hs(vec({-1, -1}), vec({0.5, 0.5}))}};
    const Box box{vec({0, 0}), vec({10, 10})};
    LossSpec loss{LossKind::SqDistToPoint, vec({0, 0}), {}, {}};
    auto r = minimize_loss_over_hrep(h, box, loss, 1e-12);
    EXPECT_NEAR(r.point(0), 0.5, 1e-6);
    EXPECT_NEAR(r.point(1), 0.5, 1e-6);
    EXPECT_NEAR(r.value, 0.5, 1e-10);
    EXPECT_LE(r.lower_bound, r.value);
    EXPECT_GE(r.lower_bound, 0.5 - 1e-10);

    r = minimize_loss_over_hrep(HRep{}, Box{vec({1, 1}), vec({2, 2})}, loss, 1e-12);
    EXPECT_NEAR((r.point - vec({1, 1})).norm(), 0.0, 1e-12);

    LossSpec to_box{LossKind::SqDistToBox, {}, Box{vec({-5, -5}), vec({5, 5})}, {}};
    r = minimize_loss_over_hrep(h, Box{vec({0, 0}), vec({1, 1})}, to_box, 1e-12);
    EXPECT_EQ(r.value, 0.0);

    LossSpec weighted{LossKind::WeightedSqDistToPoint, vec({0, 0}), {}, vec({1, 3})};
    r = minimize_loss_over_hrep(h, box, weighted, 1e-12);
    // minimize x^2 + 3 y^2 on x + y = 1: x = 3/4
    EXPECT_NEAR(r.point(0), 0.75, 1e-6);
    EXPECT_NEAR(r.value, 0.75, 1e-10);
}

TEST(MinimizeLoss, ErrorsOnEmptyOrUnboundedRegion) {
    HRep ge{{{vec({-1, 0}), vec({2, 0})}}};
    LossSpec loss{LossKind::SqDistToPoint, vec({0, 0}), {}, {}};
    EXPECT_EQ(error_kind_of([&] { minimize_loss_over_hrep(ge, Box{vec({-kInf, -kInf}), vec({1, kInf})}, loss, 1e-9); }),
              ErrorKind::RegionEmpty);
    // x1 >= 2 with the target far to the right: descent follows an unbounded ray
    LossSpec far{LossKind::SqDistToPoint, vec({1e6, 0}), {}, {}};
    EXPECT_EQ(error_kind_of([&] { minimize_loss_over_hrep(ge, Box::unbounded(2), far, 1e-9); }),
              ErrorKind::RegionUnbounded);
}

TEST(MinimizeLoss, MatchesActiveSetOracle) {
    std::mt19937 rng(53);
    std::uniform_real_distribution<double> u(-4, 4), wt(0.2, 2.0);
    int cases = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t m = 2 + trial % 2;
        auto [hrep, box] = random_region(rng, m, 4);
        if (!lp_oracle(hrep, box, Vector::Zero(static_cast<Eigen::Index>(m)))) continue;
        const auto dm = static_cast<Eigen::Index>(m);
        LossSpec loss;
        switch (trial % 3) {
        case 0:
            loss.kind = LossKind::SqDistToPoint;
            loss.target = Vector(dm);
            for (auto& x : loss.target) x = u(rng);
            break;
        case 1:
            loss.kind = LossKind::WeightedSqDistToPoint;
            loss.target = Vector(dm);
            loss.weights = Vector(dm);
            for (auto& x : loss.target) x = u(rng);
            for (auto& x : loss.weights) x = wt(rng);
            break;
        default:
            loss.kind = LossKind::SqDistToBox;
            loss.target_box = Box::unbounded(m);
            for (Eigen::Index i = 0; i < dm; ++i) {
                const double a = u(rng), b = u(rng);
                const int shape = static_cast<int>(rng() % 3);
                if (shape != 1) loss.target_box.lower(i) = std::min(a, b);
                if (shape != 2) loss.target_box.upper(i) = std::max(a, b);
            }
        }
        const double oracle = *loss_oracle(hrep, box, loss);
        const auto r = minimize_loss_over_hrep(hrep, box, loss, 1e-10);
        ++cases;
        EXPECT_NEAR(r.value, oracle, 1e-7) << "trial " << trial;
        EXPECT_LE(r.lower_bound, oracle + 1e-9) << "trial " << trial;
        EXPECT_LE(r.value - r.lower_bound, 1e-10 + 1e-12) << "trial " << trial;
        EXPECT_TRUE(feasible(rows_of(hrep, box), r.point, 1e-8));
    }
    EXPECT_GT(cases, 150);
}
