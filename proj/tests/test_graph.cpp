#include "moqc/error.hpp"
#include "moqc/graph_analysis.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace moqc;
using moqc::test::error_kind_of;

namespace {

Digraph make_graph(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
    Digraph g;
    g.starts.assign(n + 1, 0);
    for (const auto& e : edges) ++g.starts[e.first + 1];
    for (std::size_t i = 0; i < n; ++i) g.starts[i + 1] += g.starts[i];
    g.targets.resize(edges.size());
    auto fill = g.starts;
    for (const auto& e : edges) g.targets[fill[e.first]++] = e.second;
    return g;
}

} // namespace

TEST(Scc, ReverseTopologicalOrder) {
    // 0 <-> 1 -> 2 <-> 3, 4 isolated
    const auto g = make_graph(5, {{0, 1}, {1, 0}, {1, 2}, {2, 3}, {3, 2}});
    const auto scc = strongly_connected_components(g);
    ASSERT_EQ(scc.components.size(), 3u);
    EXPECT_EQ(scc.component_of[0], scc.component_of[1]);
    EXPECT_EQ(scc.component_of[2], scc.component_of[3]);
    EXPECT_LT(scc.component_of[2], scc.component_of[0]);
    EXPECT_EQ(scc.components[scc.component_of[0]], (std::vector<std::uint32_t>{0, 1}));
}

TEST(Scc, EdgesOnlyPointBackwardOnRandomGraphs) {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 12;
        std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
        for (std::size_t i = 0; i < 2 * n; ++i)
            edges.push_back({static_cast<std::uint32_t>(rng() % n), static_cast<std::uint32_t>(rng() % n)});
        const auto g = make_graph(n, edges);
        const auto scc = strongly_connected_components(g);
        // Same component iff mutually reachable (Floyd-Warshall closure).
        std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
        for (std::size_t i = 0; i < n; ++i) reach[i][i] = 1;
        for (const auto& e : edges) reach[e.first][e.second] = 1;
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (reach[i][k] && reach[k][j]) reach[i][j] = 1;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                EXPECT_EQ(scc.component_of[i] == scc.component_of[j], reach[i][j] && reach[j][i]);
        for (const auto& e : edges) EXPECT_LE(scc.component_of[e.second], scc.component_of[e.first]);
    }
}

TEST(Scc, DeepChainDoesNotOverflowTheStack) {
    const std::size_t n = 300000;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::uint32_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
    edges.push_back({static_cast<std::uint32_t>(n - 1), 0});
    const auto scc = strongly_connected_components(make_graph(n, edges));
    EXPECT_EQ(scc.components.size(), 1u);
}

TEST(Mec, SelfLoopAndExitChoice) {
    // s0: a -> s0 (stays), b -> s1; s1: c -> s1
    SparseMdp mdp(0, {0, 2, 3}, {"a", "b", "c"}, {0, 1, 2, 3}, {{0, 1.0}, {1, 1.0}, {1, 1.0}});
    const auto d = mec_decomposition(mdp);
    ASSERT_EQ(d.mecs.size(), 2u);
    EXPECT_EQ(d.mecs[0].states, (std::vector<std::uint32_t>{0}));
    EXPECT_EQ(d.mecs[0].staying_choices, (std::vector<std::size_t>{0}));
    EXPECT_EQ(d.mecs[1].states, (std::vector<std::uint32_t>{1}));
}

TEST(Mec, MatchesDefinitionOnRandomModels) {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 400; ++trial) {
        const auto m = test::random_model(rng, 1 + rng() % 5, 3, 1);
        const auto d = mec_decomposition(m.mdp);
        const auto brute = test::brute_force_mecs(m.mdp);
        ASSERT_EQ(d.mecs.size(), brute.size()) << "trial " << trial;
        for (std::size_t i = 0; i < brute.size(); ++i) {
            EXPECT_EQ(d.mecs[i].states, brute[i].states);
            EXPECT_EQ(d.mecs[i].staying_choices, brute[i].staying);
            for (auto s : brute[i].states) EXPECT_EQ(d.mec_of_state[s], static_cast<std::int32_t>(i));
        }
    }
}

TEST(Finiteness, RewardInsideEndComponentDiverges) {
    SparseMdp mdp(0, {0, 2, 3}, {"a", "b", "c"}, {0, 1, 2, 3}, {{0, 1.0}, {1, 1.0}, {1, 1.0}});
    const auto d = mec_decomposition(mdp);
    EXPECT_FALSE(find_reward_divergence(mdp, {{"x"}, {{0, 5, 0}}}, d));
    const RewardVectorFunction bad{{"x", "y"}, {{0, 5, 0}, {2, 0, 0}}};
    const auto v = find_reward_divergence(mdp, bad, d);
    ASSERT_TRUE(v);
    EXPECT_EQ(v->objective, 1u);
    EXPECT_EQ(v->choice, 0u);
    EXPECT_EQ(error_kind_of([&] { check_reward_finiteness(mdp, bad, d); }), ErrorKind::Divergence);
}

TEST(Restriction, DropsUnreachableStates) {
    // s0 -> s2, s1 -> s0 (unreachable from s0), s2 loop
    SparseMdp mdp(0, {0, 1, 2, 3}, {"a", "b", "c"}, {0, 1, 2, 3}, {{2, 1.0}, {0, 1.0}, {2, 1.0}});
    const RewardVectorFunction r{{"x"}, {{1, 2, 0}}};
    const auto res = reachable_restriction(mdp, r);
    EXPECT_EQ(res.mdp.num_states(), 2u);
    EXPECT_EQ(res.original_state, (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(res.original_choice, (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(res.mdp.choice(0)[0].target, 1u);
    EXPECT_EQ(res.rewards.values[0], (std::vector<double>{1, 0}));
}
