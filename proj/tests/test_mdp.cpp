#include "moqc/error.hpp"
#include "moqc/mdp.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace moqc;
using moqc::test::error_kind_of;

TEST(SparseMdp, RejectsBrokenStructure) {
    // probabilities do not sum to one
    EXPECT_EQ(error_kind_of([] { SparseMdp(0, {0, 1}, {""}, {0, 1}, {{0, 0.5}}); }), ErrorKind::InvalidModel);
    // state without a choice
    EXPECT_EQ(error_kind_of([] { SparseMdp(0, {0, 1, 1}, {""}, {0, 1}, {{0, 1.0}}); }), ErrorKind::InvalidModel);
    // target out of range
    EXPECT_EQ(error_kind_of([] { SparseMdp(0, {0, 1}, {""}, {0, 1}, {{3, 1.0}}); }), ErrorKind::InvalidModel);
    // unsorted targets
    EXPECT_EQ(error_kind_of([] { SparseMdp(0, {0, 1, 2}, {"", ""}, {0, 2, 3}, {{1, 0.5}, {0, 0.5}, {1, 1.0}}); }),
              ErrorKind::InvalidModel);
    // initial state out of range
    EXPECT_EQ(error_kind_of([] { SparseMdp(4, {0, 1}, {""}, {0, 1}, {{0, 1.0}}); }), ErrorKind::InvalidModel);
}

TEST(SparseMdp, Accessors) {
    const auto m = test::two_arm();
    EXPECT_EQ(m.mdp.num_states(), 2u);
    EXPECT_EQ(m.mdp.num_choices(), 3u);
    EXPECT_EQ(m.mdp.choice_count(0), 2u);
    EXPECT_EQ(m.mdp.state_of_choice(1), 0u);
    EXPECT_EQ(m.mdp.state_of_choice(2), 1u);
    EXPECT_EQ(m.mdp.label(1), "b");
    EXPECT_EQ(mdp_stats(m.mdp), (MdpStats{2, 3, 3}));
}

TEST(Rewards, ShapeAndSign) {
    const auto m = test::two_arm();
    RewardVectorFunction short_row{{"x"}, {{1, 0}}};
    EXPECT_EQ(error_kind_of([&] { short_row.validate(m.mdp); }), ErrorKind::ShapeMismatch);
    RewardVectorFunction negative{{"x"}, {{1, -1, 0}}};
    EXPECT_EQ(error_kind_of([&] { negative.validate(m.mdp); }), ErrorKind::InvalidModel);
}

TEST(InducedChain, DeterministicPicksRows) {
    const auto m = test::two_arm();
    const auto chain = induced_chain(m.mdp, m.rewards, DeterministicScheduler{{1, 0}});
    ASSERT_EQ(chain.num_states(), 2u);
    ASSERT_EQ(chain.row(0).size(), 1u);
    EXPECT_EQ(chain.row(0)[0].target, 1u);
    EXPECT_EQ(chain.state_rewards[0][0], 0.0);
    EXPECT_EQ(chain.state_rewards[1][0], 1.0);
    EXPECT_EQ(error_kind_of([&] { induced_chain(m.mdp, m.rewards, DeterministicScheduler{{2, 0}}); }),
              ErrorKind::ShapeMismatch);
}

TEST(InducedChain, RandomizedAveragesRowsAndRewards) {
    // s0: a -> {1: .5, 2: .5}, b -> {2: 1}; s1, s2 absorbing
    SparseMdp mdp(0, {0, 2, 3, 4}, {"a", "b", "", ""}, {0, 2, 3, 4, 5},
                  {{1, 0.5}, {2, 0.5}, {2, 1.0}, {1, 1.0}, {2, 1.0}});
    RewardVectorFunction r{{"x"}, {{2, 4, 0, 0}}};
    const auto chain = induced_chain(mdp, r, RandomizedScheduler{{{0.5, 0.5}, {1.0}, {1.0}}});
    ASSERT_EQ(chain.row(0).size(), 2u);
    EXPECT_EQ(chain.row(0)[0].target, 1u);
    EXPECT_DOUBLE_EQ(chain.row(0)[0].probability, 0.25);
    EXPECT_DOUBLE_EQ(chain.row(0)[1].probability, 0.75);
    EXPECT_DOUBLE_EQ(chain.state_rewards[0][0], 3.0);

    const auto uniform = RandomizedScheduler::uniform(mdp);
    EXPECT_EQ(uniform.weights_per_state[0], (std::vector<double>{0.5, 0.5}));
    EXPECT_EQ(error_kind_of([&] { induced_chain(mdp, r, RandomizedScheduler{{{0.7, 0.7}, {1.0}, {1.0}}}); }),
              ErrorKind::ShapeMismatch);
}

TEST(ModelJson, RoundTripIsBitExact) {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto m = test::random_model(rng, 7, 3, 3);
        const std::string text = export_model_json(m.mdp, m.rewards);
        const auto [mdp, rewards] = import_model_json(text);
        EXPECT_TRUE(mdp == m.mdp);
        EXPECT_TRUE(rewards == m.rewards);
        EXPECT_EQ(export_model_json(mdp, rewards), text);
    }
    EXPECT_EQ(error_kind_of([] { import_model_json("{\"num_states\": 1"); }), ErrorKind::SyntaxError);
}

TEST(SchedulerJson, AllKindsRoundTrip) {
    const auto m = test::two_arm();
    const DeterministicScheduler det{{1, 0}};
    const RandomizedScheduler rnd{{{0.3, 0.7}, {1.0}}};
    const MixtureScheduler mix{{{0.25, {{0, 0}}}, {0.75, {{1, 0}}}}};
    for (const AnyScheduler& s : {AnyScheduler(det), AnyScheduler(rnd), AnyScheduler(mix)}) {
        const auto back = scheduler_from_json(scheduler_to_json(s, m.mdp.num_states()));
        EXPECT_TRUE(back == s);
    }
    EXPECT_EQ(error_kind_of([] { scheduler_from_json("{\"kind\":\"bogus\",\"num_states\":1}"); }),
              ErrorKind::SyntaxError);
}

TEST(SchedulerValidation, MixtureWeights) {
    const auto m = test::two_arm();
    EXPECT_NO_THROW((MixtureScheduler{{{0.5, {{0, 0}}}, {0.5, {{1, 0}}}}}.validate(m.mdp)));
    EXPECT_ANY_THROW((MixtureScheduler{{{0.5, {{0, 0}}}, {0.6, {{1, 0}}}}}.validate(m.mdp)));
    EXPECT_ANY_THROW((MixtureScheduler{{{1.0, {{0}}}}}.validate(m.mdp)));
}

TEST(FormatDouble, SeventeenDigits) {
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(2.0), "2");
}
