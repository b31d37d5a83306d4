#include <random>
#include <vector>

#include <gtest/gtest.h>

#include <chargeknn/distsim.hpp>

#include "support/fixtures.hpp"

namespace chargeknn {
namespace {

DiffusionConfig config(double alpha, double eps, Variant v = Variant::Retention) {
    DiffusionConfig cfg;
    cfg.alpha = alpha;
    cfg.epsilon = eps;
    cfg.delta = eps / 100;
    cfg.variant = v;
    return cfg;
}

void expect_same_result(const QueryResult& a, const QueryResult& b) {
    ASSERT_EQ(a.final_state.x, b.final_state.x);
    ASSERT_EQ(a.nn_set, b.nn_set);
    ASSERT_EQ(a.iterations, b.iterations);
    ASSERT_EQ(a.terminated, b.terminated);
    ASSERT_EQ(a.touched, b.touched);
    ASSERT_EQ(a.ranking, b.ranking);
    ASSERT_EQ(a.excess_trace, b.excess_trace);
}

TEST(RunDistributed, StarSendsFortyMessages) {
    const Graph g = testing::star(10);
    const auto run = run_distributed(g, 0, config(0.5, 0.1));
    ASSERT_EQ(run.rounds.size(), 4u);
    for (const auto& r : run.rounds) {
        EXPECT_EQ(r.messages_sent, 10u);
        EXPECT_EQ(r.active_count, 1u);
    }
    EXPECT_EQ(run.total_messages, 40u);
    EXPECT_EQ(run.distinct_recipients, 10u);
    expect_same_result(run.result, run_query(g, 0, config(0.5, 0.1)));
}

TEST(RunDistributed, LazyRoundSendsTwiceEdgeCount) {
    std::mt19937_64 rng(301);
    for (int trial = 0; trial < 10; ++trial) {
        const Graph g = testing::random_connected(rng, 40);
        auto cfg = config(0.5, 0.01, Variant::LazyWalk);
        cfg.max_iterations = 5;
        const auto run = run_distributed(g, 0, cfg);
        ASSERT_EQ(run.rounds.size(), 5u);
        for (const auto& r : run.rounds)
            EXPECT_EQ(r.messages_sent, 2 * g.edge_count());
        const auto rep = message_complexity_report(run.rounds, compute_bounds(g, cfg), run.result.touched,
                                                   g.max_degree());
        EXPECT_EQ(rep.total_messages, 5 * 2 * g.edge_count());
        expect_same_result(run.result, run_query(g, 0, cfg));
    }
}

TEST(RunDistributed, StuckSeedHaltsAtOnce) {
    const Graph g = parse_edge_list("1 0\n1 2\n2 1", true);
    const auto run = run_distributed(g, 0, config(0.5, 0.1));
    EXPECT_TRUE(run.rounds.empty());
    EXPECT_EQ(run.total_messages, 0u);
    EXPECT_TRUE(run.result.terminated);
    EXPECT_EQ(run.result.nn_set, (std::vector<NodeId>{0}));
}

TEST(RunDistributed, CapAndExcessStopMatchEngine) {
    auto cfg = config(0.5, 0.2);
    cfg.max_iterations = 300;
    expect_same_result(run_distributed(testing::complete(3), 0, cfg).result,
                       run_query(testing::complete(3), 0, cfg));
    auto ex = config(0.5, 0.1, Variant::Excess);
    ex.delta = 0.01;
    const auto run = run_distributed(testing::star(10), 0, ex);
    EXPECT_EQ(run.rounds.size(), 7u);
    expect_same_result(run.result, run_query(testing::star(10), 0, ex));
}

TEST(RunDistributed, RejectsBadInput) {
    EXPECT_THROW(run_distributed(testing::star(3), 9, config(0.5, 0.1)), std::out_of_range);
    EXPECT_THROW(run_distributed(testing::star(3), 0, config(0.5, 1.1)), ConfigError);
}

TEST(DistsimProperties, BitwiseEqualToCentralisedRun) {
    std::mt19937_64 rng(302);
    for (Variant v : {Variant::Retention, Variant::Excess, Variant::LazyWalk}) {
        for (int trial = 0; trial < 40; ++trial) {
            const Graph g = trial % 4 == 0 ? testing::weighted_digraph(30, 0.1, rng) : testing::random_connected(rng, 100);
            auto cfg = testing::random_config(rng, v);
            cfg.max_iterations = 3000;
            const NodeId seed = std::uniform_int_distribution<NodeId>(0, g.node_count() - 1)(rng);
            const auto run = run_distributed(g, seed, cfg);
            expect_same_result(run.result, run_query(g, seed, cfg));
        }
    }
}

TEST(DistsimProperties, RoundAccounting) {
    std::mt19937_64 rng(303);
    for (int trial = 0; trial < 60; ++trial) {
        const Graph g = testing::random_connected(rng, 120);
        auto cfg = testing::random_config(rng, Variant::Retention);
        cfg.max_iterations = 3000;
        const auto run = run_distributed(g, 0, cfg);
        for (const auto& r : run.rounds) {
            ASSERT_NEAR(r.total_charge, 1.0, 1e-12);
            ASSERT_NEAR(r.charge_at_barrier, 1.0, 1e-12);
            ASSERT_LE(r.messages_sent, 2 * g.edge_count());
        }
        if (run.result.terminated) {
            const auto b = compute_bounds(g, cfg);
            EXPECT_LE(run.distinct_recipients, b.max_touched);
            const auto rep = message_complexity_report(run.rounds, b, run.result.touched, g.max_degree());
            EXPECT_TRUE(rep.ok());
        }
    }
}

TEST(MessageComplexityReport, EmptyAndStar) {
    const auto empty = message_complexity_report({}, Bounds{}, 0, 0);
    EXPECT_EQ(empty.total_messages, 0u);
    EXPECT_EQ(empty.rounds, 0u);
    EXPECT_TRUE(empty.ok());

    const Graph g = testing::star(10);
    const auto cfg = config(0.5, 0.1);
    const auto run = run_distributed(g, 0, cfg);
    const auto rep = message_complexity_report(run.rounds, compute_bounds(g, cfg), run.result.touched, g.max_degree());
    EXPECT_EQ(rep.total_messages, 40u);
    EXPECT_EQ(rep.max_round_messages, 10u);
    EXPECT_EQ(rep.message_budget, 4.0 * 10 * 20);
    EXPECT_TRUE(rep.ok());
}

TEST(RoundStatsTsv, HeaderAndRows) {
    const auto run = run_distributed(testing::star(10), 0, config(0.5, 0.1));
    const auto text = round_stats_tsv(run.rounds);
    EXPECT_EQ(text.substr(0, text.find('\n')), "round\tmessages\tactive_count\ttotal_charge");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
    EXPECT_NE(text.find("\n1\t10\t1\t"), std::string::npos);
}

} // namespace
} // namespace chargeknn
