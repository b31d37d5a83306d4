#ifndef CHARGEKNN_DISTSIM_HPP_
#define CHARGEKNN_DISTSIM_HPP_

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <chargeknn/diffusion.hpp>
#include <chargeknn/engine.hpp>
#include <chargeknn/graph.hpp>

namespace chargeknn {

struct Message {
    NodeId sender;
    double amount;
};

/**
 * A node in the synchronous message-passing model. It knows only its own
 * charge and its out-arcs; everything it learns about neighbours arrives
 * through the inbox.
 */
class NodeActor {
public:
    NodeActor(NodeId id, std::span<const Arc> out, double charge, const DiffusionConfig& cfg)
        : id_(id), out_(out), charge_(charge), ever_active_(is_active(charge, cfg)) {}

    NodeId id() const { return id_; }
    double charge() const { return charge_; }
    bool ever_active() const { return ever_active_; }

    bool active(const DiffusionConfig& cfg) const {
        return cfg.variant == Variant::LazyWalk || is_active(charge_, cfg);
    }
    bool will_send(const DiffusionConfig& cfg) const { return active(cfg) && !out_.empty(); }

    /// Phase 1: keep this node's share and hand one message per out-arc to `post`.
    template <class Post>
    std::size_t emit(const DiffusionConfig& cfg, Post&& post) {
        if (!will_send(cfg))
            return 0;
        const double outgoing = outgoing_charge(charge_, cfg);
        charge_ = kept_after_sending(charge_, outgoing, out_);
        for (const auto& a : out_)
            post(a.target, Message{id_, outgoing * a.share});
        return out_.size();
    }

    void deliver(const Message& m) { inbox_.push_back(m); }

    double in_flight() const {
        double sum = 0.0;
        for (const auto& m : inbox_)
            sum += m.amount;
        return sum;
    }

    /// Phase 2: fold the inbox in ascending sender order.
    void fold(const DiffusionConfig& cfg) {
        if (inbox_.empty())
            return;
        std::sort(inbox_.begin(), inbox_.end(),
                  [](const Message& a, const Message& b) { return a.sender < b.sender; });
        double received = 0.0;
        for (const auto& m : inbox_)
            received += m.amount;
        charge_ += received;
        inbox_.clear();
        if (is_active(charge_, cfg))
            ever_active_ = true;
    }

private:
    NodeId id_;
    std::span<const Arc> out_;
    double charge_;
    bool ever_active_;
    std::vector<Message> inbox_;
};

struct RoundStats {
    std::uint64_t round = 0;
    std::size_t messages_sent = 0;
    /// Nodes with z = 1 at the start of the round.
    std::size_t active_count = 0;
    /// Charge at nodes after the fold.
    double total_charge = 0.0;
    /// Kept charge plus charge in transit, at the barrier between the phases.
    double charge_at_barrier = 0.0;
};

struct SimulationRun {
    QueryResult result;
    std::vector<RoundStats> rounds;
    std::size_t total_messages = 0;
    std::size_t distinct_recipients = 0;
};

/**
 * Lockstep simulation: every round, active nodes with out-arcs emit (phase
 * 1), then after a barrier every node folds its inbox (phase 2). An
 * omniscient coordinator stops the run when no node would emit, when the
 * excess total drops below delta (Excess), or at max_iterations. The halting
 * round is not recorded.
 */
inline SimulationRun run_distributed(const Graph& g, NodeId seed, const DiffusionConfig& raw) {
    validate_config(g, raw);
    const DiffusionConfig cfg = raw.effective();
    if (seed >= g.node_count())
        throw std::out_of_range("seed " + std::to_string(seed) + " out of range");

    std::vector<NodeActor> actors;
    actors.reserve(g.node_count());
    for (NodeId u = 0; u < g.node_count(); ++u)
        actors.emplace_back(u, g.out_arcs(u), u == seed ? 1.0 : 0.0, cfg);

    auto global_excess = [&] {
        double a = 0.0;
        for (const auto& actor : actors)
            if (actor.charge() > cfg.epsilon)
                a += actor.charge() - cfg.epsilon;
        return a;
    };

    SimulationRun run;
    std::vector<bool> recipient(g.node_count(), false);
    std::vector<double> trace;
    const bool excess = cfg.variant == Variant::Excess;
    std::uint64_t t = 0;
    bool terminated = false;
    for (;;) {
        if (excess) {
            trace.push_back(global_excess());
            if (trace.back() < cfg.delta) {
                terminated = true;
                break;
            }
        }
        const bool quiet = std::none_of(actors.begin(), actors.end(),
                                        [&](const NodeActor& a) { return a.will_send(cfg); });
        if (quiet) {
            terminated = true;
            break;
        }
        if (t >= cfg.max_iterations)
            break;

        RoundStats stats;
        stats.round = t + 1;
        for (const auto& actor : actors)
            stats.active_count += actor.active(cfg) ? 1 : 0;
        for (auto& actor : actors) {
            stats.messages_sent += actor.emit(cfg, [&](NodeId to, const Message& m) {
                actors[to].deliver(m);
                recipient[to] = true;
            });
        }
        for (const auto& actor : actors)
            stats.charge_at_barrier += actor.charge() + actor.in_flight();
        for (auto& actor : actors)
            actor.fold(cfg);
        for (const auto& actor : actors)
            stats.total_charge += actor.charge();
        run.total_messages += stats.messages_sent;
        run.rounds.push_back(stats);
        ++t;
    }

    ChargeState state;
    state.t = t;
    state.seed = seed;
    state.x.resize(g.node_count());
    state.ever_active_flag.resize(g.node_count());
    for (const auto& actor : actors) {
        state.x[actor.id()] = actor.charge();
        state.ever_active_flag[actor.id()] = actor.ever_active();
        if (actor.charge() > 0.0)
            state.support.push_back(actor.id());
    }
    run.distinct_recipients = static_cast<std::size_t>(std::count(recipient.begin(), recipient.end(), true));
    run.result = make_result(std::move(state), terminated, std::move(trace));
    return run;
}

struct MessageComplexityReport {
    std::size_t rounds = 0;
    std::size_t total_messages = 0;
    std::size_t max_round_messages = 0;
    /// rounds * d_max * max_core_size: every sender is a core node with at most d_max arcs.
    double message_budget = 0.0;
    bool within_message_budget = true;
    std::size_t touched = 0;
    std::uint64_t touched_bound = 0;
    bool within_touched_bound = true;

    bool ok() const { return within_message_budget && within_touched_bound; }
};

inline MessageComplexityReport message_complexity_report(std::span<const RoundStats> stats, const Bounds& bounds,
                                                         std::size_t touched, std::size_t d_max) {
    MessageComplexityReport rep;
    rep.rounds = stats.size();
    for (const auto& s : stats) {
        rep.total_messages += s.messages_sent;
        rep.max_round_messages = std::max(rep.max_round_messages, s.messages_sent);
    }
    rep.message_budget = static_cast<double>(rep.rounds) * static_cast<double>(d_max) *
                         static_cast<double>(bounds.max_core_size);
    rep.within_message_budget = static_cast<double>(rep.total_messages) <= rep.message_budget;
    rep.touched = touched;
    rep.touched_bound = bounds.max_touched;
    rep.within_touched_bound = touched <= bounds.max_touched;
    return rep;
}

/// Tab-separated round table with a header line.
inline std::string round_stats_tsv(std::span<const RoundStats> stats) {
    std::ostringstream os;
    os << "round\tmessages\tactive_count\ttotal_charge\n";
    os << std::setprecision(17);
    for (const auto& s : stats)
        os << s.round << '\t' << s.messages_sent << '\t' << s.active_count << '\t' << s.total_charge << '\n';
    return os.str();
}

} // namespace chargeknn

#endif // CHARGEKNN_DISTSIM_HPP_
