#ifndef CHARGEKNN_DIFFUSION_HPP_
#define CHARGEKNN_DIFFUSION_HPP_

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <chargeknn/graph.hpp>

namespace chargeknn {

enum class Variant { Retention, Excess, LazyWalk };

inline std::string_view to_string(Variant v) {
    switch (v) {
    case Variant::Retention: return "retention";
    case Variant::Excess: return "excess";
    case Variant::LazyWalk: return "lazy";
    }
    return "unknown";
}

inline std::optional<Variant> parse_variant(std::string_view s) {
    if (s == "retention") return Variant::Retention;
    if (s == "excess") return Variant::Excess;
    if (s == "lazy") return Variant::LazyWalk;
    return std::nullopt;
}

struct DiffusionConfig {
    /// Fraction of charge (Retention) or of excess charge (Excess) an active node gives away.
    double alpha = 0.5;
    /// Activity threshold: a node is active iff its charge is strictly above epsilon.
    double epsilon = 0.01;
    /// Excess variant stops once total excess charge drops below delta.
    double delta = 1e-4;
    Variant variant = Variant::Retention;
    std::uint64_t max_iterations = 1'000'000;

    /// The lazy walk is the epsilon = 0, alpha = 1/2 instance; other variants are unchanged.
    DiffusionConfig effective() const {
        DiffusionConfig c = *this;
        if (c.variant == Variant::LazyWalk) {
            c.alpha = 0.5;
            c.epsilon = 0.0;
        }
        return c;
    }
};

inline bool is_active(double charge, const DiffusionConfig& cfg) { return charge > cfg.epsilon; }

/**
 * Charge vector x^t together with the bookkeeping a query needs. `support`
 * lists the nodes holding positive charge in ascending order; charge never
 * returns to zero once received, so it only grows. Steps touch only the
 * support and its out-neighbourhood.
 */
struct ChargeState {
    std::vector<double> x;
    std::uint64_t t = 0;
    NodeId seed = 0;
    std::vector<bool> ever_active_flag;
    std::vector<NodeId> support;

    /// Nodes that satisfied the activity predicate at some iteration <= t.
    std::vector<NodeId> ever_active() const {
        std::vector<NodeId> out;
        for (NodeId u : support)
            if (ever_active_flag[u])
                out.push_back(u);
        return out;
    }

    /// State from an arbitrary non-negative vector (general x^0).
    static ChargeState from_vector(std::vector<double> charges, const DiffusionConfig& cfg,
                                   NodeId seed = 0) {
        ChargeState s;
        s.x = std::move(charges);
        s.seed = seed;
        s.ever_active_flag.assign(s.x.size(), false);
        for (NodeId u = 0; u < s.x.size(); ++u) {
            if (s.x[u] < 0.0)
                throw std::invalid_argument("charge must be non-negative");
            if (s.x[u] > 0.0)
                s.support.push_back(u);
            if (is_active(s.x[u], cfg))
                s.ever_active_flag[u] = true;
        }
        return s;
    }

    friend bool operator==(const ChargeState& a, const ChargeState& b) {
        return a.t == b.t && a.seed == b.seed && a.x == b.x && a.ever_active_flag == b.ever_active_flag;
    }
};

/// Unit charge on `seed`, zero elsewhere.
inline ChargeState init_state(const Graph& g, NodeId seed, const DiffusionConfig& cfg = {}) {
    if (seed >= g.node_count())
        throw std::out_of_range("seed " + std::to_string(seed) + " out of range (n = " +
                                std::to_string(g.node_count()) + ")");
    std::vector<double> x(g.node_count(), 0.0);
    x[seed] = 1.0;
    return ChargeState::from_vector(std::move(x), cfg.effective(), seed);
}

/// Total charge above epsilon, sum of max(x_i - epsilon, 0) in ascending node order.
inline double excess_total(const ChargeState& s, const DiffusionConfig& cfg) {
    double a = 0.0;
    for (NodeId u : s.support)
        if (s.x[u] > cfg.epsilon)
            a += s.x[u] - cfg.epsilon;
    return a;
}

/// Scratch buffers reused across steps of one run.
struct StepWorkspace {
    std::vector<double> parcel;
    std::vector<double> kept;
    std::vector<std::uint8_t> sending;
    std::vector<NodeId> senders;
    std::vector<NodeId> receivers;
    std::vector<double> next;

    void reserve(std::size_t n) {
        if (parcel.size() < n) {
            parcel.assign(n, 0.0);
            kept.assign(n, 0.0);
            sending.assign(n, 0);
        }
    }
};

/// Amount an active node spreads over its out-arcs, per variant.
inline double outgoing_charge(double x, const DiffusionConfig& cfg) {
    switch (cfg.variant) {
    case Variant::Excess:
        return cfg.alpha * (x - cfg.epsilon);
    case Variant::LazyWalk:
        return 0.5 * x;
    case Variant::Retention:
        break;
    }
    return cfg.alpha * x;
}

/**
 * What a sender keeps: its charge minus the parcels it actually sent, summed
 * in arc order. Equals (1 - alpha) x, or eps + (1 - alpha)(x - eps), up to
 * rounding, without the one-sided drift of rounded 1 - alpha and shares.
 */
inline double kept_after_sending(double x, double outgoing, std::span<const Arc> out) {
    double sent = 0.0;
    for (const auto& a : out)
        sent += outgoing * a.share;
    return x - sent;
}

/// Whether `u` transmits this round: active (always, for the lazy walk) and has out-arcs.
inline bool transmits(const Graph& g, const ChargeState& s, NodeId u, const DiffusionConfig& cfg) {
    const bool z = cfg.variant == Variant::LazyWalk || is_active(s.x[u], cfg);
    return z && g.degree(u) > 0;
}

/// True if some node would send charge in the next step.
inline bool can_transfer(const Graph& g, const ChargeState& s, const DiffusionConfig& cfg) {
    if (cfg.variant == Variant::LazyWalk)
        return g.arc_count() > 0;
    for (NodeId u : s.support)
        if (transmits(g, s, u, cfg))
            return true;
    return false;
}

/**
 * One synchronous step in place. Activity is evaluated on the state before
 * the step; each receiver sums incoming amounts in ascending sender order and
 * adds the sum to what it kept. Nodes without out-arcs keep all charge.
 *
 * The lazy walk treats every node as active. Zero-charge senders would only
 * contribute +0.0, so they are skipped without changing any value.
 */
inline void advance(ChargeState& s, const Graph& g, const DiffusionConfig& cfg, StepWorkspace& ws) {
    ws.reserve(g.node_count());
    ws.senders.clear();
    ws.receivers.clear();
    for (NodeId u : s.support) {
        if (!transmits(g, s, u, cfg))
            continue;
        ws.senders.push_back(u);
        ws.sending[u] = 1;
        ws.parcel[u] = outgoing_charge(s.x[u], cfg);
        ws.kept[u] = kept_after_sending(s.x[u], ws.parcel[u], g.out_arcs(u));
        ws.receivers.push_back(u);
        for (const auto& a : g.out_arcs(u))
            ws.receivers.push_back(a.target);
    }
    std::sort(ws.receivers.begin(), ws.receivers.end());
    ws.receivers.erase(std::unique(ws.receivers.begin(), ws.receivers.end()), ws.receivers.end());

    ws.next.resize(ws.receivers.size());
    for (std::size_t k = 0; k < ws.receivers.size(); ++k) {
        const NodeId i = ws.receivers[k];
        const double base = ws.sending[i] ? ws.kept[i] : s.x[i];
        double received = 0.0;
        for (const auto& in : g.in_arcs(i))
            if (ws.sending[in.source])
                received += ws.parcel[in.source] * in.share;
        ws.next[k] = base + received;
    }

    bool support_grew = false;
    for (std::size_t k = 0; k < ws.receivers.size(); ++k) {
        const NodeId i = ws.receivers[k];
        if (s.x[i] == 0.0 && ws.next[k] > 0.0)
            support_grew = true;
        s.x[i] = ws.next[k];
        if (is_active(s.x[i], cfg))
            s.ever_active_flag[i] = true;
    }
    if (support_grew) {
        std::vector<NodeId> merged;
        merged.reserve(s.support.size() + ws.receivers.size());
        std::vector<NodeId> fresh;
        for (NodeId i : ws.receivers)
            if (s.x[i] > 0.0 && !std::binary_search(s.support.begin(), s.support.end(), i))
                fresh.push_back(i);
        std::merge(s.support.begin(), s.support.end(), fresh.begin(), fresh.end(),
                   std::back_inserter(merged));
        s.support = std::move(merged);
    }
    for (NodeId u : ws.senders) {
        ws.sending[u] = 0;
        ws.parcel[u] = 0.0;
    }
    ++s.t;
}

/// Dispatches on cfg.variant, returning the next state.
inline ChargeState step(const ChargeState& s, const Graph& g, const DiffusionConfig& cfg) {
    ChargeState next = s;
    StepWorkspace ws;
    advance(next, g, cfg.effective(), ws);
    return next;
}

/**
 * Retention rule: an active node keeps (1 - alpha) of its charge and
 * spreads alpha of it over its out-arcs in proportion to w_ij / W_i
 * (1 / d_i when unweighted). Inactive nodes keep everything.
 */
inline ChargeState step_retention(const ChargeState& s, const Graph& g, DiffusionConfig cfg) {
    cfg.variant = Variant::Retention;
    return step(s, g, cfg);
}

/// Excess rule: an active node keeps epsilon + (1 - alpha)(x - epsilon) and spreads alpha (x - epsilon).
inline ChargeState step_excess(const ChargeState& s, const Graph& g, DiffusionConfig cfg) {
    cfg.variant = Variant::Excess;
    return step(s, g, cfg);
}

/// One application of the lazy random-walk operator (stay with 1/2, move with 1/2).
inline ChargeState step_lazy_walk(const ChargeState& s, const Graph& g) {
    DiffusionConfig cfg;
    cfg.variant = Variant::LazyWalk;
    return step(s, g, cfg);
}

} // namespace chargeknn

#endif // CHARGEKNN_DIFFUSION_HPP_
