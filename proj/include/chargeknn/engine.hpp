#ifndef CHARGEKNN_ENGINE_HPP_
#define CHARGEKNN_ENGINE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <chargeknn/diffusion.hpp>
#include <chargeknn/graph.hpp>

namespace chargeknn {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/**
 * Checks parameter ranges (throws ConfigError) and returns warnings about
 * graph/parameter combinations for which the query is known not to stop:
 * with n <= 1/epsilon some node always holds more than epsilon.
 */
inline std::vector<std::string> validate_config(const Graph& g, const DiffusionConfig& raw) {
    const DiffusionConfig cfg = raw.effective();
    auto out_of_unit = [](double v) { return !(v > 0.0 && v < 1.0); };
    if (cfg.max_iterations == 0)
        throw ConfigError("max_iterations must be positive");
    if (cfg.variant == Variant::LazyWalk)
        return {};
    if (out_of_unit(cfg.alpha))
        throw ConfigError("alpha must lie in (0, 1), got " + std::to_string(cfg.alpha));
    if (out_of_unit(cfg.epsilon))
        throw ConfigError("epsilon must lie in (0, 1), got " + std::to_string(cfg.epsilon));
    if (out_of_unit(cfg.delta))
        throw ConfigError("delta must lie in (0, 1), got " + std::to_string(cfg.delta));
    if (!(cfg.delta < cfg.epsilon))
        throw ConfigError("delta must be smaller than epsilon");

    std::vector<std::string> warnings;
    const double n = static_cast<double>(g.node_count());
    const double inv_eps = 1.0 / cfg.epsilon;
    const double core_cap = 1.0 / ((1.0 - cfg.alpha) * cfg.epsilon);
    if (n <= inv_eps) {
        std::ostringstream os;
        os << "n = " << g.node_count() << " <= 1/epsilon = " << inv_eps
           << ": some node always keeps more than epsilon, non-termination expected";
        warnings.push_back(os.str());
    }
    if (n < core_cap) {
        std::ostringstream os;
        os << "n = " << g.node_count() << " < 1/((1-alpha)*epsilon) = " << core_cap
           << ": core-size guarantees assume a larger graph";
        warnings.push_back(os.str());
    }
    return warnings;
}

struct RankedNode {
    NodeId node;
    double charge;
    friend bool operator==(const RankedNode&, const RankedNode&) = default;
};

struct QueryResult {
    NodeId seed = 0;
    /// Ever-active nodes H, ascending.
    std::vector<NodeId> nn_set;
    /// Positive-charge nodes by charge descending, ties by ascending id.
    std::vector<RankedNode> ranking;
    /// Positive charges, ascending by node id.
    std::vector<RankedNode> final_charges;
    std::uint64_t iterations = 0;
    bool terminated = false;
    std::size_t touched = 0;
    /// a^0 .. a^t, Excess variant only.
    std::vector<double> excess_trace;
    ChargeState final_state;
};

struct NoObserver {
    void operator()(const ChargeState&) const {}
};

inline QueryResult make_result(ChargeState state, bool terminated, std::vector<double> excess_trace) {
    QueryResult r;
    r.seed = state.seed;
    r.nn_set = state.ever_active();
    for (NodeId u : state.support)
        r.final_charges.push_back({u, state.x[u]});
    r.ranking = r.final_charges;
    std::stable_sort(r.ranking.begin(), r.ranking.end(),
                     [](const RankedNode& a, const RankedNode& b) { return a.charge > b.charge; });
    r.iterations = state.t;
    r.terminated = terminated;
    r.touched = state.support.size();
    r.excess_trace = std::move(excess_trace);
    r.final_state = std::move(state);
    return r;
}

/**
 * Runs the configured variant from a unit charge on `seed`.
 *
 * Retention stops when no active node has out-arcs; Excess stops when the
 * excess total falls below delta (or nothing can move); the lazy walk runs
 * until max_iterations. Hitting the cap gives terminated = false.
 * `observe` sees the initial state and the state after every step.
 */
template <class Observer = NoObserver>
QueryResult run_query(const Graph& g, NodeId seed, const DiffusionConfig& raw, Observer&& observe = {}) {
    validate_config(g, raw);
    const DiffusionConfig cfg = raw.effective();
    ChargeState state = init_state(g, seed, cfg);
    StepWorkspace ws;
    std::vector<double> trace;
    const bool excess = cfg.variant == Variant::Excess;
    if (excess)
        trace.push_back(excess_total(state, cfg));
    observe(std::as_const(state));

    auto done = [&] {
        if (excess && trace.back() < cfg.delta)
            return true;
        return !can_transfer(g, state, cfg);
    };
    bool stopped = done();
    while (!stopped && state.t < cfg.max_iterations) {
        advance(state, g, cfg, ws);
        if (excess)
            trace.push_back(excess_total(state, cfg));
        observe(std::as_const(state));
        stopped = done();
    }
    return make_result(std::move(state), stopped, std::move(trace));
}

/// First k ranked nodes, optionally skipping the seed.
inline std::vector<NodeId> top_k(const QueryResult& result, std::size_t k, bool include_seed) {
    std::vector<NodeId> out;
    for (const auto& r : result.ranking) {
        if (out.size() >= k)
            break;
        if (!include_seed && r.node == result.seed)
            continue;
        out.push_back(r.node);
    }
    return out;
}

struct Bounds {
    std::uint64_t max_core_size = 0;
    std::uint64_t max_touched = 0;
    double max_iterations_bound = 0.0;
    double excess_stop_bound = 0.0;
};

namespace detail {
/// floor() that forgives rounding just below an integer, e.g. 1/(0.5*0.1).
inline std::uint64_t tolerant_floor(double v) {
    if (!std::isfinite(v) || v >= 1.8e19)
        return std::numeric_limits<std::uint64_t>::max();
    const double r = std::round(v);
    if (std::abs(v - r) <= 1e-9 * std::max(1.0, std::abs(v)))
        return static_cast<std::uint64_t>(r);
    return static_cast<std::uint64_t>(std::floor(v));
}
} // namespace detail

/**
 * Closed-form limits for a query:
 *   core size      floor(1 / ((1-alpha) eps))
 *   touched nodes  floor(d_max / (alpha eps))
 *   iterations     (1 - (1-alpha) eps) d_max / (alpha (1-alpha) eps^2)
 *   excess stop    log(delta) / log(alpha)
 */
inline Bounds compute_bounds(const Graph& g, const DiffusionConfig& cfg) {
    const double a = cfg.alpha;
    const double e = cfg.epsilon;
    const double dmax = static_cast<double>(g.max_degree());
    Bounds b;
    b.max_core_size = detail::tolerant_floor(1.0 / ((1.0 - a) * e));
    b.max_touched = detail::tolerant_floor(dmax / (a * e));
    b.max_iterations_bound = (1.0 - (1.0 - a) * e) * dmax / (a * (1.0 - a) * e * e);
    b.excess_stop_bound = std::log(cfg.delta) / std::log(a);
    return b;
}

/// Whether H together with the seed induces a subgraph in which every member is reachable from the seed.
inline bool nn_subgraph_connected(const Graph& g, const QueryResult& result) {
    std::vector<NodeId> members = result.nn_set;
    if (!std::binary_search(members.begin(), members.end(), result.seed)) {
        members.insert(std::upper_bound(members.begin(), members.end(), result.seed), result.seed);
    }
    auto in_h = [&](NodeId u) { return std::binary_search(members.begin(), members.end(), u); };
    auto slot = [&](NodeId u) {
        return static_cast<std::size_t>(std::lower_bound(members.begin(), members.end(), u) - members.begin());
    };
    std::vector<bool> seen(members.size(), false);
    seen[slot(result.seed)] = true;
    std::size_t reached = 1;
    std::deque<NodeId> queue{result.seed};
    while (!queue.empty()) {
        const NodeId u = queue.front();
        queue.pop_front();
        for (const auto& a : g.out_arcs(u)) {
            if (!in_h(a.target) || seen[slot(a.target)])
                continue;
            seen[slot(a.target)] = true;
            ++reached;
            queue.push_back(a.target);
        }
    }
    return reached == members.size();
}

struct PeripheryReport {
    std::size_t core_size = 0;
    /// Gamma_1(H): nodes outside H adjacent to (out-arcs of) H.
    std::size_t periphery_size = 0;
    /// Nodes outside H and Gamma_1(H) whose charge is not exactly zero.
    std::size_t nonzero_beyond_periphery = 0;
    double max_periphery_charge = 0.0;
    /// Every periphery charge is at most epsilon (inactive).
    bool periphery_below_epsilon = true;
    /// Every periphery charge is below (1-alpha) epsilon; reported only.
    bool periphery_below_retention_floor = true;

    bool structure_ok() const {
        return nonzero_beyond_periphery == 0 && periphery_below_epsilon;
    }
};

inline PeripheryReport periphery_check(const Graph& g, const QueryResult& result, const DiffusionConfig& raw) {
    const DiffusionConfig cfg = raw.effective();
    const auto& x = result.final_state.x;
    std::vector<std::uint8_t> role(g.node_count(), 0); // 0 outside, 1 core, 2 periphery
    for (NodeId u : result.nn_set)
        role[u] = 1;
    for (NodeId u : result.nn_set)
        for (const auto& a : g.out_arcs(u))
            if (role[a.target] == 0)
                role[a.target] = 2;

    PeripheryReport rep;
    rep.core_size = result.nn_set.size();
    const double floor_charge = (1.0 - cfg.alpha) * cfg.epsilon;
    for (NodeId u = 0; u < g.node_count(); ++u) {
        if (role[u] == 2) {
            ++rep.periphery_size;
            rep.max_periphery_charge = std::max(rep.max_periphery_charge, x[u]);
            if (x[u] > cfg.epsilon)
                rep.periphery_below_epsilon = false;
            if (!(x[u] < floor_charge))
                rep.periphery_below_retention_floor = false;
        } else if (role[u] == 0 && x[u] != 0.0) {
            ++rep.nonzero_beyond_periphery;
        }
    }
    return rep;
}

} // namespace chargeknn

#endif // CHARGEKNN_ENGINE_HPP_
