#ifndef CHARGEKNN_TESTS_FIXTURES_HPP_
#define CHARGEKNN_TESTS_FIXTURES_HPP_

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <chargeknn/diffusion.hpp>
#include <chargeknn/graph.hpp>

namespace chargeknn::testing {

inline Graph undirected(NodeId n, const std::vector<std::pair<NodeId, NodeId>>& pairs) {
    std::vector<Edge> edges;
    for (auto [u, v] : pairs)
        edges.push_back({u, v});
    return Graph::from_edges(n, false, edges);
}

/// K_{1,leaves}, centre 0.
inline Graph star(NodeId leaves) {
    std::vector<std::pair<NodeId, NodeId>> e;
    for (NodeId k = 1; k <= leaves; ++k)
        e.emplace_back(0, k);
    return undirected(leaves + 1, e);
}

inline Graph complete(NodeId n) {
    std::vector<std::pair<NodeId, NodeId>> e;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j)
            e.emplace_back(i, j);
    return undirected(n, e);
}

inline Graph path(NodeId n) {
    std::vector<std::pair<NodeId, NodeId>> e;
    for (NodeId i = 0; i + 1 < n; ++i)
        e.emplace_back(i, i + 1);
    return undirected(n, e);
}

/// `count` cliques of size `size`, clique c on ids [c*size, (c+1)*size),
/// consecutive cliques joined by one edge (last node of c to first of c+1).
inline Graph clique_chain(NodeId count, NodeId size) {
    std::vector<std::pair<NodeId, NodeId>> e;
    for (NodeId c = 0; c < count; ++c) {
        const NodeId base = c * size;
        for (NodeId i = 0; i < size; ++i)
            for (NodeId j = i + 1; j < size; ++j)
                e.emplace_back(base + i, base + j);
        if (c + 1 < count)
            e.emplace_back(base + size - 1, base + size);
    }
    return undirected(count * size, e);
}

/// Connected G(n, p): a random spanning tree plus independent extra edges.
inline Graph erdos_renyi_connected(NodeId n, double p, std::mt19937_64& rng) {
    std::set<std::pair<NodeId, NodeId>> e;
    for (NodeId v = 1; v < n; ++v) {
        std::uniform_int_distribution<NodeId> pick(0, v - 1);
        e.insert({pick(rng), v});
    }
    std::bernoulli_distribution coin(p);
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j)
            if (coin(rng))
                e.insert({i, j});
    return undirected(n, {e.begin(), e.end()});
}

/// Barabasi-Albert style growth: each new node attaches to up to m distinct
/// earlier nodes chosen proportionally to degree.
inline Graph preferential_attachment(NodeId n, NodeId m, std::mt19937_64& rng) {
    std::set<std::pair<NodeId, NodeId>> e;
    std::vector<NodeId> endpoints{0};
    for (NodeId v = 1; v < n; ++v) {
        std::set<NodeId> targets;
        const NodeId want = std::min<NodeId>(m, v);
        while (targets.size() < want) {
            std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
            targets.insert(endpoints[pick(rng)]);
        }
        for (NodeId t : targets) {
            e.insert({t, v});
            endpoints.push_back(t);
            endpoints.push_back(v);
        }
    }
    return undirected(n, {e.begin(), e.end()});
}

/// Random decimal weight with one decimal place in [0.1, 9.9].
inline Decimal random_weight(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::int64_t> m(1, 99);
    return Decimal::parse(std::to_string(m(rng)) + "e-1").value();
}

/// Strongly connected weighted digraph: a directed Hamiltonian cycle plus random arcs.
inline Graph weighted_digraph(NodeId n, double p, std::mt19937_64& rng) {
    std::vector<NodeId> order(n);
    for (NodeId i = 0; i < n; ++i)
        order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::set<std::pair<NodeId, NodeId>> arcs;
    for (NodeId k = 0; k < n && n > 1; ++k)
        arcs.insert({order[k], order[(k + 1) % n]});
    std::bernoulli_distribution coin(p);
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = 0; j < n; ++j)
            if (i != j && coin(rng))
                arcs.insert({i, j});
    std::vector<Edge> edges;
    for (auto [u, v] : arcs)
        edges.push_back({u, v, random_weight(rng)});
    return Graph::from_edges(n, true, edges, true);
}

/// Same topology with every weight multiplied by an exact decimal factor.
inline Graph scale_weights(const Graph& g, const Decimal& factor) {
    std::vector<Edge> edges = g.edges();
    for (auto& e : edges) {
        const std::string product = std::to_string(e.weight.mantissa * factor.mantissa) + "e" +
                                    std::to_string(e.weight.exponent + factor.exponent);
        e.weight = Decimal::parse(product).value();
    }
    return Graph::from_edges(g.node_count(), g.directed(), edges, true);
}

/// Mixed-shape random connected undirected graph with 2 <= n <= max_n.
inline Graph random_connected(std::mt19937_64& rng, NodeId max_n) {
    std::uniform_int_distribution<NodeId> size(2, max_n);
    const NodeId n = size(rng);
    if (std::bernoulli_distribution(0.5)(rng)) {
        std::uniform_real_distribution<double> density(0.0, std::min(1.0, 6.0 / n));
        return erdos_renyi_connected(n, density(rng), rng);
    }
    std::uniform_int_distribution<NodeId> attach(1, 4);
    return preferential_attachment(n, attach(rng), rng);
}

inline DiffusionConfig random_config(std::mt19937_64& rng, Variant v) {
    DiffusionConfig cfg;
    cfg.variant = v;
    cfg.alpha = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    cfg.epsilon = std::uniform_real_distribution<double>(0.01, 0.3)(rng);
    cfg.delta = cfg.epsilon / 100.0;
    return cfg;
}

/// Random probability vector with a few positive entries.
inline std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> x(n, 0.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double total = 0.0;
    for (auto& v : x) {
        if (std::bernoulli_distribution(0.4)(rng))
            v = u(rng);
        total += v;
    }
    if (total == 0.0) {
        x[0] = 1.0;
        return x;
    }
    for (auto& v : x)
        v /= total;
    return x;
}

inline double sum(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x)
        s += v;
    return s;
}

} // namespace chargeknn::testing

#endif // CHARGEKNN_TESTS_FIXTURES_HPP_
