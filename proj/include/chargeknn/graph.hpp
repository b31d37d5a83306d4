#ifndef CHARGEKNN_GRAPH_HPP_
#define CHARGEKNN_GRAPH_HPP_

#include <algorithm>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <chargeknn/decimal.hpp>

namespace chargeknn {

using NodeId = std::uint32_t;

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Outgoing arc. `share` is weight / out-weight of the source, rounded once
/// from the exact ratio.
struct Arc {
    NodeId target;
    double weight;
    double share;
};

/// Incoming arc as seen by the receiver.
struct InArc {
    NodeId source;
    double share;
};

struct Edge {
    NodeId from;
    NodeId to;
    Decimal weight = Decimal::one();
};

/**
 * Immutable adjacency structure. Undirected graphs store every edge as a
 * pair of arcs (a self-loop as a single arc), so "out" and "in" views
 * coincide for them. Neighbour lists are sorted by node id.
 */
class Graph {
public:
    Graph() = default;

    /**
     * Builds a graph from an edge list. Throws GraphError on out-of-range
     * endpoints, non-positive weights and duplicate edges. For undirected
     * graphs {u,v} and {v,u} are the same edge.
     */
    static Graph from_edges(NodeId node_count, bool directed, std::span<const Edge> edges,
                            bool weighted = false) {
        Graph g;
        g.n_ = node_count;
        g.directed_ = directed;
        g.weighted_ = weighted;
        g.edge_count_ = edges.size();

        struct Pending {
            NodeId from, to;
            Decimal w;
            std::size_t index;
        };
        std::vector<Pending> arcs;
        arcs.reserve(directed ? edges.size() : 2 * edges.size());
        for (std::size_t k = 0; k < edges.size(); ++k) {
            const auto& e = edges[k];
            if (e.from >= node_count || e.to >= node_count)
                throw GraphError("edge " + std::to_string(k) + ": endpoint out of range");
            if (!e.weight.positive())
                throw GraphError("edge " + std::to_string(k) + ": weight must be positive");
            arcs.push_back({e.from, e.to, e.weight, k});
            if (!directed && e.from != e.to)
                arcs.push_back({e.to, e.from, e.weight, k});
        }
        std::sort(arcs.begin(), arcs.end(), [](const Pending& a, const Pending& b) {
            return a.from != b.from ? a.from < b.from
                                    : a.to != b.to ? a.to < b.to : a.index < b.index;
        });
        for (std::size_t k = 1; k < arcs.size(); ++k) {
            if (arcs[k].from == arcs[k - 1].from && arcs[k].to == arcs[k - 1].to) {
                throw GraphError("edge " + std::to_string(std::max(arcs[k].index, arcs[k - 1].index)) +
                                 ": duplicate edge " + std::to_string(arcs[k].from) + " " +
                                 std::to_string(arcs[k].to));
            }
        }

        g.out_offsets_.assign(node_count + 1, 0);
        for (const auto& a : arcs)
            ++g.out_offsets_[a.from + 1];
        std::partial_sum(g.out_offsets_.begin(), g.out_offsets_.end(), g.out_offsets_.begin());
        g.out_arcs_.resize(arcs.size());
        g.out_decimal_.resize(arcs.size());
        for (std::size_t k = 0; k < arcs.size(); ++k) {
            g.out_arcs_[k] = Arc{arcs[k].to, arcs[k].w.to_double(), 0.0};
            g.out_decimal_[k] = arcs[k].w;
        }

        g.out_weight_.assign(node_count, 0.0);
        for (NodeId u = 0; u < node_count; ++u)
            g.normalise_node(u);

        // Incoming view, sorted by source because arcs are visited in source order.
        g.in_offsets_.assign(node_count + 1, 0);
        for (const auto& a : g.out_arcs_)
            ++g.in_offsets_[a.target + 1];
        std::partial_sum(g.in_offsets_.begin(), g.in_offsets_.end(), g.in_offsets_.begin());
        g.in_arcs_.resize(g.out_arcs_.size());
        std::vector<std::size_t> fill(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
        for (NodeId u = 0; u < node_count; ++u) {
            for (const auto& a : g.out_arcs(u))
                g.in_arcs_[fill[a.target]++] = InArc{u, a.share};
        }
        for (NodeId u = 0; u < node_count; ++u)
            g.max_degree_ = std::max<std::size_t>(g.max_degree_, g.degree(u));
        return g;
    }

    NodeId node_count() const { return n_; }
    bool directed() const { return directed_; }
    bool weighted() const { return weighted_; }

    /// Undirected edges (a self-loop counts once) or directed arcs.
    std::size_t edge_count() const { return edge_count_; }
    std::size_t arc_count() const { return out_arcs_.size(); }

    std::span<const Arc> out_arcs(NodeId u) const {
        return {out_arcs_.data() + out_offsets_[u], out_offsets_[u + 1] - out_offsets_[u]};
    }
    std::span<const InArc> in_arcs(NodeId u) const {
        return {in_arcs_.data() + in_offsets_[u], in_offsets_[u + 1] - in_offsets_[u]};
    }

    /// Out-degree d_i (unweighted count; a self-loop counts once).
    std::size_t degree(NodeId u) const { return out_offsets_[u + 1] - out_offsets_[u]; }

    /// W_i, the sum of out-going weights.
    double out_weight(NodeId u) const { return out_weight_[u]; }

    std::size_t max_degree() const { return max_degree_; }

    Decimal exact_weight(NodeId u, std::size_t k) const { return out_decimal_[out_offsets_[u] + k]; }

    /// Canonical edge list: ascending (from, to); undirected edges once with from <= to.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (NodeId u = 0; u < n_; ++u) {
            const auto arcs = out_arcs(u);
            for (std::size_t k = 0; k < arcs.size(); ++k) {
                if (!directed_ && arcs[k].target < u)
                    continue;
                out.push_back({u, arcs[k].target, exact_weight(u, k)});
            }
        }
        return out;
    }

    friend bool operator==(const Graph& a, const Graph& b) {
        if (a.n_ != b.n_ || a.directed_ != b.directed_ || a.weighted_ != b.weighted_ ||
            a.out_offsets_ != b.out_offsets_ || a.out_decimal_ != b.out_decimal_)
            return false;
        for (std::size_t k = 0; k < a.out_arcs_.size(); ++k) {
            if (a.out_arcs_[k].target != b.out_arcs_[k].target)
                return false;
        }
        return true;
    }

private:
    void normalise_node(NodeId u) {
        const std::size_t begin = out_offsets_[u];
        const std::size_t end = out_offsets_[u + 1];
        if (begin == end)
            return;
        bool uniform = true;
        for (std::size_t k = begin + 1; k < end; ++k)
            uniform = uniform && out_decimal_[k] == out_decimal_[begin];
        const auto count = static_cast<double>(end - begin);
        if (uniform) {
            // w / (d*w) == 1/d exactly, and IEEE division is correctly rounded.
            for (std::size_t k = begin; k < end; ++k)
                out_arcs_[k].share = 1.0 / count;
            if (!weighted_ || out_decimal_[begin] == Decimal::one()) {
                out_weight_[u] = count;
                return;
            }
        }
        std::vector<Decimal> ws(out_decimal_.begin() + static_cast<std::ptrdiff_t>(begin),
                                out_decimal_.begin() + static_cast<std::ptrdiff_t>(end));
        const auto scaled = detail::common_scale(ws);
        detail::BigInt total = 0;
        for (const auto& s : scaled)
            total += s;
        std::int32_t lowest = ws.front().exponent;
        for (const auto& w : ws)
            lowest = std::min(lowest, w.exponent);
        out_weight_[u] = lowest >= 0
                             ? detail::nearest_double(total * detail::pow10(lowest), 1)
                             : detail::nearest_double(total, detail::pow10(-static_cast<std::int64_t>(lowest)));
        if (!uniform) {
            for (std::size_t k = begin; k < end; ++k)
                out_arcs_[k].share = detail::nearest_double(scaled[k - begin], total);
        }
    }

    NodeId n_ = 0;
    bool directed_ = false;
    bool weighted_ = false;
    std::size_t edge_count_ = 0;
    std::size_t max_degree_ = 0;
    std::vector<std::size_t> out_offsets_{0};
    std::vector<Arc> out_arcs_;
    std::vector<Decimal> out_decimal_;
    std::vector<double> out_weight_;
    std::vector<std::size_t> in_offsets_{0};
    std::vector<InArc> in_arcs_;
};

inline std::size_t max_degree(const Graph& g) { return g.max_degree(); }

namespace detail {

struct RawEdge {
    std::uint64_t from;
    std::uint64_t to;
    std::optional<Decimal> weight;
    std::size_t line;
};

struct RawEdgeList {
    std::vector<RawEdge> edges;
    bool weighted = false;
};

inline bool parse_id(std::string_view tok, std::uint64_t& out) {
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc{} && ptr == tok.data() + tok.size();
}

inline RawEdgeList read_raw_edges(std::istream& in) {
    RawEdgeList list;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        std::vector<std::string_view> toks;
        std::string_view rest(line);
        while (!rest.empty()) {
            const auto b = rest.find_first_not_of(" \t");
            if (b == std::string_view::npos)
                break;
            rest.remove_prefix(b);
            const auto e = rest.find_first_of(" \t");
            toks.push_back(rest.substr(0, e));
            rest.remove_prefix(e == std::string_view::npos ? rest.size() : e);
        }
        if (toks.empty() || toks.front().front() == '#')
            continue;
        const auto where = "line " + std::to_string(lineno) + ": ";
        if (toks.size() < 2 || toks.size() > 3)
            throw GraphError(where + "expected 'u v' or 'u v w'");
        RawEdge e{0, 0, std::nullopt, lineno};
        if (!parse_id(toks[0], e.from) || !parse_id(toks[1], e.to))
            throw GraphError(where + "node ids must be non-negative integers");
        if (toks.size() == 3) {
            e.weight = Decimal::parse(toks[2]);
            if (!e.weight)
                throw GraphError(where + "malformed weight '" + std::string(toks[2]) + "'");
            if (!e.weight->positive())
                throw GraphError(where + "weight must be positive");
            list.weighted = true;
        }
        list.edges.push_back(e);
    }
    return list;
}

/// Re-throws an edge-index error from Graph::from_edges with the source line.
inline Graph build_with_lines(NodeId n, bool directed, const std::vector<Edge>& edges,
                              const std::vector<std::size_t>& lines, bool weighted) {
    try {
        return Graph::from_edges(n, directed, edges, weighted);
    } catch (const GraphError& err) {
        std::string msg = err.what();
        if (msg.rfind("edge ", 0) == 0) {
            const auto colon = msg.find(':');
            const auto idx = std::stoull(msg.substr(5, colon - 5));
            throw GraphError("line " + std::to_string(lines[idx]) + msg.substr(colon));
        }
        throw;
    }
}

} // namespace detail

/**
 * Parses a whitespace-separated edge list (`u v` or `u v w` per line, `#`
 * comment lines). Node ids are taken as-is; n = 1 + max id.
 */
inline Graph parse_edge_list(std::istream& in, bool directed) {
    const auto raw = detail::read_raw_edges(in);
    std::uint64_t max_id = 0;
    bool any = false;
    std::vector<Edge> edges;
    std::vector<std::size_t> lines;
    for (const auto& e : raw.edges) {
        if (e.from >= std::numeric_limits<NodeId>::max() || e.to >= std::numeric_limits<NodeId>::max())
            throw GraphError("line " + std::to_string(e.line) + ": node id too large");
        max_id = std::max({max_id, e.from, e.to});
        any = true;
        edges.push_back({static_cast<NodeId>(e.from), static_cast<NodeId>(e.to),
                         e.weight.value_or(Decimal::one())});
        lines.push_back(e.line);
    }
    const NodeId n = any ? static_cast<NodeId>(max_id + 1) : 0;
    return detail::build_with_lines(n, directed, edges, lines, raw.weighted);
}

inline Graph parse_edge_list(std::string_view text, bool directed) {
    std::istringstream in{std::string(text)};
    return parse_edge_list(in, directed);
}

/// Graph over dense ids plus the original label of every node.
struct LabeledGraph {
    Graph graph;
    std::vector<std::uint64_t> labels;
    /// True when the file's labels were not exactly 0..max and were compacted.
    bool relabeled = false;

    std::optional<NodeId> id_of(std::uint64_t label) const {
        if (!relabeled)
            return label < labels.size() ? std::optional<NodeId>(static_cast<NodeId>(label)) : std::nullopt;
        auto it = std::lower_bound(labels.begin(), labels.end(), label);
        if (it == labels.end() || *it != label)
            return std::nullopt;
        return static_cast<NodeId>(it - labels.begin());
    }
    std::uint64_t label_of(NodeId id) const { return labels[id]; }
};

/**
 * Like parse_edge_list, but accepts arbitrary 64-bit labels. If the labels
 * in use are not exactly {0, ..., max}, they are mapped to dense ids in
 * ascending label order.
 */
inline LabeledGraph parse_labeled_edge_list(std::istream& in, bool directed) {
    const auto raw = detail::read_raw_edges(in);
    std::vector<std::uint64_t> labels;
    labels.reserve(raw.edges.size() * 2);
    for (const auto& e : raw.edges) {
        labels.push_back(e.from);
        labels.push_back(e.to);
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    if (labels.size() >= std::numeric_limits<NodeId>::max())
        throw GraphError("too many nodes");

    LabeledGraph out;
    out.relabeled = !labels.empty() && labels.back() + 1 != labels.size();
    out.labels = std::move(labels);
    std::vector<Edge> edges;
    std::vector<std::size_t> lines;
    for (const auto& e : raw.edges) {
        edges.push_back({*out.id_of(e.from), *out.id_of(e.to), e.weight.value_or(Decimal::one())});
        lines.push_back(e.line);
    }
    out.graph = detail::build_with_lines(static_cast<NodeId>(out.labels.size()), directed, edges, lines,
                                         raw.weighted);
    return out;
}

/// Edge-list text: ascending (i, j), weights only for weighted graphs.
inline std::string serialize_edge_list(const Graph& g) {
    std::string out;
    for (const auto& e : g.edges()) {
        out += std::to_string(e.from);
        out += ' ';
        out += std::to_string(e.to);
        if (g.weighted()) {
            out += ' ';
            out += e.weight.to_string();
        }
        out += '\n';
    }
    return out;
}

} // namespace chargeknn

#endif // CHARGEKNN_GRAPH_HPP_
