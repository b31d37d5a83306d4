#ifndef CHARGEKNN_BASELINES_HPP_
#define CHARGEKNN_BASELINES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <chargeknn/diffusion.hpp>
#include <chargeknn/graph.hpp>

// Reference implementations used to cross-check the diffusion code. They
// work on dense tables built from the raw edge weights and share no code
// with the sparse step kernel.

namespace chargeknn {

class OracleSizeError : public std::length_error {
public:
    using std::length_error::length_error;
};

inline constexpr std::size_t kDenseOracleLimit = 2000;

/**
 * Dense weight matrix and out-weight sums, with a brute-force step that
 * evaluates the update rule for every node from a full charge vector.
 */
class DenseOracle {
public:
    explicit DenseOracle(const Graph& g) : n_(g.node_count()) {
        if (n_ > kDenseOracleLimit)
            throw OracleSizeError("dense oracle limited to " + std::to_string(kDenseOracleLimit) + " nodes");
        w_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
        for (NodeId j = 0; j < n_; ++j)
            for (const auto& a : g.out_arcs(j))
                w_(j, a.target) = a.weight;
        row_sum_ = w_.rowwise().sum();
    }

    std::size_t size() const { return n_; }

    std::vector<double> step(const std::vector<double>& x, const DiffusionConfig& cfg) const {
        if (x.size() != n_)
            throw std::invalid_argument("charge vector has wrong length");
        const bool lazy = cfg.variant == Variant::LazyWalk;
        const double alpha = lazy ? 0.5 : cfg.alpha;
        const double eps = lazy ? 0.0 : cfg.epsilon;

        // out[j]: amount node j gives away in total this step.
        std::vector<double> out(n_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) {
            const bool z = lazy || x[j] > eps;
            if (!z || row_sum_(static_cast<Eigen::Index>(j)) == 0.0)
                continue;
            out[j] = cfg.variant == Variant::Excess ? alpha * (x[j] - eps) : alpha * x[j];
        }
        std::vector<double> next(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            double in = 0.0;
            for (std::size_t j = 0; j < n_; ++j) {
                const double wji = w_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
                if (wji != 0.0 && out[j] != 0.0)
                    in += out[j] * wji / row_sum_(static_cast<Eigen::Index>(j));
            }
            next[i] = x[i] - out[i] + in;
        }
        return next;
    }

private:
    std::size_t n_;
    Eigen::MatrixXd w_;
    Eigen::VectorXd row_sum_;
};

inline std::vector<double> oracle_step(const std::vector<double>& x, const Graph& g, const DiffusionConfig& cfg) {
    return DenseOracle(g).step(x, cfg);
}

/**
 * Lazy transition matrix M = I/2 + P^T/2 acting on column distributions,
 * P the row-normalised weight matrix. Rows without out-weight keep their
 * mass (M_jj = 1).
 */
inline Eigen::MatrixXd lazy_transition_matrix(const Graph& g) {
    const auto n = static_cast<Eigen::Index>(g.node_count());
    if (g.node_count() > kDenseOracleLimit)
        throw OracleSizeError("dense oracle limited to " + std::to_string(kDenseOracleLimit) + " nodes");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (NodeId j = 0; j < g.node_count(); ++j) {
        double total = 0.0;
        for (const auto& a : g.out_arcs(j))
            total += a.weight;
        if (total == 0.0) {
            m(j, j) = 1.0;
            continue;
        }
        m(j, j) += 0.5;
        for (const auto& a : g.out_arcs(j))
            m(a.target, j) += 0.5 * a.weight / total;
    }
    return m;
}

/// M^steps e_seed, with the power formed by repeated squaring.
inline std::vector<double> lazy_walk_matrix_power(const Graph& g, NodeId seed, std::size_t steps) {
    if (seed >= g.node_count())
        throw std::out_of_range("seed out of range");
    Eigen::MatrixXd base = lazy_transition_matrix(g);
    const auto n = base.rows();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t k = steps; k > 0; k >>= 1) {
        if (k & 1)
            acc = acc * base;
        if (k > 1)
            base = base * base;
    }
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(seed) = 1.0;
    const Eigen::VectorXd v = acc * e;
    return {v.data(), v.data() + v.size()};
}

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Power iteration for pi = teleport e_seed + (1 - teleport) pi P, with the
 * mass of dangling nodes sent back to the seed. Iterates until the L1
 * change is below tol.
 */
inline std::vector<double> personalized_pagerank(const Graph& g, NodeId seed, double teleport, double tol,
                                                 std::size_t max_iterations = 100000) {
    if (seed >= g.node_count())
        throw std::out_of_range("seed out of range");
    if (!(teleport > 0.0 && teleport < 1.0))
        throw std::invalid_argument("teleport must lie in (0, 1)");
    if (g.node_count() > kDenseOracleLimit)
        throw OracleSizeError("dense baseline limited to " + std::to_string(kDenseOracleLimit) + " nodes");
    const auto n = static_cast<Eigen::Index>(g.node_count());
    Eigen::MatrixXd pt = Eigen::MatrixXd::Zero(n, n);
    std::vector<bool> dangling(g.node_count(), false);
    for (NodeId j = 0; j < g.node_count(); ++j) {
        double total = 0.0;
        for (const auto& a : g.out_arcs(j))
            total += a.weight;
        if (total == 0.0) {
            dangling[j] = true;
            continue;
        }
        for (const auto& a : g.out_arcs(j))
            pt(a.target, j) += a.weight / total;
    }
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(n);
    pi(seed) = 1.0;
    for (std::size_t it = 0; it < max_iterations; ++it) {
        double lost = 0.0;
        for (NodeId j = 0; j < g.node_count(); ++j)
            if (dangling[j])
                lost += pi(j);
        Eigen::VectorXd next = (1.0 - teleport) * (pt * pi);
        next(seed) += teleport + (1.0 - teleport) * lost;
        const double change = (next - pi).lpNorm<1>();
        pi = next;
        if (change < tol)
            return {pi.data(), pi.data() + pi.size()};
    }
    throw ConvergenceError("personalized PageRank did not converge in " + std::to_string(max_iterations) +
                           " iterations");
}

/// Node ids by score descending, ties by ascending id, zero scores dropped.
inline std::vector<NodeId> rank_by_score(const std::vector<double>& scores) {
    std::vector<NodeId> ids;
    for (NodeId u = 0; u < scores.size(); ++u)
        if (scores[u] > 0.0)
            ids.push_back(u);
    std::stable_sort(ids.begin(), ids.end(), [&](NodeId a, NodeId b) { return scores[a] > scores[b]; });
    return ids;
}

/// |top-k(a) intersect top-k(b)| / k.
inline double overlap_at_k(const std::vector<NodeId>& a, const std::vector<NodeId>& b, std::size_t k) {
    if (k == 0)
        throw std::invalid_argument("k must be positive");
    std::vector<NodeId> ta(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(std::min(k, a.size())));
    std::vector<NodeId> tb(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(std::min(k, b.size())));
    std::sort(ta.begin(), ta.end());
    std::sort(tb.begin(), tb.end());
    std::vector<NodeId> common;
    std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(common));
    return static_cast<double>(common.size()) / static_cast<double>(k);
}

} // namespace chargeknn

#endif // CHARGEKNN_BASELINES_HPP_
