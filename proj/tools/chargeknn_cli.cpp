// Command-line front end: k-NN queries, round simulation, bounds and a
// personalized PageRank comparison on edge-list graphs.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <chargeknn/chargeknn.hpp>

namespace {

using chargeknn::NodeId;
using json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kConsistency = 3 };

struct CliConfig {
    std::string graph_path;
    bool directed = false;
    std::uint64_t seed = 0;
    double alpha = 0.5;
    double epsilon = 0.01;
    std::optional<double> delta;
    std::string variant = "retention";
    std::size_t k = 10;
    std::uint64_t max_iterations = 1'000'000;
    bool include_seed = false;
    std::string format = "json";
    double teleport = 0.15;

    chargeknn::DiffusionConfig diffusion() const {
        chargeknn::DiffusionConfig cfg;
        cfg.alpha = alpha;
        cfg.epsilon = epsilon;
        cfg.delta = delta.value_or(epsilon / 100.0);
        cfg.variant = *chargeknn::parse_variant(variant);
        cfg.max_iterations = max_iterations;
        return cfg.effective();
    }
};

class CliFailure : public std::runtime_error {
public:
    CliFailure(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
    int code() const { return code_; }

private:
    int code_;
};

struct Loaded {
    chargeknn::LabeledGraph lg;
    std::uint64_t label(NodeId u) const { return lg.label_of(u); }
};

Loaded load(const CliConfig& c) {
    std::ifstream in(c.graph_path);
    if (!in)
        throw CliFailure(kIo, "cannot open graph file '" + c.graph_path + "'");
    try {
        return Loaded{chargeknn::parse_labeled_edge_list(in, c.directed)};
    } catch (const chargeknn::GraphError& e) {
        throw CliFailure(kIo, c.graph_path + ": " + e.what());
    }
}

NodeId resolve_seed(const Loaded& g, const CliConfig& c) {
    const auto id = g.lg.id_of(c.seed);
    if (!id)
        throw CliFailure(kUsage, "seed " + std::to_string(c.seed) + " is not a node of the graph");
    return *id;
}

std::vector<std::string> check(const Loaded& g, const chargeknn::DiffusionConfig& cfg) {
    try {
        return chargeknn::validate_config(g.lg.graph, cfg);
    } catch (const chargeknn::ConfigError& e) {
        throw CliFailure(kUsage, e.what());
    }
}

json config_json(const CliConfig& c, const chargeknn::DiffusionConfig& cfg, bool with_seed) {
    json j;
    j["graph"] = c.graph_path;
    j["directed"] = c.directed;
    if (with_seed)
        j["seed"] = c.seed;
    j["variant"] = std::string(chargeknn::to_string(cfg.variant));
    j["alpha"] = cfg.alpha;
    j["epsilon"] = cfg.epsilon;
    j["delta"] = cfg.delta;
    j["k"] = c.k;
    j["max_iterations"] = cfg.max_iterations;
    j["include_seed"] = c.include_seed;
    j["format"] = c.format;
    return j;
}

json graph_json(const Loaded& g) {
    const auto& gr = g.lg.graph;
    json j;
    j["nodes"] = gr.node_count();
    j["edges"] = gr.edge_count();
    j["max_degree"] = gr.max_degree();
    j["directed"] = gr.directed();
    j["weighted"] = gr.weighted();
    j["relabeled"] = g.lg.relabeled;
    return j;
}

json labels_json(const Loaded& g, const std::vector<NodeId>& ids) {
    json arr = json::array();
    for (NodeId u : ids)
        arr.push_back(g.label(u));
    return arr;
}

json ranked_json(const Loaded& g, const chargeknn::QueryResult& r, const std::vector<NodeId>& ids) {
    json arr = json::array();
    for (NodeId u : ids) {
        const auto it = std::lower_bound(r.final_charges.begin(), r.final_charges.end(), u,
                                         [](const chargeknn::RankedNode& a, NodeId b) { return a.node < b; });
        arr.push_back({{"node", g.label(u)}, {"charge", it->charge}});
    }
    return arr;
}

void attach_relabeling(json& j, const Loaded& g) {
    if (g.lg.relabeled)
        j["relabeling"] = g.lg.labels;
}

void warn_all(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings)
        std::cerr << "warning: " << w << '\n';
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

int cmd_knn(const CliConfig& c) {
    const Loaded g = load(c);
    const auto cfg = c.diffusion();
    auto warnings = check(g, cfg);
    const NodeId seed = resolve_seed(g, c);
    const auto r = chargeknn::run_query(g.lg.graph, seed, cfg);
    if (!r.terminated)
        warnings.push_back("iteration cap of " + std::to_string(cfg.max_iterations) +
                           " reached without termination");
    warn_all(warnings);
    const auto top = chargeknn::top_k(r, c.k, c.include_seed);

    if (c.format == "tsv") {
        std::cout << "# terminated\t" << (r.terminated ? "true" : "false") << '\n'
                  << "# iterations\t" << r.iterations << '\n'
                  << "# nn_set_size\t" << r.nn_set.size() << '\n'
                  << "# touched\t" << r.touched << '\n'
                  << "rank\tnode\tcharge\n";
        const auto rows = ranked_json(g, r, top);
        for (std::size_t k = 0; k < rows.size(); ++k)
            std::cout << k + 1 << '\t' << rows[k]["node"].get<std::uint64_t>() << '\t'
                      << fmt(rows[k]["charge"].get<double>()) << '\n';
        return kOk;
    }
    json out;
    out["command"] = "knn";
    out["config"] = config_json(c, cfg, true);
    out["graph"] = graph_json(g);
    out["terminated"] = r.terminated;
    out["iterations"] = r.iterations;
    out["nn_set_size"] = r.nn_set.size();
    out["touched"] = r.touched;
    out["top_k"] = ranked_json(g, r, top);
    out["nn_set"] = labels_json(g, r.nn_set);
    if (cfg.variant == chargeknn::Variant::Excess)
        out["excess_trace"] = r.excess_trace;
    out["warnings"] = warnings;
    attach_relabeling(out, g);
    std::cout << out.dump(2) << '\n';
    return kOk;
}

int cmd_simulate(const CliConfig& c) {
    const Loaded g = load(c);
    const auto cfg = c.diffusion();
    auto warnings = check(g, cfg);
    const NodeId seed = resolve_seed(g, c);
    const auto run = chargeknn::run_distributed(g.lg.graph, seed, cfg);
    const auto central = chargeknn::run_query(g.lg.graph, seed, cfg);
    const bool matches = run.result.final_state.x == central.final_state.x &&
                         run.result.nn_set == central.nn_set && run.result.iterations == central.iterations;
    if (!run.result.terminated)
        warnings.push_back("iteration cap of " + std::to_string(cfg.max_iterations) +
                           " reached without termination");
    warn_all(warnings);
    std::string note;
    if (g.lg.graph.degree(seed) == 0)
        note = "seed has no out-edges";
    const auto bounds = chargeknn::compute_bounds(g.lg.graph, cfg);
    const auto rep = chargeknn::message_complexity_report(run.rounds, bounds, run.result.touched,
                                                          g.lg.graph.max_degree());

    if (c.format == "tsv") {
        std::cout << chargeknn::round_stats_tsv(run.rounds);
        std::cout << "# total_messages\t" << run.total_messages << '\n'
                  << "# terminated\t" << (run.result.terminated ? "true" : "false") << '\n'
                  << "# matches_centralized\t" << (matches ? "true" : "false") << '\n';
        if (!note.empty())
            std::cout << "# note\t" << note << '\n';
    } else {
        json out;
        out["command"] = "simulate";
        out["config"] = config_json(c, cfg, true);
        out["graph"] = graph_json(g);
        json rounds = json::array();
        for (const auto& s : run.rounds)
            rounds.push_back({{"round", s.round},
                              {"messages", s.messages_sent},
                              {"active_count", s.active_count},
                              {"total_charge", s.total_charge}});
        out["rounds"] = rounds;
        out["total_messages"] = run.total_messages;
        out["distinct_recipients"] = run.distinct_recipients;
        out["terminated"] = run.result.terminated;
        out["iterations"] = run.result.iterations;
        out["nn_set_size"] = run.result.nn_set.size();
        out["touched"] = run.result.touched;
        out["matches_centralized"] = matches;
        out["message_report"] = {{"message_budget", rep.message_budget},
                                 {"within_message_budget", rep.within_message_budget},
                                 {"touched_bound", rep.touched_bound},
                                 {"within_touched_bound", rep.within_touched_bound}};
        if (!note.empty())
            out["note"] = note;
        out["warnings"] = warnings;
        attach_relabeling(out, g);
        std::cout << out.dump(2) << '\n';
    }
    if (!matches) {
        std::cerr << "error: distributed run differs from the centralised run\n";
        return kConsistency;
    }
    return kOk;
}

int cmd_bounds(const CliConfig& c) {
    const Loaded g = load(c);
    const auto cfg = c.diffusion();
    const auto warnings = check(g, cfg);
    warn_all(warnings);
    const auto b = chargeknn::compute_bounds(g.lg.graph, cfg);
    if (c.format == "tsv") {
        std::cout << "quantity\tvalue\n"
                  << "nodes\t" << g.lg.graph.node_count() << '\n'
                  << "edges\t" << g.lg.graph.edge_count() << '\n'
                  << "max_degree\t" << g.lg.graph.max_degree() << '\n'
                  << "max_core_size\t" << b.max_core_size << '\n'
                  << "max_touched\t" << b.max_touched << '\n'
                  << "max_iterations_bound\t" << fmt(b.max_iterations_bound) << '\n'
                  << "excess_stop_bound\t" << fmt(b.excess_stop_bound) << '\n';
        return kOk;
    }
    json out;
    out["command"] = "bounds";
    out["config"] = config_json(c, cfg, false);
    out["graph"] = graph_json(g);
    out["bounds"] = {{"max_core_size", b.max_core_size},
                     {"max_touched", b.max_touched},
                     {"max_iterations_bound", b.max_iterations_bound},
                     {"excess_stop_bound", b.excess_stop_bound}};
    out["warnings"] = warnings;
    std::cout << out.dump(2) << '\n';
    return kOk;
}

int cmd_compare(const CliConfig& c) {
    const Loaded g = load(c);
    const auto cfg = c.diffusion();
    auto warnings = check(g, cfg);
    const NodeId seed = resolve_seed(g, c);
    const auto r = chargeknn::run_query(g.lg.graph, seed, cfg);
    if (!r.terminated)
        warnings.push_back("iteration cap of " + std::to_string(cfg.max_iterations) +
                           " reached without termination");
    std::vector<double> ppr;
    try {
        ppr = chargeknn::personalized_pagerank(g.lg.graph, seed, c.teleport, 1e-12);
    } catch (const chargeknn::ConvergenceError& e) {
        throw CliFailure(kUsage, e.what());
    } catch (const chargeknn::OracleSizeError& e) {
        throw CliFailure(kUsage, e.what());
    } catch (const std::invalid_argument& e) {
        throw CliFailure(kUsage, e.what());
    }
    warn_all(warnings);

    const auto ours = chargeknn::top_k(r, c.k, c.include_seed);
    std::vector<NodeId> theirs;
    for (NodeId u : chargeknn::rank_by_score(ppr)) {
        if (theirs.size() >= c.k)
            break;
        if (c.include_seed || u != seed)
            theirs.push_back(u);
    }
    const std::size_t k_eff = std::max<std::size_t>(1, std::min({c.k, ours.size(), theirs.size()}));
    const double overlap = chargeknn::overlap_at_k(ours, theirs, k_eff);
    std::string note;
    if (k_eff < c.k)
        note = "only " + std::to_string(k_eff) + " ranked nodes available; overlap computed at k = " +
               std::to_string(k_eff);

    if (c.format == "tsv") {
        std::cout << "# overlap_at_k\t" << fmt(overlap) << '\n' << "# k_effective\t" << k_eff << '\n';
        if (!note.empty())
            std::cout << "# note\t" << note << '\n';
        std::cout << "rank\tdiffusion\tppr\n";
        for (std::size_t k = 0; k < std::max(ours.size(), theirs.size()); ++k) {
            std::cout << k + 1 << '\t' << (k < ours.size() ? std::to_string(g.label(ours[k])) : "-") << '\t'
                      << (k < theirs.size() ? std::to_string(g.label(theirs[k])) : "-") << '\n';
        }
        return kOk;
    }
    json out;
    out["command"] = "compare";
    auto conf = config_json(c, cfg, true);
    conf["teleport"] = c.teleport;
    out["config"] = conf;
    out["graph"] = graph_json(g);
    out["diffusion"] = {{"top_k", ranked_json(g, r, ours)},
                        {"nn_set", labels_json(g, r.nn_set)},
                        {"touched", r.touched},
                        {"iterations", r.iterations},
                        {"terminated", r.terminated}};
    json ppr_top = json::array();
    for (NodeId u : theirs)
        ppr_top.push_back({{"node", g.label(u)}, {"score", ppr[u]}});
    out["ppr"] = {{"top_k", ppr_top}};
    out["overlap_at_k"] = overlap;
    out["k_effective"] = k_eff;
    if (!note.empty())
        out["note"] = note;
    out["warnings"] = warnings;
    attach_relabeling(out, g);
    std::cout << out.dump(2) << '\n';
    return kOk;
}

void add_common(CLI::App* sub, CliConfig& c, bool needs_seed) {
    sub->add_option("--graph", c.graph_path, "Edge-list file (u v [w] per line)")->required();
    sub->add_flag("--directed", c.directed, "Treat each line as an arc u -> v");
    auto* seed = sub->add_option("--seed", c.seed, "Query node label");
    if (needs_seed)
        seed->required();
    sub->add_option("--alpha", c.alpha, "Fraction of charge an active node gives away")->capture_default_str();
    sub->add_option("--epsilon", c.epsilon, "Activity threshold")->capture_default_str();
    sub->add_option("--delta", c.delta, "Excess stopping threshold (default epsilon/100)");
    sub->add_option("--variant", c.variant, "Update rule")
        ->check(CLI::IsMember({"retention", "excess", "lazy"}))
        ->capture_default_str();
    sub->add_option("--k", c.k, "Number of neighbours to report")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--max-iters", c.max_iterations, "Iteration cap")->capture_default_str();
    sub->add_flag("--include-seed", c.include_seed, "Allow the seed in the ranking");
    sub->add_option("--format", c.format, "Output format")
        ->check(CLI::IsMember({"json", "tsv"}))
        ->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local k-nearest-neighbour search by charge diffusion"};
    app.require_subcommand(1);
    CliConfig c;
    auto* knn = app.add_subcommand("knn", "Run a query and print the top-k neighbours");
    add_common(knn, c, true);
    auto* sim = app.add_subcommand("simulate", "Run the synchronous message-passing simulation");
    add_common(sim, c, true);
    auto* bounds = app.add_subcommand("bounds", "Print closed-form size and iteration bounds");
    add_common(bounds, c, false);
    auto* compare = app.add_subcommand("compare", "Compare against personalized PageRank");
    add_common(compare, c, true);
    compare->add_option("--teleport", c.teleport, "PageRank teleport probability")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*knn)
            return cmd_knn(c);
        if (*sim)
            return cmd_simulate(c);
        if (*bounds)
            return cmd_bounds(c);
        return cmd_compare(c);
    } catch (const CliFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code();
    }
}
