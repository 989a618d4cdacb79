#pragma once

// Sparsifier dispatch, metric histograms, divergence scores, and the
// experiment runner behind `evaluate`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mils/baselines.hpp"
#include "mils/generators.hpp"
#include "mils/graph.hpp"
#include "mils/mils.hpp"
#include "mils/parallel.hpp"

namespace mils {

// ---------------------------------------------------------------------------
// Histograms
// ---------------------------------------------------------------------------

struct Histogram {
    std::vector<double> low;
    std::vector<double> high;
    std::vector<std::size_t> counts;

    [[nodiscard]] std::size_t total() const
    {
        return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    }

    [[nodiscard]] std::vector<double> normalized() const
    {
        const auto t = static_cast<double>(total());
        std::vector<double> p(counts.size(), 0.0);
        for (std::size_t i = 0; i < counts.size() && t > 0; ++i) {
            p[i] = static_cast<double>(counts[i]) / t;
        }
        return p;
    }

    bool operator==(const Histogram&) const = default;
};

/// Fixed bins shared by every histogram of one metric on one input.
struct Binning {
    enum class Kind { integer, uniform };
    Kind kind = Kind::uniform;
    double low = 0.0;
    double high = 1.0;
    std::size_t bins = 1;

    /// One bin per integer 0..max.
    static Binning integers(std::size_t max) { return {Kind::integer, 0.0, static_cast<double>(max), max + 1}; }

    /// `bins` equal-width bins over [low, high]; a degenerate range is
    /// widened to [low, low + 1].
    static Binning uniform(double low, double high, std::size_t bins)
    {
        if (!(high > low)) {
            high = low + 1.0;
        }
        return {Kind::uniform, low, high, bins};
    }

    /// Bin index; values outside the range are clamped into the end bins.
    [[nodiscard]] std::size_t bin_of(double v) const
    {
        double idx = 0.0;
        if (kind == Kind::integer) {
            idx = std::round(v);
        } else {
            idx = std::floor((v - low) / (high - low) * static_cast<double>(bins));
        }
        if (!(idx > 0.0)) {
            return 0;
        }
        return std::min(bins - 1, static_cast<std::size_t>(idx));
    }

    [[nodiscard]] Histogram histogram(const std::vector<double>& values) const
    {
        Histogram h;
        h.counts.assign(bins, 0);
        for (std::size_t i = 0; i < bins; ++i) {
            if (kind == Kind::integer) {
                h.low.push_back(static_cast<double>(i));
                h.high.push_back(static_cast<double>(i + 1));
            } else {
                const double w = (high - low) / static_cast<double>(bins);
                h.low.push_back(low + w * static_cast<double>(i));
                h.high.push_back(i + 1 == bins ? high : low + w * static_cast<double>(i + 1));
            }
        }
        for (double v : values) {
            ++h.counts[bin_of(v)];
        }
        return h;
    }

    [[nodiscard]] std::string describe() const
    {
        if (kind == Kind::integer) {
            return "integer bins 0.." + std::to_string(bins - 1) + " (maximum of the original graph)";
        }
        return std::to_string(bins) + " equal-width bins over the original range; out-of-range values clamped into the end bins";
    }
};

/// Total variation distance between the normalized histograms, in [0, 1].
/// Two empty histograms are identical; an empty and a non-empty one are at
/// distance 1.
inline double total_variation(const Histogram& a, const Histogram& b)
{
    if (a.counts.size() != b.counts.size()) {
        throw Error("histograms use different binnings");
    }
    if (a.total() == 0 || b.total() == 0) {
        return a.total() == b.total() ? 0.0 : 1.0;
    }
    const auto p = a.normalized();
    const auto q = b.normalized();
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        s += std::abs(p[i] - q[i]);
    }
    return std::clamp(0.5 * s, 0.0, 1.0);
}

/// Overlapping area of the normalized histograms, in [0, 1].
inline double histogram_intersection(const Histogram& a, const Histogram& b)
{
    return 1.0 - total_variation(a, b);
}

inline void write_histogram_csv(const Histogram& h, std::ostream& out)
{
    out << "bin_low,bin_high,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        out << detail::format_double(h.low[i]) << ',' << detail::format_double(h.high[i]) << ',' << h.counts[i] << '\n';
    }
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

enum class Metric { degree, betweenness, edge_betweenness, eigenvector };

inline std::string to_string(Metric m)
{
    switch (m) {
    case Metric::degree:
        return "degree";
    case Metric::betweenness:
        return "betweenness";
    case Metric::edge_betweenness:
        return "edge-betweenness";
    case Metric::eigenvector:
        return "eigenvector";
    }
    return "?";
}

inline Metric parse_metric(const std::string& s)
{
    for (Metric m : {Metric::degree, Metric::betweenness, Metric::edge_betweenness, Metric::eigenvector}) {
        if (s == to_string(m)) {
            return m;
        }
    }
    throw Error("unknown metric '" + s + "' (expected degree, betweenness, edge-betweenness or eigenvector)");
}

/// Per-node values, or per-edge values for edge betweenness.
inline std::vector<double> metric_values(const Graph& g, Metric m)
{
    switch (m) {
    case Metric::degree: {
        std::vector<double> v;
        for (std::size_t d : degrees(g)) {
            v.push_back(static_cast<double>(d));
        }
        return v;
    }
    case Metric::betweenness:
        return betweenness_centrality(g);
    case Metric::edge_betweenness:
        return edge_betweenness(g);
    case Metric::eigenvector:
        return eigenvector_centrality(g);
    }
    return {};
}

/// Degree: integer bins up to the original maximum degree. Others: 20
/// equal-width bins over the original graph's value range.
inline Binning binning_for(const std::vector<double>& original_values, Metric m)
{
    if (m == Metric::degree) {
        double mx = 0.0;
        for (double v : original_values) {
            mx = std::max(mx, v);
        }
        return Binning::integers(static_cast<std::size_t>(mx));
    }
    if (original_values.empty()) {
        return Binning::uniform(0.0, 1.0, 20);
    }
    const auto [lo, hi] = std::minmax_element(original_values.begin(), original_values.end());
    return Binning::uniform(*lo, *hi, 20);
}

// ---------------------------------------------------------------------------
// Sparsifier dispatch
// ---------------------------------------------------------------------------

enum class SparsifierKind { mils, mils_seq, random, spanning_tree, transitive, spectral };

inline std::string to_string(SparsifierKind k)
{
    switch (k) {
    case SparsifierKind::mils:
        return "mils";
    case SparsifierKind::mils_seq:
        return "mils-seq";
    case SparsifierKind::random:
        return "random";
    case SparsifierKind::spanning_tree:
        return "spanning-tree";
    case SparsifierKind::transitive:
        return "transitive";
    case SparsifierKind::spectral:
        return "spectral";
    }
    return "?";
}

inline SparsifierKind parse_sparsifier(const std::string& s)
{
    for (SparsifierKind k : {SparsifierKind::mils, SparsifierKind::mils_seq, SparsifierKind::random,
                             SparsifierKind::spanning_tree, SparsifierKind::transitive, SparsifierKind::spectral}) {
        if (s == to_string(k)) {
            return k;
        }
    }
    throw Error("unknown method '" + s + "'");
}

inline std::string to_string(Neutrality n) { return n == Neutrality::min_loss ? "min-loss" : "log-target"; }

inline Neutrality parse_neutrality(const std::string& s)
{
    if (s == "min-loss") {
        return Neutrality::min_loss;
    }
    if (s == "log-target") {
        return Neutrality::log_target;
    }
    throw Error("unknown mode '" + s + "' (expected min-loss or log-target)");
}

/// Whether a method's output depends on a seed.
inline bool is_seeded(SparsifierKind k) { return k == SparsifierKind::random || k == SparsifierKind::spectral; }

struct SparsifyRequest {
    SparsifierKind kind = SparsifierKind::mils;
    std::size_t target = 0;
    NeutralityMode mode{};
    std::uint64_t seed = 0;
    double epsilon = 0.5;  ///< spectral only
    std::size_t workers = 1;
};

struct SparsifyOutcome {
    Graph reduced;                    ///< for spectral: the unweighted support
    std::vector<TraceStep> trace;     ///< MILS variants only
    std::vector<double> weights;      ///< spectral only; per original edge id
    bool forest = false;              ///< spanning tree of a disconnected graph
};

/// Runs one sparsifier. The target must not exceed the edge count; the
/// spanning-tree, transitive and spectral methods have their own output
/// size and ignore it otherwise.
inline SparsifyOutcome run_sparsifier(const Graph& g, const EstimatorConfig& cfg, const SparsifyRequest& req)
{
    detail::check_target(req.target, g.edge_count());
    SparsifyOutcome out;
    switch (req.kind) {
    case SparsifierKind::mils: {
        auto res = mils::mils(EdgeSubgraph(g), req.target, cfg, req.mode, {req.workers, true});
        out.reduced = res.reduced.graph();
        out.trace = std::move(res.trace);
        break;
    }
    case SparsifierKind::mils_seq: {
        auto res = mils_sequential(EdgeSubgraph(g), req.target, cfg, {req.workers, true});
        out.reduced = res.reduced.graph();
        out.trace = std::move(res.trace);
        break;
    }
    case SparsifierKind::random:
        out.reduced = random_deletion(g, req.target, req.seed);
        break;
    case SparsifierKind::spanning_tree: {
        auto res = spanning_tree(g);
        out.reduced = std::move(res.tree);
        out.forest = res.forest;
        break;
    }
    case SparsifierKind::transitive:
        out.reduced = transitive_reduction(g);
        break;
    case SparsifierKind::spectral: {
        auto res = spectral_sparsify(g, req.epsilon, req.seed);
        out.reduced = res.support();
        out.weights = std::move(res.weight);
        break;
    }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

struct InputSpec {
    std::string name;
    std::optional<std::string> path;  ///< edge-list file
    nlohmann::json generator;         ///< synthetic stand-in when no path
};

struct MethodSpec {
    SparsifierKind kind = SparsifierKind::mils;
    NeutralityMode mode{};
    std::vector<std::uint64_t> seeds{0};
    double epsilon = 0.5;

    [[nodiscard]] std::string label() const
    {
        std::string s = to_string(kind);
        if (kind == SparsifierKind::mils) {
            s += "-" + to_string(mode.variant);
        }
        return s;
    }
};

struct Schedule {
    enum class Kind { edges, removed, fractions };
    Kind kind = Kind::removed;
    std::vector<double> points{0};

    /// Edge counts for a graph with `edges` edges; strictly decreasing.
    [[nodiscard]] std::vector<std::size_t> resolve(std::size_t edges) const
    {
        std::vector<std::size_t> out;
        for (double p : points) {
            long long v = 0;
            switch (kind) {
            case Kind::edges:
                v = std::llround(p);
                break;
            case Kind::removed:
                v = static_cast<long long>(edges) - std::llround(p);
                break;
            case Kind::fractions:
                v = std::llround(p * static_cast<double>(edges));
                break;
            }
            if (v < 0 || v > static_cast<long long>(edges)) {
                throw Error("schedule point resolves to " + std::to_string(v) + " edges; graph has " +
                            std::to_string(edges));
            }
            if (!out.empty() && static_cast<std::size_t>(v) >= out.back()) {
                throw Error("schedule must give strictly decreasing edge counts");
            }
            out.push_back(static_cast<std::size_t>(v));
        }
        return out;
    }
};

struct ExperimentConfig {
    std::vector<InputSpec> inputs;
    EstimatorConfig estimator;
    nlohmann::json estimator_json;  ///< as given, for the report
    std::vector<MethodSpec> methods;
    std::vector<Metric> metrics;
    Schedule schedule;
    std::filesystem::path output = "report";
    bool record_runtime = false;
    bool write_traces = true;
};

inline Method parse_estimator_method(const std::string& s)
{
    if (s == "bdm") {
        return Method::bdm;
    }
    if (s == "entropy") {
        return Method::block_entropy;
    }
    throw Error("unknown estimator method '" + s + "' (expected bdm or entropy)");
}

inline BoundaryPolicy parse_boundary(const std::string& s)
{
    if (s == "automatic") {
        return BoundaryPolicy::automatic;
    }
    if (s == "shrink") {
        return BoundaryPolicy::shrink;
    }
    if (s == "discard") {
        return BoundaryPolicy::discard;
    }
    throw Error("unknown boundary policy '" + s + "'");
}

inline Fallback parse_fallback(const std::string& s)
{
    if (s == "automatic") {
        return Fallback::automatic;
    }
    if (s == "none") {
        return Fallback::none;
    }
    if (s == "entropy") {
        return Fallback::entropy;
    }
    throw Error("unknown fallback '" + s + "'");
}

/// Default table locations: the directory named by MILS_TABLE_PATH, when
/// set, supplies ctm-b2-d12.csv (strings) and ctm-b2-d4x4.csv (arrays).
inline std::optional<std::filesystem::path> default_table(BlockKind kind)
{
    const char* dir = std::getenv("MILS_TABLE_PATH");
    if (dir == nullptr || *dir == '\0') {
        return std::nullopt;
    }
    const auto p = std::filesystem::path(dir) / (kind == BlockKind::string ? "ctm-b2-d12.csv" : "ctm-b2-d4x4.csv");
    if (!std::filesystem::exists(p)) {
        return std::nullopt;
    }
    return p;
}

/// Loads each table and assigns it by the kind of its entries.
inline void attach_tables(EstimatorConfig& cfg, const std::vector<std::filesystem::path>& paths)
{
    for (const auto& p : paths) {
        auto table = std::make_shared<const CtmTable>(load_ctm_table(p.string()));
        (table->kind() == BlockKind::string ? cfg.string_table : cfg.array_table) = std::move(table);
    }
}

inline void attach_default_tables(EstimatorConfig& cfg)
{
    for (BlockKind k : {BlockKind::string, BlockKind::array}) {
        auto& slot = k == BlockKind::string ? cfg.string_table : cfg.array_table;
        if (!slot) {
            if (auto p = default_table(k)) {
                attach_tables(cfg, {*p});
            }
        }
    }
}

namespace detail {

inline std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p)
{
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

inline void require_file(const std::filesystem::path& p)
{
    if (!std::filesystem::is_regular_file(p)) {
        throw Error("input file not found: " + p.string());
    }
}

}  // namespace detail

/// Parses an experiment description. Relative paths resolve against `base`
/// (the config file's directory).
inline ExperimentConfig parse_experiment(const nlohmann::json& j, const std::filesystem::path& base)
{
    ExperimentConfig cfg;
    try {
        if (!j.is_object()) {
            throw Error("experiment config must be a JSON object");
        }
        for (const auto& item : j.at("inputs")) {
            InputSpec in;
            if (item.is_string()) {
                const auto p = detail::resolve_path(base, item.get<std::string>());
                detail::require_file(p);
                in.path = p.string();
                in.name = p.stem().string();
            } else {
                if (item.contains("path")) {
                    const auto p = detail::resolve_path(base, item.at("path").get<std::string>());
                    detail::require_file(p);
                    in.path = p.string();
                    in.name = p.stem().string();
                } else {
                    in.generator = item.at("generator");
                    in.name = in.generator.at("model").get<std::string>() + "-" +
                              std::to_string(in.generator.value("seed", std::uint64_t{0}));
                }
                in.name = item.value("name", in.name);
            }
            cfg.inputs.push_back(std::move(in));
        }
        if (cfg.inputs.empty()) {
            throw Error("experiment needs at least one input");
        }

        const nlohmann::json est = j.value("estimator", nlohmann::json::object());
        cfg.estimator_json = est;
        cfg.estimator.method = parse_estimator_method(est.value("method", std::string("bdm")));
        cfg.estimator.string_block = est.value("string_block", std::size_t{12});
        cfg.estimator.array_block = est.value("array_block", std::size_t{4});
        cfg.estimator.boundary = parse_boundary(est.value("boundary", std::string("automatic")));
        cfg.estimator.fallback = parse_fallback(est.value("fallback", std::string("automatic")));
        std::vector<std::filesystem::path> tables;
        for (const auto& t : est.value("tables", nlohmann::json::array())) {
            const auto p = detail::resolve_path(base, t.get<std::string>());
            detail::require_file(p);
            tables.push_back(p);
        }
        attach_tables(cfg.estimator, tables);
        attach_default_tables(cfg.estimator);
        cfg.estimator.validate();

        for (const auto& m : j.at("methods")) {
            MethodSpec spec;
            spec.kind = parse_sparsifier(m.at("method").get<std::string>());
            spec.mode.variant = parse_neutrality(m.value("mode", std::string("min-loss")));
            spec.mode.epsilon = m.value("tolerance", 0.0);
            spec.epsilon = m.value("epsilon", 0.5);
            if (m.contains("seeds")) {
                spec.seeds = m.at("seeds").get<std::vector<std::uint64_t>>();
            } else if (m.contains("seed")) {
                spec.seeds = {m.at("seed").get<std::uint64_t>()};
            }
            if (!is_seeded(spec.kind)) {
                spec.seeds = {0};
            }
            if (spec.seeds.empty()) {
                throw Error("method " + spec.label() + " has an empty seed list");
            }
            cfg.methods.push_back(std::move(spec));
        }
        if (cfg.methods.empty()) {
            throw Error("experiment needs at least one method");
        }

        for (const auto& m : j.value("metrics", nlohmann::json::array({"degree", "edge-betweenness"}))) {
            cfg.metrics.push_back(parse_metric(m.get<std::string>()));
        }

        const auto& s = j.at("schedule");
        int kinds = 0;
        for (const auto& [key, kind] : {std::pair{"edges", Schedule::Kind::edges},
                                        std::pair{"removed", Schedule::Kind::removed},
                                        std::pair{"fractions", Schedule::Kind::fractions}}) {
            if (s.contains(key)) {
                cfg.schedule.kind = kind;
                cfg.schedule.points = s.at(key).get<std::vector<double>>();
                ++kinds;
            }
        }
        if (kinds != 1 || cfg.schedule.points.empty()) {
            throw Error("schedule needs exactly one non-empty list of 'edges', 'removed' or 'fractions'");
        }

        if (j.contains("output")) {
            cfg.output = detail::resolve_path(base, j.at("output").get<std::string>());
        }
        cfg.record_runtime = j.value("record_runtime", false);
        cfg.write_traces = j.value("write_traces", true);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("invalid experiment config: ") + e.what());
    }
    return cfg;
}

inline Graph generate_graph(const nlohmann::json& gen)
{
    const std::string model = gen.at("model").get<std::string>();
    const auto seed = gen.value("seed", std::uint64_t{0});
    const auto n = gen.at("nodes").get<std::size_t>();
    if (model == "gnm") {
        return erdos_renyi_gnm(n, gen.at("edges").get<std::size_t>(), seed);
    }
    if (model == "gnp") {
        return erdos_renyi_gnp(n, gen.at("p").get<double>(), seed);
    }
    if (model == "watts-strogatz") {
        return watts_strogatz(n, gen.at("k").get<std::size_t>(), gen.at("p").get<double>(), seed);
    }
    if (model == "barabasi-albert") {
        return barabasi_albert(n, gen.at("m").get<std::size_t>(), seed);
    }
    if (model == "random-dag") {
        return random_dag(n, gen.at("p").get<double>(), seed);
    }
    if (model == "complete") {
        return complete_graph(n);
    }
    throw Error("unknown generator model '" + model + "'");
}

inline Graph load_input(const InputSpec& in)
{
    if (in.path) {
        std::ifstream f(*in.path);
        if (!f) {
            throw Error("input file not found: " + *in.path);
        }
        return parse_edge_list(f, *in.path);
    }
    return generate_graph(in.generator);
}

// ---------------------------------------------------------------------------
// Running and reporting
// ---------------------------------------------------------------------------

struct MetricComparison {
    Histogram histogram;
    double tv = 0.0;
    double intersection = 1.0;
};

struct RunResult {
    std::string method;
    std::optional<std::uint64_t> seed;
    std::size_t target = 0;
    std::size_t final_edges = 0;
    std::size_t steps = 0;
    bool forest = false;
    std::optional<double> runtime_seconds;
    std::vector<MetricComparison> metrics;  ///< parallel to the config's metric list
    std::vector<TraceStep> trace;
    std::string artifact;  ///< file stem for the trace and CSVs
};

struct InputReport {
    std::string name;
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::vector<std::size_t> schedule;
    std::vector<Binning> binning;      ///< per metric
    std::vector<Histogram> original;   ///< per metric
    std::vector<RunResult> runs;       ///< ordered by method, seed, schedule point
};

/// Compares `reduced` with the original on every metric using the
/// original's binning.
inline std::vector<MetricComparison> compare_metrics(const Graph& reduced, const std::vector<Metric>& metrics,
                                                     const std::vector<Binning>& binning,
                                                     const std::vector<Histogram>& original)
{
    std::vector<MetricComparison> out;
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        MetricComparison c;
        c.histogram = binning[i].histogram(metric_values(reduced, metrics[i]));
        c.tv = total_variation(original[i], c.histogram);
        c.intersection = histogram_intersection(original[i], c.histogram);
        out.push_back(std::move(c));
    }
    return out;
}

/// Runs every method over every schedule point of every input. Jobs run on
/// up to `workers` threads; results are merged in a fixed order.
inline std::vector<InputReport> run_experiment(const ExperimentConfig& cfg, std::size_t workers = 1)
{
    std::vector<InputReport> reports;
    std::vector<Graph> graphs;
    struct Job {
        std::size_t input;
        std::size_t method;
        std::uint64_t seed;
        std::size_t target;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < cfg.inputs.size(); ++i) {
        Graph g = load_input(cfg.inputs[i]);
        InputReport rep;
        rep.name = cfg.inputs[i].name;
        rep.nodes = g.node_count();
        rep.edges = g.edge_count();
        rep.schedule = cfg.schedule.resolve(g.edge_count());
        for (Metric m : cfg.metrics) {
            const auto values = metric_values(g, m);
            rep.binning.push_back(binning_for(values, m));
            rep.original.push_back(rep.binning.back().histogram(values));
        }
        for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
            for (std::uint64_t seed : cfg.methods[m].seeds) {
                for (std::size_t target : rep.schedule) {
                    jobs.push_back({i, m, seed, target});
                }
            }
        }
        graphs.push_back(std::move(g));
        reports.push_back(std::move(rep));
    }

    std::vector<RunResult> results(jobs.size());
    parallel_for(jobs.size(), workers, [&](std::size_t j) {
        const Job& job = jobs[j];
        const MethodSpec& spec = cfg.methods[job.method];
        const InputReport& rep = reports[job.input];
        SparsifyRequest req{spec.kind, job.target, spec.mode, job.seed, spec.epsilon, 1};
        const auto start = std::chrono::steady_clock::now();
        SparsifyOutcome out = run_sparsifier(graphs[job.input], cfg.estimator, req);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

        RunResult r;
        r.method = spec.label();
        if (is_seeded(spec.kind)) {
            r.seed = job.seed;
        }
        r.target = job.target;
        r.final_edges = out.reduced.edge_count();
        r.steps = out.trace.size();
        r.forest = out.forest;
        if (cfg.record_runtime) {
            r.runtime_seconds = elapsed.count();
        }
        r.metrics = compare_metrics(out.reduced, cfg.metrics, rep.binning, rep.original);
        r.trace = std::move(out.trace);
        r.artifact = rep.name + "-" + r.method + (r.seed ? "-s" + std::to_string(*r.seed) : "") + "-" +
                     std::to_string(job.target);
        results[j] = std::move(r);
    });
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        reports[jobs[j].input].runs.push_back(std::move(results[j]));
    }
    return reports;
}

inline nlohmann::json histogram_to_json(const Histogram& h)
{
    nlohmann::json bins = nlohmann::json::array();
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        bins.push_back({{"bin_low", h.low[i]}, {"bin_high", h.high[i]}, {"count", h.counts[i]}});
    }
    return bins;
}

/// Builds the `mils-report/1` document.
inline nlohmann::json report_to_json(const ExperimentConfig& cfg, const std::vector<InputReport>& reports)
{
    nlohmann::json metrics = nlohmann::json::array();
    for (Metric m : cfg.metrics) {
        metrics.push_back(to_string(m));
    }
    nlohmann::json methods = nlohmann::json::array();
    for (const auto& m : cfg.methods) {
        nlohmann::json spec{{"label", m.label()}, {"method", to_string(m.kind)}};
        if (m.kind == SparsifierKind::mils) {
            spec["mode"] = to_string(m.mode.variant);
            spec["tolerance"] = m.mode.epsilon;
        }
        if (is_seeded(m.kind)) {
            spec["seeds"] = m.seeds;
        }
        if (m.kind == SparsifierKind::spectral) {
            spec["epsilon"] = m.epsilon;
        }
        methods.push_back(std::move(spec));
    }
    const auto table_origin = [](const std::shared_ptr<const CtmTable>& t) -> nlohmann::json {
        return t ? nlohmann::json(t->provenance()) : nlohmann::json(nullptr);
    };
    nlohmann::json doc{
        {"schema", "mils-report/1"},
        {"estimator",
         {{"method", cfg.estimator.method == Method::bdm ? "bdm" : "entropy"},
          {"string_block", cfg.estimator.string_block},
          {"array_block", cfg.estimator.array_block},
          {"string_table", table_origin(cfg.estimator.string_table)},
          {"array_table", table_origin(cfg.estimator.array_table)}}},
        {"metrics", metrics},
        {"methods", methods},
        {"inputs", nlohmann::json::array()},
    };
    for (const auto& rep : reports) {
        nlohmann::json in{{"name", rep.name},
                          {"nodes", rep.nodes},
                          {"edges", rep.edges},
                          {"schedule", rep.schedule},
                          {"binning", nlohmann::json::object()},
                          {"original", nlohmann::json::object()},
                          {"runs", nlohmann::json::array()}};
        for (std::size_t i = 0; i < cfg.metrics.size(); ++i) {
            in["binning"][to_string(cfg.metrics[i])] = rep.binning[i].describe();
            in["original"][to_string(cfg.metrics[i])] = histogram_to_json(rep.original[i]);
        }
        for (const auto& r : rep.runs) {
            nlohmann::json run{{"method", r.method},
                               {"seed", r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr)},
                               {"target", r.target},
                               {"final_edges", r.final_edges},
                               {"steps", r.steps},
                               {"forest", r.forest},
                               {"runtime_seconds", r.runtime_seconds ? nlohmann::json(*r.runtime_seconds)
                                                                     : nlohmann::json(nullptr)},
                               {"trace", cfg.write_traces && !r.trace.empty()
                                             ? nlohmann::json("traces/" + r.artifact + ".json")
                                             : nlohmann::json(nullptr)},
                               {"metrics", nlohmann::json::object()}};
            for (std::size_t i = 0; i < cfg.metrics.size(); ++i) {
                run["metrics"][to_string(cfg.metrics[i])] = {{"tv", r.metrics[i].tv},
                                                             {"intersection", r.metrics[i].intersection},
                                                             {"histogram", histogram_to_json(r.metrics[i].histogram)}};
            }
            in["runs"].push_back(std::move(run));
        }
        doc["inputs"].push_back(std::move(in));
    }
    return doc;
}

/// Writes report.json, per-run histogram CSVs under histograms/, and MILS
/// traces under traces/.
inline void write_report(const ExperimentConfig& cfg, const std::vector<InputReport>& reports,
                         const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir / "histograms");
    auto write = [](const fs::path& p, const std::string& text) {
        std::ofstream f(p, std::ios::binary);
        if (!f) {
            throw Error("cannot write " + p.string());
        }
        f << text;
    };
    write(dir / "report.json", report_to_json(cfg, reports).dump(2) + "\n");
    for (const auto& rep : reports) {
        for (std::size_t i = 0; i < cfg.metrics.size(); ++i) {
            std::ostringstream csv;
            write_histogram_csv(rep.original[i], csv);
            write(dir / "histograms" / (rep.name + "-original-" + to_string(cfg.metrics[i]) + ".csv"), csv.str());
        }
        for (const auto& r : rep.runs) {
            for (std::size_t i = 0; i < cfg.metrics.size(); ++i) {
                std::ostringstream csv;
                write_histogram_csv(r.metrics[i].histogram, csv);
                write(dir / "histograms" / (r.artifact + "-" + to_string(cfg.metrics[i]) + ".csv"), csv.str());
            }
            if (cfg.write_traces && !r.trace.empty()) {
                fs::create_directories(dir / "traces");
                write(dir / "traces" / (r.artifact + ".json"), trace_to_json(r.trace).dump(2) + "\n");
            }
        }
    }
}

}  // namespace mils
