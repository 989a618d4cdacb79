// Command-line harness: CTM table generation, complexity queries,
// sparsification, evaluation reports and ECA coarse-graining.

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mils/ctm.hpp"
#include "mils/eca.hpp"
#include "mils/evaluate.hpp"

namespace fs = std::filesystem;
using namespace mils;

namespace {

/// Invalid invocation detected after argument parsing; exits with 2.
class UsageError : public Error {
public:
    using Error::Error;
};

struct EstimatorFlags {
    std::string method = "bdm";
    std::vector<std::string> tables;
    std::string fallback = "automatic";
    std::string boundary = "automatic";
    std::size_t string_block = 12;
    std::size_t array_block = 4;

    void add_to(CLI::App* cmd, bool with_method)
    {
        if (with_method) {
            cmd->add_option("--method", method, "Estimator")
                ->check(CLI::IsMember({"bdm", "entropy"}))
                ->capture_default_str();
        }
        cmd->add_option("--table", tables, "CTM table file(s); defaults come from MILS_TABLE_PATH")
            ->check(CLI::ExistingFile);
        cmd->add_option("--fallback", fallback, "Value for blocks missing from the table")
            ->check(CLI::IsMember({"automatic", "none", "entropy"}))
            ->capture_default_str();
        cmd->add_option("--boundary", boundary, "Handling of incomplete edge blocks")
            ->check(CLI::IsMember({"automatic", "shrink", "discard"}))
            ->capture_default_str();
        cmd->add_option("--string-block", string_block, "Block length for strings")->capture_default_str();
        cmd->add_option("--array-block", array_block, "Block dimension for matrices")->capture_default_str();
    }

    [[nodiscard]] EstimatorConfig build() const
    {
        EstimatorConfig cfg;
        cfg.method = parse_estimator_method(method);
        cfg.fallback = parse_fallback(fallback);
        cfg.boundary = parse_boundary(boundary);
        cfg.string_block = string_block;
        cfg.array_block = array_block;
        attach_tables(cfg, {tables.begin(), tables.end()});
        attach_default_tables(cfg);
        cfg.validate();
        return cfg;
    }
};

std::string read_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw Error("cannot read " + path);
    }
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw Error("cannot write " + path.string());
    }
    f << text;
}

void prepare_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) {
        throw Error("cannot create output directory " + dir.string());
    }
}

std::string fixed6(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

Graph load_graph(const std::string& path)
{
    std::ifstream f(path);
    if (!f) {
        throw Error("input file not found: " + path);
    }
    return parse_edge_list(f, path);
}

// ---------------------------------------------------------------------------

int cmd_ctm_gen(int states, int max_steps, const std::string& blanks, const std::string& out, std::size_t workers)
{
    if (states < 1) {
        throw UsageError("--states must be at least 1");
    }
    if (max_steps < 1) {
        throw UsageError("--max-steps must be at least 1");
    }
    const MachineSpec spec{states, 2};
    const auto dist =
        enumerate_machines(spec, max_steps, blanks == "zero" ? BlankTapes::zero : BlankTapes::both, workers);
    save_ctm_table(build_ctm_table(dist), out);
    std::cout << "machines " << dist.machines << " runs " << dist.runs << " halting " << dist.halting
              << " distinct outputs " << dist.counts.size() << " longest halting runtime "
              << dist.longest_halting_runtime << '\n';
    return 0;
}

/// Input formats: PBM (P1/P4), or text of 0/1 characters where one line is
/// a string and several lines are matrix rows. `#` lines and whitespace
/// inside lines are ignored.
std::variant<std::string, BitMatrix> read_bits(const std::string& path)
{
    const std::string text = read_file(path);
    if (text.rfind("P1", 0) == 0 || text.rfind("P4", 0) == 0) {
        std::istringstream in(text);
        return read_pbm(in, path);
    }
    std::vector<std::string> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string row;
        for (char c : line) {
            if (c == '0' || c == '1') {
                row += c;
            } else if (c == '#') {
                break;
            } else if (!std::isspace(static_cast<unsigned char>(c))) {
                throw Error(path + ":" + std::to_string(lineno) + ": unexpected character '" + c + "'");
            }
        }
        if (!row.empty()) {
            rows.push_back(std::move(row));
        }
    }
    if (rows.empty()) {
        throw Error(path + ": no bits found");
    }
    if (rows.size() == 1) {
        return rows.front();
    }
    return BitMatrix::from_rows(rows);
}

int cmd_complexity(const std::string& input, const EstimatorFlags& flags)
{
    const EstimatorConfig cfg = flags.build();
    const auto bits = read_bits(input);
    const double value = std::visit([&](const auto& x) { return complexity(x, cfg); }, bits);
    std::cout << fixed6(value) << '\n';
    return 0;
}

int cmd_sparsify(const std::string& graph_path, const std::string& method, std::size_t target,
                 const std::string& mode, std::uint64_t seed, double epsilon, const EstimatorFlags& flags,
                 const std::string& out, std::size_t workers)
{
    const Graph g = load_graph(graph_path);
    if (target > g.edge_count()) {
        throw UsageError("--target " + std::to_string(target) + " exceeds the graph's " +
                         std::to_string(g.edge_count()) + " edges");
    }
    const EstimatorConfig cfg = flags.build();
    SparsifyRequest req;
    req.kind = parse_sparsifier(method);
    req.target = target;
    req.mode.variant = parse_neutrality(mode);
    req.seed = seed;
    req.epsilon = epsilon;
    req.workers = workers;
    const SparsifyOutcome res = run_sparsifier(g, cfg, req);

    const fs::path dir(out);
    prepare_dir(dir);
    write_file(dir / "reduced.edges", to_edge_list(res.reduced));
    nlohmann::json doc{{"method", method},
                       {"target", target},
                       {"original_edges", g.edge_count()},
                       {"final_edges", res.reduced.edge_count()},
                       {"steps", trace_to_json(res.trace)}};
    if (req.kind == SparsifierKind::mils) {
        doc["mode"] = mode;
    }
    if (is_seeded(req.kind)) {
        doc["seed"] = seed;
    }
    if (req.kind == SparsifierKind::spectral) {
        doc["epsilon"] = epsilon;
        doc["weights"] = res.weights;
    }
    if (req.kind == SparsifierKind::spanning_tree) {
        doc["forest"] = res.forest;
    }
    write_file(dir / "trace.json", doc.dump(2) + "\n");
    std::cout << method << ": " << g.edge_count() << " -> " << res.reduced.edge_count() << " edges in "
              << res.trace.size() << " steps\n";
    return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& out, std::size_t workers)
{
    std::ifstream f(config_path);
    if (!f) {
        throw Error("input file not found: " + config_path);
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw Error(config_path + ": " + e.what());
    }
    ExperimentConfig cfg = parse_experiment(j, fs::absolute(config_path).parent_path());
    if (!out.empty()) {
        cfg.output = out;
    }
    const auto reports = run_experiment(cfg, workers);
    prepare_dir(cfg.output);
    write_report(cfg, reports, cfg.output);
    for (const auto& rep : reports) {
        std::cout << rep.name << " (" << rep.nodes << " nodes, " << rep.edges << " edges)\n";
        for (const auto& run : rep.runs) {
            std::cout << "  " << run.method << (run.seed ? " seed " + std::to_string(*run.seed) : "") << " target "
                      << run.target << " -> " << run.final_edges;
            for (std::size_t i = 0; i < cfg.metrics.size(); ++i) {
                std::cout << "  " << to_string(cfg.metrics[i]) << " tv " << fixed6(run.metrics[i].tv);
            }
            std::cout << '\n';
        }
    }
    std::cout << "report: " << (cfg.output / "report.json").string() << '\n';
    return 0;
}

int cmd_eca(int rule, std::size_t width, std::size_t steps, const std::string& coarse, const EstimatorFlags& flags,
            const std::string& out, std::size_t workers)
{
    const BitMatrix diagram = evolve(rule_table(rule), single_cell_row(width), steps);
    const fs::path dir(out);
    prepare_dir(dir);
    std::ostringstream d;
    write_pbm(diagram, d, "rule " + std::to_string(rule) + " width " + std::to_string(width) + " steps " +
                              std::to_string(steps));
    write_file(dir / "diagram.pbm", d.str());
    if (coarse.empty()) {
        std::cout << "diagram " << diagram.rows() << "x" << diagram.cols() << '\n';
        return 0;
    }
    std::size_t region = 0;
    double retain = 0.0;
    {
        const auto comma = coarse.find(',');
        try {
            if (comma == std::string::npos) {
                throw std::invalid_argument("missing comma");
            }
            std::size_t used = 0;
            region = std::stoul(coarse.substr(0, comma), &used);
            if (used != comma) {
                throw std::invalid_argument("region");
            }
            retain = std::stod(coarse.substr(comma + 1), &used);
            if (used != coarse.size() - comma - 1) {
                throw std::invalid_argument("fraction");
            }
        } catch (const std::exception&) {
            throw UsageError("--coarse-grain expects b,rho (for example 8,0.6), got '" + coarse + "'");
        }
    }
    const EstimatorConfig cfg = flags.build();
    const auto res = coarse_grain(diagram, region, retain, cfg, {}, {workers, true});
    std::ostringstream m;
    write_pbm(res.masked.cell_mask(), m, "masked regions (1 = masked)");
    write_file(dir / "mask.pbm", m.str());

    nlohmann::json ranking = nlohmann::json::array();
    for (const auto& r : res.ranking) {
        ranking.push_back({{"region", r.id}, {"contribution_bits", r.contribution}});
    }
    nlohmann::json masked = nlohmann::json::array();
    for (std::size_t i = 0; i < res.masked.region_count(); ++i) {
        if (res.masked.masked()[i]) {
            masked.push_back(i);
        }
    }
    const nlohmann::json doc{{"rule", rule},
                             {"width", width},
                             {"steps", steps},
                             {"region_size", region},
                             {"retain", retain},
                             {"grid", {{"rows", res.masked.grid_rows()}, {"cols", res.masked.grid_cols()}}},
                             {"regions", res.masked.region_count()},
                             {"masked", masked},
                             {"ranking", ranking},
                             {"trace", trace_to_json(res.trace)}};
    write_file(dir / "regions.json", doc.dump(2) + "\n");
    std::cout << "diagram " << diagram.rows() << "x" << diagram.cols() << ", masked " << res.masked.masked_count()
              << " of " << res.masked.region_count() << " regions in " << res.trace.size() << " steps\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Minimal information loss sparsification and algorithmic complexity tools"};
    app.require_subcommand(1);
    std::size_t workers = 1;
    app.add_option("--workers", workers, "Worker threads (results do not depend on this)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    int states = 0;
    int max_steps = 0;
    std::string blanks = "both";
    std::string out;
    auto* gen = app.add_subcommand("ctm-gen", "Enumerate small Turing machines and write a CTM table");
    gen->add_option("--states", states, "Number of machine states")->required();
    gen->add_option("--max-steps", max_steps, "Runtime cutoff")->required();
    gen->add_option("--blank", blanks, "Blank tapes to start from")
        ->check(CLI::IsMember({"zero", "both"}))
        ->capture_default_str();
    gen->add_option("--out", out, "Output CSV file")->required();

    std::string input;
    EstimatorFlags cx_flags;
    auto* cx = app.add_subcommand("complexity", "Estimate the complexity of a binary string or matrix");
    cx->add_option("--input", input, "0/1 text (one line: string, several: matrix) or PBM")
        ->required()
        ->check(CLI::ExistingFile);
    cx_flags.add_to(cx, true);

    std::string graph;
    std::string method;
    std::size_t target = 0;
    std::string mode = "min-loss";
    std::uint64_t seed = 0;
    double epsilon = 0.5;
    EstimatorFlags sp_flags;
    auto* sp = app.add_subcommand("sparsify", "Reduce a graph's edge set");
    sp->add_option("--graph", graph, "Edge list file")->required()->check(CLI::ExistingFile);
    sp->add_option("--method", method, "Sparsifier")
        ->required()
        ->check(CLI::IsMember({"mils", "mils-seq", "random", "spanning-tree", "transitive", "spectral"}));
    sp->add_option("--target", target, "Target edge count")->required();
    sp->add_option("--mode", mode, "MILS neutrality criterion")
        ->check(CLI::IsMember({"min-loss", "log-target"}))
        ->capture_default_str();
    sp->add_option("--seed", seed, "Seed for random and spectral")->capture_default_str();
    sp->add_option("--epsilon", epsilon, "Spectral approximation parameter")->capture_default_str();
    sp->add_option("--out", out, "Output directory")->required();
    sp_flags.add_to(sp, false);

    std::string config;
    std::string eval_out;
    auto* ev = app.add_subcommand("evaluate", "Run an experiment and write a report");
    ev->add_option("--config", config, "Experiment JSON")->required();
    ev->add_option("--out", eval_out, "Output directory (overrides the config)");

    int rule = 0;
    std::size_t width = 0;
    std::size_t steps = 0;
    std::string coarse;
    EstimatorFlags ca_flags;
    auto* ca = app.add_subcommand("eca", "Evolve an elementary cellular automaton and coarse-grain it");
    ca->add_option("--rule", rule, "Wolfram rule number")->required()->check(CLI::Range(0, 255));
    ca->add_option("--width", width, "Cells per row")->required();
    ca->add_option("--steps", steps, "Time steps")->required();
    ca->add_option("--coarse-grain", coarse, "Region size and retained fraction, e.g. 8,0.6");
    ca->add_option("--out", out, "Output directory")->required();
    ca_flags.add_to(ca, false);

    for (auto* cmd : {gen, cx, sp, ev, ca}) {
        cmd->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (gen->parsed()) {
            return cmd_ctm_gen(states, max_steps, blanks, out, workers);
        }
        if (cx->parsed()) {
            return cmd_complexity(input, cx_flags);
        }
        if (sp->parsed()) {
            return cmd_sparsify(graph, method, target, mode, seed, epsilon, sp_flags, out, workers);
        }
        if (ev->parsed()) {
            return cmd_evaluate(config, eval_out, workers);
        }
        if (ca->parsed()) {
            return cmd_eca(rule, width, steps, coarse, ca_flags, out, workers);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
