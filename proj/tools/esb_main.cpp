// esb: exact-subgraph SDP bounds for Max-Cut, stable set and coloring.

#include "esb/driver.hpp"
#include "esb/graph.hpp"
#include "esb/report.hpp"
#include "esb/sdp.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr int kExitParse = 2;
constexpr int kExitSolver = 3;

esb::Graph load_graph(const std::string& path, const std::string& format) {
    std::ifstream in(path);
    if (!in) throw esb::ParseError("cannot open " + path, 0);
    std::string name = path;
    if (auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
    std::string fmt = format;
    if (fmt.empty()) {
        const bool col = name.size() > 4 && name.substr(name.size() - 4) == ".col";
        fmt = col ? "dimacs" : "edgelist";
    }
    if (fmt == "dimacs") return esb::parse_dimacs(in, name);
    return esb::parse_weighted_edge_list(in, name);
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact subgraph SDP bounds for Max-Cut, stable set and coloring"};
    app.require_subcommand(1);

    std::string problem_name, graph_path, format, cut_mode = "auto", report_path, progress_path;
    int max_order = esb::kMaxSubgraphOrder, cycles = 0, escs = 0;
    std::uint64_t seed = 0;

    auto* solve = app.add_subcommand("solve", "Run the cycle loop and report the bound");
    auto* basic = app.add_subcommand("basic", "Solve the basic relaxation only");
    for (auto* sub : {solve, basic}) {
        sub->add_option("--problem", problem_name, "maxcut | stableset | coloring")
            ->required()
            ->check(CLI::IsMember({"maxcut", "stableset", "coloring"}));
        sub->add_option("--graph", graph_path, "Graph file")->required();
        sub->add_option("--format", format, "dimacs | edgelist (default: by extension)")
            ->check(CLI::IsMember({"dimacs", "edgelist"}));
    }
    solve->add_option("--max-order", max_order, "Largest subgraph order")->check(CLI::Range(2, 8));
    solve->add_option("--cycles", cycles, "Number of cycles (default 50, coloring 25)")->check(CLI::PositiveNumber);
    solve->add_option("--escs-per-cycle", escs, "Constraints added per cycle")->check(CLI::PositiveNumber);
    solve->add_option("--cut-mode", cut_mode, "auto | esc | cut")->check(CLI::IsMember({"auto", "esc", "cut"}));
    solve->add_option("--seed", seed, "Random seed");
    solve->add_option("--report", report_path, "Write the JSON report here");
    solve->add_option("--progress", progress_path, "Write per-cycle CSV progress here");

    std::string model;
    int gen_n = 0, gen_d = 0, gen_r = 0;
    double gen_p = 0.5;
    std::string gen_weights = "unit", gen_out;
    auto* gen = app.add_subcommand("gen", "Generate a graph in edge-list format");
    gen->add_option("--model", model, "er | torus | regular")->required()->check(CLI::IsMember({"er", "torus", "regular"}));
    gen->add_option("--n", gen_n, "Number of vertices (er, regular)");
    gen->add_option("--p", gen_p, "Edge probability (er)")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--d", gen_d, "Torus side length");
    gen->add_option("--r", gen_r, "Degree (regular)");
    gen->add_option("--weights", gen_weights, "unit | pm1 (er)")->check(CLI::IsMember({"unit", "pm1"}));
    gen->add_option("--seed", seed, "Random seed");
    gen->add_option("--out", gen_out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitParse;
    }

    try {
        if (*gen) {
            std::optional<esb::Graph> g;
            if (model == "torus") {
                g = esb::gen_torus(gen_d);
            } else if (model == "regular") {
                g = esb::gen_near_regular(gen_n, gen_r, seed);
            } else {
                const auto w = gen_weights == "pm1" ? esb::EdgeWeights::PlusMinusOne : esb::EdgeWeights::Unit;
                g = esb::gen_erdos_renyi(gen_n, gen_p, seed, w);
            }
            const std::string text = esb::to_weighted_edge_list(*g);
            if (gen_out.empty()) std::cout << text;
            else write_file(gen_out, text);
            return 0;
        }

        const esb::Problem problem = esb::parse_problem(problem_name);
        esb::Graph g = [&] {
            try {
                return load_graph(graph_path, format);
            } catch (const esb::ParseError& e) {
                std::cerr << "esb: " << graph_path << ": " << e.what() << "\n";
                std::exit(kExitParse);
            } catch (const std::invalid_argument& e) {
                std::cerr << "esb: " << graph_path << ": " << e.what() << "\n";
                std::exit(kExitParse);
            }
        }();

        if (*basic) {
            const esb::SdpSolution sol = esb::solve_sdp(esb::build_basic_relaxation(problem, g));
            std::printf("%.6f\n", esb::report_sign(problem) * sol.value);
            return 0;
        }

        esb::EsbParams params;
        params.problem = problem;
        params.max_order = max_order;
        params.max_cycles = cycles;
        params.escs_per_cycle = escs;
        params.cut_mode = esb::parse_cut_mode(cut_mode);
        params.seed = seed;
        if (params.cut_mode == esb::CutMode::Cut && problem != esb::Problem::MaxCut) {
            std::cerr << "esb: --cut-mode cut is only available for maxcut\n";
            return kExitParse;
        }

        std::ofstream progress;
        if (!progress_path.empty()) {
            progress.open(progress_path);
            if (!progress) throw std::runtime_error("cannot write " + progress_path);
            progress << esb::kProgressCsvHeader << "\n";
        }
        const esb::EsbReport rep = esb::compute_esb(g, params, [&](const esb::CycleRecord& c) {
            std::fprintf(stderr, "cycle %3d  k=%d  escs=%d  cuts=%d  bound=%.6f  best=%.6f\n", c.cycle, c.k,
                         c.num_escs, c.num_cuts, c.bound, c.best_bound);
            if (progress.is_open()) progress << esb::csv_row(c) << "\n" << std::flush;
        });
        if (!report_path.empty()) write_file(report_path, esb::report_to_json(rep));
        std::printf("basic %.6f  esb %.6f  heuristic %.6f\n", rep.basic_value, rep.esb, rep.heuristic_value);
        if (rep.failed) {
            std::cerr << "esb: solver failure: " << rep.failure << "\n";
            return kExitSolver;
        }
        return 0;
    } catch (const esb::SolverError& e) {
        std::cerr << "esb: solver failure: " << e.what() << "\n";
        return kExitSolver;
    } catch (const esb::QpError& e) {
        std::cerr << "esb: solver failure: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "esb: " << e.what() << "\n";
        return kExitParse;
    }
}
