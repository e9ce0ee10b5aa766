#pragma once

#include "esb/bundle.hpp"
#include "esb/graph.hpp"
#include "esb/polytope.hpp"
#include "esb/sdp.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace esb {

/// How Max-Cut subgraph violations enter the relaxation: as full exact
/// subgraph constraints or as single separating inequalities. `Auto` means
/// cuts for Max-Cut.
enum class CutMode { Auto, Esc, Cut };

std::string_view to_string(CutMode m);
CutMode parse_cut_mode(std::string_view s);

struct EsbParams {
    Problem problem = Problem::StableSet;
    int max_order = kMaxSubgraphOrder;
    /// <= 0 selects the default: 25 for coloring, 50 otherwise.
    int max_cycles = 0;
    /// <= 0 selects the default: 500 in Max-Cut cut mode, 100 otherwise.
    int escs_per_cycle = 0;
    CutMode cut_mode = CutMode::Auto;
    BundleParams bundle;
    double violation_tol = 5e-5;
    double escalation_fraction = 0.1;
    double inactive_tol = 1e-8;
    /// k is also increased after this many consecutive cycles in which the
    /// best bound improved by at most stall_tol * (1 + |best|). 0 disables.
    int stall_cycles = 3;
    double stall_tol = 1e-6;
    std::uint64_t seed = 0;
    int probes = 50;
    int starts = 20;
    /// Skip the combinatorial heuristic (its value is then reported as NaN).
    bool run_heuristic = true;
};

struct CycleRecord {
    int cycle = 0;
    int k = 0;
    int num_escs = 0;
    int num_cuts = 0;
    double bound = 0.0;
    double best_bound = 0.0;
    double oracle_time_s = 0.0;
    double other_time_s = 0.0;
};

/// Bounds are in the problem's natural sense: upper bounds on the maximum
/// cut and the stability number, lower bounds on the chromatic number.
struct EsbReport {
    std::string graph_name;
    int n = 0;
    int m = 0;
    Problem problem = Problem::StableSet;
    std::string cut_mode;
    int max_order = 0;
    std::uint64_t seed = 0;
    double basic_value = 0.0;
    double heuristic_value = 0.0;
    double esb = 0.0;
    std::vector<CycleRecord> cycles;
    bool failed = false;
    std::string failure;
    double total_time_s = 0.0;
};

EsbReport compute_esb(const Graph& g, const EsbParams& params,
                      const std::function<void(const CycleRecord&)>& on_cycle = {});

/// Moves a dual state to a new constraint set. Removed blocks are deleted
/// from the center and from every subgradient; the linearization errors
/// absorb the dropped terms. Added blocks start with zero multipliers, and
/// each bundle item receives the exact subgradient entries of its stored
/// maximizer. If a removed block had a nonzero center entry the center value
/// is marked for re-evaluation.
DualState warm_start_transfer(const DualState& old, int vertex_offset, const std::vector<int>& removed_escs,
                              const std::vector<EscBlock>& added_escs, const std::vector<int>& removed_cuts = {},
                              const std::vector<LinearCut>& added_cuts = {});

/// Feasible combinatorial value: a cut weight (random-hyperplane rounding of
/// the basic relaxation plus 1-flip search, best of 100 rounds), a stable set
/// size (greedy minimum degree plus 2-improvement) or a number of colors
/// (DSATUR).
double heuristic_lower_bound(const Graph& g, Problem problem, std::uint64_t seed);

/// Sign used to turn internal maximization values into reported values.
inline double report_sign(Problem p) { return p == Problem::Coloring ? -1.0 : 1.0; }

}  // namespace esb
