#pragma once

#include "esb/graph.hpp"
#include "esb/polytope.hpp"
#include "esb/sdp.hpp"
#include "esb/sym_matrix.hpp"

#include <cstdint>
#include <set>
#include <span>
#include <vector>

namespace esb {

struct ProbeMatrix {
    enum class Kind { Facet, Copositive, Pattern, Random };
    SymMatrix u;
    Kind kind;
};

/// Facet <A, X> <= rhs of the polytope spanned by the extreme matrices of an
/// edgeless graph on k vertices (Max-Cut: the cut polytope).
struct Facet {
    SymMatrix a;
    double rhs;
};

/// Facets computed by brute force over affinely independent vertex subsets.
/// Empty when the enumeration would exceed the work budget (Max-Cut k > 5,
/// stable set and coloring k > 4). Results are cached per (problem, k).
const std::vector<Facet>& polytope_facets(Problem problem, int k);

/// Up to `count` probe matrices of order k, deterministic in `seed`.
std::vector<ProbeMatrix> generate_probes(Problem problem, int k, std::uint64_t seed, int count = 50);

/// Value of <U, X_I> for the ordered vertex list `assign` (position a holds
/// vertex assign[a]).
double probe_value(const Eigen::MatrixXd& x, const SymMatrix& u, std::span<const int> assign);

/// Steepest-descent swap search for min <U, X_I> over ordered k-subsets of
/// the vertices of `x` (an n x n vertex block). Moves replace one vertex by
/// an outside vertex or exchange two positions. Returns the distinct local
/// minimizers as sorted vertex lists, in order of first discovery.
std::vector<std::vector<int>> local_search_min(const Eigen::MatrixXd& x, const SymMatrix& u, int k, int starts,
                                               std::uint64_t seed);

struct Violation {
    std::vector<int> vertices;  ///< sorted ascending
    double delta = 0.0;
    Eigen::VectorXd lambda;
    EscBlock esc;
    Eigen::MatrixXd x_sub;
    SymMatrix proj;
};

struct SeparationOptions {
    int k = 3;
    int limit = 100;
    double tol = 5e-5;
    std::uint64_t seed = 0;
    int probes = 50;
    int starts = 20;
    /// Vertex sets (sorted) that are skipped.
    std::set<std::vector<int>> exclude;
};

/// Violated exact subgraph constraints of order k for the relaxation
/// solution `x` (full matrix of the base relaxation). Sorted by delta
/// descending, ties by vertex list.
std::vector<Violation> find_violations(const Eigen::MatrixXd& x, const Graph& g, Problem problem, int vertex_offset,
                                       const SeparationOptions& opts);

/// Single inequality <A, X_I> <= rhs separating X_I from the cut polytope:
/// A = X_I - proj, rhs = max_i <A, C_i>.
LinearCut weaken_to_cut(const Violation& v);

/// Worker count for separation: ESB_THREADS if set and positive, otherwise
/// the hardware concurrency.
int separation_threads();

}  // namespace esb
