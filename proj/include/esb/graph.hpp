#pragma once

#include "esb/sym_matrix.hpp"

#include <cstdint>
#include <istream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace esb {

/// Raised by the file readers; `line` is 1-based (0 when not line-specific).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// Undirected edge with 0-based endpoints, i < j.
struct Edge {
    int i;
    int j;
    double w;
};

/// Simple undirected weighted graph. Vertices are 0-based internally; the
/// readers and writers translate from and to the 1-based file convention.
/// Immutable after construction.
class Graph {
public:
    /// Validates the edge list: endpoints in range, no loops, no duplicate
    /// unordered pairs. Endpoints are normalized to i < j and edges sorted.
    Graph(int n, std::vector<Edge> edges, std::string name = {});

    int n() const { return n_; }
    int m() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::string& name() const { return name_; }

    bool adjacent(int i, int j) const { return adj_[static_cast<std::size_t>(i) * n_ + j] != 0; }
    double weight(int i, int j) const;
    int degree(int v) const { return static_cast<int>(neighbors_[v].size()); }
    const std::vector<int>& neighbors(int v) const { return neighbors_[v]; }

    Graph complement() const;

private:
    int n_;
    std::vector<Edge> edges_;
    std::string name_;
    std::vector<char> adj_;
    std::vector<std::vector<int>> neighbors_;
};

/// DIMACS .col reader: "c" comments, one "p edge n m" line, "e i j" edges.
/// Duplicate edge lines (in either orientation) are collapsed.
Graph parse_dimacs(std::istream& in, std::string name = {});
Graph parse_dimacs(std::string_view text, std::string name = {});

/// Weighted edge list: "n m" header followed by exactly m lines "i j w".
Graph parse_weighted_edge_list(std::istream& in, std::string name = {});
Graph parse_weighted_edge_list(std::string_view text, std::string name = {});

/// Writes the weighted edge list format read by parse_weighted_edge_list.
/// Integral weights are written without a decimal point.
std::string to_weighted_edge_list(const Graph& g);

/// Two-dimensional torus T_d on d^2 vertices, vertex (i, j) -> i*d + j.
Graph gen_torus(int d);

/// Near-r-regular graph: random perfect matching on n*r points, consecutive
/// groups of r points contracted, loops and parallel edges dropped.
Graph gen_near_regular(int n, int r, std::uint64_t seed);

enum class EdgeWeights { Unit, PlusMinusOne };

/// G(n, p) with unit or uniformly random +-1 weights.
Graph gen_erdos_renyi(int n, double p, std::uint64_t seed, EdgeWeights weights = EdgeWeights::Unit);

/// Mycielski construction; mycielskian(C5) is myciel3.
Graph mycielskian(const Graph& g);

Graph cycle_graph(int n);
Graph complete_graph(int n);

/// Weighted Laplacian L = D - A.
SymMatrix laplacian(const Graph& g);

/// Subgraph induced by `vertices` (0-based, distinct), relabeled so that
/// vertices[a] becomes a.
Graph induced_subgraph(const Graph& g, std::span<const int> vertices);

}  // namespace esb
