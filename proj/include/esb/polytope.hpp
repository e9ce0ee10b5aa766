#pragma once

#include "esb/graph.hpp"
#include "esb/sym_matrix.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace esb {

enum class Problem { MaxCut, StableSet, Coloring };

std::string_view to_string(Problem p);
Problem parse_problem(std::string_view s);

/// Largest subgraph order for which extreme matrices are enumerated.
inline constexpr int kMaxSubgraphOrder = 8;

/// One position of a k x k symmetric matrix. a == b is a diagonal slot,
/// a < b stands for the unordered pair {a, b}.
struct Slot {
    int a;
    int b;
    bool diagonal() const { return a == b; }
    bool operator==(const Slot&) const = default;
};

/// extract(X)_s = X_dd for diagonal slots and 2 X_ab for off-diagonal ones.
/// Together with `scatter` this is an exact adjoint pair under the trace
/// inner product: <scatter(y), X> = <y, extract(X)>.
Eigen::VectorXd extract(const Eigen::MatrixXd& x, std::span<const Slot> mask);

/// Writes y_s to (a, b) and (b, a) (once on the diagonal).
Eigen::MatrixXd scatter(const Eigen::VectorXd& y, std::span<const Slot> mask, int order);

/// All cut matrices cc^T, c in {-1, 1}^k with c_0 = +1. 1 <= k <= 8.
std::vector<SymMatrix> enum_cut_matrices(int k);

/// ss^T for every stable set s of `g` (the empty set included).
std::vector<SymMatrix> enum_stable_set_matrices(const Graph& g);

/// SS^T for every partition of the vertices of `g` into stable sets.
std::vector<SymMatrix> enum_coloring_matrices(const Graph& g);

/// Positions on which an exact subgraph constraint must be imposed:
/// Max-Cut all pairs; stable set the diagonal then all non-edges;
/// coloring all non-edges. Pairs appear in row-major order.
std::vector<Slot> extraction_mask(Problem problem, const Graph& sub);

/// Length of `extraction_mask` from the closed-form counts.
int mask_length(Problem problem, int k, int sub_edges);

/// One exact subgraph constraint X_I in conv{C_1, ..., C_t}.
struct EscBlock {
    Problem problem;
    std::vector<int> vertices;       ///< I, 0-based graph vertices, ordered
    std::vector<SymMatrix> extreme;  ///< C_1 .. C_t, order k
    std::vector<Slot> mask;          ///< b slots
    Eigen::MatrixXd d;               ///< t x b, row i = extract(C_i)
    /// Columns are C_i in Frobenius-isometric coordinates (see frobenius_coords).
    Eigen::MatrixXd hull_points;

    int k() const { return static_cast<int>(vertices.size()); }
    int t() const { return static_cast<int>(extreme.size()); }
    int b() const { return static_cast<int>(mask.size()); }
};

EscBlock build_esc(Problem problem, const Graph& g, std::span<const int> vertices);

/// Coordinates (X_11, .., X_kk, sqrt(2) X_12, ..) in which the Euclidean norm
/// equals the Frobenius norm of the full symmetric matrix.
Eigen::VectorXd frobenius_coords(const Eigen::MatrixXd& x);

struct Projection {
    double delta = 0.0;       ///< Frobenius distance of X_I to the polytope
    Eigen::VectorXd lambda;   ///< convex weights over esc.extreme
    SymMatrix proj;           ///< sum lambda_i C_i
};

/// Projection of a k x k symmetric matrix onto conv(esc.extreme).
Projection projection_distance(const Eigen::MatrixXd& x_sub, const EscBlock& esc);

/// Principal submatrix of `x` on rows/columns offset + vertices[a].
Eigen::MatrixXd principal_submatrix(const Eigen::MatrixXd& x, std::span<const int> vertices, int offset = 0);

}  // namespace esb
