#pragma once

#include "esb/graph.hpp"
#include "esb/polytope.hpp"
#include "esb/sym_matrix.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace esb {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Entry of a sparse constraint: contributes coef * X(row, col) to <A, X>,
/// row <= col. For row < col the matrix A holds coef/2 at both (row, col)
/// and (col, row).
struct SparseEntry {
    int row;
    int col;
    double coef;
};

/// <A, X> + sum_l lp[l].second * x[lp[l].first] = rhs
struct LinearConstraint {
    std::vector<SparseEntry> entries;
    std::vector<std::pair<int, double>> lp;
    double rhs = 0.0;
};

enum class Sense { Maximize, Minimize };

/// Standard-form SDP over S^order_+ x R^nonneg_dim_+ :
/// optimize <objective, X> + nonneg_objective . x subject to `constraints`.
struct SdpProblem {
    Problem problem = Problem::MaxCut;
    int order = 0;
    /// Matrix index of graph vertex v is v + vertex_offset.
    int vertex_offset = 0;
    std::vector<LinearConstraint> constraints;
    SymMatrix objective;
    Sense sense = Sense::Maximize;
    int nonneg_dim = 0;
    Eigen::VectorXd nonneg_objective;
};

struct SdpSolution {
    SymMatrix x;
    Eigen::VectorXd x_nonneg;
    double value = 0.0;       ///< primal objective in the problem's sense
    double dual_value = 0.0;  ///< dual objective in the problem's sense
    Eigen::VectorXd dual_y;
    double gap = 0.0;  ///< relative duality gap
    double primal_infeasibility = 0.0;
    double dual_infeasibility = 0.0;
    int iterations = 0;
};

struct IpmOptions {
    double tol = 1e-8;
    int max_iter = 200;
    double step_fraction = 0.98;
};

/// Basic relaxation of the three problems, always in maximization form:
///  - Max-Cut: diag(X) = 1, objective L/4.
///  - stable set: Y in S^{n+1}, Y_00 = 1, Y_0i = Y_ii, Y_ij = 0 on edges,
///    objective trace of the vertex block.
///  - coloring: Y_ii = 1, Y_0i = 1, Y_ij = 0 on edges, objective -Y_00.
SdpProblem build_basic_relaxation(Problem problem, const Graph& g);

/// Infeasible primal-dual path-following method, HKM direction, Mehrotra
/// predictor-corrector, dense Schur complement.
SdpSolution solve_sdp(const SdpProblem& problem, const IpmOptions& opts = {});

/// Max-Cut inequality <A, X_I> <= rhs on the vertices I.
struct LinearCut {
    std::vector<int> vertices;
    SymMatrix normal;
    double rhs = 0.0;
};

/// Evaluation of h at (y, u); y is blocked conformally with the ESC list
/// (block I has length b_I), u has one entry per cut.
struct HEvaluation {
    double h = 0.0;
    SymMatrix x;
    /// ESC blocks followed by one entry per cut.
    Eigen::VectorXd g;
    int iterations = 0;
};

/// Objective C - sum_I P_I^T scatter_I(y_I) - sum_c u_c P_c^T A_c.
SymMatrix lagrangian_objective(const SdpProblem& base, const std::vector<EscBlock>& escs,
                               const std::vector<LinearCut>& cuts, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& u);

/// Subgradient blocks: -extract_I(X_I) for each ESC, -<A_c, X_{I_c}> per cut.
Eigen::VectorXd subgradient_at(const SdpProblem& base, const std::vector<EscBlock>& escs,
                               const std::vector<LinearCut>& cuts, const Eigen::MatrixXd& x);

HEvaluation evaluate_h(const SdpProblem& base, const std::vector<EscBlock>& escs,
                       const std::vector<LinearCut>& cuts, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& u, const IpmOptions& opts = {});

/// Solves base + all ESCs as one SDP with explicit convex weights.
/// The combined number of extreme matrices must not exceed 2000.
SdpSolution solve_monolithic(const SdpProblem& base, const std::vector<EscBlock>& escs,
                             const IpmOptions& opts = {.tol = 1e-7, .max_iter = 200, .step_fraction = 0.98});

inline constexpr int kMonolithicMaxWeights = 2000;

}  // namespace esb
