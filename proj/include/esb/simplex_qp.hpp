#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <vector>

namespace esb {

class QpError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Euclidean projection onto the unit simplex {x >= 0, sum x = 1}
/// (sort-and-threshold; ties resolved by index order).
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v);

struct QpBlock {
    enum class Kind { Simplex, Nonneg };
    Kind kind;
    int dim;
};

/// Convex QP  0.5 x^T H x + linear^T x + constant (+ extra(x))  over a
/// product of unit simplices and nonnegative orthants.
///
/// H is only available as an operator. `extra` is an optional smooth convex
/// term returning its value and, when the pointer is non-null, writing its
/// gradient; `extra_lipschitz` bounds the Lipschitz constant of that
/// gradient.
struct BlockedQP {
    std::vector<QpBlock> blocks;
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> hessian;
    Eigen::VectorXd linear;
    double constant = 0.0;
    /// Lipschitz constant of the quadratic part; 0 means estimate it.
    double lipschitz = 0.0;
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)> extra;
    double extra_lipschitz = 0.0;

    int dim() const;
    double objective(const Eigen::VectorXd& x) const;
};

struct QpOptions {
    double tol = 1e-9;
    int max_iter = 5000;
};

struct QpResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    /// Final blockwise projected-gradient norm.
    double pg_norm = 0.0;
};

/// Projects every block of `x` onto its feasible set.
Eigen::VectorXd project_blocks(const std::vector<QpBlock>& blocks, const Eigen::VectorXd& x);
bool is_feasible(const std::vector<QpBlock>& blocks, const Eigen::VectorXd& x, double tol = 1e-12);

/// Largest eigenvalue estimate of H by power iteration (30 steps, x1.1).
double estimate_lipschitz(const BlockedQP& qp);

/// Accelerated projected gradient (FISTA) with restart whenever the
/// objective increases. Stops when the projected-gradient norm drops below
/// tol * (1 + |objective|). The returned objective never exceeds the
/// objective at `start`.
QpResult minimize(const BlockedQP& qp, const Eigen::VectorXd& start, const QpOptions& opts = {});

/// Block of a StructuredQP: x_b lives in a simplex or orthant and enters
/// the residual through the dense matrix `m` on rows [row_begin,
/// row_begin + m.rows()). Global blocks span all rows; local blocks must
/// occupy pairwise disjoint row ranges.
struct StructuredBlock {
    QpBlock::Kind kind = QpBlock::Kind::Simplex;
    bool global = false;
    int row_begin = 0;
    Eigen::MatrixXd m;
    Eigen::VectorXd c;
    int dim() const { return static_cast<int>(m.cols()); }
};

/// min 0.5/mu * ||sum_b M_b x_b + offset||^2 + sum_b c_b^T x_b + constant
struct StructuredQP {
    int rows = 0;
    double mu = 1.0;
    Eigen::VectorXd offset;
    std::vector<StructuredBlock> blocks;
    double constant = 0.0;

    int dim() const;
    std::vector<QpBlock> qp_blocks() const;
    /// Residual sum_b M_b x_b + offset.
    Eigen::VectorXd residual(const Eigen::VectorXd& x) const;
    double objective(const Eigen::VectorXd& x) const;
    /// The same problem with the Hessian as an operator, for `minimize`.
    BlockedQP as_blocked() const;
};

/// Primal-dual interior-point method (Mehrotra predictor-corrector) for a
/// StructuredQP. The Newton systems are solved through the residual space:
/// local blocks give a block-diagonal matrix, global blocks a small bordered
/// system. When tolerance is not reached the best iterate seen is returned
/// with converged = false. The result is projected onto the feasible set.
QpResult minimize_structured(const StructuredQP& qp, const QpOptions& opts = {.tol = 1e-10, .max_iter = 100});

struct MinNormResult {
    Eigen::VectorXd weights;  ///< convex weights over the columns
    Eigen::VectorXd point;    ///< sum_i weights_i * column_i
    double distance = 0.0;    ///< norm of `point`
    int iterations = 0;
};

/// Minimum-norm point of the convex hull of the columns of `points`
/// (Wolfe's algorithm). Equivalent to min ||P w|| over w in the simplex.
MinNormResult min_norm_point(const Eigen::MatrixXd& points, double tol = 1e-12, int max_iter = 1000);

}  // namespace esb
