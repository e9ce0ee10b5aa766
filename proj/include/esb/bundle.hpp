#pragma once

#include "esb/polytope.hpp"
#include "esb/sdp.hpp"
#include "esb/simplex_qp.hpp"
#include "esb/sym_matrix.hpp"

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <vector>

namespace esb {

/// One oracle evaluation. The point it was evaluated at is not kept; e is
/// the linearization error with respect to the current center.
struct BundleItem {
    double h = 0.0;
    Eigen::VectorXd g;  ///< ESC blocks, then one entry per cut
    SymMatrix x;
    double e = 0.0;
};

inline constexpr double kMuMin = 1e-6;
inline constexpr double kMuMax = 1e8;

/// Minimization state of the partial Lagrangian dual for a fixed set of
/// exact subgraph constraints (and Max-Cut cuts).
struct DualState {
    std::vector<EscBlock> escs;
    std::vector<LinearCut> cuts;
    Eigen::VectorXd center;    ///< ESC multipliers, blocked like escs
    Eigen::VectorXd center_u;  ///< cut multipliers, >= 0
    double mu = 1.0;
    bool mu_initialized = false;
    std::vector<BundleItem> bundle;
    double best_bound = std::numeric_limits<double>::infinity();

    /// h and the full dual function at the center; valid when center_evaluated.
    double center_h = 0.0;
    double center_value = 0.0;
    bool center_evaluated = false;
    int center_item = -1;
    int null_streak = 0;

    /// Bundle weights of the last master solution, aligned with `bundle`;
    /// starting point of the next master solve.
    Eigen::VectorXd warm_alpha;

    int multiplier_dim() const;
    /// Offset of ESC block `i` inside `center` and the subgradients.
    std::vector<int> block_offsets() const;
};

struct MasterSolution {
    Eigen::VectorXd alpha;
    std::vector<Eigen::VectorXd> beta;
    Eigen::VectorXd u;
    Eigen::VectorXd y;
    double model_value = 0.0;
    /// Value of the proximal master problem (model plus proximal term).
    double master_value = 0.0;
    int qp_iterations = 0;
};

/// sum_I max_i [D_I y_I]_i
double max_terms(const std::vector<EscBlock>& escs, const Eigen::VectorXd& y);

/// h(y, u) + sum_I max_i [D_I y_I]_i + sum_c u_c rhs_c. Any value is an upper
/// bound on the ESC relaxation (maximization form). If `eval` is non-null it
/// receives the oracle output.
double dual_value(const SdpProblem& base, const std::vector<EscBlock>& escs, const std::vector<LinearCut>& cuts,
                  const Eigen::VectorXd& y, const Eigen::VectorXd& u, HEvaluation* eval = nullptr,
                  const IpmOptions& opts = {});

/// Cutting-plane model of the dual function at (y, u).
double model_value(const DualState& s, const Eigen::VectorXd& y, const Eigen::VectorXd& u);

/// Dual of the proximal master problem as a QP over alpha in the unit
/// simplex, beta_I in the unit simplices and one multiplier >= 0 per cut
/// (for u_c >= 0). Variables are ordered alpha, beta_1.., gamma_1...
StructuredQP master_qp(const DualState& s);

/// Proximal master problem, solved through its dual over simplices.
MasterSolution solve_master(const DualState& s, const QpOptions& opts = {.tol = 1e-8, .max_iter = 5000});

/// Objective of the dual master (minimization form) at (alpha, beta).
double master_objective(const DualState& s, const Eigen::VectorXd& alpha, const std::vector<Eigen::VectorXd>& beta);

enum class StepKind { Serious, Null };

StepKind step_decision(double center_value, double trial_value, double model_value, double m_ss = 0.1);

/// Returns the new mu and updates the consecutive-null counter.
double update_mu(double mu, StepKind kind, double ratio, int& null_streak);

/// Drops items with alpha_j < 1e-8 except the newest and the center item,
/// then keeps at most `cap` items (oldest dropped first). `alpha` is aligned
/// with the bundle; its entry for an item not yet seen by a master solve may
/// be anything.
void prune_bundle(DualState& s, const Eigen::VectorXd& alpha, int cap = 50);

struct BundleParams {
    int max_iter = 30;
    double rel_tol = 0.005;
    double m_ss = 0.1;
    /// Max-Cut only: stop when the subgradient of the dual function at the
    /// trial point is this small.
    double subgradient_tol = 1e-6;
    IpmOptions ipm;
    QpOptions master{.tol = 1e-8, .max_iter = 5000};
    /// Called after each oracle evaluation with the current center value.
    std::function<void(int iteration, double center_value)> on_iteration;
};

struct BundleResult {
    Eigen::VectorXd y;
    Eigen::VectorXd u;
    SymMatrix x;  ///< primal aggregate sum_j alpha_j X_j
    std::vector<Eigen::VectorXd> lambda;
    double bound = 0.0;  ///< best dual value seen
    int iterations = 0;
    int oracle_calls = 0;
    int serious_steps = 0;
    bool converged = false;
    double oracle_seconds = 0.0;
    double other_seconds = 0.0;
    /// Dual value at the center after every oracle call.
    std::vector<double> center_values;
};

BundleResult run_bundle(const SdpProblem& base, DualState& state, const BundleParams& params = {});

}  // namespace esb
