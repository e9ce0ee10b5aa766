#include "esb/bundle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace esb {

int DualState::multiplier_dim() const {
    int d = 0;
    for (const auto& esc : escs) d += esc.b();
    return d;
}

std::vector<int> DualState::block_offsets() const {
    std::vector<int> off;
    off.reserve(escs.size());
    int pos = 0;
    for (const auto& esc : escs) {
        off.push_back(pos);
        pos += esc.b();
    }
    return off;
}

double max_terms(const std::vector<EscBlock>& escs, const Eigen::VectorXd& y) {
    double s = 0.0;
    Eigen::Index pos = 0;
    for (const auto& esc : escs) {
        s += (esc.d * y.segment(pos, esc.b())).maxCoeff();
        pos += esc.b();
    }
    return s;
}

double dual_value(const SdpProblem& base, const std::vector<EscBlock>& escs, const std::vector<LinearCut>& cuts,
                  const Eigen::VectorXd& y, const Eigen::VectorXd& u, HEvaluation* eval, const IpmOptions& opts) {
    HEvaluation ev = evaluate_h(base, escs, cuts, y, u, opts);
    double v = ev.h + max_terms(escs, y);
    for (std::size_t c = 0; c < cuts.size(); ++c) v += u[static_cast<Eigen::Index>(c)] * cuts[c].rhs;
    if (eval) *eval = std::move(ev);
    return v;
}

namespace {

Eigen::VectorXd stack(const Eigen::VectorXd& y, const Eigen::VectorXd& u) {
    Eigen::VectorXd z(y.size() + u.size());
    z << y, u;
    return z;
}

double cut_rhs_dot(const std::vector<LinearCut>& cuts, const Eigen::VectorXd& u) {
    double s = 0.0;
    for (std::size_t c = 0; c < cuts.size(); ++c) s += u[static_cast<Eigen::Index>(c)] * cuts[c].rhs;
    return s;
}

// Everything the dual master needs, assembled once per solve.
struct MasterData {
    const DualState* s = nullptr;
    int r = 0;
    int b = 0;
    int ncuts = 0;
    std::vector<int> offsets;
    Eigen::MatrixXd g_esc;  // b x r
    Eigen::MatrixXd g_cut;  // ncuts x r
    Eigen::VectorXd e;
    std::vector<Eigen::VectorXd> d_center;  // D_I ybar_I
    double mu = 1.0;

    explicit MasterData(const DualState& st) : s(&st) {
        r = static_cast<int>(st.bundle.size());
        b = st.multiplier_dim();
        ncuts = static_cast<int>(st.cuts.size());
        offsets = st.block_offsets();
        mu = st.mu;
        g_esc.resize(b, r);
        g_cut.resize(ncuts, r);
        e.resize(r);
        for (int j = 0; j < r; ++j) {
            const auto& item = st.bundle[j];
            g_esc.col(j) = item.g.head(b);
            g_cut.col(j) = item.g.tail(ncuts);
            e[j] = std::max(0.0, item.e);
        }
        for (std::size_t i = 0; i < st.escs.size(); ++i)
            d_center.push_back(st.escs[i].d * st.center.segment(offsets[i], st.escs[i].b()));
    }

    // v_I = G_I alpha + D_I^T beta_I, stacked.
    Eigen::VectorXd v(const Eigen::VectorXd& alpha, const std::vector<Eigen::VectorXd>& beta) const {
        Eigen::VectorXd out = g_esc * alpha;
        for (std::size_t i = 0; i < s->escs.size(); ++i)
            out.segment(offsets[i], s->escs[i].b()) += s->escs[i].d.transpose() * beta[i];
        return out;
    }

    // Cut multipliers minimizing the master for fixed alpha, and the
    // corresponding value of sum_c phi_c(alpha) (concave in alpha).
    double cut_terms(const Eigen::VectorXd& alpha, Eigen::VectorXd* u_out, Eigen::VectorXd* grad) const {
        double total = 0.0;
        if (ncuts == 0) {
            if (u_out) u_out->resize(0);
            return 0.0;
        }
        const Eigen::VectorXd sc = g_cut * alpha;
        Eigen::VectorXd u(ncuts);
        Eigen::VectorXd dphi(ncuts);
        for (int c = 0; c < ncuts; ++c) {
            const double ubar = s->center_u[c];
            const double rhs = s->cuts[c].rhs;
            const double uc = std::max(0.0, ubar - (sc[c] + rhs) / mu);
            u[c] = uc;
            dphi[c] = uc - ubar;
            total += sc[c] * (uc - ubar) + rhs * uc + 0.5 * mu * (uc - ubar) * (uc - ubar);
        }
        if (u_out) *u_out = u;
        if (grad) *grad = g_cut.transpose() * dphi;
        return total;
    }

    double objective(const Eigen::VectorXd& alpha, const std::vector<Eigen::VectorXd>& beta) const {
        double f = e.dot(alpha) - s->center_h;
        const Eigen::VectorXd vv = v(alpha, beta);
        f += vv.squaredNorm() / (2.0 * mu);
        for (std::size_t i = 0; i < beta.size(); ++i) f -= beta[i].dot(d_center[i]);
        f -= cut_terms(alpha, nullptr, nullptr);
        return f;
    }
};

}  // namespace

double model_value(const DualState& s, const Eigen::VectorXd& y, const Eigen::VectorXd& u) {
    const Eigen::VectorXd dz = stack(y - s.center, u - s.center_u);
    double hm = -std::numeric_limits<double>::infinity();
    for (const auto& item : s.bundle) hm = std::max(hm, s.center_h - std::max(0.0, item.e) + item.g.dot(dz));
    return hm + max_terms(s.escs, y) + cut_rhs_dot(s.cuts, u);
}

double master_objective(const DualState& s, const Eigen::VectorXd& alpha, const std::vector<Eigen::VectorXd>& beta) {
    return MasterData(s).objective(alpha, beta);
}

StructuredQP master_qp(const DualState& s) {
    const MasterData md(s);
    const int r = md.r;
    const int q = static_cast<int>(s.escs.size());
    StructuredQP qp;
    qp.rows = md.b + md.ncuts;
    qp.mu = md.mu;
    qp.offset = Eigen::VectorXd::Zero(qp.rows);
    for (int c = 0; c < md.ncuts; ++c) qp.offset[md.b + c] = s.cuts[c].rhs;

    StructuredBlock alpha;
    alpha.kind = QpBlock::Kind::Simplex;
    alpha.global = true;
    alpha.m.resize(qp.rows, r);
    alpha.m.topRows(md.b) = md.g_esc;
    alpha.m.bottomRows(md.ncuts) = md.g_cut;
    alpha.c = md.e;
    qp.blocks.push_back(std::move(alpha));
    for (int i = 0; i < q; ++i) {
        StructuredBlock beta;
        beta.kind = QpBlock::Kind::Simplex;
        beta.row_begin = md.offsets[i];
        beta.m = s.escs[i].d.transpose();
        beta.c = -md.d_center[i];
        qp.blocks.push_back(std::move(beta));
    }
    // Multipliers of u_c >= 0 in the proximal master.
    double rhs_u = 0.0;
    for (int c = 0; c < md.ncuts; ++c) {
        StructuredBlock gamma;
        gamma.kind = QpBlock::Kind::Nonneg;
        gamma.row_begin = md.b + c;
        gamma.m = Eigen::MatrixXd::Constant(1, 1, -1.0);
        gamma.c = Eigen::VectorXd::Constant(1, s.center_u[c]);
        qp.blocks.push_back(std::move(gamma));
        rhs_u += s.cuts[c].rhs * s.center_u[c];
    }
    qp.constant = -s.center_h - rhs_u;
    return qp;
}

MasterSolution solve_master(const DualState& s, const QpOptions& opts) {
    if (s.bundle.empty()) throw std::invalid_argument("solve_master: empty bundle");
    const MasterData md(s);
    const int r = md.r;
    const int q = static_cast<int>(s.escs.size());
    const StructuredQP qp = master_qp(s);

    MasterSolution sol;
    QpResult res;
    try {
        res = minimize_structured(qp, {.tol = std::min(opts.tol, 1e-10), .max_iter = 200});
    } catch (const QpError&) {
        res.converged = false;
    }
    if (!res.converged) {
        // Fall back to the first-order method, started from the best point at hand.
        Eigen::VectorXd start = res.x.size() == qp.dim() ? res.x : Eigen::VectorXd();
        if (start.size() == 0) {
            start.resize(qp.dim());
            Eigen::Index pos = 0;
            for (const auto& b : qp.blocks) {
                start.segment(pos, b.dim()).setConstant(b.kind == QpBlock::Kind::Simplex ? 1.0 / b.dim() : 0.0);
                pos += b.dim();
            }
        }
        const int ipm_iterations = res.iterations;
        res = minimize(qp.as_blocked(), start, opts);
        res.iterations += ipm_iterations;
    }
    if (!res.x.allFinite()) throw QpError("solve_master: non-finite solution");
    sol.qp_iterations = res.iterations;

    Eigen::VectorXd alpha = res.x.head(r);
    std::vector<Eigen::VectorXd> beta(q);
    Eigen::Index pos = r;
    for (int i = 0; i < q; ++i) {
        beta[i] = res.x.segment(pos, s.escs[i].t());
        pos += s.escs[i].t();
    }
    const Eigen::VectorXd v = md.v(alpha, beta);
    sol.y = s.center - v / md.mu;
    md.cut_terms(alpha, &sol.u, nullptr);
    sol.alpha = alpha;
    sol.beta = beta;
    sol.model_value = model_value(s, sol.y, sol.u);
    sol.master_value = -md.objective(alpha, beta);
    return sol;
}

StepKind step_decision(double center_value, double trial_value, double model, double m_ss) {
    const double predicted = center_value - model;
    if (predicted > 0.0 && center_value - trial_value >= m_ss * predicted) return StepKind::Serious;
    return StepKind::Null;
}

double update_mu(double mu, StepKind kind, double ratio, int& null_streak) {
    if (kind == StepKind::Serious) {
        null_streak = 0;
        return ratio >= 0.7 ? std::max(mu / 2.0, kMuMin) : mu;
    }
    if (++null_streak >= 3) {
        null_streak = 0;
        return std::min(2.0 * mu, kMuMax);
    }
    return mu;
}

void prune_bundle(DualState& s, const Eigen::VectorXd& alpha, int cap) {
    const int r = static_cast<int>(s.bundle.size());
    if (r == 0) return;
    std::vector<int> keep;
    for (int j = 0; j < r; ++j) {
        const bool protect = j == r - 1 || j == s.center_item;
        const double a = j < alpha.size() ? alpha[j] : 1.0;
        if (protect || a >= 1e-8) keep.push_back(j);
    }
    while (static_cast<int>(keep.size()) > cap) {
        auto it = std::find_if(keep.begin(), keep.end(), [&](int j) { return j != r - 1 && j != s.center_item; });
        if (it == keep.end()) break;
        keep.erase(it);
    }
    std::vector<BundleItem> items;
    Eigen::VectorXd warm(static_cast<Eigen::Index>(keep.size()));
    int center = -1;
    for (std::size_t a = 0; a < keep.size(); ++a) {
        const int j = keep[a];
        if (j == s.center_item) center = static_cast<int>(a);
        warm[static_cast<Eigen::Index>(a)] = j < alpha.size() ? alpha[j] : 0.0;
        items.push_back(std::move(s.bundle[j]));
    }
    s.bundle = std::move(items);
    s.center_item = center;
    s.warm_alpha = warm;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Norm of the (projected) subgradient of the full dual function.
double dual_subgradient_norm(const DualState& s, const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                             const Eigen::VectorXd& g) {
    double sq = 0.0;
    Eigen::Index pos = 0;
    for (const auto& esc : s.escs) {
        Eigen::Index best;
        (esc.d * y.segment(pos, esc.b())).maxCoeff(&best);
        sq += (g.segment(pos, esc.b()) + esc.d.row(best).transpose()).squaredNorm();
        pos += esc.b();
    }
    for (std::size_t c = 0; c < s.cuts.size(); ++c) {
        const auto ci = static_cast<Eigen::Index>(c);
        double d = g[pos + ci] + s.cuts[c].rhs;
        if (u[ci] <= 0.0) d = std::min(d, 0.0);
        sq += d * d;
    }
    return std::sqrt(sq);
}

}  // namespace

BundleResult run_bundle(const SdpProblem& base, DualState& s, const BundleParams& params) {
    const auto t_start = Clock::now();
    BundleResult out;
    double oracle = 0.0;
    const int b = s.multiplier_dim();
    if (s.center.size() != b) throw std::invalid_argument("run_bundle: center does not match the ESC blocks");
    if (s.center_u.size() != static_cast<Eigen::Index>(s.cuts.size())) {
        throw std::invalid_argument("run_bundle: cut multipliers do not match the cuts");
    }

    auto evaluate = [&](const Eigen::VectorXd& y, const Eigen::VectorXd& u, HEvaluation& ev) {
        const auto t0 = Clock::now();
        const double v = dual_value(base, s.escs, s.cuts, y, u, &ev, params.ipm);
        oracle += seconds_since(t0);
        ++out.oracle_calls;
        return v;
    };

    double best = std::numeric_limits<double>::infinity();
    if (!s.center_evaluated || s.bundle.empty()) {
        HEvaluation ev;
        const double v = evaluate(s.center, s.center_u, ev);
        // Errors of transferred items are relative to the previous center value.
        for (auto& item : s.bundle) item.e = std::max(0.0, item.e + ev.h - s.center_h);
        s.center_h = ev.h;
        s.center_value = v;
        s.center_evaluated = true;
        s.bundle.push_back({ev.h, ev.g, ev.x, 0.0});
        s.center_item = static_cast<int>(s.bundle.size()) - 1;
        if (s.warm_alpha.size() + 1 == static_cast<Eigen::Index>(s.bundle.size())) {
            s.warm_alpha.conservativeResize(s.warm_alpha.size() + 1);
            s.warm_alpha[s.warm_alpha.size() - 1] = 0.0;
        } else {
            s.warm_alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.bundle.size()));
            s.warm_alpha[s.warm_alpha.size() - 1] = 1.0;
        }
        if (!s.mu_initialized) {
            s.mu = std::clamp(std::max(1.0, ev.g.norm()), kMuMin, kMuMax);
            s.mu_initialized = true;
        }
        if (params.on_iteration) params.on_iteration(0, s.center_value);
    }
    best = std::min(best, s.center_value);
    out.center_values.push_back(s.center_value);

    MasterSolution master;
    bool have_master = false;
    bool master_current = false;
    for (int it = 0; it < params.max_iter; ++it) {
        master = solve_master(s, params.master);
        have_master = true;
        master_current = true;
        const double predicted = s.center_value - master.model_value;
        // At least one trial per run when there are multipliers, so newly added
        // blocks always get a fresh oracle call.
        const bool force_trial = it == 0 && b + static_cast<int>(s.cuts.size()) > 0;
        if (!force_trial && predicted <= params.rel_tol * (1.0 + std::abs(s.center_value))) {
            out.converged = true;
            break;
        }
        HEvaluation ev;
        const double trial = evaluate(master.y, master.u, ev);
        ++out.iterations;
        master_current = false;
        best = std::min(best, trial);

        const StepKind kind = step_decision(s.center_value, trial, master.model_value, params.m_ss);
        const double ratio = predicted > 0.0 ? (s.center_value - trial) / predicted : 0.0;
        s.mu = update_mu(s.mu, kind, ratio, s.null_streak);

        Eigen::VectorXd alpha = master.alpha;
        alpha.conservativeResize(alpha.size() + 1);
        alpha[alpha.size() - 1] = 0.0;
        if (kind == StepKind::Serious) {
            const Eigen::VectorXd shift = stack(master.y - s.center, master.u - s.center_u);
            for (auto& item : s.bundle) item.e = std::max(0.0, item.e + ev.h - s.center_h - item.g.dot(shift));
            s.bundle.push_back({ev.h, ev.g, ev.x, 0.0});
            s.center = master.y;
            s.center_u = master.u;
            s.center_h = ev.h;
            s.center_value = trial;
            s.center_item = static_cast<int>(s.bundle.size()) - 1;
            ++out.serious_steps;
        } else {
            const Eigen::VectorXd shift = stack(s.center - master.y, s.center_u - master.u);
            const double e = s.center_h - ev.h - ev.g.dot(shift);
            s.bundle.push_back({ev.h, ev.g, ev.x, std::max(0.0, e)});
        }
        prune_bundle(s, alpha);
        out.center_values.push_back(s.center_value);
        if (params.on_iteration) params.on_iteration(it + 1, s.center_value);

        if (base.problem == Problem::MaxCut &&
            dual_subgradient_norm(s, master.y, master.u, ev.g) <= params.subgradient_tol) {
            out.converged = true;
            break;
        }
    }

    s.best_bound = std::min(s.best_bound, best);
    out.bound = best;
    out.y = s.center;
    out.u = s.center_u;
    if (have_master) {
        Eigen::MatrixXd agg = Eigen::MatrixXd::Zero(base.order, base.order);
        if (!master_current) master = solve_master(s, params.master);
        for (std::size_t j = 0; j < s.bundle.size(); ++j)
            agg += master.alpha[static_cast<Eigen::Index>(j)] * s.bundle[j].x.dense();
        out.x = SymMatrix::from_dense(agg);
        out.lambda = master.beta;
    } else {
        out.x = s.bundle[s.center_item].x;
        out.lambda.assign(s.escs.size(), Eigen::VectorXd());
        for (std::size_t i = 0; i < s.escs.size(); ++i) {
            out.lambda[i] = Eigen::VectorXd::Constant(s.escs[i].t(), 1.0 / s.escs[i].t());
        }
    }
    out.oracle_seconds = oracle;
    out.other_seconds = std::max(0.0, seconds_since(t_start) - oracle);
    return out;
}

}  // namespace esb
