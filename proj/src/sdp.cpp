#include "esb/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace esb {

SdpProblem build_basic_relaxation(Problem problem, const Graph& g) {
    const int n = g.n();
    SdpProblem sdp;
    sdp.problem = problem;
    sdp.sense = Sense::Maximize;
    switch (problem) {
        case Problem::MaxCut: {
            sdp.order = n;
            sdp.vertex_offset = 0;
            for (int i = 0; i < n; ++i) sdp.constraints.push_back({{{i, i, 1.0}}, {}, 1.0});
            const Eigen::MatrixXd l = laplacian(g).dense() / 4.0;
            sdp.objective = SymMatrix::from_dense(l);
            break;
        }
        case Problem::StableSet: {
            sdp.order = n + 1;
            sdp.vertex_offset = 1;
            sdp.constraints.push_back({{{0, 0, 1.0}}, {}, 1.0});
            for (int i = 1; i <= n; ++i) sdp.constraints.push_back({{{0, i, 1.0}, {i, i, -1.0}}, {}, 0.0});
            for (const Edge& e : g.edges()) sdp.constraints.push_back({{{e.i + 1, e.j + 1, 1.0}}, {}, 0.0});
            sdp.objective = SymMatrix(n + 1);
            for (int i = 1; i <= n; ++i) sdp.objective.set(i, i, 1.0);
            break;
        }
        case Problem::Coloring: {
            sdp.order = n + 1;
            sdp.vertex_offset = 1;
            for (int i = 1; i <= n; ++i) sdp.constraints.push_back({{{i, i, 1.0}}, {}, 1.0});
            for (int i = 1; i <= n; ++i) sdp.constraints.push_back({{{0, i, 1.0}}, {}, 1.0});
            for (const Edge& e : g.edges()) sdp.constraints.push_back({{{e.i + 1, e.j + 1, 1.0}}, {}, 0.0});
            sdp.objective = SymMatrix(n + 1);
            sdp.objective.set(0, 0, -1.0);
            break;
        }
    }
    sdp.nonneg_objective = Eigen::VectorXd::Zero(0);
    return sdp;
}

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Internal minimization form: min <C,X> + c.x  s.t.  A(X) + A_lp(x) = b.
struct StdForm {
    int n = 0;
    int p = 0;
    int m = 0;
    Mat c;
    Vec c_lp;
    Vec b;
    const std::vector<LinearConstraint>* cons = nullptr;
    // For every LP variable, the constraints it appears in.
    std::vector<std::vector<std::pair<int, double>>> lp_columns;
};

Vec apply_a(const StdForm& f, const Mat& x, const Vec& x_lp) {
    Vec out(f.m);
    for (int i = 0; i < f.m; ++i) {
        const auto& con = (*f.cons)[i];
        double s = 0.0;
        for (const auto& e : con.entries) s += e.coef * x(e.row, e.col);
        for (const auto& [l, a] : con.lp) s += a * x_lp[l];
        out[i] = s;
    }
    return out;
}

void apply_at(const StdForm& f, const Vec& y, Mat& out, Vec& out_lp) {
    out.setZero(f.n, f.n);
    out_lp.setZero(f.p);
    for (int i = 0; i < f.m; ++i) {
        const auto& con = (*f.cons)[i];
        const double yi = y[i];
        if (yi == 0.0) continue;
        for (const auto& e : con.entries) {
            if (e.row == e.col) {
                out(e.row, e.row) += yi * e.coef;
            } else {
                out(e.row, e.col) += 0.5 * yi * e.coef;
                out(e.col, e.row) += 0.5 * yi * e.coef;
            }
        }
        for (const auto& [l, a] : con.lp) out_lp[l] += yi * a;
    }
}

// M_ij = <A_i, X A_j W> + sum_l a_il a_jl x_l / z_l
Mat schur(const StdForm& f, const Mat& x, const Mat& w, const Vec& d_lp) {
    Mat m = Mat::Zero(f.m, f.m);
    const auto& cons = *f.cons;
    for (int i = 0; i < f.m; ++i) {
        const auto& ei = cons[i].entries;
        if (ei.empty()) continue;
        for (int j = i; j < f.m; ++j) {
            const auto& ej = cons[j].entries;
            double s = 0.0;
            for (const auto& a : ei) {
                for (const auto& b : ej) {
                    const int p = a.row, q = a.col, r = b.row, t = b.col;
                    s += a.coef * b.coef *
                         (x(p, r) * w(q, t) + x(p, t) * w(q, r) + x(q, r) * w(p, t) + x(q, t) * w(p, r));
                }
            }
            m(i, j) = 0.25 * s;
        }
    }
    for (int l = 0; l < f.p; ++l) {
        const auto& col = f.lp_columns[l];
        for (std::size_t a = 0; a < col.size(); ++a) {
            for (std::size_t b = a; b < col.size(); ++b) {
                int i = col[a].first, j = col[b].first;
                if (i > j) std::swap(i, j);
                const double v = col[a].second * col[b].second * d_lp[l];
                m(i, j) += (i == j && a != b) ? 2.0 * v : v;
            }
        }
    }
    m.triangularView<Eigen::StrictlyLower>() = m.transpose().triangularView<Eigen::StrictlyLower>();
    return m;
}

Mat sym(const Mat& a) { return 0.5 * (a + a.transpose()); }

// Largest step alpha with X + alpha dX PSD (infinity if unbounded).
double max_step_psd(const Eigen::LLT<Mat>& chol_x, const Mat& dx) {
    if (dx.rows() == 0) return std::numeric_limits<double>::infinity();
    Mat t = chol_x.matrixL().solve(dx);
    t = chol_x.matrixL().solve(t.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(sym(t), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

double max_step_lp(const Vec& x, const Vec& dx) {
    double a = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (dx[i] < 0.0) a = std::min(a, -x[i] / dx[i]);
    return a;
}

double constraint_norm(const LinearConstraint& c) {
    double s = 0.0;
    for (const auto& e : c.entries) s += e.row == e.col ? e.coef * e.coef : 0.5 * e.coef * e.coef;
    for (const auto& [l, a] : c.lp) s += a * a;
    return std::sqrt(s);
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& problem, const IpmOptions& opts) {
    StdForm f;
    f.n = problem.order;
    f.p = problem.nonneg_dim;
    f.m = static_cast<int>(problem.constraints.size());
    f.cons = &problem.constraints;
    const double sign = problem.sense == Sense::Maximize ? -1.0 : 1.0;
    f.c = sign * problem.objective.dense();
    f.c_lp = f.p > 0 ? Vec(sign * problem.nonneg_objective) : Vec::Zero(0);
    if (f.c_lp.size() != f.p) throw std::invalid_argument("solve_sdp: nonneg objective has wrong size");
    f.b.resize(f.m);
    f.lp_columns.assign(f.p, {});
    for (int i = 0; i < f.m; ++i) {
        const auto& con = problem.constraints[i];
        f.b[i] = con.rhs;
        for (const auto& e : con.entries) {
            if (e.row > e.col || e.row < 0 || e.col >= f.n) throw std::invalid_argument("solve_sdp: bad constraint entry");
        }
        for (const auto& [l, a] : con.lp) {
            if (l < 0 || l >= f.p) throw std::invalid_argument("solve_sdp: bad nonneg index");
            f.lp_columns[l].push_back({i, a});
        }
    }

    const int n = f.n, p = f.p, m = f.m;
    const double nn = static_cast<double>(n + p);
    double max_ratio = 0.0, max_anorm = 0.0;
    for (int i = 0; i < m; ++i) {
        const double an = constraint_norm(problem.constraints[i]);
        max_anorm = std::max(max_anorm, an);
        max_ratio = std::max(max_ratio, (1.0 + std::abs(f.b[i])) / (1.0 + an));
    }
    const double cnorm = std::sqrt(f.c.squaredNorm() + f.c_lp.squaredNorm());
    const double xi = std::max({10.0, std::sqrt(nn), nn * max_ratio});
    const double eta = std::max({10.0, std::sqrt(nn), max_anorm, cnorm});

    Mat x = xi * Mat::Identity(n, n);
    Vec x_lp = Vec::Constant(p, xi);
    Mat z = eta * Mat::Identity(n, n);
    Vec z_lp = Vec::Constant(p, eta);
    Vec y = Vec::Zero(m);

    const double bnorm = f.b.norm();
    SdpSolution sol;
    Mat aty(n, n), d_z(n, n), d_x(n, n), rd(n, n), w(n, n);
    Vec aty_lp(p), d_z_lp(p), d_x_lp(p), rd_lp(p);

    int stalled = 0;
    double pinf = 0, dinf = 0, gap = 0;
    for (int it = 0; it <= opts.max_iter; ++it) {
        apply_at(f, y, aty, aty_lp);
        const Vec rp = f.b - apply_a(f, x, x_lp);
        rd = f.c - z - aty;
        rd_lp = f.c_lp - z_lp - aty_lp;
        const double pobj = f.c.cwiseProduct(x).sum() + f.c_lp.dot(x_lp);
        const double dobj = f.b.dot(y);
        pinf = rp.norm() / (1.0 + bnorm);
        dinf = std::sqrt(rd.squaredNorm() + rd_lp.squaredNorm()) / (1.0 + cnorm);
        gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
        sol.iterations = it;
        const bool done = gap <= opts.tol && pinf <= opts.tol && dinf <= opts.tol;
        const bool near = gap <= 100 * opts.tol && pinf <= 100 * opts.tol && dinf <= 100 * opts.tol;
        if (done || (stalled >= 3 && near)) {
            sol.x = SymMatrix::from_dense(x);
            sol.x_nonneg = x_lp;
            sol.dual_y = y;
            sol.value = sign * pobj;
            sol.dual_value = sign * dobj;
            sol.gap = gap;
            sol.primal_infeasibility = pinf;
            sol.dual_infeasibility = dinf;
            return sol;
        }
        if (it == opts.max_iter) break;

        const double mu = (x.cwiseProduct(z).sum() + x_lp.dot(z_lp)) / nn;
        Eigen::LLT<Mat> chol_z(z);
        if (chol_z.info() != Eigen::Success) throw SolverError("solve_sdp: dual iterate lost definiteness");
        w = chol_z.solve(Mat::Identity(n, n));
        w = sym(w);
        Eigen::LLT<Mat> chol_x(x);
        if (chol_x.info() != Eigen::Success) throw SolverError("solve_sdp: primal iterate lost definiteness");
        const Vec d_lp = x_lp.cwiseQuotient(z_lp);

        Mat schur_m = schur(f, x, w, d_lp);
        Eigen::LLT<Mat> chol_m(schur_m);
        if (chol_m.info() != Eigen::Success) {
            const double reg = 1e-14 * std::max(1.0, schur_m.diagonal().cwiseAbs().maxCoeff());
            schur_m.diagonal().array() += reg;
            chol_m.compute(schur_m);
            if (chol_m.info() != Eigen::Success) {
                std::ostringstream msg;
                msg << "solve_sdp: Schur complement factorization failed at iteration " << it
                    << " (gap " << gap << ", pinf " << pinf << ", dinf " << dinf << ")";
                throw SolverError(msg.str());
            }
        }
        const Mat xrdw = sym(x * rd * w);

        auto direction = [&](double sigma_mu, const Mat* corr, const Vec* corr_lp) {
            Mat g = sigma_mu * w - x - xrdw;
            Vec g_lp = sigma_mu * z_lp.cwiseInverse() - x_lp - x_lp.cwiseProduct(rd_lp).cwiseQuotient(z_lp);
            if (corr) {
                g -= *corr;
                g_lp -= *corr_lp;
            }
            const Vec rhs = rp - apply_a(f, g, g_lp);
            Vec dy = chol_m.solve(rhs);
            apply_at(f, dy, aty, aty_lp);
            d_z = rd - aty;
            d_z_lp = rd_lp - aty_lp;
            d_x = sigma_mu * w - x - sym(x * d_z * w);
            d_x_lp = sigma_mu * z_lp.cwiseInverse() - x_lp - x_lp.cwiseProduct(d_z_lp).cwiseQuotient(z_lp);
            if (corr) {
                d_x -= *corr;
                d_x_lp -= *corr_lp;
            }
            return dy;
        };

        // Predictor.
        Vec dy = direction(0.0, nullptr, nullptr);
        double ap = std::min({1.0, max_step_psd(chol_x, d_x), max_step_lp(x_lp, d_x_lp)});
        double ad = std::min({1.0, max_step_psd(chol_z, d_z), max_step_lp(z_lp, d_z_lp)});
        const double mu_aff = ((x + ap * d_x).cwiseProduct(z + ad * d_z).sum() +
                               (x_lp + ap * d_x_lp).dot(z_lp + ad * d_z_lp)) /
                              nn;
        double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3.0);
        sigma = std::clamp(sigma, 0.0, 1.0);
        const Mat corr = sym(d_x * d_z * w);
        const Vec corr_lp = d_x_lp.cwiseProduct(d_z_lp).cwiseQuotient(z_lp);

        // Corrector.
        dy = direction(sigma * mu, &corr, &corr_lp);
        ap = std::min({1.0, opts.step_fraction * max_step_psd(chol_x, d_x),
                       opts.step_fraction * max_step_lp(x_lp, d_x_lp)});
        ad = std::min({1.0, opts.step_fraction * max_step_psd(chol_z, d_z),
                       opts.step_fraction * max_step_lp(z_lp, d_z_lp)});
        stalled = (ap < 1e-6 && ad < 1e-6) ? stalled + 1 : 0;

        x = sym(x + ap * d_x);
        x_lp += ap * d_x_lp;
        y += ad * dy;
        z = sym(z + ad * d_z);
        z_lp += ad * d_z_lp;
        if (!x.allFinite() || !z.allFinite() || !y.allFinite()) throw SolverError("solve_sdp: non-finite iterate");
    }
    std::ostringstream msg;
    msg << "solve_sdp: no convergence after " << opts.max_iter << " iterations (gap " << gap << ", pinf "
        << pinf << ", dinf " << dinf << ")";
    throw SolverError(msg.str());
}

SymMatrix lagrangian_objective(const SdpProblem& base, const std::vector<EscBlock>& escs,
                               const std::vector<LinearCut>& cuts, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& u) {
    Mat c = base.objective.dense();
    const int off = base.vertex_offset;
    Eigen::Index pos = 0;
    for (const auto& esc : escs) {
        for (int s = 0; s < esc.b(); ++s) {
            const Slot& sl = esc.mask[s];
            const int i = off + esc.vertices[sl.a];
            const int j = off + esc.vertices[sl.b];
            const double v = y[pos + s];
            c(i, j) -= v;
            if (i != j) c(j, i) -= v;
        }
        pos += esc.b();
    }
    if (pos != y.size()) throw std::invalid_argument("lagrangian_objective: multiplier vector does not match ESCs");
    if (u.size() != static_cast<Eigen::Index>(cuts.size())) {
        throw std::invalid_argument("lagrangian_objective: cut multipliers do not match cuts");
    }
    for (std::size_t ci = 0; ci < cuts.size(); ++ci) {
        const auto& cut = cuts[ci];
        const double uc = u[static_cast<Eigen::Index>(ci)];
        if (uc == 0.0) continue;
        const int k = static_cast<int>(cut.vertices.size());
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) c(off + cut.vertices[a], off + cut.vertices[b]) -= uc * cut.normal(a, b);
    }
    return SymMatrix::from_dense(c);
}

Eigen::VectorXd subgradient_at(const SdpProblem& base, const std::vector<EscBlock>& escs,
                               const std::vector<LinearCut>& cuts, const Eigen::MatrixXd& x) {
    Eigen::Index total = 0;
    for (const auto& esc : escs) total += esc.b();
    Vec g(total + static_cast<Eigen::Index>(cuts.size()));
    Eigen::Index pos = 0;
    for (const auto& esc : escs) {
        g.segment(pos, esc.b()) = -extract(principal_submatrix(x, esc.vertices, base.vertex_offset), esc.mask);
        pos += esc.b();
    }
    for (const auto& cut : cuts) {
        g[pos++] = -cut.normal.dense().cwiseProduct(principal_submatrix(x, cut.vertices, base.vertex_offset)).sum();
    }
    return g;
}

HEvaluation evaluate_h(const SdpProblem& base, const std::vector<EscBlock>& escs,
                       const std::vector<LinearCut>& cuts, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& u, const IpmOptions& opts) {
    if (u.size() > 0 && u.minCoeff() < 0.0) throw std::invalid_argument("evaluate_h: cut multipliers must be nonnegative");
    SdpProblem p = base;
    p.objective = lagrangian_objective(base, escs, cuts, y, u);
    const SdpSolution sol = solve_sdp(p, opts);
    HEvaluation out;
    out.h = sol.value;
    out.x = sol.x;
    out.g = subgradient_at(base, escs, cuts, sol.x.dense());
    out.iterations = sol.iterations;
    return out;
}

SdpSolution solve_monolithic(const SdpProblem& base, const std::vector<EscBlock>& escs, const IpmOptions& opts) {
    int total = 0;
    for (const auto& esc : escs) total += esc.t();
    if (total > kMonolithicMaxWeights) {
        throw std::invalid_argument("solve_monolithic: too many convex weights (" + std::to_string(total) + ")");
    }
    SdpProblem p = base;
    p.nonneg_dim = total;
    p.nonneg_objective = Vec::Zero(total);
    const int off = base.vertex_offset;
    int lam = 0;
    for (const auto& esc : escs) {
        LinearConstraint sum;
        for (int i = 0; i < esc.t(); ++i) sum.lp.push_back({lam + i, 1.0});
        sum.rhs = 1.0;
        p.constraints.push_back(std::move(sum));
        for (int s = 0; s < esc.b(); ++s) {
            const Slot& sl = esc.mask[s];
            int r = off + esc.vertices[sl.a];
            int c = off + esc.vertices[sl.b];
            if (r > c) std::swap(r, c);
            LinearConstraint con;
            con.entries.push_back({r, c, sl.diagonal() ? 1.0 : 2.0});
            for (int i = 0; i < esc.t(); ++i)
                if (esc.d(i, s) != 0.0) con.lp.push_back({lam + i, -esc.d(i, s)});
            con.rhs = 0.0;
            p.constraints.push_back(std::move(con));
        }
        lam += esc.t();
    }
    return solve_sdp(p, opts);
}

}  // namespace esb
