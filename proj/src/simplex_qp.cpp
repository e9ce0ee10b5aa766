#include "esb/simplex_qp.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>

namespace esb {

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
    const Eigen::Index d = v.size();
    if (d < 1) throw std::invalid_argument("project_simplex: empty vector");
    std::vector<Eigen::Index> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return v[a] > v[b]; });
    double cumsum = 0.0;
    double theta = 0.0;
    for (Eigen::Index r = 0; r < d; ++r) {
        cumsum += v[order[r]];
        const double t = (cumsum - 1.0) / static_cast<double>(r + 1);
        if (v[order[r]] - t > 0.0) theta = t;
    }
    Eigen::VectorXd out = (v.array() - theta).max(0.0).matrix();
    // Renormalize away the rounding in theta.
    const double s = out.sum();
    if (s > 0.0) out /= s;
    return out;
}

int BlockedQP::dim() const {
    int d = 0;
    for (const auto& b : blocks) d += b.dim;
    return d;
}

double BlockedQP::objective(const Eigen::VectorXd& x) const {
    Eigen::VectorXd hx(x.size());
    hessian(x, hx);
    double f = 0.5 * x.dot(hx) + linear.dot(x) + constant;
    if (extra) f += extra(x, nullptr);
    return f;
}

Eigen::VectorXd project_blocks(const std::vector<QpBlock>& blocks, const Eigen::VectorXd& x) {
    Eigen::VectorXd out(x.size());
    Eigen::Index off = 0;
    for (const auto& b : blocks) {
        auto seg = x.segment(off, b.dim);
        if (b.kind == QpBlock::Kind::Simplex) {
            out.segment(off, b.dim) = project_simplex(seg);
        } else {
            out.segment(off, b.dim) = seg.cwiseMax(0.0);
        }
        off += b.dim;
    }
    return out;
}

bool is_feasible(const std::vector<QpBlock>& blocks, const Eigen::VectorXd& x, double tol) {
    Eigen::Index off = 0;
    for (const auto& b : blocks) {
        auto seg = x.segment(off, b.dim);
        if (seg.minCoeff() < -tol) return false;
        if (b.kind == QpBlock::Kind::Simplex && std::abs(seg.sum() - 1.0) > tol * std::max(1, b.dim)) return false;
        off += b.dim;
    }
    return off == x.size();
}

double estimate_lipschitz(const BlockedQP& qp) {
    const int n = qp.dim();
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * ((i * 7919) % 101);
    v.normalize();
    Eigen::VectorXd hv(n);
    double lambda = 0.0;
    for (int it = 0; it < 30; ++it) {
        qp.hessian(v, hv);
        const double nrm = hv.norm();
        if (nrm == 0.0) return 0.0;
        lambda = nrm;
        v = hv / nrm;
    }
    return 1.1 * lambda;
}

QpResult minimize(const BlockedQP& qp, const Eigen::VectorXd& start, const QpOptions& opts) {
    const int n = qp.dim();
    if (start.size() != n) throw std::invalid_argument("minimize: start has wrong dimension");
    if (!is_feasible(qp.blocks, start, 1e-9)) throw std::invalid_argument("minimize: start is not feasible");

    double lip = qp.lipschitz > 0.0 ? qp.lipschitz : estimate_lipschitz(qp);
    lip += qp.extra_lipschitz;
    lip = std::max(lip, 1e-10);

    auto value = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& hx) {
        double f = 0.5 * x.dot(hx) + qp.linear.dot(x) + qp.constant;
        if (qp.extra) f += qp.extra(x, nullptr);
        return f;
    };

    Eigen::VectorXd x = project_blocks(qp.blocks, start);
    Eigen::VectorXd hx(n);
    qp.hessian(x, hx);
    double fx = value(x, hx);
    if (!std::isfinite(fx)) throw QpError("minimize: non-finite objective at start");

    Eigen::VectorXd y = x, hy = hx;
    Eigen::VectorXd grad(n), extra_grad(n), x_new(n), hx_new(n);
    double t = 1.0;

    QpResult res;
    res.x = x;
    res.value = fx;
    for (int it = 0; it < opts.max_iter; ++it) {
        res.iterations = it + 1;
        double fy = 0.5 * y.dot(hy) + qp.linear.dot(y) + qp.constant;
        grad = hy + qp.linear;
        if (qp.extra) {
            extra_grad.setZero();
            fy += qp.extra(y, &extra_grad);
            grad += extra_grad;
        }
        double f_new = 0.0;
        for (int bt = 0; bt < 60; ++bt) {
            x_new = project_blocks(qp.blocks, y - grad / lip);
            qp.hessian(x_new, hx_new);
            f_new = value(x_new, hx_new);
            if (!std::isfinite(f_new)) throw QpError("minimize: non-finite objective");
            const Eigen::VectorXd step = x_new - y;
            const double model = fy + grad.dot(step) + 0.5 * lip * step.squaredNorm();
            if (f_new <= model + 1e-12 * (1.0 + std::abs(fy))) break;
            lip *= 2.0;
        }
        const double pg = lip * (x_new - y).norm();
        res.pg_norm = pg;

        if (f_new > fx) {
            // Objective went up: restart the momentum from the last accepted point.
            if (t == 1.0 && y == x) {
                // Already a plain projected-gradient step; the increase is rounding noise.
                res.converged = pg <= opts.tol * (1.0 + std::abs(fx));
                break;
            }
            t = 1.0;
            y = x;
            hy = hx;
            continue;
        }
        const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / t_new;
        y = x_new + beta * (x_new - x);
        hy = hx_new + beta * (hx_new - hx);
        x.swap(x_new);
        hx.swap(hx_new);
        fx = f_new;
        t = t_new;
        if (pg <= opts.tol * (1.0 + std::abs(fx))) {
            res.converged = true;
            break;
        }
    }
    res.x = x;
    res.value = fx;
    return res;
}

MinNormResult min_norm_point(const Eigen::MatrixXd& points, double tol, int max_iter) {
    const Eigen::Index t = points.cols();
    if (t < 1) throw std::invalid_argument("min_norm_point: no points");
    const Eigen::VectorXd sq = points.colwise().squaredNorm().transpose();
    const double scale = std::max(1.0, sq.maxCoeff());

    std::vector<Eigen::Index> corral;
    std::vector<double> lambda;
    Eigen::Index first;
    sq.minCoeff(&first);
    corral.push_back(first);
    lambda.push_back(1.0);
    Eigen::VectorXd x = points.col(first);

    MinNormResult res;
    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it + 1;
        const double xx = x.squaredNorm();
        if (xx <= 1e-28 * scale) break;
        Eigen::VectorXd proj = points.transpose() * x;
        Eigen::Index j;
        const double best = proj.minCoeff(&j);
        if (xx - best <= tol * scale) break;
        if (std::find(corral.begin(), corral.end(), j) != corral.end()) break;
        corral.push_back(j);
        lambda.push_back(0.0);

        for (int minor = 0; minor < 1000; ++minor) {
            const Eigen::Index s = static_cast<Eigen::Index>(corral.size());
            Eigen::MatrixXd ps(points.rows(), s);
            for (Eigen::Index a = 0; a < s; ++a) ps.col(a) = points.col(corral[a]);
            Eigen::MatrixXd gram = ps.transpose() * ps;
            gram.array() += 1.0;
            Eigen::VectorXd u = gram.colPivHouseholderQr().solve(Eigen::VectorXd::Ones(s));
            const double usum = u.sum();
            Eigen::VectorXd mu = u / usum;
            if (!mu.allFinite()) throw QpError("min_norm_point: singular affine system");
            if (mu.minCoeff() > 1e-12) {
                for (Eigen::Index a = 0; a < s; ++a) lambda[a] = mu[a];
                break;
            }
            double theta = 1.0;
            for (Eigen::Index a = 0; a < s; ++a) {
                if (mu[a] <= 1e-12) {
                    const double denom = lambda[a] - mu[a];
                    if (denom > 0.0) theta = std::min(theta, lambda[a] / denom);
                }
            }
            std::vector<Eigen::Index> kept_idx;
            std::vector<double> kept_lambda;
            for (Eigen::Index a = 0; a < s; ++a) {
                const double l = (1.0 - theta) * lambda[a] + theta * mu[a];
                if (l > 1e-14) {
                    kept_idx.push_back(corral[a]);
                    kept_lambda.push_back(l);
                }
            }
            if (kept_idx.empty()) {
                // Degenerate; keep the newest point alone.
                kept_idx.push_back(corral.back());
                kept_lambda.push_back(1.0);
            }
            const double total = std::accumulate(kept_lambda.begin(), kept_lambda.end(), 0.0);
            for (double& l : kept_lambda) l /= total;
            corral.swap(kept_idx);
            lambda.swap(kept_lambda);
        }
        x.setZero();
        for (std::size_t a = 0; a < corral.size(); ++a) x += lambda[a] * points.col(corral[a]);
    }
    res.weights = Eigen::VectorXd::Zero(t);
    for (std::size_t a = 0; a < corral.size(); ++a) res.weights[corral[a]] = lambda[a];
    res.point = x;
    res.distance = x.norm();
    return res;
}

}  // namespace esb

namespace esb {

int StructuredQP::dim() const {
    int d = 0;
    for (const auto& b : blocks) d += b.dim();
    return d;
}

std::vector<QpBlock> StructuredQP::qp_blocks() const {
    std::vector<QpBlock> out;
    for (const auto& b : blocks) out.push_back({b.kind, b.dim()});
    return out;
}

Eigen::VectorXd StructuredQP::residual(const Eigen::VectorXd& x) const {
    Eigen::VectorXd v = offset.size() == rows ? offset : Eigen::VectorXd::Zero(rows);
    Eigen::Index pos = 0;
    for (const auto& b : blocks) {
        v.segment(b.row_begin, b.m.rows()) += b.m * x.segment(pos, b.dim());
        pos += b.dim();
    }
    return v;
}

double StructuredQP::objective(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd v = residual(x);
    double f = 0.5 * v.squaredNorm() / mu + constant;
    Eigen::Index pos = 0;
    for (const auto& b : blocks) {
        f += b.c.dot(x.segment(pos, b.dim()));
        pos += b.dim();
    }
    return f;
}

BlockedQP StructuredQP::as_blocked() const {
    BlockedQP qp;
    qp.blocks = qp_blocks();
    const StructuredQP* self = this;
    qp.hessian = [self](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(self->rows);
        Eigen::Index pos = 0;
        for (const auto& b : self->blocks) {
            v.segment(b.row_begin, b.m.rows()) += b.m * x.segment(pos, b.dim());
            pos += b.dim();
        }
        out.resize(x.size());
        pos = 0;
        for (const auto& b : self->blocks) {
            out.segment(pos, b.dim()) = b.m.transpose() * v.segment(b.row_begin, b.m.rows()) / self->mu;
            pos += b.dim();
        }
    };
    const Eigen::VectorXd off = offset.size() == rows ? offset : Eigen::VectorXd::Zero(rows);
    qp.linear.resize(dim());
    Eigen::Index pos = 0;
    for (const auto& b : blocks) {
        qp.linear.segment(pos, b.dim()) = b.c + b.m.transpose() * off.segment(b.row_begin, b.m.rows()) / mu;
        pos += b.dim();
    }
    qp.constant = constant + 0.5 * off.squaredNorm() / mu;
    return qp;
}

namespace {

struct IpmBlockView {
    const StructuredBlock* b;
    Eigen::Index pos;
    bool simplex;
};

}  // namespace

QpResult minimize_structured(const StructuredQP& qp, const QpOptions& opts) {
    const int rows = qp.rows;
    const int n = qp.dim();
    if (n == 0) throw std::invalid_argument("minimize_structured: empty problem");
    const double mu_w = qp.mu;
    if (!(mu_w > 0.0)) throw std::invalid_argument("minimize_structured: mu must be positive");

    std::vector<IpmBlockView> views;
    std::vector<char> covered(rows, 0);
    Eigen::Index pos = 0;
    int nsimplex = 0;
    for (const auto& b : qp.blocks) {
        if (b.c.size() != b.dim()) throw std::invalid_argument("minimize_structured: cost size mismatch");
        if (b.global) {
            if (b.row_begin != 0 || b.m.rows() != rows)
                throw std::invalid_argument("minimize_structured: global block must span all rows");
        } else {
            if (b.row_begin < 0 || b.row_begin + b.m.rows() > rows)
                throw std::invalid_argument("minimize_structured: block rows out of range");
            for (Eigen::Index r = 0; r < b.m.rows(); ++r) {
                if (covered[b.row_begin + r]) throw std::invalid_argument("minimize_structured: local blocks overlap");
                covered[b.row_begin + r] = 1;
            }
        }
        const bool simplex = b.kind == QpBlock::Kind::Simplex;
        nsimplex += simplex;
        views.push_back({&b, pos, simplex});
        pos += b.dim();
    }
    const Eigen::VectorXd offset = qp.offset.size() == rows ? qp.offset : Eigen::VectorXd::Zero(rows);

    auto apply_m = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(rows);
        for (const auto& bv : views) v.segment(bv.b->row_begin, bv.b->m.rows()) += bv.b->m * x.segment(bv.pos, bv.b->dim());
        return v;
    };
    auto apply_mt = [&](const Eigen::VectorXd& w) {
        Eigen::VectorXd out(n);
        for (const auto& bv : views)
            out.segment(bv.pos, bv.b->dim()) = bv.b->m.transpose() * w.segment(bv.b->row_begin, bv.b->m.rows());
        return out;
    };

    Eigen::VectorXd c(n);
    for (const auto& bv : views) c.segment(bv.pos, bv.b->dim()) = bv.b->c;

    Eigen::VectorXd x(n), z(n);
    Eigen::VectorXd lam = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(views.size()));
    for (const auto& bv : views) {
        const int d = bv.b->dim();
        x.segment(bv.pos, d).setConstant(bv.simplex ? 1.0 / d : 1.0);
    }
    {
        const Eigen::VectorXd grad = apply_mt(apply_m(x) + offset) / mu_w + c;
        z.setConstant(std::max(1.0, grad.cwiseAbs().maxCoeff()));
    }
    const double cnorm = 1.0 + c.cwiseAbs().maxCoeff();

    QpResult res;
    double best_merit = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_x = x;
    for (int it = 0; it < opts.max_iter; ++it) {
        res.iterations = it + 1;
        const Eigen::VectorXd v = apply_m(x) + offset;
        const Eigen::VectorXd grad = apply_mt(v) / mu_w + c;
        const double f = 0.5 * v.squaredNorm() / mu_w + c.dot(x) + qp.constant;
        Eigen::VectorXd rd = grad - z;
        Eigen::VectorXd rp = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(views.size()));
        for (std::size_t b = 0; b < views.size(); ++b) {
            const auto& bv = views[b];
            if (!bv.simplex) continue;
            rd.segment(bv.pos, bv.b->dim()).array() -= lam[static_cast<Eigen::Index>(b)];
            rp[static_cast<Eigen::Index>(b)] = 1.0 - x.segment(bv.pos, bv.b->dim()).sum();
        }
        const double gap = x.dot(z);
        res.pg_norm = rd.cwiseAbs().maxCoeff();
        if (rp.cwiseAbs().maxCoeff() <= opts.tol && res.pg_norm <= opts.tol * cnorm &&
            gap <= opts.tol * (1.0 + std::abs(f))) {
            res.converged = true;
            break;
        }
        const double merit = std::max({rp.cwiseAbs().maxCoeff(), res.pg_norm / cnorm, gap / (1.0 + std::abs(f))});
        if (merit < best_merit) {
            best_merit = merit;
            best_x = x;
        } else if (merit > 1e3 * best_merit) {
            break;
        }
        const double mu_c = gap / n;
        const Eigen::VectorXd theta = x.cwiseQuotient(z);

        // Local blocks are eliminated into the residual space, where they give
        // the block-diagonal matrix P = mu I + sum_b M_b Psi_b M_b^T. Global
        // blocks stay explicit in a small bordered system
        //   [D_g + G^T P^-1 G   -A_g^T] [dx_g ]
        //   [A_g                  0   ] [dlam_g]
        std::vector<Eigen::LLT<Eigen::MatrixXd>> local_llt(views.size());
        for (std::size_t b = 0; b < views.size(); ++b) {
            const auto& bv = views[b];
            if (bv.b->global) continue;
            const int d = bv.b->dim();
            const Eigen::VectorXd th = theta.segment(bv.pos, d);
            Eigen::MatrixXd psi = th.asDiagonal();
            if (bv.simplex) {
                // Theta - theta theta^T / s with the diagonal formed as
                // theta_i * (sum of the others) / s to avoid cancellation.
                const double total = th.sum();
                psi = -th * th.transpose() / total;
                Eigen::VectorXd prefix(d + 1), suffix(d + 1);
                prefix[0] = 0.0;
                suffix[d] = 0.0;
                for (int i = 0; i < d; ++i) prefix[i + 1] = prefix[i] + th[i];
                for (int i = d - 1; i >= 0; --i) suffix[i] = suffix[i + 1] + th[i];
                for (int i = 0; i < d; ++i) psi(i, i) = th[i] * (prefix[i] + suffix[i + 1]) / total;
            }
            Eigen::MatrixXd p = bv.b->m * psi * bv.b->m.transpose();
            p.diagonal().array() += mu_w;
            local_llt[b].compute(p);
            if (local_llt[b].info() != Eigen::Success) throw QpError("minimize_structured: local factorization failed");
        }
        auto apply_p_inv = [&](Eigen::MatrixXd w) {
            std::vector<char> done(rows, 0);
            for (std::size_t b = 0; b < views.size(); ++b) {
                const auto& bv = views[b];
                if (bv.b->global) continue;
                const auto r0 = bv.b->row_begin;
                const auto nr = bv.b->m.rows();
                w.middleRows(r0, nr) = local_llt[b].solve(w.middleRows(r0, nr));
                for (Eigen::Index r = 0; r < nr; ++r) done[r0 + r] = 1;
            }
            for (int r = 0; r < rows; ++r)
                if (!done[r]) w.row(r) /= mu_w;
            return w;
        };

        int ng = 0, nsg = 0;
        for (const auto& bv : views) {
            if (!bv.b->global) continue;
            ng += bv.b->dim();
            nsg += bv.simplex;
        }
        Eigen::MatrixXd gm(rows, ng);
        Eigen::MatrixXd pinv_g;
        Eigen::PartialPivLU<Eigen::MatrixXd> kkt;
        if (ng > 0) {
            Eigen::Index col = 0;
            for (const auto& bv : views) {
                if (!bv.b->global) continue;
                gm.middleCols(col, bv.b->dim()) = bv.b->m;
                col += bv.b->dim();
            }
            pinv_g = apply_p_inv(gm);
            Eigen::MatrixXd k = Eigen::MatrixXd::Zero(ng + nsg, ng + nsg);
            k.topLeftCorner(ng, ng) = gm.transpose() * pinv_g;
            col = 0;
            int srow = 0;
            for (const auto& bv : views) {
                if (!bv.b->global) continue;
                const int d = bv.b->dim();
                for (int i = 0; i < d; ++i) k(col + i, col + i) += 1.0 / theta[bv.pos + i];
                if (bv.simplex) {
                    k.block(ng + srow, col, 1, d).setOnes();
                    k.block(col, ng + srow, d, 1).setConstant(-1.0);
                    ++srow;
                }
                col += d;
            }
            kkt.compute(k);
        }

        auto solve = [&](const Eigen::VectorXd& rho, const Eigen::VectorXd& rpv, Eigen::VectorXd& dx,
                         Eigen::VectorXd& dlam) {
            // t_b = Theta_b rho_b + Theta_b 1 (rp_b - 1^T Theta_b rho_b) / s_b on local blocks.
            Eigen::VectorXd t = Eigen::VectorXd::Zero(n);
            for (std::size_t b = 0; b < views.size(); ++b) {
                const auto& bv = views[b];
                if (bv.b->global) continue;
                const auto th = theta.segment(bv.pos, bv.b->dim());
                t.segment(bv.pos, bv.b->dim()) = th.cwiseProduct(rho.segment(bv.pos, bv.b->dim()));
                if (bv.simplex) {
                    const double k = (rpv[static_cast<Eigen::Index>(b)] - th.dot(rho.segment(bv.pos, bv.b->dim()))) / th.sum();
                    t.segment(bv.pos, bv.b->dim()) += k * th;
                }
            }
            const Eigen::VectorXd pl = apply_p_inv(apply_m(t));
            dx.setZero(n);
            dlam.setZero(static_cast<Eigen::Index>(views.size()));
            Eigen::VectorXd w = pl;
            if (ng > 0) {
                Eigen::VectorXd rhs(ng + nsg);
                Eigen::Index col = 0;
                int srow = 0;
                for (std::size_t b = 0; b < views.size(); ++b) {
                    const auto& bv = views[b];
                    if (!bv.b->global) continue;
                    rhs.segment(col, bv.b->dim()) = rho.segment(bv.pos, bv.b->dim());
                    if (bv.simplex) rhs[ng + srow++] = rpv[static_cast<Eigen::Index>(b)];
                    col += bv.b->dim();
                }
                rhs.head(ng) -= gm.transpose() * pl;
                const Eigen::VectorXd sol = kkt.solve(rhs);
                col = 0;
                srow = 0;
                for (std::size_t b = 0; b < views.size(); ++b) {
                    const auto& bv = views[b];
                    if (!bv.b->global) continue;
                    dx.segment(bv.pos, bv.b->dim()) = sol.segment(col, bv.b->dim());
                    if (bv.simplex) dlam[static_cast<Eigen::Index>(b)] = sol[ng + srow++];
                    col += bv.b->dim();
                }
                w += pinv_g * sol.head(ng);
            }
            const Eigen::VectorXd mtw = apply_mt(w);
            for (std::size_t b = 0; b < views.size(); ++b) {
                const auto& bv = views[b];
                if (bv.b->global) continue;
                const int d = bv.b->dim();
                const auto th = theta.segment(bv.pos, d);
                double dl = 0.0;
                if (bv.simplex) {
                    dl = (rpv[static_cast<Eigen::Index>(b)] - th.dot(rho.segment(bv.pos, d)) +
                          th.dot(mtw.segment(bv.pos, d))) /
                         th.sum();
                    dlam[static_cast<Eigen::Index>(b)] = dl;
                }
                dx.segment(bv.pos, d) =
                    (th.array() * ((rho.segment(bv.pos, d) - mtw.segment(bv.pos, d)).array() + dl)).matrix();
            }
        };
        auto max_step = [](const Eigen::VectorXd& a, const Eigen::VectorXd& da) {
            double s = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < a.size(); ++i)
                if (da[i] < 0.0) s = std::min(s, -a[i] / da[i]);
            return s;
        };

        // Solve with one round of iterative refinement against the exact
        // operator (H + Z/X) dx - A^T dlam = rho, A dx = rp.
        auto solve_refined = [&](const Eigen::VectorXd& rho, Eigen::VectorXd& dx, Eigen::VectorXd& dlam) {
            solve(rho, rp, dx, dlam);
            Eigen::VectorXd r1 = rho - apply_mt(apply_m(dx)) / mu_w - dx.cwiseQuotient(theta);
            Eigen::VectorXd r2 = rp;
            for (std::size_t b = 0; b < views.size(); ++b) {
                const auto& bv = views[b];
                if (!bv.simplex) continue;
                r1.segment(bv.pos, bv.b->dim()).array() += dlam[static_cast<Eigen::Index>(b)];
                r2[static_cast<Eigen::Index>(b)] -= dx.segment(bv.pos, bv.b->dim()).sum();
            }
            Eigen::VectorXd ddx, ddlam;
            solve(r1, r2, ddx, ddlam);
            dx += ddx;
            dlam += ddlam;
        };

        Eigen::VectorXd dx, dlam, dz;
        Eigen::VectorXd rc = -x.cwiseProduct(z);
        solve_refined(-rd + rc.cwiseQuotient(x), dx, dlam);
        dz = (rc - z.cwiseProduct(dx)).cwiseQuotient(x);
        const double a_aff = std::min({1.0, max_step(x, dx), max_step(z, dz)});
        const double mu_aff = (x + a_aff * dx).dot(z + a_aff * dz) / n;
        const double sigma = std::clamp(std::pow(mu_aff / mu_c, 3.0), 0.0, 1.0);

        rc = Eigen::VectorXd::Constant(n, sigma * mu_c) - x.cwiseProduct(z) - dx.cwiseProduct(dz);
        solve_refined(-rd + rc.cwiseQuotient(x), dx, dlam);
        dz = (rc - z.cwiseProduct(dx)).cwiseQuotient(x);
        const double a = std::min({1.0, 0.99 * max_step(x, dx), 0.99 * max_step(z, dz)});
        x += a * dx;
        z += a * dz;
        lam += a * dlam;
        if (!x.allFinite() || !z.allFinite()) break;
    }
    res.x = project_blocks(qp.qp_blocks(), res.converged ? x : best_x);
    res.value = qp.objective(res.x);
    return res;
}

}  // namespace esb
