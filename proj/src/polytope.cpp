#include "esb/polytope.hpp"

#include "esb/simplex_qp.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace esb {

std::string_view to_string(Problem p) {
    switch (p) {
        case Problem::MaxCut: return "maxcut";
        case Problem::StableSet: return "stableset";
        case Problem::Coloring: return "coloring";
    }
    return "unknown";
}

Problem parse_problem(std::string_view s) {
    if (s == "maxcut") return Problem::MaxCut;
    if (s == "stableset") return Problem::StableSet;
    if (s == "coloring") return Problem::Coloring;
    throw std::invalid_argument("unknown problem '" + std::string(s) + "'");
}

Eigen::VectorXd extract(const Eigen::MatrixXd& x, std::span<const Slot> mask) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(mask.size()));
    for (std::size_t s = 0; s < mask.size(); ++s) {
        const Slot& sl = mask[s];
        out[static_cast<Eigen::Index>(s)] = sl.diagonal() ? x(sl.a, sl.a) : 2.0 * x(sl.a, sl.b);
    }
    return out;
}

Eigen::MatrixXd scatter(const Eigen::VectorXd& y, std::span<const Slot> mask, int order) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(order, order);
    for (std::size_t s = 0; s < mask.size(); ++s) {
        const Slot& sl = mask[s];
        const double v = y[static_cast<Eigen::Index>(s)];
        out(sl.a, sl.b) = v;
        out(sl.b, sl.a) = v;
    }
    return out;
}

namespace {

void check_order(int k, const char* who) {
    if (k < 1 || k > kMaxSubgraphOrder) {
        throw std::invalid_argument(std::string(who) + ": subgraph order must lie in [1, 8]");
    }
}

SymMatrix outer(const std::vector<double>& v) {
    const int k = static_cast<int>(v.size());
    SymMatrix m(k);
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) m.set(i, j, v[i] * v[j]);
    return m;
}

}  // namespace

std::vector<SymMatrix> enum_cut_matrices(int k) {
    check_order(k, "enum_cut_matrices");
    std::vector<SymMatrix> out;
    const unsigned count = 1u << (k - 1);
    out.reserve(count);
    std::vector<double> c(k);
    for (unsigned bits = 0; bits < count; ++bits) {
        c[0] = 1.0;
        for (int i = 1; i < k; ++i) c[i] = (bits >> (i - 1)) & 1u ? -1.0 : 1.0;
        out.push_back(outer(c));
    }
    return out;
}

std::vector<SymMatrix> enum_stable_set_matrices(const Graph& g) {
    const int k = g.n();
    check_order(k, "enum_stable_set_matrices");
    std::vector<SymMatrix> out;
    std::vector<double> s(k);
    for (unsigned bits = 0; bits < (1u << k); ++bits) {
        bool stable = true;
        for (const Edge& e : g.edges()) {
            if (((bits >> e.i) & 1u) && ((bits >> e.j) & 1u)) {
                stable = false;
                break;
            }
        }
        if (!stable) continue;
        for (int i = 0; i < k; ++i) s[i] = (bits >> i) & 1u ? 1.0 : 0.0;
        out.push_back(outer(s));
    }
    return out;
}

std::vector<SymMatrix> enum_coloring_matrices(const Graph& g) {
    const int k = g.n();
    check_order(k, "enum_coloring_matrices");
    std::vector<SymMatrix> out;
    std::set<std::string> seen;
    // Restricted growth strings: a[0] = 0, a[i] <= 1 + max(a[0..i-1]).
    std::vector<int> a(k, 0);
    std::vector<int> prefix_max(k, 0);
    auto emit = [&]() {
        for (const Edge& e : g.edges())
            if (a[e.i] == a[e.j]) return;
        SymMatrix x(k);
        std::string key(static_cast<std::size_t>(k) * k, '0');
        for (int i = 0; i < k; ++i) {
            for (int j = i; j < k; ++j) {
                if (a[i] == a[j]) {
                    x.set(i, j, 1.0);
                    key[static_cast<std::size_t>(i) * k + j] = '1';
                    key[static_cast<std::size_t>(j) * k + i] = '1';
                }
            }
        }
        if (seen.insert(key).second) out.push_back(std::move(x));
    };
    while (true) {
        emit();
        int i = k - 1;
        while (i > 0 && a[i] == prefix_max[i - 1] + 1) --i;
        if (i == 0) break;
        ++a[i];
        prefix_max[i] = std::max(prefix_max[i - 1], a[i]);
        for (int j = i + 1; j < k; ++j) {
            a[j] = 0;
            prefix_max[j] = prefix_max[i];
        }
    }
    return out;
}

std::vector<Slot> extraction_mask(Problem problem, const Graph& sub) {
    const int k = sub.n();
    std::vector<Slot> mask;
    if (problem == Problem::StableSet) {
        for (int d = 0; d < k; ++d) mask.push_back({d, d});
    }
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            if (problem != Problem::MaxCut && sub.adjacent(i, j)) continue;
            mask.push_back({i, j});
        }
    }
    return mask;
}

int mask_length(Problem problem, int k, int sub_edges) {
    const int pairs = k * (k - 1) / 2;
    switch (problem) {
        case Problem::MaxCut: return pairs;
        case Problem::StableSet: return pairs + k - sub_edges;
        case Problem::Coloring: return pairs - sub_edges;
    }
    return 0;
}

Eigen::VectorXd frobenius_coords(const Eigen::MatrixXd& x) {
    const Eigen::Index k = x.rows();
    Eigen::VectorXd out(k * (k + 1) / 2);
    Eigen::Index p = 0;
    for (Eigen::Index i = 0; i < k; ++i) out[p++] = x(i, i);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = i + 1; j < k; ++j) out[p++] = std::numbers::sqrt2 * x(i, j);
    return out;
}

EscBlock build_esc(Problem problem, const Graph& g, std::span<const int> vertices) {
    check_order(static_cast<int>(vertices.size()), "build_esc");
    const Graph sub = induced_subgraph(g, vertices);
    EscBlock esc;
    esc.problem = problem;
    esc.vertices.assign(vertices.begin(), vertices.end());
    switch (problem) {
        case Problem::MaxCut: esc.extreme = enum_cut_matrices(sub.n()); break;
        case Problem::StableSet: esc.extreme = enum_stable_set_matrices(sub); break;
        case Problem::Coloring: esc.extreme = enum_coloring_matrices(sub); break;
    }
    esc.mask = extraction_mask(problem, sub);
    const int k = sub.n();
    esc.d.resize(esc.t(), esc.b());
    esc.hull_points.resize(k * (k + 1) / 2, esc.t());
    for (int i = 0; i < esc.t(); ++i) {
        esc.d.row(i) = extract(esc.extreme[i].dense(), esc.mask).transpose();
        esc.hull_points.col(i) = frobenius_coords(esc.extreme[i].dense());
    }
    return esc;
}

Projection projection_distance(const Eigen::MatrixXd& x_sub, const EscBlock& esc) {
    if (x_sub.rows() != esc.k() || x_sub.cols() != esc.k()) {
        throw std::invalid_argument("projection_distance: matrix order does not match the subgraph");
    }
    const Eigen::VectorXd target = frobenius_coords(x_sub);
    const Eigen::MatrixXd shifted = esc.hull_points.colwise() - target;
    const MinNormResult mn = min_norm_point(shifted);
    Projection out;
    out.lambda = mn.weights;
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(esc.k(), esc.k());
    for (int i = 0; i < esc.t(); ++i)
        if (out.lambda[i] != 0.0) p += out.lambda[i] * esc.extreme[i].dense();
    out.proj = SymMatrix::from_dense(p);
    out.delta = (x_sub - p).norm();
    return out;
}

Eigen::MatrixXd principal_submatrix(const Eigen::MatrixXd& x, std::span<const int> vertices, int offset) {
    const Eigen::Index k = static_cast<Eigen::Index>(vertices.size());
    Eigen::MatrixXd out(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) out(a, b) = x(offset + vertices[a], offset + vertices[b]);
    return out;
}

}  // namespace esb
