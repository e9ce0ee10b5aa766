#pragma once
// Independent reference computations used by the tests. Nothing here calls
// into the solver beyond the Graph container.

#include "esb/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

// Maximum cut weight by enumerating all 2^(n-1) bipartitions.
inline double max_cut(const esb::Graph& g) {
    const int n = g.n();
    double best = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
        double w = 0.0;
        for (const auto& e : g.edges())
            if (((mask >> e.i) & 1u) != ((mask >> e.j) & 1u)) w += e.w;
        best = std::max(best, w);
    }
    return best;
}

inline bool is_stable(const esb::Graph& g, std::uint32_t mask) {
    for (const auto& e : g.edges())
        if (((mask >> e.i) & 1u) && ((mask >> e.j) & 1u)) return false;
    return true;
}

inline int stability_number(const esb::Graph& g) {
    int best = 0;
    for (std::uint32_t mask = 0; mask < (1u << g.n()); ++mask)
        if (is_stable(g, mask)) best = std::max(best, std::popcount(mask));
    return best;
}

// Smallest number of colors by backtracking over color assignments.
inline int chromatic_number(const esb::Graph& g) {
    const int n = g.n();
    if (n == 0) return 0;
    std::vector<int> color(n, -1);
    for (int c = 1; c <= n; ++c) {
        std::function<bool(int)> place = [&](int v) {
            if (v == n) return true;
            int used = 0;
            for (int u = 0; u < v; ++u) used = std::max(used, color[u] + 1);
            for (int k = 0; k < std::min(c, used + 1); ++k) {
                bool ok = true;
                for (int u : g.neighbors(v))
                    if (u < v && color[u] == k) ok = false;
                if (!ok) continue;
                color[v] = k;
                if (place(v + 1)) return true;
            }
            color[v] = -1;
            return false;
        };
        if (place(0)) return c;
    }
    return n;
}

// Euclidean projection onto the simplex by trying every support set: on a
// support S the projection is v_S - tau with tau fixed by the sum.
inline Eigen::VectorXd project_simplex_by_support(const Eigen::VectorXd& v) {
    const int d = static_cast<int>(v.size());
    Eigen::VectorXd best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int mask = 1; mask < (1 << d); ++mask) {
        double s = 0.0;
        int cnt = 0;
        for (int i = 0; i < d; ++i)
            if ((mask >> i) & 1) {
                s += v[i];
                ++cnt;
            }
        const double tau = (s - 1.0) / cnt;
        Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
        bool ok = true;
        for (int i = 0; i < d; ++i)
            if ((mask >> i) & 1) {
                x[i] = v[i] - tau;
                if (x[i] < -1e-15) ok = false;
            }
        if (!ok) continue;
        const double dist = (x - v).squaredNorm();
        if (dist < best_dist) {
            best_dist = dist;
            best = x;
        }
    }
    return best;
}

// All points of the simplex in dimension d on a grid with the given number
// of steps per unit.
inline void simplex_grid(int d, int steps, const std::function<void(const Eigen::VectorXd&)>& visit) {
    Eigen::VectorXd x(d);
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == d - 1) {
            x[i] = static_cast<double>(left) / steps;
            visit(x);
            return;
        }
        for (int a = 0; a <= left; ++a) {
            x[i] = static_cast<double>(a) / steps;
            rec(i + 1, left - a);
        }
    };
    rec(0, steps);
}

// Planar graph: a rows x cols grid with one diagonal per cell, each edge
// kept with probability keep, weights +-1.
inline esb::Graph random_planar(int rows, int cols, double keep, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<esb::Edge> edges;
    auto add = [&](int a, int b) {
        if (u(rng) < keep) edges.push_back({a, b, u(rng) < 0.5 ? -1.0 : 1.0});
    };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const int v = r * cols + c;
            if (c + 1 < cols) add(v, v + 1);
            if (r + 1 < rows) add(v, v + cols);
            if (r + 1 < rows && c + 1 < cols) add(v, v + cols + 1);
        }
    return esb::Graph(rows * cols, std::move(edges), "planar");
}

// G(n, p) from the test's own generator, unit weights or +-1.
inline esb::Graph random_graph(int n, double p, std::uint64_t seed, bool pm1 = false) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<esb::Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (u(rng) < p) edges.push_back({i, j, pm1 && u(rng) < 0.5 ? -1.0 : 1.0});
    return esb::Graph(n, std::move(edges));
}

inline Eigen::MatrixXd random_symmetric(int n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) a(i, j) = a(j, i) = nd(rng);
    return a;
}

}  // namespace oracle
