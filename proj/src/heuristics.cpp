#include "esb/driver.hpp"
#include "esb/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace esb {

namespace {

double cut_weight(const Graph& g, const std::vector<int>& side) {
    double w = 0.0;
    for (const Edge& e : g.edges())
        if (side[e.i] != side[e.j]) w += e.w;
    return w;
}

// Flips single vertices while that increases the cut.
void one_flip(const Graph& g, std::vector<int>& side) {
    bool improved = true;
    while (improved) {
        improved = false;
        for (int v = 0; v < g.n(); ++v) {
            double gain = 0.0;
            for (int u : g.neighbors(v)) gain += (side[u] == side[v] ? 1.0 : -1.0) * g.weight(u, v);
            if (gain > 1e-12) {
                side[v] = 1 - side[v];
                improved = true;
            }
        }
    }
}

double maxcut_heuristic(const Graph& g, std::uint64_t seed) {
    const int n = g.n();
    const SdpSolution sol = solve_sdp(build_basic_relaxation(Problem::MaxCut, g));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sol.x.dense());
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd v = es.eigenvectors() * ev.asDiagonal();  // rows are the vectors
    Rng rng(seed, streams::kHeuristic);
    double best = 0.0;
    std::vector<int> side(n);
    for (int round = 0; round < 100; ++round) {
        Eigen::VectorXd r(n);
        for (int i = 0; i < n; ++i) r[i] = rng.normal();
        const Eigen::VectorXd proj = v * r;
        for (int i = 0; i < n; ++i) side[i] = proj[i] >= 0.0 ? 1 : 0;
        one_flip(g, side);
        best = std::max(best, cut_weight(g, side));
    }
    return best;
}

double stable_set_heuristic(const Graph& g) {
    const int n = g.n();
    std::vector<char> in(n, 0), alive(n, 1);
    std::vector<int> deg(n);
    for (int v = 0; v < n; ++v) deg[v] = g.degree(v);
    while (true) {
        int pick = -1;
        for (int v = 0; v < n; ++v)
            if (alive[v] && (pick < 0 || deg[v] < deg[pick])) pick = v;
        if (pick < 0) break;
        in[pick] = 1;
        std::vector<int> gone = {pick};
        for (int u : g.neighbors(pick))
            if (alive[u]) gone.push_back(u);
        for (int u : gone) alive[u] = 0;
        for (int u : gone)
            for (int w : g.neighbors(u))
                if (alive[w]) --deg[w];
    }

    // 2-improvement: drop one vertex, insert two non-adjacent vertices whose
    // only neighbor in the set was the dropped one.
    auto tight = [&](int v) {
        int c = 0;
        for (int u : g.neighbors(v)) c += in[u];
        return c;
    };
    bool improved = true;
    while (improved) {
        improved = false;
        for (int x = 0; x < n && !improved; ++x) {
            if (!in[x]) continue;
            std::vector<int> cand;
            for (int u : g.neighbors(x))
                if (!in[u] && tight(u) == 1) cand.push_back(u);
            for (std::size_t a = 0; a < cand.size() && !improved; ++a) {
                for (std::size_t b = a + 1; b < cand.size(); ++b) {
                    if (g.adjacent(cand[a], cand[b])) continue;
                    in[x] = 0;
                    in[cand[a]] = 1;
                    in[cand[b]] = 1;
                    improved = true;
                    break;
                }
            }
        }
        // Free vertices can be added directly.
        for (int v = 0; v < n; ++v)
            if (!in[v] && tight(v) == 0) in[v] = 1;
    }
    return static_cast<double>(std::accumulate(in.begin(), in.end(), 0));
}

double dsatur(const Graph& g) {
    const int n = g.n();
    std::vector<int> color(n, -1);
    std::vector<std::vector<char>> seen(n);
    std::vector<int> sat(n, 0);
    int used = 0;
    for (int step = 0; step < n; ++step) {
        int pick = -1;
        for (int v = 0; v < n; ++v) {
            if (color[v] >= 0) continue;
            if (pick < 0 || sat[v] > sat[pick] || (sat[v] == sat[pick] && g.degree(v) > g.degree(pick))) pick = v;
        }
        int c = 0;
        while (c < static_cast<int>(seen[pick].size()) && seen[pick][c]) ++c;
        color[pick] = c;
        used = std::max(used, c + 1);
        for (int u : g.neighbors(pick)) {
            if (color[u] >= 0) continue;
            if (static_cast<int>(seen[u].size()) <= c) seen[u].resize(c + 1, 0);
            if (!seen[u][c]) {
                seen[u][c] = 1;
                ++sat[u];
            }
        }
    }
    return static_cast<double>(used);
}

}  // namespace

double heuristic_lower_bound(const Graph& g, Problem problem, std::uint64_t seed) {
    switch (problem) {
        case Problem::MaxCut: return maxcut_heuristic(g, seed);
        case Problem::StableSet: return stable_set_heuristic(g);
        case Problem::Coloring: return dsatur(g);
    }
    return 0.0;
}

}  // namespace esb
