#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "esb/sdp.hpp"
#include "oracles.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace esb;

namespace {

std::vector<EscBlock> all_escs(Problem p, const Graph& g, int k) {
    std::vector<EscBlock> out;
    std::vector<int> v(k);
    std::function<void(int, int)> rec = [&](int pos, int start) {
        if (pos == k) {
            out.push_back(build_esc(p, g, v));
            return;
        }
        for (int i = start; i < g.n(); ++i) {
            v[pos] = i;
            rec(pos + 1, i + 1);
        }
    };
    rec(0, 0);
    return out;
}

int multiplier_dim(const std::vector<EscBlock>& escs) {
    int b = 0;
    for (const auto& e : escs) b += e.b();
    return b;
}

Eigen::VectorXd random_vector(int n, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> nd(0.0, scale);
    return Eigen::VectorXd::NullaryExpr(n, [&] { return nd(rng); });
}

struct Instance {
    Problem problem;
    Graph g;
    std::vector<EscBlock> escs;
};

std::vector<Instance> small_instances() {
    std::vector<Instance> out;
    Graph c5 = cycle_graph(5);
    out.push_back({Problem::MaxCut, c5, all_escs(Problem::MaxCut, c5, 3)});
    Graph g = oracle::random_graph(6, 0.4, 8);
    auto ss = all_escs(Problem::StableSet, g, 3);
    ss.resize(6);
    out.push_back({Problem::StableSet, g, ss});
    auto co = all_escs(Problem::Coloring, g, 3);
    co.resize(6);
    out.push_back({Problem::Coloring, g, co});
    return out;
}

}  // namespace

TEST_CASE("basic relaxation recipes") {
    Graph c5 = cycle_graph(5);
    SdpProblem ss = build_basic_relaxation(Problem::StableSet, c5);
    CHECK(ss.constraints.size() == 11);
    CHECK(ss.order == 6);
    CHECK(ss.vertex_offset == 1);
    CHECK(build_basic_relaxation(Problem::Coloring, c5).constraints.size() == 15);
    SdpProblem mc = build_basic_relaxation(Problem::MaxCut, complete_graph(3));
    CHECK(mc.constraints.size() == 3);
    CHECK(mc.order == 3);
    CHECK(mc.vertex_offset == 0);
}

TEST_CASE("solve_sdp closed forms") {
    SdpSolution th = solve_sdp(build_basic_relaxation(Problem::StableSet, cycle_graph(5)));
    CHECK(std::abs(th.value - std::sqrt(5.0)) <= 1e-6);

    SdpSolution mc = solve_sdp(build_basic_relaxation(Problem::MaxCut, cycle_graph(5)));
    CHECK(std::abs(mc.value - 2.5 * (1.0 + std::cos(std::numbers::pi / 5))) <= 1e-4);

    // t*(K3) = theta(complement of K3) = 3; internally the maximum of -Y00.
    SdpSolution co = solve_sdp(build_basic_relaxation(Problem::Coloring, complete_graph(3)));
    CHECK(std::abs(co.value + 3.0) <= 1e-6);

    // theta of an edgeless graph is n.
    CHECK(std::abs(solve_sdp(build_basic_relaxation(Problem::StableSet, Graph(4, {}))).value - 4.0) <= 1e-6);
}

TEST_CASE("solve_sdp certificates") {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 12; ++rep) {
        Graph g = oracle::random_graph(5 + rep % 6, 0.4, rng(), rep % 2 == 0);
        for (Problem p : {Problem::MaxCut, Problem::StableSet, Problem::Coloring}) {
            SdpProblem prob = build_basic_relaxation(p, g);
            SdpSolution s = solve_sdp(prob);
            CHECK(s.gap <= 1e-8);
            CHECK(s.primal_infeasibility <= 1e-8);
            CHECK(s.dual_infeasibility <= 1e-8);
            CHECK(s.value <= s.dual_value + 1e-6 * (1.0 + std::abs(s.value)));
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.x.dense());
            CHECK(es.eigenvalues().minCoeff() >= -1e-8);
            for (const auto& c : prob.constraints) {
                double lhs = 0.0;
                for (const auto& e : c.entries) lhs += e.coef * s.x(e.row, e.col);
                CHECK(std::abs(lhs - c.rhs) <= 1e-7 * (1.0 + std::abs(c.rhs)));
            }
        }
    }
}

TEST_CASE("coloring bound equals theta of the complement") {
    for (std::uint64_t s = 0; s < 5; ++s) {
        Graph g = oracle::random_graph(8, 0.45, 50 + s);
        const double t = -solve_sdp(build_basic_relaxation(Problem::Coloring, g)).value;
        const double th = solve_sdp(build_basic_relaxation(Problem::StableSet, g.complement())).value;
        CHECK(std::abs(t - th) <= 1e-6);
        CHECK(t <= oracle::chromatic_number(g) + 1e-6);
    }
}

TEST_CASE("evaluate_h at the origin is the basic relaxation") {
    for (const auto& inst : small_instances()) {
        SdpProblem base = build_basic_relaxation(inst.problem, inst.g);
        HEvaluation ev = evaluate_h(base, inst.escs, {}, Eigen::VectorXd::Zero(multiplier_dim(inst.escs)),
                                    Eigen::VectorXd(0));
        CHECK(std::abs(ev.h - solve_sdp(base).value) <= 1e-7);
        CHECK(ev.g.size() == multiplier_dim(inst.escs));
    }
}

TEST_CASE("subgradient inequality, convexity and adjointness") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    int pairs = 0;
    for (const auto& inst : small_instances()) {
        SdpProblem base = build_basic_relaxation(inst.problem, inst.g);
        const int b = multiplier_dim(inst.escs);
        for (int rep = 0; rep < 34; ++rep) {
            const Eigen::VectorXd y1 = random_vector(b, rng, 0.3);
            const Eigen::VectorXd y2 = random_vector(b, rng, 0.3);
            HEvaluation e1 = evaluate_h(base, inst.escs, {}, y1, Eigen::VectorXd(0));
            HEvaluation e2 = evaluate_h(base, inst.escs, {}, y2, Eigen::VectorXd(0));
            CHECK(e2.h >= e1.h + e1.g.dot(y2 - y1) - 1e-6);
            CHECK(e1.h >= e2.h + e2.g.dot(y1 - y2) - 1e-6);
            ++pairs;

            // h recomputed from the maximizer through the adjoint identity.
            const double direct = base.objective.dot(e1.x) + y1.dot(e1.g);
            CHECK(std::abs(direct - e1.h) <= 1e-8 * (1.0 + std::abs(e1.h)) + 1e-7);

            if (rep < 17) {
                const double t = u01(rng);
                HEvaluation mid = evaluate_h(base, inst.escs, {}, t * y1 + (1 - t) * y2, Eigen::VectorXd(0));
                CHECK(mid.h <= t * e1.h + (1 - t) * e2.h + 1e-6);
            }
        }
    }
    CHECK(pairs >= 100);
}

TEST_CASE("directional derivative along one multiplier") {
    Graph c5 = cycle_graph(5);
    SdpProblem base = build_basic_relaxation(Problem::MaxCut, c5);
    const int tri[] = {0, 1, 2};
    std::vector<EscBlock> escs{build_esc(Problem::MaxCut, c5, tri)};
    const Eigen::VectorXd y0 = Eigen::VectorXd::Zero(3);
    HEvaluation e0 = evaluate_h(base, escs, {}, y0, Eigen::VectorXd(0));
    const double eps = 1e-4;
    Eigen::VectorXd y1 = y0;
    y1[0] = eps;
    HEvaluation e1 = evaluate_h(base, escs, {}, y1, Eigen::VectorXd(0));
    // Convexity: the step can not drop below the linear prediction.
    CHECK(e1.h >= e0.h + eps * e0.g[0] - 1e-7);
    CHECK(e1.h <= e0.h + eps * e1.g[0] + 1e-7);
}

TEST_CASE("monolithic solves") {
    Graph c5 = cycle_graph(5);
    SdpProblem base = build_basic_relaxation(Problem::MaxCut, c5);
    CHECK(std::abs(solve_monolithic(base, {}).value - solve_sdp(base).value) <= 1e-6);
    CHECK(std::abs(solve_monolithic(base, all_escs(Problem::MaxCut, c5, 3)).value - 4.0) <= 1e-4);

    for (std::uint64_t s = 0; s < 4; ++s) {
        Graph g = oracle::random_graph(7 + static_cast<int>(s), 0.35, 300 + s);
        SdpProblem ss = build_basic_relaxation(Problem::StableSet, g);
        const double theta = solve_sdp(ss).value;
        const double v = solve_monolithic(ss, all_escs(Problem::StableSet, g, 2)).value;
        CHECK(v >= oracle::stability_number(g) - 1e-6);
        CHECK(v <= theta + 1e-6);
    }
    std::vector<EscBlock> too_many(10, build_esc(Problem::StableSet, Graph(8, {}), std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7}));
    CHECK_THROWS(solve_monolithic(build_basic_relaxation(Problem::StableSet, Graph(8, {})), too_many));
}

TEST_CASE("hierarchy levels are nested") {
    for (std::uint64_t s = 0; s < 3; ++s) {
        Graph g = oracle::random_graph(6, 0.4, 700 + s, true);
        Graph gu = oracle::random_graph(6, 0.4, 700 + s);
        for (Problem p : {Problem::MaxCut, Problem::StableSet, Problem::Coloring}) {
            const Graph& h = p == Problem::MaxCut ? g : gu;
            SdpProblem base = build_basic_relaxation(p, h);
            double prev = solve_sdp(base).value;
            for (int k = 2; k <= 4; ++k) {
                const double v = solve_monolithic(base, all_escs(p, h, k)).value;
                // Maximization form throughout, coloring included.
                CHECK(v <= prev + 1e-6);
                prev = v;
            }
            double exact = 0.0;
            if (p == Problem::MaxCut) exact = oracle::max_cut(h);
            if (p == Problem::StableSet) exact = oracle::stability_number(h);
            if (p == Problem::Coloring) exact = -oracle::chromatic_number(h);
            CHECK(prev >= exact - 1e-6);
        }
    }
}

TEST_CASE("cuts in the oracle") {
    Graph c5 = cycle_graph(5);
    SdpProblem base = build_basic_relaxation(Problem::MaxCut, c5);
    LinearCut cut;
    cut.vertices = {0, 1, 2};
    cut.normal = SymMatrix(3);
    cut.normal.set(0, 1, -0.5);
    cut.normal.set(0, 2, -0.5);
    cut.normal.set(1, 2, -0.5);
    cut.rhs = 1.0;
    HEvaluation e0 = evaluate_h(base, {}, {cut}, Eigen::VectorXd(0), Eigen::VectorXd::Zero(1));
    CHECK(std::abs(e0.h - solve_sdp(base).value) <= 1e-7);
    REQUIRE(e0.g.size() == 1);
    const Eigen::MatrixXd sub = principal_submatrix(e0.x.dense(), cut.vertices);
    CHECK(std::abs(e0.g[0] + cut.normal.dense().cwiseProduct(sub).sum()) <= 1e-9);
    HEvaluation e1 = evaluate_h(base, {}, {cut}, Eigen::VectorXd(0), Eigen::VectorXd::Constant(1, 0.2));
    CHECK(e1.h >= e0.h + 0.2 * e0.g[0] - 1e-6);
}
