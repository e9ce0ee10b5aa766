#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "esb/polytope.hpp"
#include "oracles.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <set>

using namespace esb;

namespace {

bool is_psd(const SymMatrix& m) {
    if (m.order() == 0) return true;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.dense());
    return es.eigenvalues().minCoeff() >= -1e-10;
}

Graph path3() { return Graph(3, {{0, 1, 1.0}, {1, 2, 1.0}}); }

int binom2(int k) { return k * (k - 1) / 2; }

}  // namespace

TEST_CASE("cut matrices") {
    auto two = enum_cut_matrices(2);
    REQUIRE(two.size() == 2);
    std::set<double> off{two[0](0, 1), two[1](0, 1)};
    CHECK(off == std::set<double>{-1.0, 1.0});
    for (int k = 1; k <= 7; ++k) {
        auto cuts = enum_cut_matrices(k);
        CHECK(cuts.size() == (1u << (k - 1)));
        std::set<std::vector<double>> distinct;
        for (const auto& c : cuts) {
            for (int i = 0; i < k; ++i) {
                CHECK(c(i, i) == 1.0);
                for (int j = 0; j < k; ++j) CHECK(std::abs(c(i, j)) == 1.0);
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(c.dense());
            CHECK(lu.rank() == 1);
            distinct.insert(std::vector<double>(c.dense().data(), c.dense().data() + k * k));
        }
        CHECK(distinct.size() == cuts.size());
    }
    CHECK_THROWS(enum_cut_matrices(0));
    CHECK_THROWS(enum_cut_matrices(9));
}

TEST_CASE("stable set matrices") {
    CHECK(enum_stable_set_matrices(complete_graph(2)).size() == 3);
    CHECK(enum_stable_set_matrices(complete_graph(3)).size() == 4);
    for (int k = 1; k <= 7; ++k) CHECK(enum_stable_set_matrices(Graph(k, {})).size() == (1u << k));
    Graph g = oracle::random_graph(7, 0.4, 5);
    int stable = 0;
    for (std::uint32_t m = 0; m < (1u << 7); ++m) stable += oracle::is_stable(g, m);
    auto mats = enum_stable_set_matrices(g);
    CHECK(static_cast<int>(mats.size()) == stable);
    for (const auto& s : mats) {
        CHECK(is_psd(s));
        for (const auto& e : g.edges()) CHECK(s(e.i, e.j) == 0.0);
        for (int i = 0; i < 7; ++i)
            for (int j = 0; j < 7; ++j) CHECK(s(i, j) == s(i, i) * s(j, j));
    }
    CHECK_THROWS(enum_stable_set_matrices(Graph(9, {})));
}

TEST_CASE("coloring matrices") {
    auto k3 = enum_coloring_matrices(complete_graph(3));
    REQUIRE(k3.size() == 1);
    CHECK(k3[0].dense() == Eigen::MatrixXd::Identity(3, 3));
    auto e2 = enum_coloring_matrices(Graph(2, {}));
    REQUIRE(e2.size() == 2);
    auto p = enum_coloring_matrices(path3());
    REQUIRE(p.size() == 2);
    std::set<double> corner{p[0](0, 2), p[1](0, 2)};
    CHECK(corner == std::set<double>{0.0, 1.0});
    // Bell numbers for edgeless graphs.
    const int bell[] = {1, 1, 2, 5, 15, 52, 203, 877};
    for (int k = 1; k <= 7; ++k) {
        CHECK(enum_coloring_matrices(Graph(k, {})).size() == static_cast<std::size_t>(bell[k]));
        CHECK(enum_coloring_matrices(complete_graph(k)).size() == 1);
    }
    Graph g = oracle::random_graph(6, 0.3, 9);
    for (const auto& x : enum_coloring_matrices(g)) {
        CHECK(is_psd(x));
        for (int i = 0; i < 6; ++i) CHECK(x(i, i) == 1.0);
        for (const auto& e : g.edges()) CHECK(x(e.i, e.j) == 0.0);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                for (int l = 0; l < 6; ++l)
                    if (x(i, j) == 1.0 && x(j, l) == 1.0) CHECK(x(i, l) == 1.0);
    }
}

TEST_CASE("extraction mask lengths") {
    Graph four_edges(5, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}});
    CHECK(extraction_mask(Problem::MaxCut, four_edges).size() == 10);
    CHECK(extraction_mask(Problem::StableSet, four_edges).size() == 11);
    CHECK(extraction_mask(Problem::Coloring, four_edges).size() == 6);

    std::mt19937_64 rng(17);
    Graph big = oracle::random_graph(20, 0.35, 3);
    for (int rep = 0; rep < 100; ++rep) {
        const int k = 2 + static_cast<int>(rng() % 7);
        std::vector<int> all(20);
        for (int i = 0; i < 20; ++i) all[i] = i;
        std::shuffle(all.begin(), all.end(), rng);
        std::vector<int> sub(all.begin(), all.begin() + k);
        Graph s = induced_subgraph(big, sub);
        const int m = s.m();
        CHECK(static_cast<int>(extraction_mask(Problem::MaxCut, s).size()) == binom2(k));
        CHECK(static_cast<int>(extraction_mask(Problem::StableSet, s).size()) == binom2(k) + k - m);
        CHECK(static_cast<int>(extraction_mask(Problem::Coloring, s).size()) == binom2(k) - m);
        for (Problem p : {Problem::MaxCut, Problem::StableSet, Problem::Coloring})
            CHECK(mask_length(p, k, m) == static_cast<int>(extraction_mask(p, s).size()));
    }
    auto ss = extraction_mask(Problem::StableSet, path3());
    REQUIRE(ss.size() == 4);
    CHECK(ss[0] == Slot{0, 0});
    CHECK(ss[2] == Slot{2, 2});
    CHECK(ss[3] == Slot{0, 2});
}

TEST_CASE("build_esc") {
    Graph g = gen_erdos_renyi(8, 0.5, 1);
    const int tri[] = {1, 4, 6};
    EscBlock mc = build_esc(Problem::MaxCut, g, tri);
    CHECK(mc.t() == 4);
    CHECK(mc.b() == 3);
    CHECK(mc.d.rows() == 4);
    CHECK(mc.d.cols() == 3);
    CHECK(mc.d.cwiseAbs().isApproxToConstant(2.0));

    Graph edge = complete_graph(2);
    const int both[] = {0, 1};
    EscBlock ss = build_esc(Problem::StableSet, edge, both);
    REQUIRE(ss.t() == 3);
    REQUIRE(ss.b() == 2);
    std::set<std::pair<double, double>> rows;
    for (int i = 0; i < 3; ++i) rows.insert({ss.d(i, 0), ss.d(i, 1)});
    CHECK(rows == std::set<std::pair<double, double>>{{0, 0}, {1, 0}, {0, 1}});

    const int three[] = {0, 1, 2};
    EscBlock col = build_esc(Problem::Coloring, complete_graph(3), three);
    CHECK(col.t() == 1);
    CHECK(col.b() == 0);
    CHECK(col.d.rows() == 1);

    for (const auto& e : {mc, ss, col})
        for (int i = 0; i < e.t(); ++i) CHECK((e.d.row(i).transpose() - extract(e.extreme[i].dense(), e.mask)).norm() == 0.0);
}

TEST_CASE("scatter and extract are adjoint") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        const int k = 2 + static_cast<int>(rng() % 7);
        Graph s = oracle::random_graph(k, 0.4, rng());
        for (Problem p : {Problem::MaxCut, Problem::StableSet, Problem::Coloring}) {
            auto mask = extraction_mask(p, s);
            Eigen::VectorXd y = Eigen::VectorXd::Random(static_cast<Eigen::Index>(mask.size()));
            Eigen::MatrixXd x = oracle::random_symmetric(k, rng);
            const double lhs = scatter(y, mask, k).cwiseProduct(x).sum();
            const double rhs = y.dot(extract(x, mask));
            CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
            const Eigen::MatrixXd sc = scatter(y, mask, k);
            CHECK((sc - sc.transpose()).norm() == 0.0);
        }
    }
}

TEST_CASE("enumerated matrices are positive semidefinite") {
    for (int k = 1; k <= 6; ++k)
        for (const auto& c : enum_cut_matrices(k)) CHECK(is_psd(c));
    for (std::uint64_t s = 0; s < 5; ++s) {
        Graph g = oracle::random_graph(6, 0.4, 100 + s);
        for (const auto& m : enum_stable_set_matrices(g)) CHECK(is_psd(m));
        for (const auto& m : enum_coloring_matrices(g)) CHECK(is_psd(m));
    }
}

TEST_CASE("projection distance examples") {
    Graph e3(3, {});
    const int v3[] = {0, 1, 2};
    EscBlock esc = build_esc(Problem::MaxCut, e3, v3);
    for (int i = 0; i < esc.t(); ++i) {
        Projection p = projection_distance(esc.extreme[i].dense(), esc);
        CHECK(p.delta <= 1e-9);
        CHECK(p.lambda.maxCoeff() >= 1.0 - 1e-9);
    }
    CHECK(projection_distance(Eigen::MatrixXd::Identity(3, 3), esc).delta <= 1e-9);

    // All off-diagonals -1: outside CUT_3 beyond the facet x12 + x13 + x23 >= -1.
    Eigen::MatrixXd x = -Eigen::MatrixXd::Ones(3, 3);
    x.diagonal().setOnes();
    const double delta = projection_distance(x, esc).delta;
    CHECK(delta == doctest::Approx(std::sqrt(2.0) * 2.0 / std::sqrt(3.0)).epsilon(1e-9));

    // Grid over the 4 weights with step 1e-3, in off-diagonal coordinates.
    Eigen::Matrix<double, 3, 4> pts;
    for (int i = 0; i < 4; ++i) pts.col(i) << esc.extreme[i](0, 1), esc.extreme[i](0, 2), esc.extreme[i](1, 2);
    const Eigen::Vector3d target(-1, -1, -1);
    const int steps = 1000;
    double grid = std::numeric_limits<double>::infinity();
    for (int a = 0; a <= steps; ++a)
        for (int b = 0; a + b <= steps; ++b)
            for (int c = 0; a + b + c <= steps; ++c) {
                const int d = steps - a - b - c;
                const Eigen::Vector3d p = (a * pts.col(0) + b * pts.col(1) + c * pts.col(2) + d * pts.col(3)) / steps;
                grid = std::min(grid, (p - target).squaredNorm());
            }
    grid = std::sqrt(2.0 * grid);
    CHECK(delta <= grid + 1e-12);
    CHECK(grid - delta <= 5e-3);
}

TEST_CASE("projection idempotence and membership") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 40; ++rep) {
        const int k = 3 + static_cast<int>(rng() % 3);
        Graph s = oracle::random_graph(k, 0.3, rng());
        std::vector<int> v(k);
        for (int i = 0; i < k; ++i) v[i] = i;
        for (Problem p : {Problem::MaxCut, Problem::StableSet, Problem::Coloring}) {
            EscBlock esc = build_esc(p, s, v);
            Eigen::MatrixXd x = oracle::random_symmetric(k, rng);
            Projection pr = projection_distance(x, esc);
            CHECK(pr.delta >= 0.0);
            CHECK(std::abs(pr.lambda.sum() - 1.0) <= 1e-9);
            CHECK(pr.lambda.minCoeff() >= -1e-12);
            CHECK(std::abs(pr.delta - (x - pr.proj.dense()).norm()) <= 1e-8);
            CHECK(projection_distance(pr.proj.dense(), esc).delta <= 1e-8);

            Eigen::VectorXd lam(esc.t());
            for (int i = 0; i < esc.t(); ++i) lam[i] = -std::log(u(rng) + 1e-300);
            lam /= lam.sum();
            Eigen::MatrixXd inside = Eigen::MatrixXd::Zero(k, k);
            for (int i = 0; i < esc.t(); ++i) inside += lam[i] * esc.extreme[i].dense();
            CHECK(projection_distance(inside, esc).delta <= 1e-8);
        }
    }
}

TEST_CASE("frobenius coordinates preserve the norm") {
    std::mt19937_64 rng(2);
    for (int k = 1; k <= 6; ++k) {
        Eigen::MatrixXd x = oracle::random_symmetric(k, rng);
        CHECK(frobenius_coords(x).norm() == doctest::Approx(x.norm()).epsilon(1e-12));
    }
}
