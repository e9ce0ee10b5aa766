#include "esb/separation.hpp"

#include "esb/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

namespace esb {

int separation_threads() {
    if (const char* env = std::getenv("ESB_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

template <class Fn>
void parallel_for(int count, Fn&& fn) {
    const int workers = std::min(separation_threads(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

double binomial(int n, int r) {
    double c = 1.0;
    for (int i = 1; i <= r; ++i) c = c * (n - r + i) / i;
    return c;
}

constexpr double kFacetBudget = 2e5;

std::vector<Facet> compute_facets(Problem problem, int k) {
    const Graph edgeless(k, {});
    std::vector<SymMatrix> ext;
    switch (problem) {
        case Problem::MaxCut: ext = enum_cut_matrices(k); break;
        case Problem::StableSet: ext = enum_stable_set_matrices(edgeless); break;
        case Problem::Coloring: ext = enum_coloring_matrices(edgeless); break;
    }
    const std::vector<Slot> mask = extraction_mask(problem, edgeless);
    const int d = static_cast<int>(mask.size());
    const int t = static_cast<int>(ext.size());
    if (d == 0 || t <= d || binomial(t, d) > kFacetBudget) return {};

    Eigen::MatrixXd pts(d, t);
    for (int i = 0; i < t; ++i)
        for (int s = 0; s < d; ++s) pts(s, i) = ext[i](mask[s].a, mask[s].b);

    std::vector<Facet> out;
    std::set<std::vector<long long>> seen;
    std::vector<int> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    Eigen::MatrixXd m(d, d + 1);
    while (true) {
        for (int r = 0; r < d; ++r) {
            m.row(r).head(d) = pts.col(idx[r]).transpose();
            m(r, d) = -1.0;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
        if (lu.rank() == d) {
            Eigen::VectorXd nv = lu.kernel().col(0);
            Eigen::VectorXd a = nv.head(d);
            double c = nv[d];
            const Eigen::VectorXd side = pts.transpose() * a - Eigen::VectorXd::Constant(t, c);
            bool valid = true;
            if (side.maxCoeff() <= 1e-9) {
            } else if (side.minCoeff() >= -1e-9) {
                a = -a;
                c = -c;
            } else {
                valid = false;
            }
            const double scale = a.cwiseAbs().maxCoeff();
            if (valid && scale > 1e-12) {
                a /= scale;
                c /= scale;
                std::vector<long long> key;
                for (int s = 0; s < d; ++s) key.push_back(std::llround(a[s] * 1e7));
                key.push_back(std::llround(c * 1e7));
                if (seen.insert(key).second) {
                    SymMatrix am(k);
                    for (int s = 0; s < d; ++s) {
                        if (mask[s].diagonal()) am.set(mask[s].a, mask[s].a, a[s]);
                        else am.set(mask[s].a, mask[s].b, a[s] / 2.0);
                    }
                    out.push_back({am, c});
                }
            }
        }
        // Next combination in lexicographic order.
        int pos = d - 1;
        while (pos >= 0 && idx[pos] == t - d + pos) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (int r = pos + 1; r < d; ++r) idx[r] = idx[r - 1] + 1;
    }
    return out;
}

// Canonical form of a probe under simultaneous row/column permutation.
std::vector<long long> permutation_key(const SymMatrix& u) {
    const int k = u.order();
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<long long> best;
    do {
        std::vector<long long> key;
        key.reserve(static_cast<std::size_t>(k) * k);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) key.push_back(std::llround(u(perm[a], perm[b]) * 1e7));
        if (best.empty() || key < best) best = std::move(key);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

SymMatrix horn_matrix(int k) {
    SymMatrix h(k);
    const int row[5] = {1, -1, 1, 1, -1};
    for (int a = 0; a < 5; ++a)
        for (int b = a; b < 5; ++b) h.set(a, b, row[(b - a) % 5]);
    return h;
}

}  // namespace

const std::vector<Facet>& polytope_facets(Problem problem, int k) {
    if (k < 2 || k > kMaxSubgraphOrder) throw std::invalid_argument("polytope_facets: order out of range");
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::vector<Facet>> cache;
    std::lock_guard lock(mutex);
    const auto key = std::make_pair(static_cast<int>(problem), k);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, compute_facets(problem, k)).first;
    return it->second;
}

std::vector<ProbeMatrix> generate_probes(Problem problem, int k, std::uint64_t seed, int count) {
    if (k < 2 || k > kMaxSubgraphOrder) throw std::invalid_argument("generate_probes: order out of range");
    std::vector<ProbeMatrix> out;
    if (count <= 0) return out;
    Rng rng(seed, streams::kProbes);

    std::vector<SymMatrix> facet_probes;
    for (const Facet& f : polytope_facets(problem, k)) facet_probes.push_back(SymMatrix::from_dense(-f.a.dense()));
    const std::size_t facet_cap = static_cast<std::size_t>(std::max(1, count / 2));
    if (facet_probes.size() > facet_cap) {
        // Local search permutes positions, so one representative per
        // permutation class is enough.
        std::set<std::vector<long long>> classes;
        std::vector<SymMatrix> reps;
        for (auto& p : facet_probes)
            if (classes.insert(permutation_key(p)).second) reps.push_back(std::move(p));
        facet_probes = std::move(reps);
        if (facet_probes.size() > facet_cap) {
            rng.shuffle(facet_probes);
            facet_probes.resize(facet_cap);
        }
    }
    for (auto& p : facet_probes) out.push_back({std::move(p), ProbeMatrix::Kind::Facet});

    if (k >= 5) out.push_back({horn_matrix(k), ProbeMatrix::Kind::Copositive});

    if (problem == Problem::StableSet) {
        SymMatrix clique(k), hole(k);
        for (int a = 0; a < k; ++a) {
            clique.set(a, a, -1.0);
            hole.set(a, a, -1.0);
            for (int b = a + 1; b < k; ++b) clique.set(a, b, 1.0);
            hole.set(a, (a + 1) % k, 1.0);
        }
        out.push_back({clique, ProbeMatrix::Kind::Pattern});
        if (k >= 5 && k % 2 == 1) out.push_back({hole, ProbeMatrix::Kind::Pattern});
    } else if (problem == Problem::Coloring) {
        SymMatrix clique(k), cyc(k);
        for (int a = 0; a < k; ++a) {
            for (int b = a + 1; b < k; ++b) {
                clique.set(a, b, -1.0);
                cyc.set(a, b, 1.0);
            }
        }
        for (int a = 0; a < k; ++a) cyc.set(a, (a + 1) % k, -1.0);
        out.push_back({clique, ProbeMatrix::Kind::Pattern});
        if (k >= 4) out.push_back({cyc, ProbeMatrix::Kind::Pattern});
    }

    while (static_cast<int>(out.size()) < count) {
        SymMatrix u(k);
        bool nonzero = false;
        for (int a = 0; a < k; ++a) {
            for (int b = a; b < k; ++b) {
                if (a == b && problem != Problem::StableSet) continue;
                double v;
                if (problem == Problem::MaxCut) v = rng.coin() ? 1.0 : -1.0;
                else v = static_cast<double>(static_cast<int>(rng.below(3)) - 1);
                u.set(a, b, v);
                nonzero = nonzero || v != 0.0;
            }
        }
        if (nonzero) out.push_back({u, ProbeMatrix::Kind::Random});
    }
    if (static_cast<int>(out.size()) > count) out.resize(static_cast<std::size_t>(count));
    return out;
}

double probe_value(const Eigen::MatrixXd& x, const SymMatrix& u, std::span<const int> assign) {
    double s = 0.0;
    const int k = static_cast<int>(assign.size());
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) s += u(a, b) * x(assign[a], assign[b]);
    return s;
}

std::vector<std::vector<int>> local_search_min(const Eigen::MatrixXd& x, const SymMatrix& u, int k, int starts,
                                               std::uint64_t seed) {
    const int n = static_cast<int>(x.rows());
    if (k < 1 || k > n) throw std::invalid_argument("local_search_min: need 1 <= k <= n");
    if (u.order() != k) throw std::invalid_argument("local_search_min: probe order differs from k");
    std::vector<std::vector<int>> found;
    std::set<std::vector<int>> seen;
    const Eigen::MatrixXd& um = u.dense();

    for (int st = 0; st < starts; ++st) {
        Rng rng(seed ^ splitmix64(static_cast<std::uint64_t>(st) + 0x9e37), streams::kLocalSearch);
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        // Partial Fisher-Yates for the first k positions.
        for (int a = 0; a < k; ++a) {
            const int j = a + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - a)));
            std::swap(perm[a], perm[j]);
        }
        std::vector<int> assign(perm.begin(), perm.begin() + k);
        std::vector<char> in(n, 0);
        for (int v : assign) in[v] = 1;

        for (int moves = 0; moves < 10000; ++moves) {
            double best = -1e-12;
            int kind = -1, pa = -1, pb = -1;
            for (int a = 0; a < k; ++a) {
                const int w = assign[a];
                for (int v = 0; v < n; ++v) {
                    if (in[v]) continue;
                    double d = um(a, a) * (x(v, v) - x(w, w));
                    for (int c = 0; c < k; ++c) {
                        if (c == a) continue;
                        d += 2.0 * um(a, c) * (x(v, assign[c]) - x(w, assign[c]));
                    }
                    if (d < best) {
                        best = d;
                        kind = 0;
                        pa = a;
                        pb = v;
                    }
                }
            }
            for (int a = 0; a < k; ++a) {
                for (int b = a + 1; b < k; ++b) {
                    const int va = assign[a], vb = assign[b];
                    // Terms touching positions a or b, before and after the exchange.
                    double d = (um(a, a) - um(b, b)) * (x(vb, vb) - x(va, va));
                    for (int c = 0; c < k; ++c) {
                        if (c == a || c == b) continue;
                        const int vc = assign[c];
                        d += 2.0 * (um(a, c) - um(b, c)) * (x(vb, vc) - x(va, vc));
                    }
                    if (d < best) {
                        best = d;
                        kind = 1;
                        pa = a;
                        pb = b;
                    }
                }
            }
            if (kind < 0) break;
            if (kind == 0) {
                in[assign[pa]] = 0;
                assign[pa] = pb;
                in[pb] = 1;
            } else {
                std::swap(assign[pa], assign[pb]);
            }
        }
        std::vector<int> sorted = assign;
        std::sort(sorted.begin(), sorted.end());
        if (seen.insert(sorted).second) found.push_back(std::move(sorted));
    }
    return found;
}

std::vector<Violation> find_violations(const Eigen::MatrixXd& x, const Graph& g, Problem problem, int vertex_offset,
                                       const SeparationOptions& opts) {
    const int n = g.n();
    if (x.rows() < n + vertex_offset) throw std::invalid_argument("find_violations: matrix smaller than the graph");
    if (opts.k < 2 || opts.k > n || opts.k > kMaxSubgraphOrder) return {};
    const Eigen::MatrixXd vb = x.block(vertex_offset, vertex_offset, n, n);
    const std::vector<ProbeMatrix> probes = generate_probes(problem, opts.k, opts.seed, opts.probes);

    std::vector<std::vector<std::vector<int>>> per_probe(probes.size());
    parallel_for(static_cast<int>(probes.size()), [&](int p) {
        const std::uint64_t s = splitmix64(opts.seed ^ splitmix64(static_cast<std::uint64_t>(p) + 1));
        per_probe[p] = local_search_min(vb, probes[p].u, opts.k, opts.starts, s);
    });

    std::vector<std::vector<int>> cands;
    std::set<std::vector<int>> seen;
    for (auto& list : per_probe) {
        for (auto& c : list) {
            if (opts.exclude.count(c) || !seen.insert(c).second) continue;
            cands.push_back(std::move(c));
        }
    }

    std::vector<Violation> scored(cands.size());
    parallel_for(static_cast<int>(cands.size()), [&](int i) {
        Violation& v = scored[i];
        v.vertices = cands[i];
        v.esc = build_esc(problem, g, v.vertices);
        v.x_sub = principal_submatrix(x, v.vertices, vertex_offset);
        Projection pr = projection_distance(v.x_sub, v.esc);
        v.delta = pr.delta;
        v.lambda = std::move(pr.lambda);
        v.proj = std::move(pr.proj);
    });

    std::vector<Violation> out;
    for (auto& v : scored)
        if (v.delta > opts.tol) out.push_back(std::move(v));
    std::sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
        if (a.delta != b.delta) return a.delta > b.delta;
        return a.vertices < b.vertices;
    });
    if (static_cast<int>(out.size()) > opts.limit) out.resize(static_cast<std::size_t>(std::max(0, opts.limit)));
    return out;
}

LinearCut weaken_to_cut(const Violation& v) {
    if (v.esc.problem != Problem::MaxCut) throw std::invalid_argument("weaken_to_cut: only for Max-Cut");
    if (!(v.delta > 0.0)) throw std::invalid_argument("weaken_to_cut: no separating hyperplane for delta = 0");
    LinearCut cut;
    cut.vertices = v.vertices;
    cut.normal = SymMatrix::from_dense(v.x_sub - v.proj.dense());
    double rhs = -std::numeric_limits<double>::infinity();
    for (const auto& c : v.esc.extreme) rhs = std::max(rhs, cut.normal.dot(c));
    cut.rhs = rhs;
    return cut;
}

}  // namespace esb
