#include "esb/graph.hpp"

#include "esb/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace esb {

Graph::Graph(int n, std::vector<Edge> edges, std::string name)
    : n_(n), edges_(std::move(edges)), name_(std::move(name)) {
    if (n_ < 1) throw std::invalid_argument("Graph: vertex count must be at least 1");
    adj_.assign(static_cast<std::size_t>(n_) * n_, 0);
    neighbors_.resize(n_);
    for (Edge& e : edges_) {
        if (e.i > e.j) std::swap(e.i, e.j);
        if (e.i < 0 || e.j >= n_) throw std::invalid_argument("Graph: edge endpoint out of range");
        if (e.i == e.j) throw std::invalid_argument("Graph: loops are not allowed");
        if (!std::isfinite(e.w)) throw std::invalid_argument("Graph: non-finite edge weight");
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const Edge& a, const Edge& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
    for (const Edge& e : edges_) {
        auto& slot = adj_[static_cast<std::size_t>(e.i) * n_ + e.j];
        if (slot) throw std::invalid_argument("Graph: duplicate edge");
        slot = 1;
        adj_[static_cast<std::size_t>(e.j) * n_ + e.i] = 1;
        neighbors_[e.i].push_back(e.j);
        neighbors_[e.j].push_back(e.i);
    }
    for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
}

double Graph::weight(int i, int j) const {
    if (!adjacent(i, j)) return 0.0;
    if (i > j) std::swap(i, j);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{i, j},
                               [](const Edge& e, const std::pair<int, int>& key) {
                                   return e.i != key.first ? e.i < key.first : e.j < key.second;
                               });
    return it->w;
}

Graph Graph::complement() const {
    std::vector<Edge> out;
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j)
            if (!adjacent(i, j)) out.push_back({i, j, 1.0});
    return Graph(n_, std::move(out), name_.empty() ? name_ : name_ + "_complement");
}

namespace {

std::vector<std::string_view> split_tokens(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
        if (pos >= line.size()) break;
        std::size_t end = pos;
        while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
        out.push_back(line.substr(pos, end - pos));
        pos = end;
    }
    return out;
}

long parse_int(std::string_view tok, int line) {
    long v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
        throw ParseError("malformed integer '" + std::string(tok) + "'", line);
    }
    return v;
}

double parse_real(std::string_view tok, int line) {
    // from_chars for double is missing on some toolchains; strtod is fine here.
    std::string s(tok);
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || s.empty() || !std::isfinite(v)) {
        throw ParseError("malformed number '" + s + "'", line);
    }
    return v;
}

std::string read_all(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

Graph parse_dimacs(std::string_view text, std::string name) {
    int n = -1;
    int line_no = 0;
    std::set<std::pair<int, int>> seen;
    std::vector<Edge> edges;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        auto tok = split_tokens(line);
        if (tok.empty() || tok[0] == "c") continue;
        if (tok[0] == "p") {
            if (n >= 0) throw ParseError("second problem line", line_no);
            if (tok.size() != 4 || (tok[1] != "edge" && tok[1] != "col")) {
                throw ParseError("expected 'p edge n m'", line_no);
            }
            n = static_cast<int>(parse_int(tok[2], line_no));
            parse_int(tok[3], line_no);
            if (n < 1) throw ParseError("vertex count must be positive", line_no);
        } else if (tok[0] == "e") {
            if (n < 0) throw ParseError("edge line before problem line", line_no);
            if (tok.size() != 3) throw ParseError("expected 'e i j'", line_no);
            long a = parse_int(tok[1], line_no);
            long b = parse_int(tok[2], line_no);
            if (a < 1 || a > n || b < 1 || b > n) throw ParseError("vertex index out of range", line_no);
            if (a == b) throw ParseError("loop edge", line_no);
            int i = static_cast<int>(std::min(a, b)) - 1;
            int j = static_cast<int>(std::max(a, b)) - 1;
            if (seen.insert({i, j}).second) edges.push_back({i, j, 1.0});
        } else {
            throw ParseError("unknown line type '" + std::string(tok[0]) + "'", line_no);
        }
    }
    if (n < 0) throw ParseError("missing problem line 'p edge n m'", 0);
    return Graph(n, std::move(edges), std::move(name));
}

Graph parse_dimacs(std::istream& in, std::string name) { return parse_dimacs(read_all(in), std::move(name)); }

Graph parse_weighted_edge_list(std::string_view text, std::string name) {
    int line_no = 0;
    long n = -1, m = -1;
    std::vector<Edge> edges;
    std::set<std::pair<int, int>> seen;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        auto tok = split_tokens(line);
        if (tok.empty()) continue;
        if (n < 0) {
            if (tok.size() != 2) throw ParseError("expected header 'n m'", line_no);
            n = parse_int(tok[0], line_no);
            m = parse_int(tok[1], line_no);
            if (n < 1 || m < 0) throw ParseError("invalid header counts", line_no);
            continue;
        }
        if (tok.size() != 3) throw ParseError("expected 'i j w'", line_no);
        long a = parse_int(tok[0], line_no);
        long b = parse_int(tok[1], line_no);
        double w = parse_real(tok[2], line_no);
        if (a < 1 || a > n || b < 1 || b > n) throw ParseError("vertex index out of range", line_no);
        if (a == b) throw ParseError("loop edge", line_no);
        int i = static_cast<int>(std::min(a, b)) - 1;
        int j = static_cast<int>(std::max(a, b)) - 1;
        if (!seen.insert({i, j}).second) throw ParseError("duplicate edge", line_no);
        if (static_cast<long>(edges.size()) == m) throw ParseError("more edge lines than announced", line_no);
        edges.push_back({i, j, w});
    }
    if (n < 0) throw ParseError("missing header 'n m'", 0);
    if (static_cast<long>(edges.size()) != m) {
        throw ParseError("header announces " + std::to_string(m) + " edges, found " +
                             std::to_string(edges.size()),
                         0);
    }
    return Graph(static_cast<int>(n), std::move(edges), std::move(name));
}

Graph parse_weighted_edge_list(std::istream& in, std::string name) {
    return parse_weighted_edge_list(read_all(in), std::move(name));
}

std::string to_weighted_edge_list(const Graph& g) {
    std::string out = std::to_string(g.n()) + " " + std::to_string(g.m()) + "\n";
    for (const Edge& e : g.edges()) {
        out += std::to_string(e.i + 1);
        out += ' ';
        out += std::to_string(e.j + 1);
        out += ' ';
        if (e.w == std::floor(e.w) && std::abs(e.w) < 1e15) {
            out += std::to_string(static_cast<long long>(e.w));
        } else {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", e.w);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

Graph gen_torus(int d) {
    if (d < 3) throw std::invalid_argument("gen_torus: d must be at least 3");
    std::vector<Edge> edges;
    auto id = [d](int i, int j) { return ((i + d) % d) * d + (j + d) % d; };
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            edges.push_back({id(i, j), id(i + 1, j), 1.0});
            edges.push_back({id(i, j), id(i, j + 1), 1.0});
        }
    }
    return Graph(d * d, std::move(edges), "torus_" + std::to_string(d));
}

Graph gen_near_regular(int n, int r, std::uint64_t seed) {
    if (n < 1 || r < 1) throw std::invalid_argument("gen_near_regular: n and r must be positive");
    if ((static_cast<long>(n) * r) % 2 != 0) throw std::invalid_argument("gen_near_regular: n*r must be even");
    Rng rng(seed, streams::kGenerator);
    std::vector<int> points(static_cast<std::size_t>(n) * r);
    for (std::size_t p = 0; p < points.size(); ++p) points[p] = static_cast<int>(p);
    rng.shuffle(points);
    std::set<std::pair<int, int>> pairs;
    for (std::size_t p = 0; p + 1 < points.size(); p += 2) {
        int a = points[p] / r;
        int b = points[p + 1] / r;
        if (a == b) continue;
        pairs.insert({std::min(a, b), std::max(a, b)});
    }
    std::vector<Edge> edges;
    for (auto [a, b] : pairs) edges.push_back({a, b, 1.0});
    return Graph(n, std::move(edges), "reg_n" + std::to_string(n) + "_r" + std::to_string(r));
}

Graph gen_erdos_renyi(int n, double p, std::uint64_t seed, EdgeWeights weights) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("gen_erdos_renyi: p must lie in [0, 1]");
    Rng rng(seed, streams::kGenerator);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (rng.uniform() < p) {
                double w = 1.0;
                if (weights == EdgeWeights::PlusMinusOne) w = rng.coin() ? 1.0 : -1.0;
                edges.push_back({i, j, w});
            }
        }
    }
    return Graph(n, std::move(edges), "rand_n" + std::to_string(n));
}

Graph mycielskian(const Graph& g) {
    const int n = g.n();
    std::vector<Edge> edges;
    for (const Edge& e : g.edges()) {
        edges.push_back({e.i, e.j, 1.0});
        edges.push_back({e.i, n + e.j, 1.0});
        edges.push_back({e.j, n + e.i, 1.0});
    }
    for (int v = 0; v < n; ++v) edges.push_back({n + v, 2 * n, 1.0});
    return Graph(2 * n + 1, std::move(edges), g.name().empty() ? "mycielskian" : "myciel_" + g.name());
}

Graph cycle_graph(int n) {
    if (n < 3) throw std::invalid_argument("cycle_graph: n must be at least 3");
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
    return Graph(n, std::move(edges), "C" + std::to_string(n));
}

Graph complete_graph(int n) {
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.push_back({i, j, 1.0});
    return Graph(n, std::move(edges), "K" + std::to_string(n));
}

SymMatrix laplacian(const Graph& g) {
    SymMatrix L(g.n());
    for (const Edge& e : g.edges()) {
        L.add(e.i, e.i, e.w);
        L.add(e.j, e.j, e.w);
        L.add(e.i, e.j, -e.w);
    }
    return L;
}

Graph induced_subgraph(const Graph& g, std::span<const int> vertices) {
    const int k = static_cast<int>(vertices.size());
    if (k < 1) throw std::invalid_argument("induced_subgraph: empty vertex list");
    std::vector<char> used(g.n(), 0);
    for (int v : vertices) {
        if (v < 0 || v >= g.n()) throw std::invalid_argument("induced_subgraph: vertex out of range");
        if (used[v]) throw std::invalid_argument("induced_subgraph: duplicate vertex");
        used[v] = 1;
    }
    std::vector<Edge> edges;
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b)
            if (g.adjacent(vertices[a], vertices[b])) edges.push_back({a, b, g.weight(vertices[a], vertices[b])});
    return Graph(k, std::move(edges), g.name());
}

}  // namespace esb
