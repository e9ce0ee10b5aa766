#include "esb/driver.hpp"

#include "esb/rng.hpp"
#include "esb/separation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

namespace esb {

std::string_view to_string(CutMode m) {
    switch (m) {
        case CutMode::Auto: return "auto";
        case CutMode::Esc: return "esc";
        case CutMode::Cut: return "cut";
    }
    return "auto";
}

CutMode parse_cut_mode(std::string_view s) {
    if (s == "auto") return CutMode::Auto;
    if (s == "esc") return CutMode::Esc;
    if (s == "cut") return CutMode::Cut;
    throw std::invalid_argument("unknown cut mode '" + std::string(s) + "'");
}

DualState warm_start_transfer(const DualState& old, int vertex_offset, const std::vector<int>& removed_escs,
                              const std::vector<EscBlock>& added_escs, const std::vector<int>& removed_cuts,
                              const std::vector<LinearCut>& added_cuts) {
    const int q = static_cast<int>(old.escs.size());
    const int nc = static_cast<int>(old.cuts.size());
    std::vector<char> drop_esc(q, 0), drop_cut(nc, 0);
    for (int i : removed_escs) {
        if (i < 0 || i >= q) throw std::out_of_range("warm_start_transfer: ESC index out of range");
        drop_esc[i] = 1;
    }
    for (int c : removed_cuts) {
        if (c < 0 || c >= nc) throw std::out_of_range("warm_start_transfer: cut index out of range");
        drop_cut[c] = 1;
    }
    const std::vector<int> off = old.block_offsets();
    const int b_old = old.multiplier_dim();

    DualState s;
    s.mu = old.mu;
    s.mu_initialized = old.mu_initialized;
    s.best_bound = old.best_bound;
    s.center_h = old.center_h;
    s.center_value = old.center_value;
    s.center_evaluated = old.center_evaluated;
    s.center_item = old.center_item;
    s.null_streak = old.null_streak;
    s.warm_alpha = old.warm_alpha;

    // Positions of the old multiplier vector that survive, in new order.
    std::vector<int> keep_pos;
    std::vector<int> drop_pos;
    for (int i = 0; i < q; ++i) {
        for (int p = 0; p < old.escs[i].b(); ++p) (drop_esc[i] ? drop_pos : keep_pos).push_back(off[i] + p);
        if (!drop_esc[i]) s.escs.push_back(old.escs[i]);
    }
    for (const auto& esc : added_escs) s.escs.push_back(esc);
    std::vector<int> keep_cut, drop_cutv;
    for (int c = 0; c < nc; ++c) {
        (drop_cut[c] ? drop_cutv : keep_cut).push_back(c);
        if (!drop_cut[c]) s.cuts.push_back(old.cuts[c]);
    }
    for (const auto& cut : added_cuts) s.cuts.push_back(cut);

    int b_added = 0;
    for (const auto& esc : added_escs) b_added += esc.b();
    const int b_new = static_cast<int>(keep_pos.size()) + b_added;
    s.center = Eigen::VectorXd::Zero(b_new);
    for (std::size_t a = 0; a < keep_pos.size(); ++a) s.center[static_cast<Eigen::Index>(a)] = old.center[keep_pos[a]];
    s.center_u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.cuts.size()));
    for (std::size_t a = 0; a < keep_cut.size(); ++a) s.center_u[static_cast<Eigen::Index>(a)] = old.center_u[keep_cut[a]];

    bool moved = false;
    for (int p : drop_pos) moved = moved || old.center[p] != 0.0;
    for (int c : drop_cutv) moved = moved || old.center_u[c] != 0.0;
    if (moved) s.center_evaluated = false;

    const int nc_new = static_cast<int>(s.cuts.size());
    for (const auto& item : old.bundle) {
        BundleItem it;
        it.h = item.h;
        it.x = item.x;
        it.e = item.e;
        for (int p : drop_pos) it.e += item.g[p] * old.center[p];
        for (int c : drop_cutv) it.e += item.g[b_old + c] * old.center_u[c];
        it.g.resize(b_new + nc_new);
        Eigen::Index pos = 0;
        for (int p : keep_pos) it.g[pos++] = item.g[p];
        const Eigen::MatrixXd xd = item.x.dense();
        for (const auto& esc : added_escs) {
            it.g.segment(pos, esc.b()) = -extract(principal_submatrix(xd, esc.vertices, vertex_offset), esc.mask);
            pos += esc.b();
        }
        for (int c : keep_cut) it.g[pos++] = item.g[b_old + c];
        for (const auto& cut : added_cuts)
            it.g[pos++] = -cut.normal.dense().cwiseProduct(principal_submatrix(xd, cut.vertices, vertex_offset)).sum();
        s.bundle.push_back(std::move(it));
    }
    return s;
}

namespace {

using Clock = std::chrono::steady_clock;

}  // namespace

EsbReport compute_esb(const Graph& g, const EsbParams& params, const std::function<void(const CycleRecord&)>& on_cycle) {
    const auto t_start = Clock::now();
    const Problem problem = params.problem;
    if (params.max_order < 2 || params.max_order > kMaxSubgraphOrder) {
        throw std::invalid_argument("compute_esb: max_order must be in [2, 8]");
    }
    CutMode mode = params.cut_mode;
    if (mode == CutMode::Auto) mode = problem == Problem::MaxCut ? CutMode::Cut : CutMode::Esc;
    if (mode == CutMode::Cut && problem != Problem::MaxCut) {
        throw std::invalid_argument("compute_esb: cut mode is only available for Max-Cut");
    }
    const bool cut_mode = mode == CutMode::Cut;
    const int max_cycles = params.max_cycles > 0 ? params.max_cycles : (problem == Problem::Coloring ? 25 : 50);
    const int budget = params.escs_per_cycle > 0 ? params.escs_per_cycle : (cut_mode ? 500 : 100);
    const double sign = report_sign(problem);

    EsbReport rep;
    rep.graph_name = g.name();
    rep.n = g.n();
    rep.m = g.m();
    rep.problem = problem;
    rep.cut_mode = std::string(to_string(mode));
    rep.max_order = params.max_order;
    rep.seed = params.seed;
    rep.basic_value = std::numeric_limits<double>::quiet_NaN();
    rep.heuristic_value = params.run_heuristic ? heuristic_lower_bound(g, problem, params.seed)
                                               : std::numeric_limits<double>::quiet_NaN();

    const SdpProblem base = build_basic_relaxation(problem, g);
    DualState state;
    state.center = Eigen::VectorXd::Zero(0);
    state.center_u = Eigen::VectorXd::Zero(0);
    double best = std::numeric_limits<double>::infinity();
    int k = std::min(problem == Problem::MaxCut ? 3 : 2, params.max_order);
    bool have_basic = false;
    int stalled = 0;

    for (int cycle = 1; cycle <= max_cycles; ++cycle) {
        BundleResult res;
        try {
            res = run_bundle(base, state, params.bundle);
        } catch (const std::exception& ex) {
            rep.failed = true;
            rep.failure = ex.what();
            break;
        }
        if (!have_basic) {
            // With no constraints added the first cycle is the basic relaxation.
            rep.basic_value = sign * res.bound;
            have_basic = true;
        }
        if (res.bound < best - params.stall_tol * (1.0 + std::abs(best))) stalled = 0;
        else ++stalled;
        best = std::min(best, res.bound);
        const auto t_sep = Clock::now();

        CycleRecord rec;
        rec.cycle = cycle;
        rec.k = k;
        rec.num_escs = static_cast<int>(state.escs.size());
        rec.num_cuts = static_cast<int>(state.cuts.size());
        rec.bound = sign * res.bound;
        rec.best_bound = sign * best;
        rec.oracle_time_s = res.oracle_seconds;

        bool stop = cycle == max_cycles;
        if (!stop) {
            const std::vector<int> offs = state.block_offsets();
            std::vector<int> removed;
            for (std::size_t i = 0; i < state.escs.size(); ++i) {
                const auto blk = state.center.segment(offs[i], state.escs[i].b());
                if (blk.size() == 0 || blk.cwiseAbs().maxCoeff() < params.inactive_tol) removed.push_back(static_cast<int>(i));
            }
            std::vector<int> removed_cuts;
            for (std::size_t c = 0; c < state.cuts.size(); ++c)
                if (state.center_u[static_cast<Eigen::Index>(c)] < params.inactive_tol) removed_cuts.push_back(static_cast<int>(c));

            std::set<std::vector<int>> active;
            if (!cut_mode) {
                std::vector<char> gone(state.escs.size(), 0);
                for (int i : removed) gone[i] = 1;
                for (std::size_t i = 0; i < state.escs.size(); ++i)
                    if (!gone[i]) active.insert(state.escs[i].vertices);
            }

            const Eigen::MatrixXd x = res.x.dense();
            std::vector<Violation> found;
            // Violations that no longer move the bound are not significant.
            if (params.stall_cycles > 0 && stalled >= params.stall_cycles && k < std::min(params.max_order, g.n())) {
                ++k;
                stalled = 0;
            }
            int order = k;
            while (true) {
                if (order <= g.n()) {
                    SeparationOptions so;
                    so.k = order;
                    so.limit = budget - static_cast<int>(found.size());
                    so.tol = params.violation_tol;
                    so.seed = params.seed ^ splitmix64(static_cast<std::uint64_t>(cycle) * 131 + order);
                    so.probes = params.probes;
                    so.starts = params.starts;
                    so.exclude = active;
                    auto more = find_violations(x, g, problem, base.vertex_offset, so);
                    for (auto& v : more) found.push_back(std::move(v));
                }
                if (static_cast<double>(found.size()) >= params.escalation_fraction * budget) break;
                if (order >= params.max_order || order >= g.n()) break;
                ++order;
            }
            if (order != k) stalled = 0;
            k = order;

            std::vector<EscBlock> added;
            std::vector<LinearCut> added_cuts;
            for (const auto& v : found) {
                if (cut_mode) added_cuts.push_back(weaken_to_cut(v));
                else added.push_back(v.esc);
            }
            if (found.empty() && removed.empty() && removed_cuts.empty()) {
                stop = true;
            } else if (found.empty() && (k >= params.max_order || k >= g.n())) {
                stop = true;
            } else {
                state = warm_start_transfer(state, base.vertex_offset, removed, added, removed_cuts, added_cuts);
            }
        }
        rec.other_time_s = res.other_seconds + std::chrono::duration<double>(Clock::now() - t_sep).count();
        rep.cycles.push_back(rec);
        if (on_cycle) on_cycle(rec);
        if (stop) break;
    }
    rep.esb = have_basic ? sign * best : std::numeric_limits<double>::quiet_NaN();
    rep.total_time_s = std::chrono::duration<double>(Clock::now() - t_start).count();
    return rep;
}

}  // namespace esb
