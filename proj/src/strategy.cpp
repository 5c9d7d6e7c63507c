#include "epscalc/strategy.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>

namespace eps {

namespace {

constexpr std::uint64_t kSat = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
    return a > kSat - b ? kSat : a + b;
}

}  // namespace

std::uint64_t SplitMix64::below(std::uint64_t bound) {
    if (bound == 0) throw Error("SplitMix64::below requires a positive bound");
    const std::uint64_t limit = kSat - kSat % bound;
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % bound;
}

double SplitMix64::next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

const char* to_string(Strategy::Tag tag) {
    switch (tag) {
        case Strategy::Tag::LeftmostInnermost: return "innermost";
        case Strategy::Tag::LeftmostOutermost: return "outermost";
        case Strategy::Tag::Random: return "random";
        case Strategy::Tag::ParallelOutermost: return "parallel";
    }
    return "?";
}

// ---------- normalization ----------

namespace {

struct EpsStats {
    std::uint64_t max_depth = 0;
    std::uint64_t max_count = 0;

    void absorb(const Formula& f) {
        max_depth = std::max(max_depth, eps_nesting_depth(f));
        max_count = std::max(max_count, count_epsilons(f));
    }
};

}  // namespace

PartialRun run_steps(const Formula& f, const Strategy& s, const NormalizeOptions& opts) {
    Formula cur = f;
    std::vector<StepRecord> steps;
    std::uint64_t step_count = 0;
    bool reached_normal_form = false;
    EpsStats stats;
    stats.absorb(cur);
    SplitMix64 rng(s.seed);

    while (true) {
        std::vector<Redex> chosen;
        switch (s.tag) {
            case Strategy::Tag::LeftmostInnermost:
            case Strategy::Tag::LeftmostOutermost: {
                auto r = pick_leftmost(cur, s.tag == Strategy::Tag::LeftmostInnermost);
                if (r) chosen.push_back(std::move(*r));
                break;
            }
            case Strategy::Tag::Random: {
                // The index is uniform over the same pre-order listing
                // find_redexes would produce, so derivations match what
                // sampling from the materialized list would have chosen.
                std::uint64_t total = count_quantifiers(cur);
                if (total > 0) {
                    chosen.push_back(redex_by_index(cur, rng.below(total)));
                }
                break;
            }
            case Strategy::Tag::ParallelOutermost:
                chosen = outermost_redexes(cur);
                break;
        }
        if (chosen.empty()) {
            reached_normal_form = true;
            break;
        }
        if (step_count >= opts.max_steps) break;  // fuse: a redex remains

        if (chosen.size() == 1) {
            cur = contract(cur, chosen[0].pos);
        } else {
            std::vector<Position> positions;
            positions.reserve(chosen.size());
            for (const Redex& r : chosen) positions.push_back(r.pos);
            cur = parallel_step(cur, positions);
        }
        ++step_count;
        stats.absorb(cur);
        if (opts.record_steps) steps.push_back(StepRecord{std::move(chosen), cur});
        if (node_count(cur) > opts.max_nodes) break;  // fuse: runaway growth
    }

    return PartialRun{f,          std::move(steps),  std::move(cur),  step_count,
                      stats.max_depth, stats.max_count, reached_normal_form};
}

DerivationTrace normalize(const Formula& f, const Strategy& s, const NormalizeOptions& opts) {
    PartialRun run = run_steps(f, s, opts);
    if (!run.reached_normal_form) {
        if (node_count(run.final) > opts.max_nodes) {
            throw FuseExceeded("node fuse (" + std::to_string(opts.max_nodes) +
                               ") exceeded after " + std::to_string(run.step_count) + " steps");
        }
        throw FuseExceeded("step fuse (" + std::to_string(opts.max_steps) +
                           ") exceeded; formula still has a redex");
    }
    return DerivationTrace{std::move(run.start),  std::move(run.steps),
                           std::move(run.final),  run.step_count,
                           run.max_eps_depth,     run.max_eps_count};
}

// ---------- reduction graphs ----------

ReductionGraph all_derivations_graph(const Formula& f, std::uint64_t node_bound) {
    ReductionGraph graph;
    std::map<std::string, std::size_t> index_of;

    auto intern = [&](const Formula& g) -> std::size_t {
        std::string key = struct_key(canonicalize(g));
        auto it = index_of.find(key);
        if (it != index_of.end()) return it->second;
        if (graph.nodes.size() >= node_bound) {
            throw BoundExceeded("reduction graph exceeds " + std::to_string(node_bound) +
                                " nodes");
        }
        std::size_t id = graph.nodes.size();
        graph.nodes.push_back(g);
        graph.keys.push_back(std::move(key));
        graph.out_edges.emplace_back();
        index_of.emplace(graph.keys.back(), id);
        return id;
    };

    intern(f);
    for (std::size_t u = 0; u < graph.nodes.size(); ++u) {  // grows while iterating: BFS
        for (const Redex& r : find_redexes(graph.nodes[u])) {
            Formula g = contract(graph.nodes[u], r.pos);
            std::size_t v = intern(g);
            graph.out_edges[u].push_back(graph.edges.size());
            graph.edges.push_back(ReductionGraph::Edge{u, v, r.kind, r});
        }
    }

    for (std::size_t u = 0; u < graph.nodes.size(); ++u) {
        if (graph.out_edges[u].empty()) graph.normal_forms.push_back(u);
    }

    // Cycle check by iterative three-color DFS.
    enum : unsigned char { White, Grey, Black };
    std::vector<unsigned char> color(graph.nodes.size(), White);
    graph.acyclic = true;
    std::vector<std::pair<std::size_t, std::size_t>> stack;  // node, next edge slot
    for (std::size_t root = 0; root < graph.nodes.size() && graph.acyclic; ++root) {
        if (color[root] != White) continue;
        color[root] = Grey;
        stack.emplace_back(root, 0);
        while (!stack.empty() && graph.acyclic) {
            auto& [u, slot] = stack.back();
            if (slot == graph.out_edges[u].size()) {
                color[u] = Black;
                stack.pop_back();
                continue;
            }
            std::size_t v = graph.edges[graph.out_edges[u][slot]].to;
            ++slot;
            if (color[v] == Grey) graph.acyclic = false;
            if (color[v] == White) {
                color[v] = Grey;
                stack.emplace_back(v, 0);
            }
        }
        stack.clear();
    }

    if (graph.acyclic) {
        // Path statistics by depth-first post-order accumulation.
        std::vector<std::uint64_t> shortest(graph.nodes.size(), 0);
        std::vector<std::uint64_t> longest(graph.nodes.size(), 0);
        std::vector<std::uint64_t> count(graph.nodes.size(), 0);
        std::vector<unsigned char> done(graph.nodes.size(), 0);
        std::vector<std::pair<std::size_t, std::size_t>> st;
        st.emplace_back(0, 0);
        while (!st.empty()) {
            auto& [u, slot] = st.back();
            if (done[u]) {
                st.pop_back();
                continue;
            }
            if (slot < graph.out_edges[u].size()) {
                std::size_t v = graph.edges[graph.out_edges[u][slot]].to;
                ++slot;
                if (!done[v]) st.emplace_back(v, 0);
                continue;
            }
            if (graph.out_edges[u].empty()) {
                shortest[u] = 0;
                longest[u] = 0;
                count[u] = 1;
            } else {
                shortest[u] = kSat;
                longest[u] = 0;
                count[u] = 0;
                for (std::size_t e : graph.out_edges[u]) {
                    std::size_t v = graph.edges[e].to;
                    shortest[u] = std::min(shortest[u], sat_add(shortest[v], 1));
                    longest[u] = std::max(longest[u], sat_add(longest[v], 1));
                    count[u] = sat_add(count[u], count[v]);
                }
            }
            done[u] = 1;
            st.pop_back();
        }
        graph.shortest_path = shortest[0];
        graph.longest_path = longest[0];
        graph.maximal_path_count = count[0];
    }
    return graph;
}

namespace {

DerivationTrace replay_path(const ReductionGraph& graph, const std::vector<std::size_t>& edges) {
    Formula cur = graph.nodes[0];
    std::vector<StepRecord> steps;
    EpsStats stats;
    stats.absorb(cur);
    for (std::size_t e : edges) {
        // The stored redex belongs to the representative of `from`, which is
        // alpha-equal to cur, so the position carries over.
        auto r = redex_at(cur, graph.edges[e].redex.pos);
        if (!r) throw Error("internal: residual lost during path replay");
        cur = contract(cur, r->pos);
        stats.absorb(cur);
        steps.push_back(StepRecord{{*r}, cur});
    }
    std::uint64_t n = steps.size();
    return DerivationTrace{graph.nodes[0], std::move(steps), std::move(cur),
                           n,              stats.max_depth,  stats.max_count};
}

}  // namespace

std::vector<DerivationTrace> all_derivations(const ReductionGraph& graph,
                                             std::uint64_t max_traces) {
    if (!graph.acyclic) throw Error("reduction graph is cyclic; derivations are not enumerable");
    if (graph.maximal_path_count > max_traces) {
        throw BoundExceeded("graph has " + std::to_string(graph.maximal_path_count) +
                            " maximal derivations, more than the bound " +
                            std::to_string(max_traces));
    }

    std::vector<DerivationTrace> out;
    std::vector<std::size_t> edge_path;
    // Iterative DFS over edge sequences from the start node.
    std::vector<std::pair<std::size_t, std::size_t>> st;
    st.emplace_back(0, 0);
    while (!st.empty()) {
        auto& [u, slot] = st.back();
        if (graph.out_edges[u].empty() && slot == 0) {
            out.push_back(replay_path(graph, edge_path));
            ++slot;
            continue;
        }
        if (slot >= graph.out_edges[u].size()) {
            st.pop_back();
            if (!edge_path.empty()) edge_path.pop_back();
            continue;
        }
        std::size_t e = graph.out_edges[u][slot];
        ++slot;
        edge_path.push_back(e);
        st.emplace_back(graph.edges[e].to, 0);
    }
    return out;
}

std::vector<DerivationTrace> all_derivations(const Formula& f, std::uint64_t node_bound,
                                             std::uint64_t max_traces) {
    return all_derivations(all_derivations_graph(f, node_bound), max_traces);
}

FiniteARS to_finite_ars(const ReductionGraph& graph) {
    FiniteARS sys;
    sys.carrier_size = static_cast<int>(graph.nodes.size());
    for (const ReductionGraph::Edge& e : graph.edges) {
        auto& rel = e.kind == RuleKind::Step0 ? sys.r0 : sys.r1;
        rel.emplace(static_cast<int>(e.from), static_cast<int>(e.to));
    }
    return sys;
}

// ---------- derivation-length statistics ----------

Formula nested_exists_family(std::size_t n) {
    std::vector<Term> args;
    args.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) args.push_back(mk_var("x" + std::to_string(i)));
    // "R" is a formula-variable atom so the printed family re-parses to the
    // identical tree (the concrete syntax reads uppercase heads as formula
    // variables).
    Formula f = mk_fml("R", std::move(args));
    for (std::size_t i = n; i >= 1; --i) {
        f = mk_exists("x" + std::to_string(i), std::move(f));
    }
    return f;
}

std::vector<LengthStatsRow> derivation_length_stats(const FormulaGenerator& family,
                                                    std::size_t max_n,
                                                    const NormalizeOptions& opts) {
    NormalizeOptions run_opts = opts;
    run_opts.record_steps = false;
    std::vector<LengthStatsRow> rows;
    for (std::size_t n = 0; n <= max_n; ++n) {
        Formula f = family(n);
        for (Strategy::Tag tag :
             {Strategy::Tag::LeftmostInnermost, Strategy::Tag::LeftmostOutermost}) {
            PartialRun run = run_steps(f, Strategy{tag, 0}, run_opts);
            rows.push_back(LengthStatsRow{n, tag, run.step_count,
                                          eps_nesting_depth(run.final),
                                          run.reached_normal_form});
        }
    }
    return rows;
}

}  // namespace eps
