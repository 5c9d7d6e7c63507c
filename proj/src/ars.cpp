#include "epscalc/ars.hpp"

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <stdexcept>
#include <string>

#include "epscalc/strategy.hpp"  // SplitMix64

namespace eps {

void FiniteARS::validate() const {
    if (carrier_size < 0) throw ArsError("negative carrier size");
    for (const auto* rel : {&r0, &r1}) {
        for (const auto& [u, v] : *rel) {
            if (u < 0 || u >= carrier_size || v < 0 || v >= carrier_size) {
                throw ArsError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                               ") leaves the carrier 0.." + std::to_string(carrier_size - 1));
            }
        }
    }
}

namespace {

std::vector<std::vector<int>> adjacency(const FiniteARS& sys, bool use_r0, bool use_r1) {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(sys.carrier_size));
    if (use_r0) {
        for (const auto& [u, v] : sys.r0) adj[static_cast<std::size_t>(u)].push_back(v);
    }
    if (use_r1) {
        for (const auto& [u, v] : sys.r1) adj[static_cast<std::size_t>(u)].push_back(v);
    }
    return adj;
}

std::vector<char> bfs(const std::vector<std::vector<int>>& adj, int from) {
    std::vector<char> seen(adj.size(), 0);
    std::deque<int> queue{from};
    seen[static_cast<std::size_t>(from)] = 1;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int v : adj[static_cast<std::size_t>(u)]) {
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                queue.push_back(v);
            }
        }
    }
    return seen;
}

std::vector<std::vector<int>> reversed(const std::vector<std::vector<int>>& adj) {
    std::vector<std::vector<int>> rev(adj.size());
    for (std::size_t u = 0; u < adj.size(); ++u) {
        for (int v : adj[u]) rev[static_cast<std::size_t>(v)].push_back(static_cast<int>(u));
    }
    return rev;
}

// Finds a cycle (as a node sequence c0, ..., ck = c0) in the subgraph of adj
// induced by keep, or nullopt if the subgraph is acyclic.
std::optional<std::vector<int>> find_cycle(const std::vector<std::vector<int>>& adj,
                                           const std::vector<char>& keep) {
    enum : char { White, Grey, Black };
    std::vector<char> color(adj.size(), White);
    std::vector<std::pair<int, std::size_t>> stack;
    for (std::size_t root = 0; root < adj.size(); ++root) {
        if (!keep[root] || color[root] != White) continue;
        color[root] = Grey;
        stack.emplace_back(static_cast<int>(root), 0);
        while (!stack.empty()) {
            auto [u, slot] = stack.back();
            const auto& succs = adj[static_cast<std::size_t>(u)];
            std::size_t next = slot;
            while (next < succs.size() && !keep[static_cast<std::size_t>(succs[next])]) ++next;
            if (next == succs.size()) {
                color[static_cast<std::size_t>(u)] = Black;
                stack.pop_back();
                continue;
            }
            stack.back().second = next + 1;
            int v = succs[next];
            if (color[static_cast<std::size_t>(v)] == Grey) {
                std::vector<int> cycle;
                auto it = std::find_if(stack.begin(), stack.end(),
                                       [v](const auto& e) { return e.first == v; });
                for (; it != stack.end(); ++it) cycle.push_back(it->first);
                cycle.push_back(v);
                return cycle;
            }
            if (color[static_cast<std::size_t>(v)] == White) {
                color[static_cast<std::size_t>(v)] = Grey;
                stack.emplace_back(v, 0);
            }
        }
    }
    return std::nullopt;
}

// Bit-packed reachability rows for the join searches.
struct BitRows {
    std::size_t n = 0, stride = 0;
    std::vector<std::uint64_t> bits;

    explicit BitRows(std::size_t nodes)
        : n(nodes), stride((nodes + 63) / 64), bits(nodes * stride, 0) {}

    void set(std::size_t row, std::size_t col) {
        bits[row * stride + col / 64] |= std::uint64_t{1} << (col % 64);
    }
    bool get(std::size_t row, std::size_t col) const {
        return (bits[row * stride + col / 64] >> (col % 64)) & 1;
    }
    bool rows_intersect(std::size_t r1, std::size_t r2) const {
        for (std::size_t i = 0; i < stride; ++i) {
            if (bits[r1 * stride + i] & bits[r2 * stride + i]) return true;
        }
        return false;
    }
};

BitRows reflexive_transitive_rows(const std::vector<std::vector<int>>& adj) {
    BitRows rows(adj.size());
    std::vector<int> queue;
    std::vector<char> seen(adj.size());
    for (std::size_t s = 0; s < adj.size(); ++s) {
        std::fill(seen.begin(), seen.end(), 0);
        queue.assign(1, static_cast<int>(s));
        seen[s] = 1;
        rows.set(s, s);
        while (!queue.empty()) {
            int u = queue.back();
            queue.pop_back();
            for (int v : adj[static_cast<std::size_t>(u)]) {
                if (!seen[static_cast<std::size_t>(v)]) {
                    seen[static_cast<std::size_t>(v)] = 1;
                    rows.set(s, static_cast<std::size_t>(v));
                    queue.push_back(v);
                }
            }
        }
    }
    return rows;
}

}  // namespace

std::set<int> reachable_set(const FiniteARS& sys, int a) {
    sys.validate();
    if (a < 0 || a >= sys.carrier_size) {
        throw ArsError("unknown node " + std::to_string(a));
    }
    auto seen = bfs(adjacency(sys, true, true), a);
    std::set<int> out;
    for (std::size_t u = 0; u < seen.size(); ++u) {
        if (seen[u]) out.insert(static_cast<int>(u));
    }
    return out;
}

bool is_well_founded(const std::set<ArsEdge>& rel, const std::set<int>& domain) {
    if (domain.empty()) return true;
    int max_node = *domain.rbegin();
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(max_node) + 1);
    std::vector<char> keep(adj.size(), 0);
    for (int u : domain) keep[static_cast<std::size_t>(u)] = 1;
    for (const auto& [u, v] : rel) {
        if (u >= 0 && v >= 0 && u <= max_node && v <= max_node &&
            keep[static_cast<std::size_t>(u)] && keep[static_cast<std::size_t>(v)]) {
            adj[static_cast<std::size_t>(u)].push_back(v);
        }
    }
    return !find_cycle(adj, keep).has_value();
}

TheoremReport check_klop_theorem(const FiniteARS& sys, int a, int a_prime) {
    sys.validate();
    const auto n = static_cast<std::size_t>(sys.carrier_size);
    if (a < 0 || a >= sys.carrier_size) throw ArsError("unknown node " + std::to_string(a));
    if (a_prime < 0 || a_prime >= sys.carrier_size) {
        throw ArsError("unknown node " + std::to_string(a_prime));
    }

    auto adj0 = adjacency(sys, true, false);
    auto adj1 = adjacency(sys, false, true);
    auto adj3 = adjacency(sys, true, true);

    if (adj3[static_cast<std::size_t>(a)].empty()) {
        throw ArsValidationError("not-in-domain: node " + std::to_string(a) +
                                 " has no outgoing step");
    }
    std::vector<char> in_a = bfs(adj3, a);
    if (!in_a[static_cast<std::size_t>(a_prime)]) {
        throw ArsValidationError("not-reachable: node " + std::to_string(a_prime) +
                                 " is not reachable from " + std::to_string(a));
    }
    if (!adj3[static_cast<std::size_t>(a_prime)].empty()) {
        throw ArsValidationError("not-a-normal-form: node " + std::to_string(a_prime) +
                                 " has an outgoing step");
    }

    TheoremReport report;

    // ->4: edges of ->3 whose source lies in A (targets then lie in A as well).
    std::vector<std::vector<int>> adj4(n);
    for (std::size_t u = 0; u < n; ++u) {
        if (in_a[u]) adj4[u] = adj3[u];
    }

    // Condition 1: the reverse of ->0 range-restricted to A is well-founded,
    // i.e. no cycle of ->0-edges with sources in A.
    {
        std::vector<std::vector<int>> adj0_a(n);
        for (std::size_t u = 0; u < n; ++u) {
            if (in_a[u]) adj0_a[u] = adj0[u];
        }
        std::vector<char> all(n, 1);
        auto cycle = find_cycle(adj0_a, all);
        report.cond1 = !cycle.has_value();
        if (cycle) report.cycle = *cycle;
    }

    // ->2 = ->0* o ->1, computed on the full carrier.
    auto rows0 = reflexive_transitive_rows(adj0);
    std::vector<std::vector<int>> adj2(n);
    {
        std::vector<char> mark(n);
        for (std::size_t u = 0; u < n; ++u) {
            std::fill(mark.begin(), mark.end(), 0);
            for (std::size_t w = 0; w < n; ++w) {
                if (!rows0.get(u, w)) continue;
                for (int v : adj1[w]) mark[static_cast<std::size_t>(v)] = 1;
            }
            for (std::size_t v = 0; v < n; ++v) {
                if (mark[v]) adj2[u].push_back(static_cast<int>(v));
            }
        }
    }

    // Condition 2: bound on ->2-derivations from a that end ->0*-before a'.
    // Relevant vertices V: on some such derivation; a cycle inside V pumps
    // the length, otherwise the exact bound is the longest a-to-W0 path in
    // the V-restricted DAG, where W0 = {w : w ->0* a'}.
    {
        std::vector<char> w0(n, 0);
        {
            auto rev0 = reversed(adj0);
            w0 = bfs(rev0, a_prime);
        }
        std::vector<char> from_a = bfs(adj2, a);
        std::vector<char> to_w0(n, 0);
        {
            auto rev2 = reversed(adj2);
            std::deque<int> queue;
            for (std::size_t u = 0; u < n; ++u) {
                if (w0[u]) {
                    to_w0[u] = 1;
                    queue.push_back(static_cast<int>(u));
                }
            }
            while (!queue.empty()) {
                int u = queue.front();
                queue.pop_front();
                for (int v : rev2[static_cast<std::size_t>(u)]) {
                    if (!to_w0[static_cast<std::size_t>(v)]) {
                        to_w0[static_cast<std::size_t>(v)] = 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        std::vector<char> in_v(n, 0);
        for (std::size_t u = 0; u < n; ++u) in_v[u] = from_a[u] && to_w0[u];

        auto cycle = find_cycle(adj2, in_v);
        if (cycle) {
            report.cond2 = false;
            if (!report.cycle) report.cycle = *cycle;
        } else {
            report.cond2 = true;
            // Longest path from a to a W0-node inside V (a DAG after the
            // cycle check above); -1 marks "cannot finish in W0 from here".
            std::vector<std::int64_t> best(n, -2);  // -2 = unvisited
            if (in_v[static_cast<std::size_t>(a)]) {
                std::vector<std::pair<int, std::size_t>> st;
                st.emplace_back(a, 0);
                while (!st.empty()) {
                    auto [x, slot] = st.back();
                    const auto xs = static_cast<std::size_t>(x);
                    if (slot < adj2[xs].size()) {
                        st.back().second = slot + 1;
                        int v = adj2[xs][slot];
                        if (in_v[static_cast<std::size_t>(v)] &&
                            best[static_cast<std::size_t>(v)] == -2) {
                            st.emplace_back(v, 0);
                        }
                        continue;
                    }
                    std::int64_t b = w0[xs] ? 0 : -1;
                    for (int v : adj2[xs]) {
                        if (!in_v[static_cast<std::size_t>(v)]) continue;
                        std::int64_t bv = best[static_cast<std::size_t>(v)];
                        if (bv >= 0) b = std::max(b, bv + 1);
                    }
                    best[xs] = b;
                    st.pop_back();
                }
            }
            std::int64_t bound = in_v[static_cast<std::size_t>(a)]
                                     ? best[static_cast<std::size_t>(a)]
                                     : 0;
            report.bound2 = bound > 0 ? static_cast<std::uint64_t>(bound) : 0;
        }
    }

    // Reachability over ->4 for the join searches of conditions 3 and 4.
    auto rows4 = reflexive_transitive_rows(adj4);

    // Condition 3: peaks b1 <-4 c ->1 b2 join as b1 ->4* d <-4* b2.
    report.cond3 = true;
    for (std::size_t c = 0; c < n && report.cond3; ++c) {
        if (!in_a[c]) continue;
        for (int b1 : adj4[c]) {
            for (int b2 : adj1[c]) {
                if (!rows4.rows_intersect(static_cast<std::size_t>(b1),
                                          static_cast<std::size_t>(b2))) {
                    report.cond3 = false;
                    report.bad_peak = ArsPeak{static_cast<int>(c), b1, b2};
                    break;
                }
            }
            if (!report.cond3) break;
        }
    }

    // Condition 4: peaks b1 <-4 c ->0 b2 join as b1 ->4* d <-4= b2.
    report.cond4 = true;
    for (std::size_t c = 0; c < n && report.cond4; ++c) {
        if (!in_a[c]) continue;
        for (int b1 : adj4[c]) {
            for (int b2 : adj0[c]) {
                bool ok = rows4.get(static_cast<std::size_t>(b1), static_cast<std::size_t>(b2));
                if (!ok) {
                    for (int d : adj4[static_cast<std::size_t>(b2)]) {
                        if (rows4.get(static_cast<std::size_t>(b1), static_cast<std::size_t>(d))) {
                            ok = true;
                            break;
                        }
                    }
                }
                if (!ok) {
                    report.cond4 = false;
                    if (!report.bad_peak) {
                        report.bad_peak = ArsPeak{static_cast<int>(c), b1, b2};
                    }
                    break;
                }
            }
            if (!report.cond4) break;
        }
    }

    // Conclusion: <-4 well-founded, i.e. ->4 acyclic.
    {
        std::vector<char> all(n, 1);
        auto cycle = find_cycle(adj4, all);
        report.conclusion_well_founded = !cycle.has_value();
        if (cycle && !report.cycle) report.cycle = *cycle;
    }
    return report;
}

// ---------- hypothesis-necessity search ----------

namespace {

// Valid (a, a') pairs of a system: a in DOM(->3), a' a ->3-normal form
// reachable from a.
std::vector<std::pair<int, int>> valid_pairs(const FiniteARS& sys) {
    auto adj3 = adjacency(sys, true, true);
    std::vector<std::pair<int, int>> out;
    for (int a = 0; a < sys.carrier_size; ++a) {
        if (adj3[static_cast<std::size_t>(a)].empty()) continue;
        auto seen = bfs(adj3, a);
        for (int ap = 0; ap < sys.carrier_size; ++ap) {
            if (seen[static_cast<std::size_t>(ap)] &&
                adj3[static_cast<std::size_t>(ap)].empty()) {
                out.emplace_back(a, ap);
            }
        }
    }
    return out;
}

int condition_mask(const TheoremReport& r) {
    return (r.cond1 ? 1 : 0) | (r.cond2 ? 2 : 0) | (r.cond3 ? 4 : 0) | (r.cond4 ? 8 : 0);
}

void consider(const FiniteARS& sys, std::map<int, NecessityWitness>& found) {
    for (const auto& [a, ap] : valid_pairs(sys)) {
        TheoremReport report = check_klop_theorem(sys, a, ap);
        if (report.conclusion_well_founded) continue;
        int mask = condition_mask(report);
        if (mask == 15) {
            throw ArsError("theorem falsified: all four conditions hold for a=" +
                           std::to_string(a) + ", a'=" + std::to_string(ap) +
                           " yet the restricted reverse relation is not well-founded");
        }
        if (!found.count(mask)) {
            found.emplace(mask, NecessityWitness{sys, a, ap,
                                                 {report.cond1, report.cond2, report.cond3,
                                                  report.cond4}});
        }
    }
}

}  // namespace

std::vector<NecessityWitness> search_hypothesis_necessity(std::size_t max_nodes) {
    if (max_nodes > 6) {
        throw std::invalid_argument("search_hypothesis_necessity: max_nodes > 6");
    }
    std::map<int, NecessityWitness> found;

    // Exhaustive over systems with up to 3 nodes: every subset of the 2*n*n
    // colored edges.
    for (int nodes = 1; nodes <= static_cast<int>(std::min<std::size_t>(max_nodes, 3));
         ++nodes) {
        const int slots = 2 * nodes * nodes;
        for (std::uint64_t bitsv = 0; bitsv < (std::uint64_t{1} << slots); ++bitsv) {
            FiniteARS sys;
            sys.carrier_size = nodes;
            int slot = 0;
            for (int u = 0; u < nodes; ++u) {
                for (int v = 0; v < nodes; ++v) {
                    if (bitsv >> slot & 1) sys.r0.emplace(u, v);
                    ++slot;
                    if (bitsv >> slot & 1) sys.r1.emplace(u, v);
                    ++slot;
                }
            }
            consider(sys, found);
        }
    }

    // Seeded random sampling for larger carriers.
    SplitMix64 rng(0xEC5A125ULL);
    for (int nodes = 4; nodes <= static_cast<int>(max_nodes); ++nodes) {
        for (int trial = 0; trial < 60000; ++trial) {
            FiniteARS sys;
            sys.carrier_size = nodes;
            for (int u = 0; u < nodes; ++u) {
                for (int v = 0; v < nodes; ++v) {
                    std::uint64_t word = rng.next();
                    if ((word & 7) == 0) sys.r0.emplace(u, v);        // p = 1/8
                    if (((word >> 3) & 3) == 0) sys.r1.emplace(u, v);  // p = 1/4
                }
            }
            consider(sys, found);
        }
    }

    std::vector<NecessityWitness> out;
    for (auto& [mask, witness] : found) {
        (void)mask;
        out.push_back(std::move(witness));
    }
    return out;
}

}  // namespace eps
