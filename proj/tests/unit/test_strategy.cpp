#include <algorithm>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "epscalc/gen.hpp"
#include "epscalc/rewrite.hpp"
#include "epscalc/strategy.hpp"
#include "epscalc/syntax.hpp"
#include "epscalc/textio.hpp"
#include "oracles.hpp"

using namespace eps;

namespace {

constexpr std::uint64_t kTop = std::numeric_limits<std::uint64_t>::max();

Formula P(const std::string& s) {
    return parse_formula(s);
}

std::vector<Formula> small_corpus(std::uint64_t seed, std::size_t count) {
    GenOptions opts;
    opts.size = 10;
    opts.max_quantifiers = 4;
    return gen_corpus(seed, count, opts);
}

NormalizeOptions huge_fuses() {
    NormalizeOptions opts;
    opts.max_steps = 100000;
    opts.max_nodes = kTop;
    opts.record_steps = false;
    return opts;
}

// Frozen innermost epsilon counts of the blow-up family; values for n >= 7
// exceed 64 bits, so the saturating counters report the max.
const std::uint64_t kFamilyEps[] = {0ULL,     1ULL,       5ULL,
                                    41ULL,    1805ULL,    3263441ULL,
                                    10650056950805ULL};

}  // namespace

TEST_CASE("splitmix64 reference vectors") {
    SplitMix64 a(0);
    CHECK(a.next() == 0xE220A8397B1DCDAFULL);
    CHECK(a.next() == 0x6E789E6AA1B965F4ULL);
    CHECK(a.next() == 0x06C45D188009454FULL);
    CHECK(a.next() == 0xF88BB8A8724C81ECULL);

    SplitMix64 b(42);
    CHECK(b.next() == 0xBDD732262FEB6E95ULL);
    CHECK(b.next() == 0x28EFE333B266F103ULL);
    CHECK(b.next() == 0x47526757130F9F52ULL);
    CHECK(b.next() == 0x581CE1FF0E4AE394ULL);

    SplitMix64 c(0xDEADBEEFULL);
    CHECK(c.next() == 0x4ADFB90F68C9EB9BULL);
    CHECK(c.next() == 0xDE586A3141A10922ULL);

    SplitMix64 d(1);
    CHECK(d.next() == 0x910A2DEC89025CC1ULL);
    SplitMix64 e(1);
    CHECK(e.next_double() == doctest::Approx(0.5665615751722809).epsilon(1e-15));
}

TEST_CASE("splitmix64 bounded and unit-interval draws") {
    SplitMix64 rng(5);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        std::uint64_t v = rng.below(10);
        CHECK(v < 10);
        seen.insert(v);
    }
    CHECK(seen.size() == 10);  // every residue shows up over 1000 draws
    for (int i = 0; i < 100; ++i) CHECK(rng.below(1) == 0);
    for (int i = 0; i < 100; ++i) {
        double x = rng.next_double();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("strategy tags render by their command-line names") {
    CHECK(std::string(to_string(Strategy::Tag::LeftmostInnermost)) == "innermost");
    CHECK(std::string(to_string(Strategy::Tag::LeftmostOutermost)) == "outermost");
    CHECK(std::string(to_string(Strategy::Tag::Random)) == "random");
    CHECK(std::string(to_string(Strategy::Tag::ParallelOutermost)) == "parallel");
}

TEST_CASE("the nested-exists family has the advertised shape") {
    CHECK(count_quantifiers(nested_exists_family(0)) == 0);
    CHECK(struct_eq(nested_exists_family(1), P("exists x1. R(x1)")));
    CHECK(struct_eq(nested_exists_family(2), P("exists x1. exists x2. R(x1, x2)")));
    Formula f5 = nested_exists_family(5);
    CHECK(count_quantifiers(f5) == 5);
    CHECK(count_epsilons(f5) == 0);
    // The printed family re-parses to the identical tree.
    CHECK(struct_eq(parse_formula(print_formula(f5)), f5));
}

TEST_CASE("innermost normalization of the family: n steps, tower-of-squares growth") {
    for (std::size_t n = 1; n <= 6; ++n) {
        DerivationTrace tr = normalize(nested_exists_family(n), Strategy::innermost(),
                                       huge_fuses());
        CHECK(tr.step_count == n);
        CHECK(is_normal_form(tr.final));
        CHECK(count_epsilons(tr.final) == kFamilyEps[n]);
        CHECK(eps_nesting_depth(tr.final) == (1ULL << n) - 1);
        CHECK(tr.steps.empty());  // recording was off
    }
    // Beyond n = 6 the tree counts overflow 64 bits and saturate; the depth
    // stays exact because it grows only linearly in the tree height.
    for (std::size_t n = 7; n <= 8; ++n) {
        DerivationTrace tr = normalize(nested_exists_family(n), Strategy::innermost(),
                                       huge_fuses());
        CHECK(tr.step_count == n);
        CHECK(is_normal_form(tr.final));
        CHECK(count_epsilons(tr.final) == kTop);
        CHECK(eps_nesting_depth(tr.final) == (1ULL << n) - 1);
    }
}

TEST_CASE("outermost normalization of the family explodes") {
    const std::uint64_t lengths[] = {0ULL, 1ULL, 4ULL, 29ULL, 1248ULL};
    for (std::size_t n = 1; n <= 4; ++n) {
        NormalizeOptions opts = huge_fuses();
        DerivationTrace tr = normalize(nested_exists_family(n), Strategy::outermost(), opts);
        CHECK(tr.step_count == lengths[n]);
        CHECK(is_normal_form(tr.final));
        CHECK(count_epsilons(tr.final) == kFamilyEps[n]);
        CHECK(eps_nesting_depth(tr.final) == (1ULL << n) - 1);
    }
}

TEST_CASE("parallel-outermost normalization of the family takes 2^n - 1 rounds") {
    // Parallel rounds are few, but each one contracts every outermost redex
    // of the exploding tree, so the per-round work grows fast; n = 4 already
    // exercises 15 rounds with up to ~1800 epsilon insertions.
    for (std::size_t n = 1; n <= 4; ++n) {
        DerivationTrace tr = normalize(nested_exists_family(n),
                                       Strategy::parallel_outermost(), huge_fuses());
        CHECK(tr.step_count == (1ULL << n) - 1);
        CHECK(is_normal_form(tr.final));
        CHECK(count_epsilons(tr.final) == kFamilyEps[n]);
        CHECK(eps_nesting_depth(tr.final) == (1ULL << n) - 1);
    }
}

TEST_CASE("all strategies reach the same normal form on random formulas") {
    for (const Formula& f : small_corpus(2024, 80)) {
        DerivationTrace inner = normalize(f, Strategy::innermost());
        CHECK(is_normal_form(inner.final));
        // Innermost contraction never duplicates quantifiers, so the length
        // is exactly the starting quantifier count.
        CHECK(inner.step_count == count_quantifiers(f));

        DerivationTrace outer = normalize(f, Strategy::outermost());
        DerivationTrace par = normalize(f, Strategy::parallel_outermost());
        CHECK(is_normal_form(outer.final));
        CHECK(is_normal_form(par.final));
        CHECK(alpha_eq(inner.final, outer.final));
        CHECK(alpha_eq(inner.final, par.final));
        CHECK(outer.step_count >= inner.step_count);

        for (std::uint64_t seed : {1ULL, 7ULL}) {
            DerivationTrace rnd = normalize(f, Strategy::random(seed));
            CHECK(is_normal_form(rnd.final));
            CHECK(alpha_eq(inner.final, rnd.final));
            CHECK(rnd.step_count >= inner.step_count);
        }
    }
}

TEST_CASE("derivation traces replay step by step") {
    for (const Formula& f : small_corpus(606, 40)) {
        for (Strategy s : {Strategy::innermost(), Strategy::outermost(),
                           Strategy::parallel_outermost(), Strategy::random(99)}) {
            DerivationTrace tr = normalize(f, s);
            CHECK(struct_eq(tr.start, f));
            CHECK(tr.steps.size() == tr.step_count);
            Formula cur = f;
            std::uint64_t max_depth = eps_nesting_depth(f);
            std::uint64_t max_eps = count_epsilons(f);
            for (const StepRecord& rec : tr.steps) {
                std::vector<Position> ps;
                for (const Redex& r : rec.redexes) ps.push_back(r.pos);
                cur = parallel_step(cur, ps);
                CHECK(struct_eq(cur, rec.after));
                max_depth = std::max(max_depth, eps_nesting_depth(cur));
                max_eps = std::max(max_eps, count_epsilons(cur));
            }
            CHECK(struct_eq(cur, tr.final));
            CHECK(tr.max_eps_depth == max_depth);
            CHECK(tr.max_eps_count == max_eps);
        }
    }
}

TEST_CASE("each strategy picks exactly the redexes it advertises") {
    for (const Formula& f : small_corpus(1717, 40)) {
        DerivationTrace inner = normalize(f, Strategy::innermost());
        Formula cur = f;
        for (const StepRecord& rec : inner.steps) {
            REQUIRE(rec.redexes.size() == 1);
            auto want = pick_leftmost(cur, true);
            REQUIRE(want.has_value());
            CHECK(same_redex(rec.redexes[0], *want));
            cur = rec.after;
        }

        DerivationTrace outer = normalize(f, Strategy::outermost());
        cur = f;
        for (const StepRecord& rec : outer.steps) {
            REQUIRE(rec.redexes.size() == 1);
            auto want = pick_leftmost(cur, false);
            REQUIRE(want.has_value());
            CHECK(same_redex(rec.redexes[0], *want));
            cur = rec.after;
        }

        DerivationTrace par = normalize(f, Strategy::parallel_outermost());
        cur = f;
        for (const StepRecord& rec : par.steps) {
            auto want = outermost_redexes(cur);
            REQUIRE(rec.redexes.size() == want.size());
            for (std::size_t i = 0; i < want.size(); ++i) {
                CHECK(same_redex(rec.redexes[i], want[i]));
            }
            cur = rec.after;
        }
    }
}

TEST_CASE("random strategy draws one bounded sample per step") {
    for (const Formula& f : small_corpus(4242, 40)) {
        const std::uint64_t seed = 31337;
        DerivationTrace tr = normalize(f, Strategy::random(seed));
        SplitMix64 rng(seed);
        Formula cur = f;
        for (const StepRecord& rec : tr.steps) {
            std::uint64_t total = count_quantifiers(cur);
            REQUIRE(total > 0);
            Redex want = redex_by_index(cur, rng.below(total));
            REQUIRE(rec.redexes.size() == 1);
            CHECK(same_redex(rec.redexes[0], want));
            cur = rec.after;
        }
        CHECK(is_normal_form(cur));
        // Same seed, same derivation; different seed may diverge.
        DerivationTrace again = normalize(f, Strategy::random(seed));
        CHECK(again.step_count == tr.step_count);
        CHECK(struct_eq(again.final, tr.final));
    }
}

TEST_CASE("fuses trip as FuseExceeded on normalize and stay quiet on run_steps") {
    Formula f4 = nested_exists_family(4);  // outermost length 1248

    NormalizeOptions step_fuse;
    step_fuse.max_steps = 10;
    step_fuse.max_nodes = kTop;
    CHECK_THROWS_AS(normalize(f4, Strategy::outermost(), step_fuse), FuseExceeded);

    PartialRun partial = run_steps(f4, Strategy::outermost(), step_fuse);
    CHECK_FALSE(partial.reached_normal_form);
    CHECK(partial.step_count == 10);
    CHECK_FALSE(is_normal_form(partial.final));
    CHECK(partial.steps.size() == 10);

    NormalizeOptions node_fuse;
    node_fuse.max_steps = kTop;
    node_fuse.max_nodes = 50;  // family(4) outgrows 50 tree nodes immediately
    CHECK_THROWS_AS(normalize(f4, Strategy::innermost(), node_fuse), FuseExceeded);
    PartialRun quiet = run_steps(f4, Strategy::innermost(), node_fuse);
    CHECK_FALSE(quiet.reached_normal_form);

    SUBCASE("a completed run reports reached_normal_form") {
        PartialRun done = run_steps(f4, Strategy::innermost(), huge_fuses());
        CHECK(done.reached_normal_form);
        CHECK(done.step_count == 4);
        CHECK(is_normal_form(done.final));
        CHECK(count_epsilons(done.final) == kFamilyEps[4]);
    }
}

TEST_CASE("the family(2) reduction graph is the frozen eight-node diamond stack") {
    ReductionGraph g = all_derivations_graph(nested_exists_family(2), 100);
    CHECK(g.nodes.size() == 8);
    CHECK(g.keys.size() == 8);
    CHECK(g.edges.size() == 10);
    CHECK(g.out_edges.size() == 8);
    CHECK(g.acyclic);
    REQUIRE(g.normal_forms.size() == 1);
    CHECK(g.shortest_path == 2);
    CHECK(g.longest_path == 4);
    CHECK(g.maximal_path_count == 4);
    CHECK(struct_eq(g.nodes[0], nested_exists_family(2)));
    CHECK(is_normal_form(g.nodes[g.normal_forms[0]]));

    SUBCASE("keys are pairwise distinct and edges land on matching classes") {
        std::set<std::string> keys(g.keys.begin(), g.keys.end());
        CHECK(keys.size() == g.nodes.size());
        for (const ReductionGraph::Edge& e : g.edges) {
            REQUIRE(e.from < g.nodes.size());
            REQUIRE(e.to < g.nodes.size());
            auto live = redex_at(g.nodes[e.from], e.redex.pos);
            REQUIRE(live.has_value());
            CHECK(same_redex(*live, e.redex));
            CHECK(e.kind == e.redex.kind);
            CHECK(alpha_eq(contract(g.nodes[e.from], e.redex.pos), g.nodes[e.to]));
        }
        std::size_t listed = 0;
        for (std::size_t i = 0; i < g.out_edges.size(); ++i) {
            for (std::size_t ei : g.out_edges[i]) {
                REQUIRE(ei < g.edges.size());
                CHECK(g.edges[ei].from == i);
            }
            listed += g.out_edges[i].size();
        }
        CHECK(listed == g.edges.size());
    }

    SUBCASE("the class budget is enforced") {
        CHECK_THROWS_AS(all_derivations_graph(nested_exists_family(2), 3), BoundExceeded);
    }
}

TEST_CASE("reduction graphs export as finite abstract reduction systems") {
    // Two disjoint vacuous redexes: a four-node diamond of Step0 edges.
    Formula f = P("(exists x. Q()) & exists y. Q()");
    ReductionGraph g = all_derivations_graph(f, 100);
    REQUIRE(g.nodes.size() == 4);
    REQUIRE(g.normal_forms.size() == 1);

    FiniteARS sys = to_finite_ars(g);
    CHECK(sys.carrier_size == 4);
    CHECK(sys.r0.size() == 4);
    CHECK(sys.r1.empty());
    for (const ReductionGraph::Edge& e : g.edges) {
        CHECK(sys.r0.count({static_cast<int>(e.from), static_cast<int>(e.to)}) == 1);
    }

    TheoremReport report =
        check_klop_theorem(sys, 0, static_cast<int>(g.normal_forms[0]));
    CHECK(report.conditions_hold());
    CHECK(report.conclusion_well_founded);
    CHECK(report.bound2 == 0);  // no proper step anywhere

    SUBCASE("the export round-trips through the text format") {
        FiniteARS back = parse_ars(print_ars(sys));
        CHECK(back.carrier_size == sys.carrier_size);
        CHECK(back.r0 == sys.r0);
        CHECK(back.r1 == sys.r1);
    }

    SUBCASE("proper steps land in r1") {
        ReductionGraph g2 = all_derivations_graph(nested_exists_family(2), 100);
        FiniteARS sys2 = to_finite_ars(g2);
        CHECK(sys2.carrier_size == 8);
        std::set<ArsEdge> want0, want1;
        for (const ReductionGraph::Edge& e : g2.edges) {
            (e.kind == RuleKind::Step0 ? want0 : want1)
                .emplace(static_cast<int>(e.from), static_cast<int>(e.to));
        }
        CHECK(sys2.r0 == want0);
        CHECK(sys2.r1 == want1);
        CHECK(!sys2.r1.empty());
        TheoremReport rep2 =
            check_klop_theorem(sys2, 0, static_cast<int>(g2.normal_forms[0]));
        CHECK(rep2.conditions_hold());
        CHECK(rep2.conclusion_well_founded);
    }
}

TEST_CASE("all_derivations unfolds every maximal path of the graph") {
    std::vector<DerivationTrace> ts = all_derivations(nested_exists_family(2), 100, 10);
    REQUIRE(ts.size() == 4);
    Formula nf = normalize(nested_exists_family(2), Strategy::innermost()).final;
    std::vector<std::uint64_t> lengths;
    for (const DerivationTrace& tr : ts) {
        CHECK(struct_eq(tr.start, nested_exists_family(2)));
        CHECK(is_normal_form(tr.final));
        CHECK(alpha_eq(tr.final, nf));
        CHECK(tr.steps.size() == tr.step_count);
        Formula cur = tr.start;
        for (const StepRecord& rec : tr.steps) {
            REQUIRE(rec.redexes.size() == 1);
            cur = contract(cur, rec.redexes[0]);
            CHECK(struct_eq(cur, rec.after));
        }
        CHECK(struct_eq(cur, tr.final));
        lengths.push_back(tr.step_count);
    }
    CHECK(*std::min_element(lengths.begin(), lengths.end()) == 2);
    CHECK(*std::max_element(lengths.begin(), lengths.end()) == 4);

    SUBCASE("the trace budget is enforced") {
        CHECK_THROWS_AS(all_derivations(nested_exists_family(2), 100, 3), BoundExceeded);
    }
}

TEST_CASE("reduction graphs agree with the naive class exploration") {
    GenOptions opts;
    opts.size = 8;
    opts.max_quantifiers = 3;
    std::size_t compared = 0;
    for (const Formula& f : gen_corpus(321, 40, opts)) {
        // A handful of three-quantifier formulas have reduction graphs too
        // large to enumerate; skip those and insist most of the corpus fits.
        ReductionGraph g;
        try {
            g = all_derivations_graph(f, 5000);
        } catch (const BoundExceeded&) {
            continue;
        }
        oracle::GraphCounts want = oracle::reachable_classes(f, 6000);
        CHECK(g.nodes.size() == want.classes);
        CHECK(g.edges.size() == want.edges);
        CHECK(g.normal_forms.size() == want.normal_forms);
        // Termination and confluence, wholesale.
        CHECK(g.acyclic);
        CHECK(g.normal_forms.size() == 1);
        CHECK(g.shortest_path == count_quantifiers(f));
        CHECK(g.longest_path >= g.shortest_path);
        CHECK(g.maximal_path_count >= 1);
        ++compared;
    }
    CHECK(compared >= 30);
}

TEST_CASE("derivation_length_stats tabulates both sequential strategies") {
    auto find_row = [](const std::vector<LengthStatsRow>& rows, std::size_t n,
                       Strategy::Tag tag) -> const LengthStatsRow& {
        for (const LengthStatsRow& r : rows) {
            if (r.n == n && r.strategy == tag) return r;
        }
        REQUIRE(false);
        static LengthStatsRow dummy;
        return dummy;
    };

    NormalizeOptions opts = huge_fuses();
    std::vector<LengthStatsRow> rows = derivation_length_stats(nested_exists_family, 4, opts);
    CHECK(rows.size() == 10);  // n = 0..4, two strategies each
    const LengthStatsRow& zero = find_row(rows, 0, Strategy::Tag::LeftmostInnermost);
    CHECK(zero.steps == 0);
    CHECK(zero.completed);
    CHECK(zero.eps_depth == 0);
    const std::uint64_t outer_lengths[] = {0ULL, 1ULL, 4ULL, 29ULL, 1248ULL};
    for (std::size_t n = 1; n <= 4; ++n) {
        const LengthStatsRow& inner = find_row(rows, n, Strategy::Tag::LeftmostInnermost);
        CHECK(inner.steps == n);
        CHECK(inner.completed);
        CHECK(inner.eps_depth == (1ULL << n) - 1);
        const LengthStatsRow& outer = find_row(rows, n, Strategy::Tag::LeftmostOutermost);
        CHECK(outer.steps == outer_lengths[n]);
        CHECK(outer.completed);
        CHECK(outer.eps_depth == (1ULL << n) - 1);
    }

    SUBCASE("fuse-limited rows report lower bounds") {
        NormalizeOptions tight = huge_fuses();
        tight.max_steps = 20;
        std::vector<LengthStatsRow> capped =
            derivation_length_stats(nested_exists_family, 4, tight);
        const LengthStatsRow& outer3 = find_row(capped, 3, Strategy::Tag::LeftmostOutermost);
        CHECK_FALSE(outer3.completed);
        CHECK(outer3.steps == 20);
        const LengthStatsRow& outer4 = find_row(capped, 4, Strategy::Tag::LeftmostOutermost);
        CHECK_FALSE(outer4.completed);
        const LengthStatsRow& inner4 = find_row(capped, 4, Strategy::Tag::LeftmostInnermost);
        CHECK(inner4.completed);
        CHECK(inner4.steps == 4);
    }
}
