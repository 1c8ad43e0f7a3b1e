#include <catch2/catch_amalgamated.hpp>

#include <oim/families.hpp>
#include <oim/counting.hpp>

#include <set>

using namespace oim;

namespace {

mpz_class fib(std::size_t n) {
    mpz_class a = 1, b = 1; // F_1 = 1, F_2 = 2 in the ladder's indexing
    for (std::size_t i = 0; i < n; ++i) {
        std::swap(a, b);
        b += a;
    }
    return a;
}

// Independent order oracle: reflexive-transitive reachability through the
// oracle's cover lists, restricted to the first n enumerated elements.
bool reachable(const CausetOracle& o, ElementId a, ElementId b) {
    if (a == b) return false;
    std::vector<ElementId> stack{b};
    std::set<ElementId> seen;
    while (!stack.empty()) {
        ElementId x = stack.back();
        stack.pop_back();
        for (ElementId u : o.lower_covers(x)) {
            if (u == a) return true;
            if (seen.insert(u).second) stack.push_back(u);
        }
    }
    return false;
}

void check_oracle_consistency(const CausetOracle& o, std::size_t n) {
    std::vector<ElementId> pre = o.enumerate(n);
    REQUIRE(pre.size() == n);
    REQUIRE(o.is_down_set(pre)); // enumeration prefixes are down-sets
    for (ElementId x : pre) {
        DownSet d = o.down(x);
        REQUIRE(std::is_sorted(d.begin(), d.end()));
        for (ElementId y : pre) {
            bool lt = o.less(y, x);
            REQUIRE(lt == reachable(o, y, x));
            REQUIRE(lt == std::binary_search(d.begin(), d.end(), y));
            if (lt) REQUIRE_FALSE(o.less(x, y));
        }
        REQUIRE_FALSE(o.less(x, x));
        // labels round-trip
        REQUIRE(o.parse_label(o.label(x)) == x);
    }
}

} // namespace

TEST_CASE("ladder extension counts are Fibonacci numbers") {
    auto o = ladder_causet();
    for (std::size_t n = 1; n <= 30; ++n) {
        Restriction r = restrict_to(*o, o->enumerate(n));
        REQUIRE(count_linear_extensions(r.poset) == fib(n));
    }
}

TEST_CASE("ladder structure") {
    auto o = ladder_causet();
    check_oracle_consistency(*o, 14);
    // lower covers of a_j are a_{j-2} and a_{j-3}
    REQUIRE(o->lower_covers(*o->parse_label("a7")) ==
            std::vector<ElementId>{*o->parse_label("a4"), *o->parse_label("a5")});
    REQUIRE(o->lower_covers(*o->parse_label("a2")).empty());
    REQUIRE(o->less(*o->parse_label("a1"), *o->parse_label("a3")));
    REQUIRE_FALSE(o->less(*o->parse_label("a1"), *o->parse_label("a2")));
    REQUIRE_THROWS_AS(o->parse_stem("a1,zz"), UsageError);
}

TEST_CASE("disjoint chains, finite and countable") {
    auto k3 = disjoint_chains_causet(3);
    check_oracle_consistency(*k3, 12);
    ElementId b1 = *k3->parse_label("b1"), b2 = *k3->parse_label("b2"), c1 = *k3->parse_label("c1");
    REQUIRE(k3->less(b1, b2));
    REQUIRE_FALSE(k3->less(b1, c1));
    auto mins = k3->minimal_after({b1}).elems;
    REQUIRE(mins.size() == 3); // b2 plus the other two chain bottoms

    auto inf = disjoint_chains_causet(std::nullopt);
    check_oracle_consistency(*inf, 15);
    // every enumeration prefix touches each present chain at its bottom first
    auto m0 = inf->minimal_after({});
    REQUIRE_FALSE(m0.exhaustive); // countably many minimal elements
}

TEST_CASE("forest presets expose their shape") {
    auto chain = single_chain_forest();
    check_oracle_consistency(*chain, 10);
    REQUIRE(chain->upper_covers(chain->enumerate(1)[0])->size() == 1);

    auto two = chain_plus_isolated_forest();
    check_oracle_consistency(*two, 8);
    ElementId x = *two->parse_label("x");
    REQUIRE(two->upper_covers(x)->empty()); // the isolated element is maximal
    REQUIRE(two->down(x).empty());

    auto bin = binary_tree_forest();
    check_oracle_consistency(*bin, 15);
    for (ElementId e : bin->enumerate(7)) REQUIRE(bin->upper_covers(e)->size() == 2);

    auto comb = comb_forest();
    check_oracle_consistency(*comb, 12);
    std::size_t spine = 0, teeth = 0;
    for (ElementId e : comb->enumerate(12)) {
        std::size_t u = comb->upper_covers(e)->size();
        REQUIRE((u == 1 || u == 2));
        (u == 2 ? spine : teeth)++;
    }
    REQUIRE(spine >= 3);
    REQUIRE(teeth >= 3);
}

TEST_CASE("grid order is componentwise") {
    auto o = grid_causet();
    check_oracle_consistency(*o, 15);
    auto at = [&](std::size_t r, std::size_t c) {
        return *o->parse_label("(" + std::to_string(r) + "," + std::to_string(c) + ")");
    };
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b)
            for (std::size_t c = 0; c < 4; ++c)
                for (std::size_t d = 0; d < 4; ++d)
                    REQUIRE(o->less(at(a, b), at(c, d)) == (a <= c && b <= d && (a != c || b != d)));
    // 3x3 square has 42 extensions (number of standard Young tableaux)
    Restriction r = finite_restriction(*o, GridCauset::square_exhaustion(), 3);
    REQUIRE(r.elements.size() == 9);
    REQUIRE(count_linear_extensions(r.poset) == 42);
}

TEST_CASE("oscillating family relations follow the stage rule") {
    auto o = oscillating_causet({3, 5});
    check_oracle_consistency(*o, o->total());
    // stage(p) and stage(q): comparable iff same stage (chain) or gap >= 2
    auto stage_of = [&](ElementId e) {
        std::string l = o->label(e);
        if (l == "a") return std::size_t{1};
        if (l == "b") return std::size_t{2};
        return std::size_t(std::stoul(l.substr(1, l.find('_') - 1)));
    };
    std::vector<ElementId> all = o->enumerate(o->total());
    for (ElementId x : all)
        for (ElementId y : all) {
            std::size_t sx = stage_of(x), sy = stage_of(y);
            if (sx + 2 <= sy) REQUIRE(o->less(x, y));
            if (sx == sy + 1 || sy == sx + 1) REQUIRE_FALSE((o->less(x, y) || o->less(y, x)));
            if (sx == sy && x != y) REQUIRE((o->less(x, y) || o->less(y, x)));
        }
    // stages are nested
    Exhaustion ex = o->stage_exhaustion();
    for (std::size_t n = 2; n <= 4; ++n) {
        auto prev = ex.stage(n - 1), cur = ex.stage(n);
        REQUIRE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
    }
}

TEST_CASE("crossed chains: c_i sits above b_j exactly when j < 2^i") {
    auto o = crossed_chains_causet();
    check_oracle_consistency(*o, 20);
    for (std::size_t i = 0; i <= 4; ++i)
        for (std::size_t j = 1; j <= 20; ++j) {
            ElementId ci = *o->parse_label("c" + std::to_string(i));
            ElementId bj = *o->parse_label("b" + std::to_string(j));
            REQUIRE(o->less(bj, ci) == (j < (std::size_t{1} << i)));
            REQUIRE_FALSE(o->less(ci, bj));
        }
    // |D(c_2)| = 1 (c_0) + 1 (c_1) + 3 (b_1..b_3)
    REQUIRE(o->down(*o->parse_label("c2")).size() == 5);
}

TEST_CASE("linear sums order every earlier summand below every later one") {
    auto o = linear_sum_causet({antichain_poset(2), antichain_poset(2)});
    check_oracle_consistency(*o, 8);
    std::vector<ElementId> pre = o->enumerate(4);
    Restriction r = restrict_to(*o, pre);
    REQUIRE(count_linear_extensions(r.poset) == 4); // 2! * 2!
    REQUIRE(o->less(pre[0], pre[2]));
    REQUIRE_FALSE(o->less(pre[0], pre[1]));
}

TEST_CASE("poisson order realizations are deterministic per seed") {
    auto a = poisson_order_causet(5, 2.0, 6.0);
    auto b = poisson_order_causet(5, 2.0, 6.0);
    auto c = poisson_order_causet(6, 2.0, 6.0);
    std::size_t sz = a->enumerate(100000).size(); // clamped to the realization
    check_oracle_consistency(*a, std::min<std::size_t>(sz, 10));
    REQUIRE(sz == b->enumerate(100000).size());
    REQUIRE(a->signature() == b->signature());
    REQUIRE(a->signature() != c->signature());
    REQUIRE_THROWS_AS(poisson_order_causet(1, 0.0, 1.0), EmptySample);
}

TEST_CASE("deleting a stem removes exactly its down-set") {
    auto o = ladder_causet();
    auto del = delete_stem(o, o->parse_stem("a1,a2"));
    REQUIRE_FALSE(del->parse_label("a1"));
    REQUIRE(del->parse_label("a3"));
    check_oracle_consistency(*del, 8);
    REQUIRE_THROWS_AS(delete_stem(o, {*o->parse_label("a3")}), NotAnOrderedStem);
}
