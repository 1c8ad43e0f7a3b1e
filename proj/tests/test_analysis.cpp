#include <catch2/catch_amalgamated.hpp>

#include <oim/analysis.hpp>
#include <oim/families.hpp>

#include <random>

using namespace oim;

TEST_CASE("kolmogorov consistency holds exactly for the exact measures") {
    for (MeasurePtr mu : {two_chain_measure(mpq_class(1, 3)), urn_measure(), chain_flow_measure()}) {
        CheckReport r = check_kolmogorov(*mu, 5);
        REQUIRE(r.pass);
        REQUIRE(r.residual_rational);
        REQUIRE(*r.residual_rational == 0);
        REQUIRE(r.witnesses.empty());
    }
    MeasurePtr lad = ladder_measure();
    CheckReport r = check_kolmogorov(*lad, 5);
    REQUIRE(r.pass);
    REQUIRE(r.grade == Grade::exact_quadratic);
}

TEST_CASE("a perturbed measure fails kolmogorov with a witness") {
    MeasurePtr mu = two_chain_measure(mpq_class(1, 2));
    OrderedStem where = mu->support()->parse_stem("b1,b2");
    MeasurePtr bad = perturbed_measure(mu, where, mpq_class(1, 2));
    CheckReport r = check_kolmogorov(*bad, 4);
    REQUIRE_FALSE(r.pass);
    REQUIRE_FALSE(r.witnesses.empty());
    REQUIRE(*r.residual_rational > 0);
}

TEST_CASE("adjacent and full invariance checks agree") {
    for (MeasurePtr mu : {two_chain_measure(mpq_class(1, 4)), urn_measure()}) {
        CheckReport adj = check_order_invariance(*mu, 5, InvarianceMode::adjacent);
        CheckReport full = check_order_invariance(*mu, 5, InvarianceMode::full);
        REQUIRE(adj.pass);
        REQUIRE(full.pass);
    }
    MeasurePtr mo = momentum_measure();
    CheckReport adj = check_order_invariance(*mo, 4, InvarianceMode::adjacent);
    CheckReport full = check_order_invariance(*mo, 4, InvarianceMode::full);
    REQUIRE_FALSE(adj.pass);
    REQUIRE_FALSE(full.pass);
    REQUIRE_FALSE(adj.witnesses.empty());
}

TEST_CASE("order-markov: urn passes, momentum fails") {
    CheckReport ok = check_order_markov(*urn_measure(), 5);
    REQUIRE(ok.pass);
    CheckReport bad = check_order_markov(*momentum_measure(), 4);
    REQUIRE_FALSE(bad.pass);
    REQUIRE_FALSE(bad.witnesses.empty());
}

TEST_CASE("rank monotonicity on random posets with a designated maximum") {
    std::mt19937_64 rng(11);
    std::bernoulli_distribution coin(0.3);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 7;
        std::vector<std::pair<std::size_t, std::size_t>> covers;
        for (std::size_t i = 0; i < n - 1; ++i) {
            for (std::size_t j = i + 1; j < n - 1; ++j)
                if (coin(rng)) covers.emplace_back(i, j);
            covers.emplace_back(i, n - 1); // n-1 is the maximum
        }
        FinitePoset p = FinitePoset::from_covers(n, covers);
        CheckReport r = check_rank_monotonicity(p, n - 1);
        REQUIRE(r.pass);
    }
    // non-maximal targets are rejected
    FinitePoset p = chain_poset(3);
    REQUIRE_THROWS_AS(check_rank_monotonicity(p, 0), NotMaximal);
}

TEST_CASE("absence bounds hold on the crossed chains and fail nowhere") {
    auto o = crossed_chains_causet();
    ElementId c0 = *o->parse_label("c0");
    for (std::size_t n = 2; n <= 3; ++n) {
        CheckReport r = absence_bound_check(*o, c0, 1, n);
        REQUIRE(r.pass);
    }
}

TEST_CASE("the chain-plus-isolated-point causet pins the chain point mass") {
    auto o = chain_plus_isolated_forest();
    ElementId x = *o->parse_label("x");
    // r_j(x) <= 1/(n - j + 1) for all stems: x can be pushed arbitrarily late
    CheckReport r = absence_bound_check(*o, x, 1, 4);
    REQUIRE(r.pass);
    // the chain point mass reproduces b1 b2 b3 ... under simulation
    // pick rule: never take the isolated point, so the trajectory is the chain
    auto oc = std::static_pointer_cast<const CausetOracle>(o);
    MeasurePtr pm = std::make_shared<PointMassMeasure>(oc, [](const CausetOracle& c, const OrderedStem& s) {
        auto mins = c.minimal_after(s).elems;
        for (ElementId e : mins)
            if (c.label(e) != "x") return e;
        return mins.front();
    });
    Trajectory t = simulate(*pm, 6, 3);
    for (std::size_t j = 1; j <= 6; ++j)
        REQUIRE(pm->support()->label(t.xi(j)) == "b" + std::to_string(j));
}

TEST_CASE("simulation is reproducible and produces genuine stems") {
    MeasurePtr mu = two_chain_measure(mpq_class(1, 3));
    Trajectory a = simulate(*mu, 12, 99), b = simulate(*mu, 12, 99), c = simulate(*mu, 12, 100);
    REQUIRE(a.seq == b.seq);
    REQUIRE(a.seq != c.seq);
    REQUIRE(mu->support()->is_ordered_stem(a.seq));
    REQUIRE(a.Xi(3).size() == 3);
    REQUIRE(a.xi(1) == a.seq[0]);
}

TEST_CASE("monte-carlo event estimates cover the exact value") {
    MeasurePtr mu = two_chain_measure(mpq_class(1, 3));
    OrderedStem s = mu->support()->parse_stem("b1,c1");
    auto [est, half] = estimate_event(*mu, s, 4000, 17);
    double want = mu->prob(s).to_double();
    REQUIRE(std::abs(est - want) < half); // 5-sigma band
    REQUIRE(half < 0.1);
}

TEST_CASE("essentiality surrogate separates ergodic from mixed") {
    std::vector<std::size_t> grid{10, 25, 50, 100, 200};
    MeasurePtr pure = two_chain_measure(mpq_class(1, 2));
    OrderedStem b1{*pure->support()->parse_label("b1")};
    EssentialityReport ok = essentiality_test(*pure, b1, 40, grid, 2024);
    REQUIRE(ok.report.pass);
    REQUIRE(std::get<2>(ok.table.back()) < 0.1);

    MeasurePtr mix = mixture_measure({{two_chain_measure(mpq_class(1, 5)), mpq_class(1, 2)},
                                      {two_chain_measure(mpq_class(4, 5)), mpq_class(1, 2)}});
    EssentialityReport bad = essentiality_test(*mix, b1, 40, grid, 2024);
    REQUIRE_FALSE(bad.report.pass);
    REQUIRE(std::get<2>(bad.table.back()) > 0.2); // bimodal: nu^k clusters at 1/5 and 4/5
}

TEST_CASE("compactness witnesses separate bounded from unbounded branching") {
    // the ladder never shows more than 2 minimal continuations
    CheckReport lad = compactness_witness(*ladder_causet(), 1000, 4);
    REQUIRE(lad.pass);
    // countably many chains: the empty stem already has unboundedly many minima
    CheckReport inf = compactness_witness(*disjoint_chains_causet(std::nullopt), 1000, 8);
    REQUIRE_FALSE(inf.pass);
    REQUIRE_FALSE(inf.witnesses.empty());
}
