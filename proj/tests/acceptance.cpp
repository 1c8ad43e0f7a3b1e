// Acceptance suite: one pass/fail line per criterion.  Tolerances are pinned
// here, not configurable.  Run with --cli <path-to-oimcli> to include the
// command-line determinism checks.

#include <oim/analysis.hpp>
#include <oim/families.hpp>
#include <oim/hook.hpp>
#include <oim/measures.hpp>
#include <oim/tree.hpp>

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>

using namespace oim;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("criterion %2d: %s  (%s)\n", criterion, pass ? "pass" : "FAIL", detail.c_str());
    if (!pass) ++failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

mpz_class ladder_fib(std::size_t n) { // F_1 = 1, F_2 = 2
    mpz_class a = 1, b = 1;
    for (std::size_t i = 0; i < n; ++i) {
        std::swap(a, b);
        b += a;
    }
    return a;
}

std::string run_cli(const std::string& cmd, int& exit_code) {
    std::string out;
    FILE* p = popen((cmd + " 2>/dev/null").c_str(), "r");
    if (!p) {
        exit_code = -1;
        return out;
    }
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, got);
    int st = pclose(p);
    exit_code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return out;
}

// enumerate all distinct down-sets of size exactly n reachable by stems
std::vector<std::vector<ElementId>> down_sets_of_size(const CausetOracle& o, std::size_t n) {
    std::set<std::vector<ElementId>> seen;
    for_each_stem(o, n, [&](const OrderedStem& s) {
        if (s.size() != n) return;
        std::vector<ElementId> set(s);
        std::sort(set.begin(), set.end());
        seen.insert(std::move(set));
    });
    return {seen.begin(), seen.end()};
}

void criterion_1() {
    auto t0 = Clock::now();
    auto o = ladder_causet();
    bool ok = true;
    for (std::size_t n = 1; n <= 30 && ok; ++n) {
        Restriction r = restrict_to(*o, o->enumerate(n));
        ok = count_linear_extensions(r.poset) == ladder_fib(n);
        for (std::size_t k = 1; k <= std::min<std::size_t>(5, n) && ok; ++k) {
            mpq_class want(ladder_fib(n - k), ladder_fib(n));
            want.canonicalize();
            ok = nu_uniform(r.poset, OrderedStem(o->enumerate(k))) == want;
        }
    }
    double dt = seconds_since(t0);
    ok = ok && dt < 1.0;
    report(1, ok, "ladder counts Fibonacci, nu = F(n-k)/F(n), " + std::to_string(dt) + "s");
}

void criterion_2() {
    auto o = ladder_causet();
    MeasurePtr mu = ladder_measure();
    Quad phi = Quad::golden();
    bool ok = true;
    for (std::size_t k = 1; k <= 5 && ok; ++k) {
        OrderedStem s(o->enumerate(k));
        ConvergenceReport r = limit_measure_eval(*o, prefix_exhaustion(o), s, 40, 1e-6);
        ok = r.verdict == Verdict::converged &&
             std::abs(r.limit - std::pow(phi.to_double(), double(k))) < 1e-6;
        ok = ok && (mu->prob(s).exact() - phi.pow(k)).is_zero(); // zero residual
    }
    report(2, ok, "ladder limits reach phi^k by n = 40; measure values exact");
}

void criterion_3() {
    bool ok = true;
    for (mpq_class q : {mpq_class(1, 4), mpq_class(1, 2), mpq_class(3, 4)}) {
        MeasurePtr mu = two_chain_measure(q);
        auto o = mu->support();
        for_each_stem(*o, 8, [&](const OrderedStem& s) {
            std::size_t m = 0;
            for (ElementId e : s) m += o->label(e)[0] == 'b';
            mpq_class want = 1;
            for (std::size_t i = 0; i < m; ++i) want *= q;
            for (std::size_t i = 0; i + m < s.size(); ++i) want *= 1 - q;
            ok = ok && mu->prob(s).exact().as_rational() == want;
        });
    }
    MeasurePtr urn = urn_measure();
    auto o = urn->support();
    auto fact = [](std::size_t n) {
        mpz_class f = 1;
        for (std::size_t i = 2; i <= n; ++i) f *= static_cast<unsigned long>(i);
        return f;
    };
    for_each_stem(*o, 10, [&](const OrderedStem& s) {
        std::size_t l = 0;
        for (ElementId e : s) l += o->label(e)[0] == 'b';
        mpq_class want(fact(l) * fact(s.size() - l), fact(s.size() + 1));
        want.canonicalize();
        ok = ok && urn->prob(s).exact().as_rational() == want;
    });
    report(3, ok, "two-chain product formula (q = 1/4, 1/2, 3/4) and urn closed form");
}

void criterion_4() {
    bool ok = true;
    for (MeasurePtr mu : {chain_flow_measure(), binary_flow_measure(), comb_flow_measure()}) {
        CheckReport k = check_kolmogorov(*mu, 8);
        CheckReport inv = check_order_invariance(*mu, 8, InvarianceMode::adjacent);
        ok = ok && k.pass && inv.pass;
        ok = ok && k.residual_rational && *k.residual_rational == 0;
        ok = ok && inv.residual_rational && *inv.residual_rational == 0;
        std::size_t stems = 0;
        try {
            for_each_stem(*mu->support(), 110, [&](const OrderedStem& s) {
                if (stems >= 100) throw ResourceLimit();
                ++stems;
                mpq_class total = 0;
                for (auto [e, p] : mu->transition(s)) total += p.exact().as_rational();
                ok = ok && total == 1;
            });
        } catch (const ResourceLimit&) {
        }
        ok = ok && stems >= 100;
    }
    report(4, ok, "flow measures: zero-residual checks to depth 8, flow identity on 100 stems each");
}

void criterion_5() {
    // divergent spec
    TreeMeasureResult dead = tree_measure(pendant_every_level_spec(), 1e-4);
    bool ok = !dead.exists;

    // pendants at {1,2}: independent oracle from down-set cardinalities:
    // t_i = |D(x_i) \ D[x_{i-1}]| / |D(x_i)|, p(x0) = prod (1 - t_i)
    TreeSpec spec = pendants_at_spec({1, 2});
    TreeMeasureResult r = tree_measure(spec, 0.0);
    ok = ok && r.exists;
    auto tree = down_tree_causet(spec);
    ElementId x0 = *tree->parse_label("x0");
    mpq_class p_hand = 1;
    ElementId prev = x0;
    for (std::size_t i = 1; i <= 3; ++i) {
        ElementId xi = *tree->parse_label("x" + std::to_string(i));
        DownSet di = tree->down(xi), dp = tree->down(prev);
        std::size_t b = di.size();              // |D(x_i)|
        std::size_t a = b - dp.size() - 1;      // |D(x_i) \ D[x_{i-1}]|, the level-i pendants
        mpq_class factor(static_cast<unsigned long>(b - a), static_cast<unsigned long>(b));
        factor.canonicalize();
        p_hand *= factor;
        prev = xi;
    }
    ok = ok && r.measure->prob({x0}).exact().as_rational() == mpq_class(3, 8);
    ok = ok && p_hand == mpq_class(3, 8);

    // truncated transition mass within the declared tail tolerance
    TreeMeasureResult an = tree_measure(pendants_at_powers_spec(), 1e-4);
    ok = ok && an.exists;
    double total = 0;
    for (auto& [e, p] : an.measure->transition({}, 200)) total += p.to_double();
    ok = ok && total > 1.0 - 5e-4 && total < 1.0 + 1e-9;

    // pairwise invariance for the convergent presets
    for (const TreeMeasureResult* res : {&r, &an}) {
        auto mins = res->measure->support()->minimal_after({}).elems;
        for (std::size_t i = 0; i < mins.size() && i < 4; ++i)
            for (std::size_t j = i + 1; j < mins.size() && j < 4; ++j) {
                double ab = res->measure->prob({mins[i], mins[j]}).to_double();
                double ba = res->measure->prob({mins[j], mins[i]}).to_double();
                ok = ok && std::abs(ab - ba) < 1e-9;
            }
    }

    // marking sampler within 5 sigma over 1e5 seeds
    TreeMarkingSampler sampler(spec);
    std::map<ElementId, std::size_t> freq;
    const std::size_t reps = 100000;
    for (unsigned long s = 0; s < reps; ++s) ++freq[sampler.sample(s)];
    for (auto [e, hits] : freq) {
        double want = r.measure->prob({e}).to_double();
        double sigma = std::sqrt(want * (1 - want) / reps);
        ok = ok && std::abs(double(hits) / reps - want) < 5 * sigma;
    }
    report(5, ok, "trees: divergence, p(x0) = 3/8, tail mass, pairwise invariance, marking 5-sigma");
}

void criterion_6() {
    bool ok = true;
    // hook counts vs DP for every shape with <= 8 boxes
    std::function<void(std::size_t, std::size_t, Partition&)> shapes = [&](std::size_t n, std::size_t mx, Partition& cur) {
        if (n == 0) {
            auto o = grid_causet();
            FinitePoset p = restrict_to(*o, partition_cells(cur)).poset;
            ok = ok && hook_count(cur) == count_linear_extensions(p);
            return;
        }
        for (std::size_t row = std::min(n, mx); row >= 1; --row) {
            cur.push_back(row);
            shapes(n - row, row, cur);
            cur.pop_back();
        }
    };
    for (std::size_t n = 1; n <= 8; ++n) {
        Partition cur;
        shapes(n, n, cur);
    }
    auto o = grid_causet();
    OrderedStem v = o->parse_stem("(0,0),(1,0)");
    OrderedStem h = o->parse_stem("(0,0),(0,1)");
    for (std::size_t n = 2; n <= 6; ++n)
        ok = ok && grid_square_nu(n, v) == mpq_class(1, 2) && grid_square_nu(n, h) == mpq_class(1, 2);
    // permutation-equal stems get equal exact values to depth 4
    Restriction sq = finite_restriction(*o, GridCauset::square_exhaustion(), 5);
    for (std::size_t n = 2; n <= 4; ++n) {
        for_each_stem(*o, n, [&](const OrderedStem& s) {
            if (s.size() != n) return;
            std::vector<ElementId> cells(s);
            std::sort(cells.begin(), cells.end());
            mpq_class direct = grid_square_nu(5, cells);
            ok = ok && nu_uniform(sq.poset, s) ==
                           nu_uniform(sq.poset, OrderedStem(cells.begin(), cells.end()));
            ok = ok && direct == grid_square_nu(5, std::vector<ElementId>(s.begin(), s.end()));
        }, 100000, 16);
    }
    report(6, ok, "grid: hook = DP to 8 boxes, nu((0,0)(1,0)) = 1/2 to n = 6, permutation equality");
}

void criterion_7() {
    // doubly-exponential growth 2^(2^n) is not reproducible past n = 4 by
    // exact DP; the pinned substitute keeps the same stage-dominance mechanism
    auto osc = oscillating_causet({4, 16, 64, 256, 1024});
    double tol = 1e-3;
    ConvergenceReport r = limit_measure_eval(*osc, osc->stage_exhaustion(), osc->parse_stem("a"), 7, tol);
    bool ok = r.verdict == Verdict::oscillating && r.gap > 10 * tol;
    report(7, ok, "oscillating growth 4,16,64,256,1024: verdict oscillating, gap " + std::to_string(r.gap));
}

void criterion_8() {
    bool ok = true;
    std::mt19937_64 rng(19);
    std::bernoulli_distribution coin(0.3);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 7;
        std::vector<std::pair<std::size_t, std::size_t>> covers;
        for (std::size_t i = 0; i < n - 1; ++i) {
            for (std::size_t j = i + 1; j < n - 1; ++j)
                if (coin(rng)) covers.emplace_back(i, j);
            covers.emplace_back(i, n - 1);
        }
        ok = ok && check_rank_monotonicity(FinitePoset::from_covers(n, covers), n - 1).pass;
    }

    // crossed chains: max nu^X(E(c0)) <= n/2^n over n-element down-sets with
    // c0 present and maximal
    auto cc = crossed_chains_causet();
    ElementId c0 = *cc->parse_label("c0");
    for (std::size_t n = 2; n <= 3; ++n) {
        mpq_class best = 0;
        for (const auto& set : down_sets_of_size(*cc, n)) {
            if (!std::count(set.begin(), set.end(), c0)) continue;
            bool maximal = true;
            for (ElementId y : set) maximal = maximal && !cc->less(c0, y);
            if (!maximal) continue;
            Restriction r = restrict_to(*cc, set);
            best = std::max(best, nu_uniform(r.poset, {c0}));
        }
        mpq_class bound(static_cast<unsigned long>(n), mpz_class(1) << n);
        bound.canonicalize();
        ok = ok && best <= bound && best > 0;
    }

    // chain plus isolated point: the chain point mass is reproduced
    auto five = chain_plus_isolated_forest();
    auto oc = std::static_pointer_cast<const CausetOracle>(five);
    MeasurePtr pm = std::make_shared<PointMassMeasure>(oc, [](const CausetOracle& c, const OrderedStem& s) {
        auto mins = c.minimal_after(s).elems;
        for (ElementId e : mins)
            if (c.label(e) != "x") return e;
        return mins.front();
    });
    Trajectory t = simulate(*pm, 8, 1);
    for (std::size_t j = 1; j <= 8; ++j) ok = ok && oc->label(t.xi(j)) == "b" + std::to_string(j);
    ok = ok && pm->prob(oc->parse_stem("b1,b2,b3")).exact().as_rational() == 1;
    report(8, ok, "rank monotonicity x50, crossed-chain absence bound n/2^n, chain point mass");
}

void criterion_9() {
    auto t0 = Clock::now();
    std::vector<std::size_t> grid{10, 25, 50, 100, 200};
    MeasurePtr pure = two_chain_measure(mpq_class(1, 2));
    OrderedStem b1{*pure->support()->parse_label("b1")};
    EssentialityReport okrep = essentiality_test(*pure, b1, 60, grid, 71);
    MeasurePtr mix = mixture_measure({{two_chain_measure(mpq_class(1, 5)), mpq_class(1, 2)},
                                      {two_chain_measure(mpq_class(4, 5)), mpq_class(1, 2)}});
    EssentialityReport badrep = essentiality_test(*mix, b1, 60, grid, 71);
    double dt = seconds_since(t0);
    bool ok = okrep.report.pass && !badrep.report.pass &&
              std::get<2>(badrep.table.back()) > 0.2 && dt < 60.0;
    report(9, ok, "essentiality: mu_1/2 passes, bimodal mixture fails, " + std::to_string(dt) + "s");
}

void criterion_10(const std::string& cli) {
    bool ok = true;
    // every checker fails with a witness on its documented broken input
    MeasurePtr mu = two_chain_measure(mpq_class(1, 2));
    MeasurePtr pert = perturbed_measure(mu, mu->support()->parse_stem("b1,b2"), mpq_class(1, 2));
    CheckReport k = check_kolmogorov(*pert, 4);
    ok = ok && !k.pass && !k.witnesses.empty();
    CheckReport inv = check_order_invariance(*momentum_measure(), 4, InvarianceMode::adjacent);
    ok = ok && !inv.pass && !inv.witnesses.empty();
    CheckReport mark = check_order_markov(*momentum_measure(), 4);
    ok = ok && !mark.pass && !mark.witnesses.empty();
    CheckReport comp = compactness_witness(*disjoint_chains_causet(std::nullopt), 1000, 8);
    ok = ok && !comp.pass && !comp.witnesses.empty();
    MeasurePtr mix = mixture_measure({{two_chain_measure(mpq_class(1, 5)), mpq_class(1, 2)},
                                      {two_chain_measure(mpq_class(4, 5)), mpq_class(1, 2)}});
    OrderedStem b1{*mix->support()->parse_label("b1")};
    ok = ok && !essentiality_test(*mix, b1, 40, {10, 25, 50, 100, 200}, 3).report.pass;

    std::string detail = "negative controls witnessed";
    if (!cli.empty()) {
        int e1 = 0, e2 = 0, e3 = 0;
        std::string a = run_cli(cli + " simulate --measure two-chains --q 1/3 --steps 30 --replicas 4 --seed 11", e1);
        std::string b = run_cli(cli + " simulate --measure two-chains --q 1/3 --steps 30 --replicas 4 --seed 11", e2);
        ok = ok && e1 == 0 && e2 == 0 && !a.empty() && a == b;
        std::string c = run_cli(cli + " limit --family ladder --stem a1 --n-max 25 --tol 1e-6 --format csv", e1);
        std::string d = run_cli(cli + " limit --family ladder --stem a1 --n-max 25 --tol 1e-6 --format csv", e2);
        ok = ok && e1 == 0 && c == d && !c.empty();
        run_cli(cli + " check --measure momentum --property order-invariance --depth 4", e3);
        ok = ok && e3 == 1;
        run_cli(cli + " count --family nosuch", e3);
        ok = ok && e3 == 2;
        detail += "; cli byte-determinism and exit codes";
    } else {
        detail += "; cli skipped (no --cli)";
    }
    report(10, ok, detail);
}

} // namespace

int main(int argc, char** argv) {
    std::string cli;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--cli") cli = argv[i + 1];

    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10(cli);

    if (failures) std::printf("%d criterion(s) failed\n", failures);
    else std::printf("all criteria passed\n");
    return failures ? 1 : 0;
}
