#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "counting.hpp"
#include "error.hpp"
#include "measures.hpp"

namespace oim {

struct Trajectory {
    OrderedStem seq;
    unsigned long seed = 0;
    std::string measure_id;

    ElementId xi(std::size_t j) const { return seq.at(j - 1); }      // 1-based
    OrderedStem Xi(std::size_t j) const {
        return OrderedStem(seq.begin(), seq.begin() + std::min(j, seq.size()));
    }
};

struct CheckReport {
    std::string property;
    std::size_t depth = 0;
    Grade grade = Grade::exact_rational;
    std::optional<mpq_class> residual_rational; // authoritative for exact grades
    double residual_float = 0.0;
    bool pass = true;
    std::vector<std::string> witnesses;
    std::vector<std::string> notes;
};

constexpr double float_grade_tol = 1e-12;
constexpr std::size_t default_stem_budget = 100000;

namespace detail {

inline void bump(CheckReport& r, const Prob& a, const Prob& b, const std::string& witness,
                 double tol) {
    Prob d = a - b;
    if (d.is_exact()) {
        Quad q = d.exact().abs();
        if (q.sign() != 0) {
            r.pass = false;
            r.witnesses.push_back(witness);
            if (q.is_rational()) {
                if (!r.residual_rational || q.as_rational() > *r.residual_rational)
                    r.residual_rational = q.as_rational();
            } else {
                r.notes.push_back("residual lies outside the rationals");
            }
            r.residual_float = std::max(r.residual_float, q.to_double());
        }
    } else {
        double q = std::abs(d.to_double());
        r.residual_float = std::max(r.residual_float, q);
        if (q > tol) {
            r.pass = false;
            r.witnesses.push_back(witness);
        }
    }
}

inline std::string stem_string(const CausetOracle& o, const OrderedStem& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + o.label(s[i]);
    return out.empty() ? "(empty)" : out;
}

} // namespace detail

/// Visit every ordered stem of length <= depth (the empty stem included),
/// depth-first; throws ResourceLimit past the budget.
template <typename Fn>
inline void for_each_stem(const CausetOracle& o, std::size_t depth, Fn&& fn,
                          std::size_t budget = default_stem_budget,
                          std::size_t minimal_budget = 64) {
    std::size_t seen = 0;
    OrderedStem cur;
    auto rec = [&](auto&& self) -> void {
        if (++seen > budget) throw ResourceLimit("stem enumeration budget exceeded");
        fn(const_cast<const OrderedStem&>(cur));
        if (cur.size() == depth) return;
        for (ElementId b : o.minimal_after(cur, minimal_budget).elems) {
            cur.push_back(b);
            self(self);
            cur.pop_back();
        }
    };
    rec(rec);
}

/// sum_b prob(s.b) = prob(s) at every stem to the given depth.
inline CheckReport check_kolmogorov(const OIMeasure& mu, std::size_t depth,
                                    std::size_t budget = default_stem_budget) {
    if (depth == 0) throw UsageError("depth must be positive");
    CheckReport r;
    r.property = "kolmogorov";
    r.depth = depth;
    r.grade = mu.grade();
    if (r.grade <= Grade::exact_quadratic) r.residual_rational = 0; // exact checkers report a zero residual
    const auto& o = *mu.support();
    for_each_stem(o, depth - 1, [&](const OrderedStem& s) {
        auto m = o.minimal_after(s, 64);
        if (!m.exhaustive) {
            if (mu.grade() <= Grade::exact_quadratic) throw TailUnbounded();
            r.notes.push_back("truncated minimal list at " + detail::stem_string(o, s));
            return;
        }
        Prob total = Prob::rational(0);
        for (ElementId b : m.elems) {
            OrderedStem sb = s;
            sb.push_back(b);
            total = total + mu.prob(sb);
        }
        detail::bump(r, total, mu.prob(s), detail::stem_string(o, s), float_grade_tol);
    }, budget);
    return r;
}

enum class InvarianceMode { full, adjacent };

/// Every ordering of a stem set receives the same probability.
inline CheckReport check_order_invariance(const OIMeasure& mu, std::size_t depth,
                                          InvarianceMode mode,
                                          std::size_t budget = default_stem_budget) {
    CheckReport r;
    r.property = mode == InvarianceMode::full ? "order-invariance" : "order-invariance-adjacent";
    r.depth = depth;
    r.grade = mu.grade();
    if (r.grade <= Grade::exact_quadratic) r.residual_rational = 0; // exact checkers report a zero residual
    const auto& o = *mu.support();
    if (mode == InvarianceMode::adjacent) {
        for_each_stem(o, depth, [&](const OrderedStem& s) {
            for (std::size_t i = 0; i + 1 < s.size(); ++i) {
                if (o.less(s[i], s[i + 1])) continue;
                OrderedStem t = s;
                std::swap(t[i], t[i + 1]);
                detail::bump(r, mu.prob(s), mu.prob(t),
                             detail::stem_string(o, s) + " <-> " + detail::stem_string(o, t),
                             float_grade_tol);
            }
        }, budget);
        return r;
    }
    std::set<std::vector<ElementId>> seen;
    for_each_stem(o, depth, [&](const OrderedStem& s) {
        if (s.empty()) return;
        std::vector<ElementId> key = s;
        std::sort(key.begin(), key.end());
        if (!seen.insert(key).second) return;
        Restriction rest = restrict_to(o, key);
        auto exts = enumerate_extensions(rest.poset, 5040);
        for (std::size_t i = 1; i < exts.size(); ++i)
            detail::bump(r, mu.prob(exts[0]), mu.prob(exts[i]),
                         detail::stem_string(o, exts[0]) + " <-> " + detail::stem_string(o, exts[i]),
                         float_grade_tol);
    }, budget);
    return r;
}

/// Transition law depends on the stem's underlying set only.
inline CheckReport check_order_markov(const OIMeasure& mu, std::size_t depth,
                                      std::size_t budget = default_stem_budget) {
    CheckReport r;
    r.property = "order-markov";
    r.depth = depth;
    r.grade = mu.grade();
    if (r.grade <= Grade::exact_quadratic) r.residual_rational = 0; // exact checkers report a zero residual
    const auto& o = *mu.support();
    std::set<std::vector<ElementId>> seen;
    for_each_stem(o, depth, [&](const OrderedStem& s) {
        std::vector<ElementId> key = s;
        std::sort(key.begin(), key.end());
        if (!seen.insert(key).second) return;
        std::vector<OrderedStem> exts;
        if (s.empty()) {
            exts.push_back({});
        } else {
            Restriction rest = restrict_to(o, key);
            for (OrderedStem& e : enumerate_extensions(rest.poset, 5040)) {
                Prob p = mu.prob(e);
                // transitions are undefined from probability-zero stems
                if (p.is_exact() ? p.exact().sign() != 0 : p.to_double() > 0)
                    exts.push_back(std::move(e));
            }
            if (exts.empty()) return;
        }
        auto base = mu.transition(exts[0]);
        for (std::size_t i = 1; i < exts.size(); ++i) {
            auto other = mu.transition(exts[i]);
            for (auto& [e, p] : base) {
                auto it = std::find_if(other.begin(), other.end(),
                                       [&](const auto& q) { return q.first == e; });
                if (it == other.end()) continue;
                detail::bump(r, p, it->second,
                             detail::stem_string(o, exts[0]) + " vs " +
                                 detail::stem_string(o, exts[i]) + " @" + o.label(e),
                             float_grade_tol);
            }
        }
    }, budget);
    return r;
}

/// r_i(x) nondecreasing in i for maximal x.
inline CheckReport check_rank_monotonicity(const FinitePoset& p, ElementId x) {
    const std::size_t xi = p.index_of(x);
    if (!p.upper_covers(xi).empty()) throw NotMaximal();
    CheckReport r;
    r.property = "rank-monotonicity";
    r.residual_rational = 0;
    r.depth = p.n();
    auto ranks = rank_distribution(p, x);
    for (std::size_t i = 1; i < ranks.size(); ++i) {
        if (ranks[i] < ranks[i - 1]) {
            r.pass = false;
            mpq_class drop = ranks[i - 1] - ranks[i];
            if (!r.residual_rational || drop > *r.residual_rational) r.residual_rational = drop;
            r.residual_float = std::max(r.residual_float, drop.get_d());
            r.witnesses.push_back("position " + std::to_string(i + 1));
        }
    }
    return r;
}

/// r_j^W(x) <= 1/(n-j+1) over every n-element stem W containing x in which
/// x is maximal; stems with x non-maximal are skipped with a note.
inline CheckReport absence_bound_check(const CausetOracle& o, ElementId x, std::size_t j,
                                       std::size_t n,
                                       std::size_t budget = default_stem_budget) {
    if (j < 1 || j > n) throw UsageError("rank index out of range");
    CheckReport r;
    r.property = "absence-bound";
    r.residual_rational = 0;
    r.depth = n;
    mpq_class bound(1, n - j + 1);
    std::set<std::vector<ElementId>> seen;
    std::size_t tested = 0, skipped = 0;
    for_each_stem(o, n, [&](const OrderedStem& s) {
        if (s.size() != n || std::find(s.begin(), s.end(), x) == s.end()) return;
        std::vector<ElementId> key = s;
        std::sort(key.begin(), key.end());
        if (!seen.insert(key).second) return;
        Restriction rest = restrict_to(o, key);
        std::size_t xi = rest.poset.index_of(x);
        if (!rest.poset.upper_covers(xi).empty()) {
            ++skipped;
            return;
        }
        ++tested;
        mpq_class rj = rank_distribution(rest.poset, x)[j - 1];
        if (rj > bound) {
            r.pass = false;
            mpq_class excess = rj - bound;
            if (!r.residual_rational || excess > *r.residual_rational) r.residual_rational = excess;
            r.residual_float = std::max(r.residual_float, excess.get_d());
            r.witnesses.push_back(detail::stem_string(o, s));
        }
    }, budget);
    r.notes.push_back(std::to_string(tested) + " stems tested, " + std::to_string(skipped) +
                      " skipped (x not maximal)");
    if (tested == 0) r.notes.push_back("vacuous pass");
    return r;
}

/// Step-by-step draw from the measure's transition law; deterministic per
/// seed.  Truncated transition lists are renormalized.
inline Trajectory simulate(const OIMeasure& mu, std::size_t steps, unsigned long seed,
                           std::size_t minimal_budget = 64) {
    Trajectory tr;
    tr.seed = seed;
    tr.measure_id = mu.name();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < steps; ++i) {
        auto w = mu.transition(tr.seq, minimal_budget);
        if (w.empty()) break;
        double total = 0;
        for (auto& [e, p] : w) total += p.to_double();
        double z = u(rng) * total;
        ElementId pick = w.back().first;
        for (auto& [e, p] : w) {
            if (z < p.to_double()) {
                pick = e;
                break;
            }
            z -= p.to_double();
        }
        tr.seq.push_back(pick);
    }
    return tr;
}

/// Monte-Carlo estimate of prob(stem) with a 5-sigma half width.
inline std::pair<double, double> estimate_event(const OIMeasure& mu, const OrderedStem& stem,
                                                std::size_t replicas, unsigned long seed) {
    std::size_t hits = 0;
    for (std::size_t rep = 0; rep < replicas; ++rep) {
        Trajectory t = simulate(mu, stem.size(), seed + rep);
        hits += t.seq == stem;
    }
    double p = static_cast<double>(hits) / static_cast<double>(replicas);
    double half = 5.0 * std::sqrt(std::max(p * (1 - p), 1e-12) / static_cast<double>(replicas));
    return {p, half};
}

struct EssentialityReport {
    CheckReport report;
    // per k: mean of nu^k(E(stem)) over replicas, and mean |nu^k - prob|
    std::vector<std::tuple<std::size_t, double, double>> table;
};

/// Empirical essentiality surrogate: nu^k(E(stem)) along simulated
/// trajectories should approach prob(stem).  Pass = final mean absolute
/// deviation < 0.1 and smaller than the first grid point's.
inline EssentialityReport essentiality_test(const OIMeasure& mu, const OrderedStem& stem,
                                            std::size_t replicas,
                                            const std::vector<std::size_t>& k_grid,
                                            unsigned long seed) {
    if (k_grid.empty()) throw UsageError("empty k grid");
    EssentialityReport out;
    out.report.property = "essentiality";
    out.report.depth = k_grid.back();
    out.report.grade = Grade::monte_carlo;
    double target = mu.prob(stem).to_double();
    std::vector<double> mean(k_grid.size(), 0), mad(k_grid.size(), 0);
    for (std::size_t rep = 0; rep < replicas; ++rep) {
        Trajectory t = simulate(mu, k_grid.back(), seed + rep);
        for (std::size_t gi = 0; gi < k_grid.size(); ++gi) {
            OrderedStem xk = t.Xi(k_grid[gi]);
            double nu = 0.0;
            bool contains = true;
            for (ElementId e : stem)
                contains = contains && std::find(xk.begin(), xk.end(), e) != xk.end();
            if (contains) {
                std::vector<ElementId> members = xk;
                std::sort(members.begin(), members.end());
                Restriction rest = restrict_to(*mu.support(), members);
                nu = nu_uniform(rest.poset, stem).get_d();
            }
            mean[gi] += nu;
            mad[gi] += std::abs(nu - target);
        }
    }
    for (std::size_t gi = 0; gi < k_grid.size(); ++gi) {
        mean[gi] /= static_cast<double>(replicas);
        mad[gi] /= static_cast<double>(replicas);
        out.table.emplace_back(k_grid[gi], mean[gi], mad[gi]);
    }
    out.report.residual_float = mad.back();
    out.report.pass = mad.back() < 0.1 && mad.back() <= mad.front();
    if (!out.report.pass)
        out.report.witnesses.push_back("final mean |nu^k - prob| = " + std::to_string(mad.back()));
    return out;
}

/// Searches stems for a violation of the compactness condition: a stem
/// whose complement has more than K minimal elements (or a truncated,
/// possibly infinite, minimal list).
inline CheckReport compactness_witness(const CausetOracle& o, std::size_t stem_budget,
                                       std::size_t K) {
    CheckReport r;
    r.property = "compactness";
    r.depth = stem_budget;
    bool done = false;
    try {
        for_each_stem(o, stem_budget, [&](const OrderedStem& s) {
            if (done) return;
            auto m = o.minimal_after(s, K + 1);
            if (!m.exhaustive || m.elems.size() > K) {
                r.pass = false;
                done = true;
                r.witnesses.push_back(detail::stem_string(o, s) +
                                      (m.exhaustive ? " (> K minima)" : " (truncated minima)"));
            }
        }, stem_budget);
    } catch (const ResourceLimit&) {
        r.notes.push_back("stem budget exhausted");
    }
    if (r.pass) r.notes.push_back("no witness within budget");
    return r;
}

} // namespace oim
