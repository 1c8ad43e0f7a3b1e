#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "causet.hpp"
#include "counting.hpp"
#include "error.hpp"
#include "exact.hpp"
#include "families.hpp"

namespace oim {

/// An order-invariant (candidate) measure, described through basic-event
/// probabilities of ordered stems.  prob(empty) = 1.
class OIMeasure {
public:
    virtual ~OIMeasure() = default;

    virtual Prob prob(const OrderedStem& stem) const = 0;
    virtual Grade grade() const = 0;
    virtual OraclePtr support() const = 0;
    virtual std::string name() const = 0;

    /// Transition law: minimal elements of the complement with their
    /// conditional weights.  The list is truncated when minimal_after is
    /// not exhaustive; callers needing the flag re-query the oracle.
    virtual std::vector<std::pair<ElementId, Prob>> transition(const OrderedStem& stem,
                                                               std::size_t budget = 64) const {
        Prob ps = prob(stem);
        if (ps.is_exact() ? ps.exact().sign() == 0 : ps.to_double() <= 0)
            throw ZeroProbabilityStem();
        std::vector<std::pair<ElementId, Prob>> out;
        for (ElementId x : support()->minimal_after(stem, budget).elems) {
            OrderedStem s2 = stem;
            s2.push_back(x);
            out.emplace_back(x, prob(s2) / ps);
        }
        return out;
    }

    /// Analytic probability that element b eventually appears, when known.
    virtual std::optional<Prob> appearance(ElementId) const { return std::nullopt; }

    void require_stem(const OrderedStem& s) const {
        if (!support()->is_ordered_stem(s)) throw NotAStem();
    }
};

using MeasurePtr = std::shared_ptr<const OIMeasure>;

/// The unique order-invariant measure on the ladder: any stem over Z_k has
/// probability phi^k and over W_k = Z_{k+1} minus a_k has phi^(k+1), with
/// phi = (sqrt5 - 1)/2 exact in Q(sqrt5).
class LadderMeasure final : public OIMeasure {
public:
    LadderMeasure() : oracle_(ladder_causet()) {}

    Prob prob(const OrderedStem& stem) const override {
        require_stem(stem);
        // down-sets of the ladder are exactly Z_k and W_k
        std::vector<ElementId> s = stem;
        std::sort(s.begin(), s.end());
        std::size_t k = s.size();
        bool zk = true;
        for (std::size_t i = 0; i < k; ++i) zk = zk && s[i] == i;
        if (zk) return Prob::quadratic(Quad::golden().pow(static_cast<unsigned>(k)));
        bool wk = k >= 1 && s.back() == k;
        for (std::size_t i = 0; i + 1 < k; ++i) wk = wk && s[i] == i;
        if (wk) return Prob::quadratic(Quad::golden().pow(static_cast<unsigned>(k + 1)));
        throw NotAStem("ladder stems cover Z_k or W_k only");
    }
    Grade grade() const override { return Grade::exact_quadratic; }
    OraclePtr support() const override { return oracle_; }
    std::string name() const override { return "ladder"; }
    std::optional<Prob> appearance(ElementId) const override {
        return Prob::rational(1); // faithful
    }

private:
    OraclePtr oracle_;
};

inline MeasurePtr ladder_measure() { return std::make_shared<LadderMeasure>(); }

/// A flow on an upward-branching forest: nonnegative f with
/// f(x) = sum of f over upper covers of x, and total 1 over minima.
struct FlowSpec {
    std::function<mpq_class(ElementId)> f;
    std::size_t check_depth = 64; // nodes at which the flow identity is verified
    std::string name = "flow";
};

class FlowMeasure final : public OIMeasure {
public:
    FlowMeasure(FlowSpec spec, OraclePtr forest) : spec_(std::move(spec)), forest_(std::move(forest)) {
        if (!spec_.f) throw UsageError("flow spec needs an assignment");
        for (ElementId x : forest_->enumerate(spec_.check_depth)) {
            if (forest_->lower_covers(x).size() > 1)
                throw UsageError("support is not an upward-branching forest");
            auto up = forest_->upper_covers(x);
            if (!up) throw UsageError("forest oracle must expose upper covers");
            if (up->empty()) throw HasMaximalElement();
            mpq_class fx = spec_.f(x);
            if (fx < 0) throw FlowViolation("negative flow value");
            mpq_class s = 0;
            for (ElementId y : *up) s += spec_.f(y);
            if (s != fx) throw FlowViolation("flow identity fails at " + forest_->label(x));
        }
        auto m = forest_->minimal_after({}, spec_.check_depth);
        mpq_class tot = 0;
        for (ElementId x : m.elems) tot += spec_.f(x);
        if (m.exhaustive ? tot != 1 : tot > 1)
            throw FlowViolation("flow over minimal elements does not total 1");
    }

    Prob prob(const OrderedStem& stem) const override {
        require_stem(stem);
        mpq_class p = 1;
        for (ElementId x : stem) p *= spec_.f(x);
        p.canonicalize();
        return Prob::rational(p);
    }
    // product form: the weight of minimal x after any stem is f(x)
    std::vector<std::pair<ElementId, Prob>> transition(const OrderedStem& stem,
                                                       std::size_t budget = 64) const override {
        std::vector<std::pair<ElementId, Prob>> out;
        for (ElementId x : support()->minimal_after(stem, budget).elems)
            out.emplace_back(x, Prob::rational(spec_.f(x)));
        return out;
    }
    Grade grade() const override { return Grade::exact_rational; }
    OraclePtr support() const override { return forest_; }
    std::string name() const override { return spec_.name; }
    std::optional<Prob> appearance(ElementId x) const override {
        // an element appears a.s. iff its flow is positive (given its
        // ancestors'), and never when its flow is 0
        return Prob::rational(spec_.f(x) > 0 ? 1 : 0);
    }
    mpq_class flow_at(ElementId x) const { return spec_.f(x); }

private:
    FlowSpec spec_;
    OraclePtr forest_;
};

inline MeasurePtr flow_measure(FlowSpec spec, OraclePtr forest) {
    return std::make_shared<FlowMeasure>(std::move(spec), std::move(forest));
}

/// mu_q on the two disjoint chains: B-elements carry flow q, C-elements 1-q.
inline MeasurePtr two_chain_measure(const mpq_class& q) {
    if (q < 0 || q > 1) throw UsageError("q must lie in [0,1]");
    auto chains = std::make_shared<DisjointChainsCauset>(std::optional<std::size_t>(2));
    FlowSpec s;
    s.f = [chains, q](ElementId x) { return chains->decode(x).first == 1 ? q : 1 - q; };
    s.name = "two-chains(q=" + q.get_str() + ")";
    return flow_measure(std::move(s), chains);
}

/// Polya-urn measure on the two disjoint chains: after a stem with m
/// B-elements among n, the next element is from B with weight (m+1)/(n+2).
/// Flow 1 along a single infinite chain: the point mass on its enumeration.
inline MeasurePtr chain_flow_measure() {
    return flow_measure(FlowSpec{[](ElementId) { return mpq_class(1); }, 64, "chain-flow"},
                        single_chain_forest());
}

/// Halving flow on the infinite binary tree: f(x) = 2^{-depth(x)}.
inline MeasurePtr binary_flow_measure() {
    OraclePtr o = binary_tree_forest();
    auto f = [o](ElementId x) {
        std::size_t d = o->down(x).size(); // strict down-set = ancestors = depth
        return mpq_class(mpz_class(1), mpz_class(1) << d);
    };
    return flow_measure(FlowSpec{f, 64, "binary-flow"}, o);
}

/// Flow on the comb: spine node s_i carries 2^{-i}, each tooth node below
/// s_i carries 2^{-i-1}.  Spine nodes are those with two upper covers.
inline MeasurePtr comb_flow_measure() {
    OraclePtr o = comb_forest();
    auto f = [o](ElementId x) {
        std::size_t spine = 0; // spine ancestors strictly below x
        for (ElementId a : o->down(x))
            if (o->upper_covers(a)->size() == 2) ++spine;
        return mpq_class(mpz_class(1), mpz_class(1) << spine);
    };
    return flow_measure(FlowSpec{f, 64, "comb-flow"}, o);
}

class UrnMeasure final : public OIMeasure {
public:
    UrnMeasure()
        : chains_(std::make_shared<DisjointChainsCauset>(std::optional<std::size_t>(2))) {}

    Prob prob(const OrderedStem& stem) const override {
        require_stem(stem);
        mpq_class p = 1;
        std::size_t m = 0, n = 0;
        for (ElementId x : stem) {
            bool is_b = chains_->decode(x).first == 1;
            p *= is_b ? mpq_class(m + 1, n + 2) : mpq_class(n - m + 1, n + 2);
            m += is_b ? 1 : 0;
            ++n;
        }
        p.canonicalize();
        return Prob::rational(p);
    }
    Grade grade() const override { return Grade::exact_rational; }
    OraclePtr support() const override { return chains_; }
    std::string name() const override { return "urn"; }
    std::optional<Prob> appearance(ElementId) const override { return Prob::rational(1); }

private:
    std::shared_ptr<const DisjointChainsCauset> chains_;
};

inline MeasurePtr urn_measure() { return std::make_shared<UrnMeasure>(); }

/// Convex combination of measures on a shared support.
class MixtureMeasure final : public OIMeasure {
public:
    MixtureMeasure(std::vector<std::pair<MeasurePtr, mpq_class>> parts) : parts_(std::move(parts)) {
        if (parts_.empty()) throw UsageError("mixture needs components");
        mpq_class tot = 0;
        for (auto& [mu, w] : parts_) {
            if (w < 0) throw UsageError("mixture weights must be nonnegative");
            tot += w;
            if (mu->support()->signature() != parts_[0].first->support()->signature())
                throw SupportMismatch();
        }
        if (tot != 1) throw UsageError("mixture weights must sum to 1");
    }

    Prob prob(const OrderedStem& stem) const override {
        Prob p = Prob::rational(0);
        for (auto& [mu, w] : parts_) p = p + Prob::rational(w) * mu->prob(stem);
        return p;
    }
    Grade grade() const override {
        Grade g = Grade::exact_rational;
        for (auto& [mu, w] : parts_) g = weaker(g, mu->grade());
        return g;
    }
    OraclePtr support() const override { return parts_[0].first->support(); }
    std::string name() const override {
        std::string s = "mixture(";
        for (std::size_t i = 0; i < parts_.size(); ++i)
            s += (i ? "," : "") + parts_[i].first->name();
        return s + ")";
    }
    std::optional<Prob> appearance(ElementId x) const override {
        Prob p = Prob::rational(0);
        for (auto& [mu, w] : parts_) {
            auto a = mu->appearance(x);
            if (!a) return std::nullopt;
            p = p + Prob::rational(w) * *a;
        }
        return p;
    }
    const std::vector<std::pair<MeasurePtr, mpq_class>>& parts() const { return parts_; }

private:
    std::vector<std::pair<MeasurePtr, mpq_class>> parts_;
};

inline MeasurePtr mixture_measure(std::vector<std::pair<MeasurePtr, mpq_class>> parts) {
    return std::make_shared<MixtureMeasure>(std::move(parts));
}

/// The measure induced on P minus A after conditioning on an initial stem
/// over A: prob(b) = mu.prob(a.b) / mu.prob(a).
class DerivedStemMeasure final : public OIMeasure {
public:
    DerivedStemMeasure(MeasurePtr mu, OrderedStem a) : mu_(std::move(mu)), a_(std::move(a)) {
        pa_ = mu_->prob(a_);
        if (pa_.is_exact() ? pa_.exact().sign() == 0 : pa_.to_double() <= 0)
            throw ZeroProbabilityStem();
        support_ = delete_stem(mu_->support(), a_);
        check_reorder_independence();
    }

    Prob prob(const OrderedStem& stem) const override {
        if (!support_->is_ordered_stem(stem)) throw NotAStem();
        OrderedStem full = a_;
        full.insert(full.end(), stem.begin(), stem.end());
        return mu_->prob(full) / pa_;
    }
    Grade grade() const override { return mu_->grade(); }
    OraclePtr support() const override { return support_; }
    std::string name() const override { return mu_->name() + "/stem"; }
    std::optional<Prob> appearance(ElementId x) const override { return mu_->appearance(x); }

private:
    void check_reorder_independence() const {
        if (a_.size() < 2 || a_.size() > 7) return;
        Restriction r = restrict_to(*mu_->support(), [&] {
            auto s = a_;
            std::sort(s.begin(), s.end());
            return s;
        }());
        auto exts = enumerate_extensions(r.poset, 64);
        for (const OrderedStem& alt : exts) {
            if (!(mu_->prob(alt) == pa_))
                throw NotAStem("conditioning stem probability depends on its ordering");
        }
    }

    MeasurePtr mu_;
    OrderedStem a_;
    Prob pa_;
    OraclePtr support_;
};

inline MeasurePtr derived_stem_measure(MeasurePtr mu, OrderedStem a) {
    return std::make_shared<DerivedStemMeasure>(std::move(mu), std::move(a));
}

/// Mixture component conditioned on whether element b ever appears.
struct AppearanceSplit {
    MeasurePtr plus;  // null when appearance prob is 0
    MeasurePtr minus; // null when appearance prob is 1
    Prob appearance;
};

/// Exact only when the measure (or each mixture component) reports an
/// analytic 0/1 appearance probability for b.
inline AppearanceSplit condition_on_appearance(const MeasurePtr& mu, ElementId b) {
    auto is01 = [](const Prob& p) {
        return p.is_exact() && (p.exact() == Quad(0) || p.exact() == Quad(1));
    };
    if (auto a = mu->appearance(b); a && is01(*a)) {
        bool present = a->exact() == Quad(1);
        return AppearanceSplit{present ? mu : nullptr, present ? nullptr : mu, *a};
    }
    if (auto mix = std::dynamic_pointer_cast<const MixtureMeasure>(mu)) {
        std::vector<std::pair<MeasurePtr, mpq_class>> plus, minus;
        mpq_class wp = 0, wm = 0;
        for (auto& [m, w] : mix->parts()) {
            auto a = m->appearance(b);
            if (!a || !is01(*a)) throw InconclusiveAtHorizon();
            if (a->exact() == Quad(1)) {
                plus.emplace_back(m, w);
                wp += w;
            } else {
                minus.emplace_back(m, w);
                wm += w;
            }
        }
        for (auto& [m, w] : plus) w /= wp;
        for (auto& [m, w] : minus) w /= wm;
        return AppearanceSplit{wp > 0 ? mixture_measure(std::move(plus)) : nullptr,
                               wm > 0 ? mixture_measure(std::move(minus)) : nullptr,
                               Prob::rational(wp)};
    }
    throw InconclusiveAtHorizon();
}

// ---- exhaustion limits -----------------------------------------------------

enum class Verdict { converged, oscillating, inconclusive };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::converged: return "converged";
        case Verdict::oscillating: return "oscillating";
        default: return "inconclusive";
    }
}

struct ConvergenceReport {
    // (stage index, exact nu^{Z_n}(E(stem))) for each evaluated stage
    std::vector<std::pair<std::size_t, mpq_class>> seq;
    Verdict verdict = Verdict::inconclusive;
    double limit = 0.0; // last value when converged
    double tol = 0.0;
    double gap = 0.0;   // |even mean - odd mean| when oscillating
    std::string exhaustion;
};

/// Evaluates nu^{Z_n}(E(stem)) exactly along an exhaustion and classifies
/// the sequence: converged when the last 5 values have spread <= tol;
/// oscillating when the even/odd means of the last 6 differ by > 10*tol.
inline ConvergenceReport limit_measure_eval(const CausetOracle& o, const Exhaustion& ex,
                                            const OrderedStem& stem, std::size_t n_max,
                                            double tol,
                                            std::size_t budget = default_dp_budget) {
    ConvergenceReport rep;
    rep.exhaustion = ex.name;
    rep.tol = tol;
    std::vector<ElementId> last_stage;
    for (std::size_t n = 1; n <= n_max; ++n) {
        std::vector<ElementId> stage = ex.stage(n);
        if (stage == last_stage) continue; // finite families stall at the top
        last_stage = stage;
        std::vector<ElementId> sorted(stage);
        std::sort(sorted.begin(), sorted.end());
        bool contains = true;
        for (ElementId e : stem)
            contains = contains && std::binary_search(sorted.begin(), sorted.end(), e);
        if (!contains) continue;
        Restriction r = restrict_to(o, stage);
        rep.seq.emplace_back(n, nu_uniform(r.poset, stem, budget));
    }
    auto val = [&](std::size_t i) { return rep.seq[i].second.get_d(); };
    if (rep.seq.size() >= 6) {
        double ge = 0, go = 0;
        for (std::size_t k = 0; k < 6; ++k) {
            std::size_t i = rep.seq.size() - 6 + k;
            (rep.seq[i].first % 2 == 0 ? ge : go) += val(i);
        }
        rep.gap = std::abs(ge - go) / 3.0;
    }
    if (rep.seq.size() >= 5) {
        double lo = val(rep.seq.size() - 5), hi = lo;
        for (std::size_t i = rep.seq.size() - 5; i < rep.seq.size(); ++i) {
            lo = std::min(lo, val(i));
            hi = std::max(hi, val(i));
        }
        if (hi - lo <= tol) {
            rep.verdict = Verdict::converged;
            rep.limit = val(rep.seq.size() - 1);
            return rep;
        }
    }
    if (rep.seq.size() >= 6 && rep.gap > 10 * tol) rep.verdict = Verdict::oscillating;
    return rep;
}

// ---- negative controls ----------------------------------------------------

/// Wraps a measure but scales the probability of one chosen stem; breaks
/// Kolmogorov consistency at the parent stem.
class PerturbedMeasure final : public OIMeasure {
public:
    PerturbedMeasure(MeasurePtr mu, OrderedStem where, mpq_class factor)
        : mu_(std::move(mu)), where_(std::move(where)), factor_(std::move(factor)) {}

    Prob prob(const OrderedStem& stem) const override {
        Prob p = mu_->prob(stem);
        if (stem == where_) p = p * Prob::rational(factor_);
        return p;
    }
    Grade grade() const override { return mu_->grade(); }
    OraclePtr support() const override { return mu_->support(); }
    std::string name() const override { return mu_->name() + "+perturbed"; }

private:
    MeasurePtr mu_;
    OrderedStem where_;
    mpq_class factor_;
};

inline MeasurePtr perturbed_measure(MeasurePtr mu, OrderedStem where, mpq_class factor) {
    return std::make_shared<PerturbedMeasure>(std::move(mu), std::move(where), std::move(factor));
}

/// Point mass on the single natural extension produced by a deterministic
/// selection rule (default: smallest-id minimal element).  Order-Markov,
/// but not order-invariant when the causet has an incomparable pair.
class PointMassMeasure final : public OIMeasure {
public:
    explicit PointMassMeasure(OraclePtr o,
                              std::function<ElementId(const CausetOracle&, const OrderedStem&)> pick = {})
        : oracle_(std::move(o)), pick_(std::move(pick)) {
        if (!pick_)
            pick_ = [](const CausetOracle& c, const OrderedStem& s) {
                auto m = c.minimal_after(s);
                return *std::min_element(m.elems.begin(), m.elems.end());
            };
    }

    Prob prob(const OrderedStem& stem) const override {
        require_stem(stem);
        OrderedStem prefix;
        for (ElementId x : stem) {
            if (pick_(*oracle_, prefix) != x) return Prob::rational(0);
            prefix.push_back(x);
        }
        return Prob::rational(1);
    }
    std::vector<std::pair<ElementId, Prob>> transition(const OrderedStem& stem,
                                                       std::size_t budget = 64) const override {
        if (prob(stem).exact().sign() == 0) throw ZeroProbabilityStem();
        ElementId next = pick_(*oracle_, stem);
        std::vector<std::pair<ElementId, Prob>> out;
        for (ElementId x : oracle_->minimal_after(stem, budget).elems)
            out.emplace_back(x, Prob::rational(x == next ? 1 : 0));
        return out;
    }
    Grade grade() const override { return Grade::exact_rational; }
    OraclePtr support() const override { return oracle_; }
    std::string name() const override { return "point-mass"; }

private:
    OraclePtr oracle_;
    std::function<ElementId(const CausetOracle&, const OrderedStem&)> pick_;
};

inline MeasurePtr point_mass_measure(OraclePtr o) {
    return std::make_shared<PointMassMeasure>(std::move(o));
}

/// Order-dependent kernel on the two disjoint chains: prefers to continue
/// the chain of the most recent element with weight 3/4.  Not order-Markov.
class MomentumMeasure final : public OIMeasure {
public:
    MomentumMeasure()
        : chains_(std::make_shared<DisjointChainsCauset>(std::optional<std::size_t>(2))) {}

    Prob prob(const OrderedStem& stem) const override {
        require_stem(stem);
        mpq_class p = 1;
        for (std::size_t i = 0; i < stem.size(); ++i) {
            bool is_b = chains_->decode(stem[i]).first == 1;
            if (i == 0) {
                p *= mpq_class(1, 2);
            } else {
                bool last_b = chains_->decode(stem[i - 1]).first == 1;
                p *= (is_b == last_b) ? mpq_class(3, 4) : mpq_class(1, 4);
            }
        }
        p.canonicalize();
        return Prob::rational(p);
    }
    Grade grade() const override { return Grade::exact_rational; }
    OraclePtr support() const override { return chains_; }
    std::string name() const override { return "momentum"; }

private:
    std::shared_ptr<const DisjointChainsCauset> chains_;
};

inline MeasurePtr momentum_measure() { return std::make_shared<MomentumMeasure>(); }

} // namespace oim
