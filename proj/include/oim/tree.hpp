#pragma once

#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "counting.hpp"
#include "error.hpp"
#include "measures.hpp"
#include "poset.hpp"

namespace oim {

/// Finite forest hanging below a chain element: up[j] is the index (within
/// the same forest) of element j's unique upper cover, or nullopt meaning
/// the element attaches directly to the chain element.
struct HangingForest {
    std::vector<std::optional<std::size_t>> up;
    std::size_t size() const { return up.size(); }
};

/// Downward-branching tree: reference chain x0 < x1 < ... with the finite
/// forest hang(i) attached below x_i for each i >= 1.
struct TreeSpec {
    std::function<HangingForest(std::size_t)> hang;
    // all hang(i) empty for i > last_nonempty: the t-sequence tail is
    // exactly zero and probabilities are exact rationals
    std::optional<std::size_t> last_nonempty;
    // otherwise an analytic bound on sum_{i>j} t_i (may be +infinity)
    std::function<double(std::size_t)> tail_sum_bound;
    std::string name = "tree";
};

class TreeCauset final : public CausetOracle {
public:
    explicit TreeCauset(TreeSpec spec) : spec_(std::move(spec)) {
        if (!spec_.hang) throw UsageError("tree spec needs a hanging-forest rule");
        std::lock_guard lk(mu_);
        push_chain(); // x0
    }

    const TreeSpec& spec() const { return spec_; }

    // --- structure accessors (materialize on demand) ---

    ElementId chain_id(std::size_t i) const {
        std::lock_guard lk(mu_);
        return chain_id_locked(i);
    }
    /// level of an element: i for x_i, attach level for forest elements
    std::size_t level_of(ElementId x) const {
        std::lock_guard lk(mu_);
        need(x);
        return nodes_[x].level;
    }
    bool is_chain(ElementId x) const {
        std::lock_guard lk(mu_);
        need(x);
        return nodes_[x].chain;
    }
    /// unique upper cover
    ElementId up_of(ElementId x) const {
        std::lock_guard lk(mu_);
        need(x);
        if (nodes_[x].chain) return chain_id_locked(nodes_[x].level + 1);
        return nodes_[x].parent;
    }
    /// |D(x)| without materializing the set
    std::size_t down_size(ElementId x) const {
        std::lock_guard lk(mu_);
        need(x);
        return nodes_[x].chain ? static_cast<std::size_t>(x) : nodes_[x].subtree;
    }

    bool less(ElementId a, ElementId b) const override {
        std::lock_guard lk(mu_);
        need(std::max(a, b));
        const Node& na = nodes_[a];
        const Node& nb = nodes_[b];
        if (nb.chain) return na.chain ? na.level < nb.level : na.level <= nb.level;
        if (na.level != nb.level || na.chain) return false;
        // same hanging forest: climb a's parents
        ElementId cur = a;
        while (!nodes_[cur].top_of_forest) {
            cur = nodes_[cur].parent;
            if (cur == b) return true;
        }
        return false;
    }
    DownSet down(ElementId x) const override {
        std::lock_guard lk(mu_);
        need(x);
        DownSet d;
        if (nodes_[x].chain) {
            for (ElementId e = 0; e < x; ++e) d.push_back(e); // enumeration prefix
        } else {
            for (ElementId e = forest_start_[nodes_[x].level]; e < x; ++e) {
                // climb until reaching x's child on that path or the forest top
                ElementId cur = e;
                while (!nodes_[cur].top_of_forest && nodes_[cur].parent != x)
                    cur = nodes_[cur].parent;
                if (!nodes_[cur].top_of_forest && nodes_[cur].parent == x) d.push_back(e);
            }
        }
        return d;
    }
    std::vector<ElementId> lower_covers(ElementId x) const override {
        std::lock_guard lk(mu_);
        need(x);
        std::vector<ElementId> out;
        const Node& n = nodes_[x];
        if (n.chain) {
            if (n.level > 0) {
                out.push_back(chain_id_locked(n.level - 1));
                for (ElementId e : attach_roots_[n.level]) out.push_back(e);
            }
        } else {
            out = n.children;
        }
        std::sort(out.begin(), out.end());
        return out;
    }
    std::optional<std::vector<ElementId>> upper_covers(ElementId x) const override {
        std::lock_guard lk(mu_);
        need(x);
        if (nodes_[x].chain) return std::vector<ElementId>{chain_id_locked(nodes_[x].level + 1)};
        return std::vector<ElementId>{nodes_[x].parent};
    }
    std::vector<ElementId> enumerate(std::size_t n) const override {
        std::lock_guard lk(mu_);
        while (nodes_.size() < n) push_chain();
        std::vector<ElementId> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<ElementId>(i);
        return out;
    }
    std::string label(ElementId x) const override {
        std::lock_guard lk(mu_);
        need(x);
        const Node& n = nodes_[x];
        if (n.chain) return "x" + std::to_string(n.level);
        std::size_t a = forest_size_[n.level];
        std::string s = "y" + std::to_string(n.level);
        if (a > 1) s += "_" + std::to_string(n.fidx + 1);
        return s;
    }
    std::optional<ElementId> parse_label(std::string_view name) const override {
        if (name.size() < 2) return std::nullopt;
        if (name[0] == 'x') {
            auto i = detail::parse_uint(name.substr(1));
            if (!i) return std::nullopt;
            return chain_id(*i);
        }
        if (name[0] != 'y') return std::nullopt;
        auto us = name.find('_');
        auto i = detail::parse_uint(name.substr(1, us == std::string_view::npos ? name.npos : us - 1));
        if (!i || *i == 0) return std::nullopt;
        std::size_t j = 0;
        if (us != std::string_view::npos) {
            auto v = detail::parse_uint(name.substr(us + 1));
            if (!v || *v == 0) return std::nullopt;
            j = *v - 1;
        }
        std::lock_guard lk(mu_);
        chain_id_locked(*i);
        if (j >= forest_size_[*i]) return std::nullopt;
        return static_cast<ElementId>(forest_start_[*i] + forest_emit_pos_[*i][j]);
    }
    std::string signature() const override { return "tree:" + spec_.name; }

protected:
    std::optional<std::size_t> closure_bound(const std::vector<ElementId>& stem) const override {
        if (!spec_.last_nonempty) return std::nullopt;
        std::size_t lvl = *spec_.last_nonempty;
        {
            std::lock_guard lk(mu_);
            for (ElementId x : stem) {
                need(x);
                lvl = std::max(lvl, nodes_[x].level);
            }
        }
        return static_cast<std::size_t>(chain_id(lvl + 1)) + 1;
    }

private:
    struct Node {
        bool chain = false;
        bool top_of_forest = false;         // forest element attaching to x_level
        std::size_t level = 0;
        std::size_t fidx = 0;               // original index within the hanging forest
        ElementId parent = 0;               // upper cover (forest elements only)
        std::vector<ElementId> children;    // lower covers within the forest
        std::size_t subtree = 0;            // |D(x)| for forest elements
    };

    ElementId chain_id_locked(std::size_t i) const {
        while (chain_ids_.size() <= i) push_chain();
        return chain_ids_[i];
    }

    void need(ElementId x) const {
        while (nodes_.size() <= x) push_chain();
    }

    // materialize A_{next level} then x_{next level}
    void push_chain() const {
        std::size_t i = chain_ids_.size(); // level being added
        std::vector<ElementId> roots;
        std::size_t fstart = nodes_.size();
        std::vector<std::size_t> emit_pos;
        std::size_t fsize = 0;
        if (i >= 1) {
            HangingForest f = spec_.hang(i);
            if (spec_.last_nonempty && i > *spec_.last_nonempty && f.size() > 0)
                throw UsageError("hanging forest nonempty beyond the declared last level");
            fsize = f.size();
            // emit descendants before ancestors: process by decreasing
            // down-children count remaining (stable Kahn on the down order)
            std::vector<std::vector<std::size_t>> kids(fsize);
            std::vector<std::size_t> pend(fsize, 0);
            for (std::size_t j = 0; j < fsize; ++j)
                if (f.up[j]) {
                    if (*f.up[j] >= fsize) throw UsageError("forest parent out of range");
                    kids[*f.up[j]].push_back(j);
                }
            for (std::size_t j = 0; j < fsize; ++j) pend[j] = kids[j].size();
            emit_pos.assign(fsize, 0);
            std::vector<ElementId> fid(fsize);
            std::vector<bool> emitted(fsize, false);
            for (std::size_t emittedn = 0; emittedn < fsize;) {
                for (std::size_t j = 0; j < fsize; ++j) {
                    if (emitted[j] || pend[j] != 0) continue;
                    Node n;
                    n.level = i;
                    n.fidx = j;
                    n.top_of_forest = !f.up[j].has_value();
                    std::size_t sub = 0;
                    for (std::size_t c : kids[j]) sub += nodes_[fid[c]].subtree + 1;
                    n.subtree = sub;
                    for (std::size_t c : kids[j]) n.children.push_back(fid[c]);
                    std::sort(n.children.begin(), n.children.end());
                    fid[j] = static_cast<ElementId>(nodes_.size());
                    emit_pos[j] = nodes_.size() - fstart;
                    nodes_.push_back(std::move(n));
                    emitted[j] = true;
                    ++emittedn;
                    if (f.up[j]) --pend[*f.up[j]];
                    break;
                }
            }
            for (std::size_t j = 0; j < fsize; ++j) {
                if (!f.up[j]) {
                    roots.push_back(fid[j]);
                } else {
                    nodes_[fid[j]].parent = fid[*f.up[j]];
                }
            }
        }
        Node xc;
        xc.chain = true;
        xc.level = i;
        ElementId xid = static_cast<ElementId>(nodes_.size());
        for (ElementId r : roots) nodes_[r].parent = xid;
        nodes_.push_back(std::move(xc));
        chain_ids_.push_back(xid);
        forest_start_.resize(i + 1);
        forest_size_.resize(i + 1);
        forest_emit_pos_.resize(i + 1);
        attach_roots_.resize(i + 1);
        forest_start_[i] = static_cast<ElementId>(fstart);
        forest_size_[i] = fsize;
        forest_emit_pos_[i] = std::move(emit_pos);
        attach_roots_[i] = std::move(roots);
    }

    TreeSpec spec_;
    mutable std::mutex mu_;
    mutable std::vector<Node> nodes_;
    mutable std::vector<ElementId> chain_ids_;
    mutable std::vector<ElementId> forest_start_;
    mutable std::vector<std::size_t> forest_size_;
    mutable std::vector<std::vector<std::size_t>> forest_emit_pos_;
    mutable std::vector<std::vector<ElementId>> attach_roots_;
};

inline std::shared_ptr<const TreeCauset> down_tree_causet(TreeSpec spec) {
    return std::make_shared<TreeCauset>(std::move(spec));
}

// ---- presets ---------------------------------------------------------------

inline TreeSpec bare_chain_spec() {
    TreeSpec s;
    s.hang = [](std::size_t) { return HangingForest{}; };
    s.last_nonempty = 0;
    s.name = "bare-chain";
    return s;
}

/// One pendant leaf hanging at each listed level.
inline TreeSpec pendants_at_spec(std::set<std::size_t> levels) {
    if (!levels.empty() && *levels.begin() == 0) throw UsageError("pendants start at level 1");
    TreeSpec s;
    s.hang = [levels](std::size_t i) {
        return levels.count(i) ? HangingForest{{std::nullopt}} : HangingForest{};
    };
    s.last_nonempty = levels.empty() ? 0 : *levels.rbegin();
    s.name = "pendants-at";
    for (std::size_t l : levels) s.name += "-" + std::to_string(l);
    return s;
}

/// a_i = 1 for every i, so t_i = 1/2i and the t-series diverges.
inline TreeSpec pendant_every_level_spec() {
    TreeSpec s;
    s.hang = [](std::size_t) { return HangingForest{{std::nullopt}}; };
    s.tail_sum_bound = [](std::size_t) { return std::numeric_limits<double>::infinity(); };
    s.name = "pendant-every-level";
    return s;
}

/// Pendants at powers of two: t_{2^k} < 2^{-k}, so sum_{i>j} t_i < 2/j.
inline TreeSpec pendants_at_powers_spec() {
    TreeSpec s;
    s.hang = [](std::size_t i) {
        return (i & (i - 1)) == 0 ? HangingForest{{std::nullopt}} : HangingForest{};
    };
    s.tail_sum_bound = [](std::size_t j) { return 2.0 / static_cast<double>(std::max<std::size_t>(j, 1)); };
    s.name = "pendants-at-powers";
    return s;
}

// ---- measure ---------------------------------------------------------------

class TreeMeasure final : public OIMeasure {
public:
    TreeMeasure(std::shared_ptr<const TreeCauset> tree, std::size_t horizon, double tail_err)
        : tree_(std::move(tree)), horizon_(horizon), tail_err_(tail_err) {}

    /// p_{T minus A}(x) as an exact product over levels up to the horizon;
    /// the neglected tail contributes a relative error <= tail_err.
    mpq_class truncated_p(const OrderedStem& deleted, ElementId x) const {
        std::set<ElementId> del(deleted.begin(), deleted.end());
        auto dsize = [&](ElementId e) {
            std::size_t d = tree_->down_size(e);
            std::size_t rm = 0;
            for (ElementId a : del)
                if (tree_->less(a, e)) ++rm;
            return d - rm;
        };
        mpq_class p = 1;
        ElementId prev = x;
        std::size_t top = std::max({horizon_, tree_->level_of(x) + 1,
                                    deleted.empty() ? 0 : max_level(deleted) + 1});
        for (ElementId cur = tree_->up_of(x);; cur = tree_->up_of(cur)) {
            std::size_t b = dsize(cur);
            std::size_t below_prev = dsize(prev) + 1;
            // t = |A_i(x)| / |B_i(x)| on the chain above x in T minus A
            p *= mpq_class(below_prev, b);
            prev = cur;
            if (tree_->is_chain(cur) && tree_->level_of(cur) >= top) break;
        }
        p.canonicalize();
        return p;
    }

    Prob prob(const OrderedStem& stem) const override {
        require_stem(stem);
        mpq_class p = 1;
        OrderedStem prefix;
        for (ElementId x : stem) {
            p *= truncated_p(prefix, x);
            prefix.push_back(x);
        }
        p.canonicalize();
        if (tail_err_ == 0) return Prob::rational(p);
        double v = p.get_d();
        return Prob::approximate(v, v * (static_cast<double>(stem.size()) + 1) * tail_err_);
    }
    std::vector<std::pair<ElementId, Prob>> transition(const OrderedStem& stem,
                                                       std::size_t budget = 64) const override {
        std::vector<std::pair<ElementId, Prob>> out;
        for (ElementId x : tree_->minimal_after(stem, budget).elems) {
            mpq_class p = truncated_p(stem, x);
            out.emplace_back(x, tail_err_ == 0 ? Prob::rational(p)
                                               : Prob::approximate(p.get_d(), p.get_d() * tail_err_));
        }
        return out;
    }
    Grade grade() const override { return tail_err_ == 0 ? Grade::exact_rational : Grade::floating; }
    OraclePtr support() const override { return tree_; }
    std::string name() const override { return tree_->signature(); }

private:
    std::size_t max_level(const OrderedStem& s) const {
        std::size_t m = 0;
        for (ElementId a : s) m = std::max(m, tree_->level_of(a));
        return m;
    }
    std::shared_ptr<const TreeCauset> tree_;
    std::size_t horizon_;
    double tail_err_;
};

struct TreeMeasureResult {
    bool exists = false;
    double tail_sum_bound = std::numeric_limits<double>::infinity();
    MeasurePtr measure; // present iff exists
    // per minimal element: its t_i sequence up to the evaluation horizon
    std::vector<std::pair<ElementId, std::vector<mpq_class>>> t_sequences;
};

/// Reference-chain t_i = a_i / b_i for the chain above a given minimal x.
inline std::vector<mpq_class> t_sequence(const TreeCauset& t, ElementId x, std::size_t horizon) {
    std::vector<mpq_class> out;
    ElementId prev = x;
    for (ElementId cur = t.up_of(x);; cur = t.up_of(cur)) {
        std::size_t b = t.down_size(cur);
        std::size_t a = b - (t.down_size(prev) + 1);
        mpq_class q(a, b);
        q.canonicalize();
        out.push_back(q);
        prev = cur;
        if (t.is_chain(cur) && t.level_of(cur) >= horizon) break;
    }
    return out;
}

inline TreeMeasureResult tree_measure(TreeSpec spec, double tol) {
    auto tree = down_tree_causet(spec);
    TreeMeasureResult res;
    std::size_t horizon;
    double tail_err;
    if (spec.last_nonempty) {
        res.exists = true;
        res.tail_sum_bound = 0.0;
        horizon = *spec.last_nonempty + 1;
        tail_err = 0.0;
    } else if (spec.tail_sum_bound) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t j = 1;
        for (; j <= (std::size_t(1) << 20); j *= 2) {
            best = spec.tail_sum_bound(j);
            if (best <= tol) break;
        }
        if (!std::isfinite(best)) {
            res.exists = false;
            res.tail_sum_bound = best;
            return res;
        }
        res.exists = true;
        res.tail_sum_bound = best;
        horizon = j;
        tail_err = best;
    } else {
        throw TailUnbounded();
    }
    res.measure = std::make_shared<TreeMeasure>(tree, horizon, tail_err);
    for (ElementId x : tree->minimal_after({}, 64).elems)
        res.t_sequences.emplace_back(x, t_sequence(*tree, x, std::max<std::size_t>(horizon, 4)));
    return res;
}

/// First element of the unique measure via the marking realization: mark
/// each A_i with probability t_i, take the bottom of a uniform extension of
/// the last marked forest, else x0.  Precomputes the t sequence once.
class TreeMarkingSampler {
public:
    explicit TreeMarkingSampler(TreeSpec spec, double tail_tol = 1e-9) : spec_(std::move(spec)) {
        if (!spec_.last_nonempty && !spec_.tail_sum_bound) throw TailUnbounded();
        tree_ = down_tree_causet(spec_);
        std::size_t horizon;
        if (spec_.last_nonempty) {
            horizon = *spec_.last_nonempty;
        } else {
            horizon = 1;
            while (horizon < (std::size_t(1) << 20) && spec_.tail_sum_bound(horizon) > tail_tol)
                horizon *= 2;
            if (!std::isfinite(spec_.tail_sum_bound(horizon))) throw TailUnbounded();
        }
        std::vector<mpq_class> t =
            t_sequence(*tree_, tree_->chain_id(0), std::max<std::size_t>(horizon, 1));
        for (std::size_t i = 1; i <= horizon && i <= t.size(); ++i) {
            double ti = t[i - 1].get_d();
            if (ti <= 0) continue;
            HangingForest f = spec_.hang(i);
            std::vector<std::pair<std::size_t, std::size_t>> covers;
            for (std::size_t j = 0; j < f.size(); ++j)
                if (f.up[j]) covers.emplace_back(j, *f.up[j]);
            FinitePoset forest = FinitePoset::from_covers(f.size(), covers);
            // exact distribution of the bottom element of a uniform extension
            Level lv{i, ti, {}};
            mpz_class total = count_linear_extensions(forest);
            for (ElementId m : forest.minimal_after({})) {
                mpq_class w(count_with_prefix(forest, {m}), total);
                w.canonicalize();
                std::string lbl = "y" + std::to_string(i);
                if (f.size() > 1) lbl += "_" + std::to_string(m + 1);
                lv.firsts.emplace_back(*tree_->parse_label(lbl), w.get_d());
            }
            levels_.push_back(std::move(lv));
        }
    }

    ElementId sample(unsigned long seed) const {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const Level* last_marked = nullptr;
        for (const Level& l : levels_)
            if (u(rng) < l.t) last_marked = &l;
        if (!last_marked) return tree_->chain_id(0);
        double z = u(rng);
        for (const auto& [e, w] : last_marked->firsts) {
            if (z < w) return e;
            z -= w;
        }
        return last_marked->firsts.back().first;
    }

    const std::shared_ptr<const TreeCauset>& tree() const { return tree_; }

private:
    struct Level {
        std::size_t level;
        double t;
        std::vector<std::pair<ElementId, double>> firsts;
    };
    TreeSpec spec_;
    std::shared_ptr<const TreeCauset> tree_;
    std::vector<Level> levels_;
};

inline ElementId tree_marking_sampler(const TreeSpec& spec, unsigned long seed) {
    return TreeMarkingSampler(spec).sample(seed);
}

} // namespace oim
