#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "poset.hpp"

namespace oim {

/// Lazily-evaluated infinite causal set.  Elements carry ids from a fixed
/// canonical enumeration per family; immutable after construction.
class CausetOracle {
public:
    virtual ~CausetOracle() = default;

    /// Strict order: a < b.
    virtual bool less(ElementId a, ElementId b) const = 0;

    /// D(x), the finite set of elements strictly below x, sorted.
    virtual DownSet down(ElementId x) const = 0;

    /// Lower covers of x (maximal elements of D(x)), sorted.
    virtual std::vector<ElementId> lower_covers(ElementId x) const = 0;

    /// Upper covers of x, when the family can list them.
    virtual std::optional<std::vector<ElementId>> upper_covers(ElementId x) const { return std::nullopt; }

    /// First n elements in the canonical enumeration (a natural extension).
    virtual std::vector<ElementId> enumerate(std::size_t n) const = 0;

    virtual std::string label(ElementId x) const = 0;
    virtual std::optional<ElementId> parse_label(std::string_view name) const = 0;

    /// Stable descriptor used to decide whether two oracles share a support.
    virtual std::string signature() const = 0;

    struct MinimalAfter {
        std::vector<ElementId> elems; // sorted
        bool exhaustive = true;       // false when truncated to the budget
    };

    /// Minimal elements of the complement of the stem (a down-set).  When the
    /// true answer may be infinite the list is truncated to `budget` and
    /// flagged non-exhaustive.
    MinimalAfter minimal_after(const std::vector<ElementId>& stem, std::size_t budget = 64) const {
        std::vector<ElementId> set(stem.begin(), stem.end());
        std::sort(set.begin(), set.end());
        auto contains = [&set](ElementId e) {
            return std::binary_search(set.begin(), set.end(), e);
        };
        MinimalAfter out;
        std::optional<std::size_t> bound = closure_bound(set);
        std::size_t scan = bound ? *bound : budget * 64 + 1024;
        out.exhaustive = bound.has_value();
        for (ElementId x : enumerate(scan)) {
            if (contains(x)) continue;
            DownSet d = down(x);
            bool minimal = true;
            for (ElementId y : d)
                if (!contains(y)) { minimal = false; break; }
            if (minimal) {
                out.elems.push_back(x);
                if (!out.exhaustive && out.elems.size() >= budget) break;
            }
        }
        std::sort(out.elems.begin(), out.elems.end());
        return out;
    }

    /// True when the stem set is a down-set of the causal set.
    bool is_down_set(const std::vector<ElementId>& members) const {
        std::vector<ElementId> set(members.begin(), members.end());
        std::sort(set.begin(), set.end());
        for (ElementId x : set)
            for (ElementId y : down(x))
                if (!std::binary_search(set.begin(), set.end(), y)) return false;
        return true;
    }

    bool is_ordered_stem(const OrderedStem& s) const {
        std::vector<ElementId> seen;
        for (ElementId x : s) {
            for (ElementId y : down(x))
                if (std::find(seen.begin(), seen.end(), y) == seen.end()) return false;
            if (std::find(seen.begin(), seen.end(), x) != seen.end()) return false;
            seen.push_back(x);
        }
        return true;
    }

    OrderedStem parse_stem(std::string_view csv) const {
        OrderedStem out;
        std::size_t pos = 0;
        int depth = 0;
        std::string cur;
        auto flush = [&] {
            if (cur.empty()) return;
            auto e = parse_label(cur);
            if (!e) throw UsageError("unknown element label '" + cur + "'");
            out.push_back(*e);
            cur.clear();
        };
        for (; pos < csv.size(); ++pos) {
            char c = csv[pos];
            if (c == '(') ++depth;
            if (c == ')') --depth;
            if (c == ',' && depth == 0) {
                flush();
            } else if (c != ' ') {
                cur.push_back(c);
            }
        }
        flush();
        return out;
    }

protected:
    /// An index N such that every minimal element of the stem's complement
    /// occurs among the first N enumerated elements; nullopt when no such
    /// bound exists (the family then reports non-exhaustive answers).
    virtual std::optional<std::size_t> closure_bound(const std::vector<ElementId>& stem_set) const = 0;

    static std::optional<std::size_t> closure_bound_of(const CausetOracle& o,
                                                      const std::vector<ElementId>& stem_set) {
        return o.closure_bound(stem_set);
    }
};

using OraclePtr = std::shared_ptr<const CausetOracle>;

/// Finite restriction P_Z of an oracle to a stem Z, with the id mapping.
struct Restriction {
    FinitePoset poset;               // labelled by oracle ids
    std::vector<ElementId> elements; // the stem, in canonical order
};

/// Increasing sequence of stems Z_1 subset Z_2 subset ... whose union is Z.
struct Exhaustion {
    std::string name;
    std::function<std::vector<ElementId>(std::size_t)> stage; // 1-based
};

inline Restriction restrict_to(const CausetOracle& o, std::vector<ElementId> members) {
    std::sort(members.begin(), members.end());
    if (!o.is_down_set(members)) throw NotADownSet("restriction stem is not a down-set");
    std::vector<std::pair<std::size_t, std::size_t>> covers;
    auto index = [&members](ElementId e) {
        return static_cast<std::size_t>(std::lower_bound(members.begin(), members.end(), e) - members.begin());
    };
    // Covers of a restriction to a down-set are the ambient covers: any
    // witness z with u < z < v lies in D(v), hence inside the down-set.
    for (ElementId v : members)
        for (ElementId u : o.lower_covers(v)) covers.emplace_back(index(u), index(v));
    return Restriction{FinitePoset(std::vector<ElementId>(members), covers), std::move(members)};
}

inline Restriction finite_restriction(const CausetOracle& o, const Exhaustion& sel, std::size_t n) {
    std::vector<ElementId> cur = sel.stage(n);
    if (n > 1) {
        std::vector<ElementId> prev = sel.stage(n - 1);
        std::sort(prev.begin(), prev.end());
        std::vector<ElementId> curs(cur.begin(), cur.end());
        std::sort(curs.begin(), curs.end());
        if (prev.size() >= curs.size() || !std::includes(curs.begin(), curs.end(), prev.begin(), prev.end()))
            throw NotExhaustive("exhaustion stages are not strictly increasing");
    }
    return restrict_to(o, std::move(cur));
}

/// Prefixes of the canonical enumeration, valid whenever every enumeration
/// prefix is a down-set (true for all built-in families).
inline Exhaustion prefix_exhaustion(OraclePtr o, std::size_t step = 1) {
    return Exhaustion{"prefix", [o, step](std::size_t n) { return o->enumerate(n * step); }};
}

/// The oracle for P minus a deleted stem (an up-set of the original).
class DeletedStemOracle final : public CausetOracle {
public:
    DeletedStemOracle(OraclePtr base, std::vector<ElementId> removed) : base_(std::move(base)), removed_(std::move(removed)) {
        std::sort(removed_.begin(), removed_.end());
        if (!base_->is_down_set(removed_)) throw NotADownSet("deleted stem is not a down-set");
    }

    bool less(ElementId a, ElementId b) const override { return base_->less(a, b); }
    DownSet down(ElementId x) const override { return filter(base_->down(x)); }
    std::vector<ElementId> lower_covers(ElementId x) const override {
        // Removing a down-set cannot create new covers: a witness between a
        // surviving pair survives too.
        return filter(base_->lower_covers(x));
    }
    std::optional<std::vector<ElementId>> upper_covers(ElementId x) const override {
        auto u = base_->upper_covers(x);
        if (!u) return std::nullopt;
        return *u; // upper covers are never deleted: they are above a survivor
    }
    std::vector<ElementId> enumerate(std::size_t n) const override {
        std::vector<ElementId> out;
        std::size_t scan = n + removed_.size();
        for (ElementId x : base_->enumerate(scan)) {
            if (!std::binary_search(removed_.begin(), removed_.end(), x)) out.push_back(x);
            if (out.size() == n) break;
        }
        return out;
    }
    std::string label(ElementId x) const override { return base_->label(x); }
    std::optional<ElementId> parse_label(std::string_view name) const override {
        auto e = base_->parse_label(name);
        if (e && std::binary_search(removed_.begin(), removed_.end(), *e)) return std::nullopt;
        return e;
    }
    std::string signature() const override {
        std::string s = base_->signature() + "\\{";
        for (std::size_t i = 0; i < removed_.size(); ++i)
            s += (i ? "," : "") + std::to_string(removed_[i]);
        return s + "}";
    }

protected:
    std::optional<std::size_t> closure_bound(const std::vector<ElementId>& stem_set) const override {
        std::vector<ElementId> merged(stem_set);
        merged.insert(merged.end(), removed_.begin(), removed_.end());
        std::sort(merged.begin(), merged.end());
        auto b = closure_bound_of(*base_, merged);
        if (!b) return std::nullopt;
        return *b + removed_.size();
    }

private:
    DownSet filter(DownSet d) const {
        DownSet out;
        for (ElementId x : d)
            if (!std::binary_search(removed_.begin(), removed_.end(), x)) out.push_back(x);
        return out;
    }
    OraclePtr base_;
    std::vector<ElementId> removed_;
};

inline OraclePtr delete_stem(OraclePtr o, const OrderedStem& a) {
    if (a.empty()) return o;
    if (!o->is_ordered_stem(a)) throw NotAnOrderedStem();
    return std::make_shared<DeletedStemOracle>(std::move(o), std::vector<ElementId>(a.begin(), a.end()));
}

} // namespace oim
