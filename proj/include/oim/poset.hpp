#pragma once

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bitset.hpp"
#include "error.hpp"

namespace oim {

/// Opaque non-negative element label, unique within one poset or oracle.
using ElementId = std::uint32_t;

/// A downward-closed subset, kept as a sorted set of labels.
using DownSet = std::vector<ElementId>;

/// A linear extension of a down-set; seq[i] is minimal in the poset minus
/// the preceding entries.
using OrderedStem = std::vector<ElementId>;

/// Finite labelled strict poset given by covers, with reachability closure.
class FinitePoset {
public:
    FinitePoset() = default;

    /// Build from dense indices 0..n-1 and cover pairs (lower, upper).
    /// Redundant covers are reduced; cycles are errors.
    static FinitePoset from_covers(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& covers) {
        std::vector<ElementId> ids(n);
        for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<ElementId>(i);
        return FinitePoset(std::move(ids), covers);
    }

    FinitePoset(std::vector<ElementId> ids, const std::vector<std::pair<std::size_t, std::size_t>>& covers_by_index)
        : ids_(std::move(ids)) {
        const std::size_t n = ids_.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (!idx_.emplace(ids_[i], i).second) throw Error("duplicate element label");
        }
        std::vector<std::vector<std::size_t>> up(n), dn(n);
        for (auto [lo, hi] : covers_by_index) {
            if (lo >= n || hi >= n) throw UnknownElement();
            if (lo == hi) throw CycleDetected();
            up[lo].push_back(hi);
            dn[hi].push_back(lo);
        }
        // Kahn toposort; detects cycles.
        std::vector<std::size_t> indeg(n), order;
        order.reserve(n);
        for (std::size_t v = 0; v < n; ++v) indeg[v] = dn[v].size();
        for (std::size_t v = 0; v < n; ++v)
            if (indeg[v] == 0) order.push_back(v);
        for (std::size_t h = 0; h < order.size(); ++h) {
            for (std::size_t w : up[order[h]])
                if (--indeg[w] == 0) order.push_back(w);
        }
        if (order.size() != n) throw CycleDetected();
        // Reachability closure along the toposort.
        down_.assign(n, Bitset(n));
        for (std::size_t v : order) {
            for (std::size_t u : dn[v]) {
                down_[v].or_with(down_[u]);
                down_[v].set(u);
            }
        }
        // Transitive reduction: keep only the maximal elements of each down-set.
        dcov_.assign(n, {});
        ucov_.assign(n, {});
        Bitset shadow(n);
        for (std::size_t v = 0; v < n; ++v) {
            shadow = Bitset(n);
            down_[v].for_each([&](std::size_t u) { shadow.or_with(down_[u]); });
            down_[v].for_each([&](std::size_t u) {
                if (!shadow.test(u)) {
                    dcov_[v].push_back(u);
                    ucov_[u].push_back(v);
                }
            });
        }
        for (auto& c : dcov_) std::sort(c.begin(), c.end());
        for (auto& c : ucov_) std::sort(c.begin(), c.end());
    }

    std::size_t n() const { return ids_.size(); }
    const std::vector<ElementId>& ids() const { return ids_; }
    ElementId id(std::size_t index) const { return ids_[index]; }

    std::size_t index_of(ElementId e) const {
        auto it = idx_.find(e);
        if (it == idx_.end()) throw UnknownElement("unknown element " + std::to_string(e));
        return it->second;
    }
    bool contains(ElementId e) const { return idx_.count(e) != 0; }

    bool less_index(std::size_t i, std::size_t j) const { return down_[j].test(i); }
    bool less(ElementId a, ElementId b) const { return less_index(index_of(a), index_of(b)); }

    const Bitset& down_bits(std::size_t j) const { return down_[j]; }
    const std::vector<std::size_t>& lower_covers(std::size_t j) const { return dcov_[j]; }
    const std::vector<std::size_t>& upper_covers(std::size_t j) const { return ucov_[j]; }

    std::vector<std::pair<ElementId, ElementId>> covers() const {
        std::vector<std::pair<ElementId, ElementId>> out;
        for (std::size_t v = 0; v < n(); ++v)
            for (std::size_t u : dcov_[v]) out.emplace_back(ids_[u], ids_[v]);
        std::sort(out.begin(), out.end());
        return out;
    }

    Bitset to_bits(const std::vector<ElementId>& members) const {
        Bitset b(n());
        for (ElementId e : members) b.set(index_of(e));
        return b;
    }

    bool is_down_set_bits(const Bitset& a) const {
        bool ok = true;
        a.for_each([&](std::size_t v) {
            if (!down_[v].is_subset_of(a)) ok = false;
        });
        return ok;
    }
    bool is_down_set(const std::vector<ElementId>& members) const {
        return is_down_set_bits(to_bits(members));
    }

    bool is_ordered_stem(const OrderedStem& s) const {
        Bitset a(n());
        for (ElementId e : s) {
            std::size_t v = index_of(e);
            if (a.test(v) || !down_[v].is_subset_of(a)) return false;
            a.set(v);
        }
        return true;
    }

    /// Minimal elements of the poset restricted to the complement of `a`.
    std::vector<ElementId> minimal_after(const DownSet& a) const {
        Bitset bits = to_bits(a);
        if (!is_down_set_bits(bits)) throw NotADownSet();
        std::vector<ElementId> out;
        for (std::size_t v = 0; v < n(); ++v)
            if (!bits.test(v) && down_[v].is_subset_of(bits)) out.push_back(ids_[v]);
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    std::vector<ElementId> ids_;
    std::unordered_map<ElementId, std::size_t> idx_;
    std::vector<Bitset> down_;
    std::vector<std::vector<std::size_t>> dcov_, ucov_;
};

/// Build a poset from declared labels and labelled cover pairs.
inline FinitePoset build_finite_poset(const std::vector<ElementId>& elements,
                                      const std::vector<std::pair<ElementId, ElementId>>& covers) {
    std::unordered_map<ElementId, std::size_t> pos;
    for (std::size_t i = 0; i < elements.size(); ++i) pos.emplace(elements[i], i);
    std::vector<std::pair<std::size_t, std::size_t>> by_index;
    by_index.reserve(covers.size());
    for (auto [lo, hi] : covers) {
        auto a = pos.find(lo), b = pos.find(hi);
        if (a == pos.end() || b == pos.end()) throw UnknownElement();
        by_index.emplace_back(a->second, b->second);
    }
    return FinitePoset(std::vector<ElementId>(elements), by_index);
}

inline FinitePoset chain_poset(std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> covers;
    for (std::size_t i = 0; i + 1 < n; ++i) covers.emplace_back(i, i + 1);
    return FinitePoset::from_covers(n, covers);
}

inline FinitePoset antichain_poset(std::size_t n) {
    return FinitePoset::from_covers(n, {});
}

} // namespace oim
