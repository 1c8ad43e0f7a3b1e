#pragma once

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include <gmpxx.h>

#include "bitset.hpp"
#include "error.hpp"
#include "poset.hpp"

namespace oim {

inline constexpr std::size_t default_dp_budget = 10'000'000;

namespace detail {
struct U32VecHash {
    std::size_t operator()(const std::vector<std::uint32_t>& v) const {
        std::size_t h = 0x9e3779b97f4a7c15ull;
        for (std::uint32_t x : v) h = (h ^ x) * 0x100000001b3ull;
        return h;
    }
};
struct U64VecHash {
    std::size_t operator()(const std::vector<std::uint64_t>& v) const {
        std::size_t h = 0x9e3779b97f4a7c15ull;
        for (std::uint64_t x : v) h = (h ^ x) * 0x100000001b3ull;
        return h;
    }
};
} // namespace detail

/// Memoized recursion over the down-set lattice:
///   e(A) = sum over minimal b of the complement of e(A + b), e(Z) = 1.
/// Memo keys are the canonical antichain frontiers (maximal elements of the
/// down-set), which compresses state for narrow posets.
class LinearExtensionCounter {
public:
    explicit LinearExtensionCounter(const FinitePoset& p, std::size_t budget = default_dp_budget)
        : p_(p), budget_(budget) {}

    /// e(P).
    const mpz_class& total() { return from_down_set({}); }

    /// Number of linear extensions of P whose initial segment exhausts the
    /// down-set `a` (in any order), i.e. e of the complement of `a`.
    const mpz_class& from_down_set(const DownSet& a) {
        init_state(p_.to_bits(a));
        if (!p_.is_down_set_bits(in_)) throw NotADownSet();
        return count();
    }

    /// Number of linear extensions with initial segment exactly `s`.
    const mpz_class& with_prefix(const OrderedStem& s) {
        if (!p_.is_ordered_stem(s)) throw NotAnOrderedStem();
        DownSet a(s.begin(), s.end());
        std::sort(a.begin(), a.end());
        return from_down_set(a);
    }

    /// Current minimal elements of the complement, by dense index.
    const std::vector<std::uint32_t>& minimals() const { return minimals_; }

    std::size_t states() const { return memo_.size(); }

private:
    struct Undo {
        std::uint32_t b;
        std::vector<std::uint32_t> added_min;
        std::vector<std::uint32_t> removed_frontier;
    };

    void init_state(Bitset a) {
        in_ = std::move(a);
        minimals_.clear();
        frontier_.clear();
        const std::size_t n = p_.n();
        for (std::size_t v = 0; v < n; ++v) {
            if (!in_.test(v)) {
                if (p_.down_bits(v).is_subset_of(in_)) minimals_.push_back(static_cast<std::uint32_t>(v));
            } else {
                bool maximal = true;
                for (std::size_t w : p_.upper_covers(v))
                    if (in_.test(w)) { maximal = false; break; }
                if (maximal) frontier_.push_back(static_cast<std::uint32_t>(v));
            }
        }
        remaining_ = n - in_.count();
    }

    Undo push(std::uint32_t b) {
        Undo u;
        u.b = b;
        minimals_.erase(std::lower_bound(minimals_.begin(), minimals_.end(), b));
        in_.set(b);
        --remaining_;
        for (std::size_t y : p_.upper_covers(b)) {
            if (!in_.test(y) && p_.down_bits(y).is_subset_of(in_)) {
                auto yy = static_cast<std::uint32_t>(y);
                minimals_.insert(std::lower_bound(minimals_.begin(), minimals_.end(), yy), yy);
                u.added_min.push_back(yy);
            }
        }
        for (std::size_t x : p_.lower_covers(b)) {
            auto it = std::lower_bound(frontier_.begin(), frontier_.end(), static_cast<std::uint32_t>(x));
            if (it != frontier_.end() && *it == static_cast<std::uint32_t>(x)) {
                u.removed_frontier.push_back(*it);
                frontier_.erase(it);
            }
        }
        frontier_.insert(std::lower_bound(frontier_.begin(), frontier_.end(), b), b);
        return u;
    }

    void pop(const Undo& u) {
        frontier_.erase(std::lower_bound(frontier_.begin(), frontier_.end(), u.b));
        for (std::uint32_t x : u.removed_frontier)
            frontier_.insert(std::lower_bound(frontier_.begin(), frontier_.end(), x), x);
        for (std::uint32_t y : u.added_min)
            minimals_.erase(std::lower_bound(minimals_.begin(), minimals_.end(), y));
        in_.reset(u.b);
        ++remaining_;
        minimals_.insert(std::lower_bound(minimals_.begin(), minimals_.end(), u.b), u.b);
    }

    const mpz_class& count() {
        if (remaining_ == 0) return one_;
        auto it = memo_.find(frontier_);
        if (it != memo_.end()) return it->second;
        if (memo_.size() >= budget_) throw ResourceLimit("down-set lattice exceeds DP state budget");
        mpz_class total = 0;
        auto mins = minimals_; // iterate a stable copy; push/pop mutate the live list
        for (std::uint32_t b : mins) {
            Undo u = push(b);
            total += count();
            pop(u);
        }
        return memo_.emplace(frontier_, std::move(total)).first->second;
    }

    const FinitePoset& p_;
    std::size_t budget_;
    std::unordered_map<std::vector<std::uint32_t>, mpz_class, detail::U32VecHash> memo_;
    Bitset in_;
    std::vector<std::uint32_t> minimals_, frontier_;
    std::size_t remaining_ = 0;
    mpz_class one_ = 1;
};

inline mpz_class count_linear_extensions(const FinitePoset& p, std::size_t budget = default_dp_budget) {
    LinearExtensionCounter c(p, budget);
    return c.total();
}

inline mpz_class count_with_prefix(const FinitePoset& p, const OrderedStem& s,
                                   std::size_t budget = default_dp_budget) {
    LinearExtensionCounter c(p, budget);
    return c.with_prefix(s);
}

/// nu^P(E(s)): the uniform-measure probability of the initial segment `s`.
inline mpq_class nu_uniform(const FinitePoset& p, const OrderedStem& s,
                            std::size_t budget = default_dp_budget) {
    LinearExtensionCounter c(p, budget);
    mpq_class q(c.with_prefix(s), c.total());
    q.canonicalize();
    return q;
}

/// r_i(x) for i = 1..n: the probability that x takes position i in a
/// uniformly random linear extension.  Exact; sums to 1.
inline std::vector<mpq_class> rank_distribution(const FinitePoset& p, ElementId x,
                                                std::size_t budget = default_dp_budget) {
    const std::size_t xi = p.index_of(x);
    const std::size_t n = p.n();
    LinearExtensionCounter suffix(p, budget);
    const mpz_class total = suffix.total();

    // Breadth-first sweep of the down-set lattice; paths(A) = e(P_A) is the
    // number of lattice paths from the empty set to A.
    using Key = std::vector<std::uint64_t>;
    auto key_of = [n](const Bitset& b) {
        Key k((n + 63) / 64, 0);
        b.for_each([&](std::size_t v) { k[v >> 6] |= std::uint64_t(1) << (v & 63); });
        return k;
    };
    std::unordered_map<Key, std::pair<Bitset, mpz_class>, detail::U64VecHash> level;
    level.emplace(key_of(Bitset(n)), std::make_pair(Bitset(n), mpz_class(1)));
    std::vector<mpz_class> hits(n + 1, 0);
    std::size_t visited = 0;
    for (std::size_t depth = 0; depth < n; ++depth) {
        std::unordered_map<Key, std::pair<Bitset, mpz_class>, detail::U64VecHash> next;
        for (auto& [k, entry] : level) {
            auto& [bits, paths] = entry;
            if ((visited += 1) > budget) throw ResourceLimit("down-set lattice exceeds DP state budget");
            for (std::size_t v = 0; v < n; ++v) {
                if (bits.test(v) || !p.down_bits(v).is_subset_of(bits)) continue;
                Bitset nb = bits;
                nb.set(v);
                if (v == xi) {
                    DownSet a;
                    nb.for_each([&](std::size_t w) { a.push_back(p.id(w)); });
                    std::sort(a.begin(), a.end());
                    hits[depth + 1] += paths * suffix.from_down_set(a);
                } else {
                    auto [it, fresh] = next.emplace(key_of(nb), std::make_pair(nb, paths));
                    if (!fresh) it->second.second += paths;
                }
            }
        }
        level = std::move(next);
    }
    std::vector<mpq_class> r(n);
    for (std::size_t i = 1; i <= n; ++i) {
        r[i - 1] = mpq_class(hits[i], total);
        r[i - 1].canonicalize();
    }
    return r;
}

/// Exactly uniform random linear extension; deterministic for a fixed seed.
/// Candidates are ordered by ElementId before drawing.
inline OrderedStem sample_uniform_extension(const FinitePoset& p, unsigned long seed,
                                            std::size_t budget = default_dp_budget) {
    LinearExtensionCounter c(p, budget);
    gmp_randclass rng(gmp_randinit_mt);
    rng.seed(seed);
    OrderedStem out;
    DownSet a;
    while (out.size() < p.n()) {
        std::vector<ElementId> cand;
        {
            c.from_down_set(a);
            for (std::uint32_t v : c.minimals()) cand.push_back(p.id(v));
        }
        std::sort(cand.begin(), cand.end());
        std::vector<mpz_class> w;
        mpz_class sum = 0;
        for (ElementId b : cand) {
            DownSet ab = a;
            ab.insert(std::lower_bound(ab.begin(), ab.end(), b), b);
            w.push_back(c.from_down_set(ab));
            sum += w.back();
        }
        mpz_class z = rng.get_z_range(sum);
        std::size_t pick = 0;
        while (z >= w[pick]) {
            z -= w[pick];
            ++pick;
        }
        ElementId b = cand[pick];
        out.push_back(b);
        a.insert(std::lower_bound(a.begin(), a.end(), b), b);
    }
    return out;
}

/// All linear extensions, each exactly once; errors if e(P) > cap.
inline std::vector<OrderedStem> enumerate_extensions(const FinitePoset& p, std::size_t cap) {
    {
        LinearExtensionCounter c(p);
        if (c.total() > cap) throw CapExceeded();
    }
    std::vector<OrderedStem> out;
    OrderedStem cur;
    Bitset in(p.n());
    auto rec = [&](auto&& self) -> void {
        if (cur.size() == p.n()) {
            out.push_back(cur);
            return;
        }
        for (std::size_t v = 0; v < p.n(); ++v) {
            if (in.test(v) || !p.down_bits(v).is_subset_of(in)) continue;
            in.set(v);
            cur.push_back(p.id(v));
            self(self);
            cur.pop_back();
            in.reset(v);
        }
    };
    rec(rec);
    return out;
}

} // namespace oim
