#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "causet.hpp"
#include "error.hpp"
#include "poset.hpp"

namespace oim {

namespace detail {
inline std::optional<unsigned long> parse_uint(std::string_view s) {
    if (s.empty()) return std::nullopt;
    unsigned long v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return std::nullopt;
        v = v * 10 + static_cast<unsigned long>(c - '0');
    }
    return v;
}
} // namespace detail

/// Example 1 ladder: Z = {a1, a2, ...} with a_j > a_i iff j > i+1.
/// Canonical enumeration: id i is a_{i+1}.
class LadderCauset final : public CausetOracle {
public:
    bool less(ElementId a, ElementId b) const override { return b > a + 1; }
    DownSet down(ElementId x) const override {
        DownSet d;
        for (ElementId i = 0; i + 1 < x; ++i) d.push_back(i);
        return d;
    }
    std::vector<ElementId> lower_covers(ElementId x) const override {
        std::vector<ElementId> c;
        if (x >= 3) c.push_back(x - 3);
        if (x >= 2) c.push_back(x - 2);
        return c;
    }
    std::optional<std::vector<ElementId>> upper_covers(ElementId x) const override {
        return std::vector<ElementId>{x + 2, x + 3};
    }
    std::vector<ElementId> enumerate(std::size_t n) const override {
        std::vector<ElementId> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<ElementId>(i);
        return out;
    }
    std::string label(ElementId x) const override { return "a" + std::to_string(x + 1); }
    std::optional<ElementId> parse_label(std::string_view name) const override {
        if (name.size() < 2 || name[0] != 'a') return std::nullopt;
        auto v = detail::parse_uint(name.substr(1));
        if (!v || *v == 0) return std::nullopt;
        return static_cast<ElementId>(*v - 1);
    }
    std::string signature() const override { return "ladder"; }

protected:
    std::optional<std::size_t> closure_bound(const std::vector<ElementId>& stem) const override {
        std::size_t m = stem.empty() ? 0 : (*std::max_element(stem.begin(), stem.end()) + 1);
        return m + 3;
    }
};

inline OraclePtr ladder_causet() { return std::make_shared<LadderCauset>(); }

/// Disjoint union of k infinite chains (k finite, or countably many).
/// Finite k: id = (level-1)*k + (chain-1).  Infinite: diagonal enumeration.
class DisjointChainsCauset final : public CausetOracle {
public:
    explicit DisjointChainsCauset(std::optional<std::size_t> k) : k_(k) {
        if (k_ && *k_ == 0) throw UsageError("need at least one chain");
    }

    // chain index and level are 1-based
    std::pair<std::size_t, std::size_t> decode(ElementId x) const {
        if (k_) return {static_cast<std::size_t>(x) % *k_ + 1, static_cast<std::size_t>(x) / *k_ + 1};
        // diagonal d = chain + level, enumerated d = 2, 3, ...; within a
        // diagonal chains go in increasing order
        std::size_t n = x, d = 2;
        while (n >= d - 1) {
            n -= d - 1;
            ++d;
        }
        return {n + 1, d - (n + 1)};
    }
    ElementId encode(std::size_t chain, std::size_t level) const {
        if (k_) return static_cast<ElementId>((level - 1) * *k_ + (chain - 1));
        std::size_t d = chain + level;
        std::size_t base = (d - 2) * (d - 1) / 2;
        return static_cast<ElementId>(base + chain - 1);
    }

    bool less(ElementId a, ElementId b) const override {
        auto [ca, la] = decode(a);
        auto [cb, lb] = decode(b);
        return ca == cb && la < lb;
    }
    DownSet down(ElementId x) const override {
        auto [c, l] = decode(x);
        DownSet d;
        for (std::size_t i = 1; i < l; ++i) d.push_back(encode(c, i));
        std::sort(d.begin(), d.end());
        return d;
    }
    std::vector<ElementId> lower_covers(ElementId x) const override {
        auto [c, l] = decode(x);
        if (l == 1) return {};
        return {encode(c, l - 1)};
    }
    std::optional<std::vector<ElementId>> upper_covers(ElementId x) const override {
        auto [c, l] = decode(x);
        return std::vector<ElementId>{encode(c, l + 1)};
    }
    std::vector<ElementId> enumerate(std::size_t n) const override {
        std::vector<ElementId> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<ElementId>(i);
        return out;
    }
    std::string label(ElementId x) const override {
        auto [c, l] = decode(x);
        if (k_ && *k_ <= 24) return std::string(1, static_cast<char>('b' + c - 1)) + std::to_string(l);
        return "c" + std::to_string(c) + "_" + std::to_string(l);
    }
    std::optional<ElementId> parse_label(std::string_view name) const override {
        if (k_ && *k_ <= 24) {
            if (name.size() < 2) return std::nullopt;
            char ch = name[0];
            if (ch < 'b' || ch >= static_cast<char>('b' + *k_)) return std::nullopt;
            auto l = detail::parse_uint(name.substr(1));
            if (!l || *l == 0) return std::nullopt;
            return encode(static_cast<std::size_t>(ch - 'b' + 1), *l);
        }
        auto us = name.find('_');
        if (us == std::string_view::npos || name.empty() || name[0] != 'c') return std::nullopt;
        auto c = detail::parse_uint(name.substr(1, us - 1));
        auto l = detail::parse_uint(name.substr(us + 1));
        if (!c || !l || *c == 0 || *l == 0) return std::nullopt;
        return encode(*c, *l);
    }
    std::string signature() const override {
        return "chains:" + (k_ ? std::to_string(*k_) : std::string("inf"));
    }
    std::optional<std::size_t> chain_count() const { return k_; }

protected:
    std::optional<std::size_t> closure_bound(const std::vector<ElementId>& stem) const override {
        if (!k_) return std::nullopt;
        return (stem.size() + 1) * *k_;
    }

private:
    std::optional<std::size_t> k_;
};

inline OraclePtr disjoint_chains_causet(std::optional<std::size_t> k) {
    return std::make_shared<DisjointChainsCauset>(k);
}

/// Upward-branching forest given by a branching rule: number of roots
/// (nullopt = countably many) and, per node, its number of upper covers.
/// Node addresses are child-index paths; labels default to "r<i>_<j>...".
struct ForestSpec {
    std::optional<std::size_t> roots = 1;
    std::function<std::size_t(const std::vector<std::size_t>& path)> children; // >= 0, finite
    std::function<std::string(const std::vector<std::size_t>& path)> label;   // optional
    std::string name = "forest";
};

class ForestCauset final : public CausetOracle {
public:
    explicit ForestCauset(ForestSpec spec) : spec_(std::move(spec)) {
        if (!spec_.children) throw UsageError("forest spec needs a branching rule");
    }

    bool less(ElementId a, ElementId b) const override {
        std::lock_guard lk(mu_);
        need(std::max(a, b) + 1);
        // upward-branching: a < b iff a lies on the unique downward path of b
        ElementId cur = b;
        while (true) {
            auto p = nodes_[cur].parent;
            if (!p) return false;
            if (*p == a) return true;
            cur = *p;
        }
    }
    DownSet down(ElementId x) const override {
        std::lock_guard lk(mu_);
        need(x + 1);
        DownSet d;
        ElementId cur = x;
        while (auto p = nodes_[cur].parent) {
            d.push_back(*p);
            cur = *p;
        }
        std::sort(d.begin(), d.end());
        return d;
    }
    std::vector<ElementId> lower_covers(ElementId x) const override {
        std::lock_guard lk(mu_);
        need(x + 1);
        if (auto p = nodes_[x].parent) return {*p};
        return {};
    }
    std::optional<std::vector<ElementId>> upper_covers(ElementId x) const override {
        std::lock_guard lk(mu_);
        need(x + 1);
        expand(x);
        return nodes_[x].children;
    }
    std::vector<ElementId> enumerate(std::size_t n) const override {
        std::lock_guard lk(mu_);
        need(n);
        std::vector<ElementId> out;
        for (std::size_t i = 0; i < std::min(n, nodes_.size()); ++i)
            out.push_back(static_cast<ElementId>(i));
        return out;
    }
    std::string label(ElementId x) const override {
        std::lock_guard lk(mu_);
        need(x + 1);
        return label_of(nodes_[x].path);
    }
    std::optional<ElementId> parse_label(std::string_view name) const override {
        std::lock_guard lk(mu_);
        need(1);
        for (std::size_t i = 0; i < nodes_.size() || grow_one(); ++i) {
            if (i >= nodes_.size()) break;
            if (label_of(nodes_[i].path) == name) return static_cast<ElementId>(i);
            if (i > 100000) break;
        }
        return std::nullopt;
    }
    std::string signature() const override { return "forest:" + spec_.name; }

    /// True when some node among the first `scan` has no upper cover.
    bool has_maximal_among(std::size_t scan) const {
        std::lock_guard lk(mu_);
        need(scan);
        for (std::size_t i = 0; i < std::min(scan, nodes_.size()); ++i) {
            expand(static_cast<ElementId>(i));
            if (nodes_[i].children.empty()) return true;
        }
        return false;
    }

protected:
    std::optional<std::size_t> closure_bound(const std::vector<ElementId>& stem) const override {
        if (!spec_.roots) return std::nullopt;
        std::lock_guard lk(mu_);
        std::size_t hi = 0;
        for (std::size_t r = 0; r < *spec_.roots; ++r) {
            need(r + 1);
            hi = std::max<std::size_t>(hi, r + 1);
        }
        for (ElementId x : stem) {
            need(x + 1);
            expand(x);
            for (ElementId c : nodes_[x].children) hi = std::max<std::size_t>(hi, c + 1);
        }
        return hi;
    }

private:
    struct Node {
        std::optional<ElementId> parent;
        std::vector<std::size_t> path;
        std::vector<ElementId> children;
        bool expanded = false;
    };

    std::string label_of(const std::vector<std::size_t>& path) const {
        if (spec_.label) return spec_.label(path);
        std::string s = "r" + std::to_string(path[0] + 1);
        for (std::size_t i = 1; i < path.size(); ++i) s += "_" + std::to_string(path[i] + 1);
        return s;
    }

    void expand(ElementId x) const {
        if (nodes_[x].expanded) return;
        nodes_[x].expanded = true;
        std::size_t c = spec_.children(nodes_[x].path);
        for (std::size_t j = 0; j < c; ++j) {
            Node child;
            child.parent = x;
            child.path = nodes_[x].path;
            child.path.push_back(j);
            ElementId id = static_cast<ElementId>(nodes_.size());
            nodes_.push_back(std::move(child)); // may reallocate nodes_
            nodes_[x].children.push_back(id);
            pending_.push_back(id);
        }
    }

    // Fair scheduler: interleave introducing new roots with expanding the
    // oldest unexpanded node, so every element is eventually enumerated.
    bool grow_one() const {
        bool more_roots = !spec_.roots || roots_added_ < *spec_.roots;
        // finite root sets are enumerated up front; countably many roots
        // are interleaved fairly with expansions
        bool add_root_now = more_roots &&
                            (spec_.roots || pending_.empty() || (ticks_++ % 2 == 0));
        if (add_root_now) {
            Node nd;
            nd.path = {roots_added_++};
            pending_.push_back(static_cast<ElementId>(nodes_.size()));
            nodes_.push_back(std::move(nd));
            return true;
        }
        if (pending_.empty()) return false;
        ElementId x = pending_.front();
        pending_.pop_front();
        std::size_t before = nodes_.size();
        expand(x);
        return nodes_.size() > before || !pending_.empty() || more_roots;
    }

    void need(std::size_t n) const {
        std::size_t guard = 0;
        while (nodes_.size() < n) {
            if (!grow_one() || ++guard > n * 4 + 1000) break;
        }
        if (nodes_.size() < n)
            throw ResourceLimit("forest has fewer elements than requested");
    }

    ForestSpec spec_;
    mutable std::mutex mu_;
    mutable std::vector<Node> nodes_;
    mutable std::deque<ElementId> pending_;
    mutable std::size_t roots_added_ = 0;
    mutable std::size_t ticks_ = 0;
};

inline std::shared_ptr<const ForestCauset> forest_causet(ForestSpec spec) {
    return std::make_shared<ForestCauset>(std::move(spec));
}

/// The 2-d grid poset on N x N: (a,b) <= (c,d) iff a<=c and b<=d.
/// Canonical enumeration is by diagonals; labels are "(row,col)".
class GridCauset final : public CausetOracle {
public:
    static std::pair<std::size_t, std::size_t> decode(ElementId x) {
        std::size_t d = 0;
        std::size_t n = x;
        while (n >= d + 1) {
            n -= d + 1;
            ++d;
        }
        return {n, d - n}; // (row, col)
    }
    static ElementId encode(std::size_t r, std::size_t c) {
        std::size_t d = r + c;
        return static_cast<ElementId>(d * (d + 1) / 2 + r);
    }

    bool less(ElementId a, ElementId b) const override {
        auto [ra, ca] = decode(a);
        auto [rb, cb] = decode(b);
        return ra <= rb && ca <= cb && a != b;
    }
    DownSet down(ElementId x) const override {
        auto [r, c] = decode(x);
        DownSet d;
        for (std::size_t i = 0; i <= r; ++i)
            for (std::size_t j = 0; j <= c; ++j)
                if (i != r || j != c) d.push_back(encode(i, j));
        std::sort(d.begin(), d.end());
        return d;
    }
    std::vector<ElementId> lower_covers(ElementId x) const override {
        auto [r, c] = decode(x);
        std::vector<ElementId> out;
        if (r > 0) out.push_back(encode(r - 1, c));
        if (c > 0) out.push_back(encode(r, c - 1));
        std::sort(out.begin(), out.end());
        return out;
    }
    std::optional<std::vector<ElementId>> upper_covers(ElementId x) const override {
        auto [r, c] = decode(x);
        std::vector<ElementId> out{encode(r + 1, c), encode(r, c + 1)};
        std::sort(out.begin(), out.end());
        return out;
    }
    std::vector<ElementId> enumerate(std::size_t n) const override {
        std::vector<ElementId> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<ElementId>(i);
        return out;
    }
    std::string label(ElementId x) const override {
        auto [r, c] = decode(x);
        return "(" + std::to_string(r) + "," + std::to_string(c) + ")";
    }
    std::optional<ElementId> parse_label(std::string_view name) const override {
        if (name.size() < 5 || name.front() != '(' || name.back() != ')') return std::nullopt;
        auto comma = name.find(',');
        if (comma == std::string_view::npos) return std::nullopt;
        auto r = detail::parse_uint(name.substr(1, comma - 1));
        auto c = detail::parse_uint(name.substr(comma + 1, name.size() - comma - 2));
        if (!r || !c) return std::nullopt;
        return encode(*r, *c);
    }
    std::string signature() const override { return "grid"; }

    /// Stage n is the n x n square [n] x [n].
    static Exhaustion square_exhaustion() {
        return Exhaustion{"square", [](std::size_t n) {
                              std::vector<ElementId> out;
                              for (std::size_t r = 0; r < n; ++r)
                                  for (std::size_t c = 0; c < n; ++c) out.push_back(encode(r, c));
                              std::sort(out.begin(), out.end());
                              return out;
                          }};
    }

protected:
    std::optional<std::size_t> closure_bound(const std::vector<ElementId>& stem) const override {
        std::size_t maxd = 0;
        for (ElementId x : stem) {
            auto [r, c] = decode(x);
            maxd = std::max(maxd, r + c);
        }
        std::size_t d = maxd + 2;
        return d * (d + 1) / 2;
    }
};

inline OraclePtr grid_causet() { return std::make_shared<GridCauset>(); }

/// Example 6 family: P1 = {a}, P2 = {a,b}, and each later stage adds a chain
/// of m_n elements above Z_{n-2}, incomparable with the previous stage.
/// The stage list is finite (a documented test growth sequence).
class OscillatingCauset final : public CausetOracle {
public:
    /// m[i] is the chain length of stage i+3 (stages 1 and 2 are fixed).
    explicit OscillatingCauset(std::vector<std::size_t> m) : m_(std::move(m)) {
        for (std::size_t v : m_)
            if (v == 0) throw UsageError("stage sizes must be positive");
        offsets_ = {0, 1, 2};
        for (std::size_t v : m_) offsets_.push_back(offsets_.back() + v);
    }

    std::size_t stages() const { return 2 + m_.size(); }
    std::size_t total() const { return offsets_.back(); }
    std::size_t stage_size(std::size_t s) const { return s <= 2 ? 1 : m_[s - 3]; }

    // stage (1-based) and position within the stage chain (0-based)
    std::pair<std::size_t, std::size_t> decode(ElementId x) const {
        auto it = std::upper_bound(offsets_.begin(), offsets_.end(), static_cast<std::size_t>(x));
        std::size_t s = static_cast<std::size_t>(it - offsets_.begin());
        return {s, x - offsets_[s - 1]};
    }
    ElementId encode(std::size_t s, std::size_t p) const { return static_cast<ElementId>(offsets_[s - 1] + p); }

    bool less(ElementId a, ElementId b) const override {
        auto [sa, pa] = decode(a);
        auto [sb, pb] = decode(b);
        if (sa == sb) return pa < pb;
        return sa + 2 <= sb;
    }
    DownSet down(ElementId x) const override {
        auto [s, p] = decode(x);
        DownSet d;
        if (s >= 3)
            for (ElementId e = 0; e < offsets_[s - 2]; ++e) d.push_back(e); // all stages <= s-2
        for (std::size_t q = 0; q < p; ++q) d.push_back(encode(s, q));
        std::sort(d.begin(), d.end());
        return d;
    }
    std::vector<ElementId> lower_covers(ElementId x) const override {
        auto [s, p] = decode(x);
        std::vector<ElementId> out;
        if (p > 0) {
            out.push_back(encode(s, p - 1));
        } else {
            if (s >= 3) out.push_back(encode(s - 2, stage_size(s - 2) - 1));
            if (s >= 4) out.push_back(encode(s - 3, stage_size(s - 3) - 1));
        }
        std::sort(out.begin(), out.end());
        return out;
    }
    std::vector<ElementId> enumerate(std::size_t n) const override {
        std::vector<ElementId> out;
        for (std::size_t i = 0; i < std::min(n, total()); ++i) out.push_back(static_cast<ElementId>(i));
        return out;
    }
    std::string label(ElementId x) const override {
        auto [s, p] = decode(x);
        if (s == 1) return "a";
        if (s == 2) return "b";
        return "c" + std::to_string(s) + "_" + std::to_string(p + 1);
    }
    std::optional<ElementId> parse_label(std::string_view name) const override {
        if (name == "a") return encode(1, 0);
        if (name == "b") return encode(2, 0);
        auto us = name.find('_');
        if (us == std::string_view::npos || name.empty() || name[0] != 'c') return std::nullopt;
        auto s = detail::parse_uint(name.substr(1, us - 1));
        auto p = detail::parse_uint(name.substr(us + 1));
        if (!s || !p || *s < 3 || *s > stages() || *p == 0 || *p > stage_size(*s)) return std::nullopt;
        return encode(*s, *p - 1);
    }
    std::string signature() const override {
        std::string s = "oscillating:";
        for (std::size_t i = 0; i < m_.size(); ++i) s += (i ? "," : "") + std::to_string(m_[i]);
        return s;
    }

    /// Stage n of the construction, Z_n.
    Exhaustion stage_exhaustion() const {
        auto self = *this;
        return Exhaustion{"stage", [self](std::size_t n) {
                              std::size_t s = std::min(n, self.stages());
                              std::vector<ElementId> out;
                              for (ElementId e = 0; e < self.offsets_[s]; ++e) out.push_back(e);
                              return out;
                          }};
    }

protected:
    std::optional<std::size_t> closure_bound(const std::vector<ElementId>& stem) const override {
        std::size_t s = 2;
        for (ElementId x : stem) s = std::max(s, decode(x).first);
        std::size_t hi = std::min(s + 3, stages());
        return offsets_[hi];
    }

private:
    std::vector<std::size_t> m_;
    std::vector<std::size_t> offsets_;
};

inline std::shared_ptr<const OscillatingCauset> oscillating_causet(std::vector<std::size_t> m) {
    return std::make_shared<OscillatingCauset>(std::move(m));
}

/// Example 7: chains B: b1<b2<... and C: c0<c1<..., with cross-relations
/// c_i > b_j iff j < 2^i.  Enumeration interleaves so that c_i follows
/// b_{2^i - 1}: id(c_i) = 2^i + i - 1, id(b_j) = j + floor(log2 j).
class CrossedChainsCauset final : public CausetOracle {
public:
    struct Elem {
        bool is_c;
        std::size_t k; // c_k (k >= 0) or b_k (k >= 1)
    };

    static Elem decode(ElementId x) {
        for (std::size_t i = 0;; ++i) {
            ElementId ci = c_id(i);
            if (ci == x) return {true, i};
            if (ci > x) break;
        }
        // invert j + floor(log2 j)
        std::size_t j = x;
        while (b_id(j) > x) --j;
        return {false, j};
    }
    static ElementId c_id(std::size_t i) { return static_cast<ElementId>((std::size_t(1) << i) + i - 1); }
    static ElementId b_id(std::size_t j) {
        std::size_t lg = 0;
        while ((std::size_t(2) << lg) <= j) ++lg;
        return static_cast<ElementId>(j + lg);
    }

    bool less(ElementId a, ElementId b) const override {
        Elem ea = decode(a), eb = decode(b);
        if (ea.is_c && eb.is_c) return ea.k < eb.k;
        if (!ea.is_c && !eb.is_c) return ea.k < eb.k;
        if (!ea.is_c && eb.is_c) return ea.k < (std::size_t(1) << eb.k);
        return false;
    }
    DownSet down(ElementId x) const override {
        Elem e = decode(x);
        DownSet d;
        if (e.is_c) {
            for (std::size_t i = 0; i < e.k; ++i) d.push_back(c_id(i));
            for (std::size_t j = 1; j < (std::size_t(1) << e.k); ++j) d.push_back(b_id(j));
        } else {
            for (std::size_t j = 1; j < e.k; ++j) d.push_back(b_id(j));
        }
        std::sort(d.begin(), d.end());
        return d;
    }
    std::vector<ElementId> lower_covers(ElementId x) const override {
        Elem e = decode(x);
        std::vector<ElementId> out;
        if (e.is_c) {
            if (e.k > 0) {
                out.push_back(c_id(e.k - 1));
                // top new b below c_k beyond those below c_{k-1}
                out.push_back(b_id((std::size_t(1) << e.k) - 1));
            }
        } else if (e.k > 1) {
            out.push_back(b_id(e.k - 1));
        }
        std::sort(out.begin(), out.end());
        return out;
    }
    std::vector<ElementId> enumerate(std::size_t n) const override {
        std::vector<ElementId> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<ElementId>(i);
        return out;
    }
    std::string label(ElementId x) const override {
        Elem e = decode(x);
        return (e.is_c ? "c" : "b") + std::to_string(e.k);
    }
    std::optional<ElementId> parse_label(std::string_view name) const override {
        if (name.size() < 2) return std::nullopt;
        auto k = detail::parse_uint(name.substr(1));
        if (!k) return std::nullopt;
        if (name[0] == 'c') return c_id(*k);
        if (name[0] == 'b' && *k >= 1) return b_id(*k);
        return std::nullopt;
    }
    std::string signature() const override { return "crossed-chains"; }

protected:
    std::optional<std::size_t> closure_bound(const std::vector<ElementId>& stem) const override {
        std::size_t m = stem.empty() ? 0 : *std::max_element(stem.begin(), stem.end());
        return 2 * m + 8;
    }
};

inline OraclePtr crossed_chains_causet() { return std::make_shared<CrossedChainsCauset>(); }

/// Example 2 linear sum P1 < P2 < ... ; the provided summand list repeats
/// cyclically.  id = summand offset + position in a fixed linear extension
/// of the summand.
class LinearSumCauset final : public CausetOracle {
public:
    explicit LinearSumCauset(std::vector<FinitePoset> summands) : summands_(std::move(summands)) {
        if (summands_.empty()) throw UsageError("need at least one summand");
        for (const auto& p : summands_) {
            if (p.n() == 0) throw UsageError("summands must be nonempty");
            orders_.push_back(topo_order(p));
        }
    }

    // summand index (0-based, cycling) and position within its extension
    std::pair<std::size_t, std::size_t> decode(ElementId x) const {
        std::size_t cycle = 0;
        for (const auto& p : summands_) cycle += p.n();
        std::size_t rounds = x / cycle, rem = x % cycle, s = 0;
        while (rem >= summands_[s].n()) rem -= summands_[s++].n();
        return {rounds * summands_.size() + s, rem};
    }
    ElementId encode(std::size_t summand, std::size_t pos) const {
        std::size_t cycle = 0;
        for (const auto& p : summands_) cycle += p.n();
        std::size_t rounds = summand / summands_.size(), s = summand % summands_.size(), off = rounds * cycle;
        for (std::size_t i = 0; i < s; ++i) off += summands_[i].n();
        return static_cast<ElementId>(off + pos);
    }

    bool less(ElementId a, ElementId b) const override {
        auto [sa, pa] = decode(a);
        auto [sb, pb] = decode(b);
        if (sa != sb) return sa < sb;
        const FinitePoset& p = summands_[sa % summands_.size()];
        const auto& ord = orders_[sa % summands_.size()];
        return p.less_index(ord[pa], ord[pb]);
    }
    DownSet down(ElementId x) const override {
        auto [s, pos] = decode(x);
        DownSet d;
        for (ElementId e = 0; e < encode(s, 0); ++e) d.push_back(e);
        const FinitePoset& p = summands_[s % summands_.size()];
        const auto& ord = orders_[s % summands_.size()];
        for (std::size_t q = 0; q < p.n(); ++q)
            if (p.less_index(ord[q], ord[pos])) d.push_back(encode(s, q));
        std::sort(d.begin(), d.end());
        return d;
    }
    std::vector<ElementId> lower_covers(ElementId x) const override {
        auto [s, pos] = decode(x);
        const FinitePoset& p = summands_[s % summands_.size()];
        const auto& ord = orders_[s % summands_.size()];
        std::vector<ElementId> out;
        bool minimal_in_summand = p.lower_covers(ord[pos]).empty();
        if (minimal_in_summand && s > 0) {
            // covers are the maximal elements of the previous summand
            std::size_t sp = s - 1;
            const FinitePoset& q = summands_[sp % summands_.size()];
            const auto& qo = orders_[sp % summands_.size()];
            for (std::size_t i = 0; i < q.n(); ++i)
                if (q.upper_covers(qo[i]).empty()) out.push_back(encode(sp, i));
        }
        for (std::size_t c : p.lower_covers(ord[pos])) {
            std::size_t q = static_cast<std::size_t>(
                std::find(ord.begin(), ord.end(), c) - ord.begin());
            out.push_back(encode(s, q));
        }
        std::sort(out.begin(), out.end());
        return out;
    }
    std::vector<ElementId> enumerate(std::size_t n) const override {
        std::vector<ElementId> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<ElementId>(i);
        return out;
    }
    std::string label(ElementId x) const override {
        auto [s, pos] = decode(x);
        const FinitePoset& p = summands_[s % summands_.size()];
        const auto& ord = orders_[s % summands_.size()];
        return "s" + std::to_string(s + 1) + "_" + std::to_string(p.id(ord[pos]));
    }
    std::optional<ElementId> parse_label(std::string_view name) const override {
        auto us = name.find('_');
        if (us == std::string_view::npos || name.empty() || name[0] != 's') return std::nullopt;
        auto s = detail::parse_uint(name.substr(1, us - 1));
        auto e = detail::parse_uint(name.substr(us + 1));
        if (!s || !e || *s == 0) return std::nullopt;
        const FinitePoset& p = summands_[(*s - 1) % summands_.size()];
        const auto& ord = orders_[(*s - 1) % summands_.size()];
        for (std::size_t q = 0; q < p.n(); ++q)
            if (p.id(ord[q]) == *e) return encode(*s - 1, q);
        return std::nullopt;
    }
    std::string signature() const override {
        std::string s = "linear-sum:";
        for (const auto& p : summands_) s += std::to_string(p.n()) + ";";
        return s;
    }

protected:
    std::optional<std::size_t> closure_bound(const std::vector<ElementId>& stem) const override {
        std::size_t m = stem.empty() ? 0 : *std::max_element(stem.begin(), stem.end()) + 1;
        std::size_t cycle = 0;
        for (const auto& p : summands_) cycle += p.n();
        return m + cycle;
    }

private:
    static std::vector<std::size_t> topo_order(const FinitePoset& p) {
        // smallest-id-minimal-first linear extension; fixes the enumeration
        std::vector<std::size_t> order;
        Bitset in(p.n());
        while (order.size() < p.n()) {
            for (std::size_t v = 0; v < p.n(); ++v) {
                if (!in.test(v) && p.down_bits(v).is_subset_of(in)) {
                    in.set(v);
                    order.push_back(v);
                    break;
                }
            }
        }
        return order;
    }
    std::vector<FinitePoset> summands_;
    std::vector<std::vector<std::size_t>> orders_;
};

inline OraclePtr linear_sum_causet(std::vector<FinitePoset> summands) {
    return std::make_shared<LinearSumCauset>(std::move(summands));
}

/// Coordinate order on a Poisson sample in [0,h]^2; points sampled once at
/// construction, deterministic per seed.
class PoissonOrderCauset final : public CausetOracle {
public:
    PoissonOrderCauset(unsigned long seed, double intensity, double horizon) {
        std::mt19937_64 rng(seed);
        double mean = intensity * horizon * horizon;
        std::size_t n = mean > 0 ? std::poisson_distribution<std::size_t>(mean)(rng) : 0;
        if (n == 0) throw EmptySample();
        std::uniform_real_distribution<double> u(0.0, horizon);
        for (std::size_t i = 0; i < n; ++i) {
            double x = u(rng), y = u(rng);
            pts_.emplace_back(x, y);
        }
        std::sort(pts_.begin(), pts_.end(), [](const auto& a, const auto& b) {
            return a.first + a.second < b.first + b.second;
        });
        sig_ = "poisson:" + std::to_string(seed) + ":" + std::to_string(intensity) + ":" + std::to_string(horizon);
    }

    std::size_t size() const { return pts_.size(); }

    bool less(ElementId a, ElementId b) const override {
        return a != b && pts_[a].first <= pts_[b].first && pts_[a].second <= pts_[b].second;
    }
    DownSet down(ElementId x) const override {
        DownSet d;
        for (ElementId i = 0; i < pts_.size(); ++i)
            if (i != x && less(i, x)) d.push_back(i);
        return d;
    }
    std::vector<ElementId> lower_covers(ElementId x) const override {
        DownSet d = down(x);
        std::vector<ElementId> out;
        for (ElementId u : d) {
            bool maximal = true;
            for (ElementId w : d)
                if (w != u && less(u, w)) { maximal = false; break; }
            if (maximal) out.push_back(u);
        }
        return out;
    }
    std::vector<ElementId> enumerate(std::size_t n) const override {
        std::vector<ElementId> out;
        for (std::size_t i = 0; i < std::min(n, pts_.size()); ++i) out.push_back(static_cast<ElementId>(i));
        return out;
    }
    std::string label(ElementId x) const override { return "p" + std::to_string(x); }
    std::optional<ElementId> parse_label(std::string_view name) const override {
        if (name.size() < 2 || name[0] != 'p') return std::nullopt;
        auto v = detail::parse_uint(name.substr(1));
        if (!v || *v >= pts_.size()) return std::nullopt;
        return static_cast<ElementId>(*v);
    }
    std::string signature() const override { return sig_; }

protected:
    std::optional<std::size_t> closure_bound(const std::vector<ElementId>&) const override {
        return pts_.size();
    }

private:
    std::vector<std::pair<double, double>> pts_;
    std::string sig_;
};

inline OraclePtr poisson_order_causet(unsigned long seed, double intensity, double horizon) {
    return std::make_shared<PoissonOrderCauset>(seed, intensity, horizon);
}

// Convenience forest presets.

inline std::shared_ptr<const ForestCauset> single_chain_forest() {
    ForestSpec s;
    s.roots = 1;
    s.children = [](const std::vector<std::size_t>&) { return 1; };
    s.label = [](const std::vector<std::size_t>& p) { return "b" + std::to_string(p.size()); };
    s.name = "chain";
    return forest_causet(std::move(s));
}

/// k infinite chains as a forest with chain-style labels b1.., c1.., ...
inline std::shared_ptr<const ForestCauset> chains_forest(std::size_t k) {
    ForestSpec s;
    s.roots = k;
    s.children = [](const std::vector<std::size_t>&) { return 1; };
    s.label = [](const std::vector<std::size_t>& p) {
        return std::string(1, static_cast<char>('b' + p[0])) + std::to_string(p.size());
    };
    s.name = "chains" + std::to_string(k);
    return forest_causet(std::move(s));
}

/// One infinite chain b1 < b2 < ... plus a single isolated element x.
inline std::shared_ptr<const ForestCauset> chain_plus_isolated_forest() {
    ForestSpec s;
    s.roots = 2;
    s.children = [](const std::vector<std::size_t>& p) { return p[0] == 0 ? 1u : 0u; };
    s.label = [](const std::vector<std::size_t>& p) {
        return p[0] == 0 ? "b" + std::to_string(p.size()) : std::string("x");
    };
    s.name = "chain-plus-isolated";
    return forest_causet(std::move(s));
}

inline std::shared_ptr<const ForestCauset> binary_tree_forest() {
    ForestSpec s;
    s.roots = 1;
    s.children = [](const std::vector<std::size_t>&) { return 2; };
    s.name = "binary";
    return forest_causet(std::move(s));
}

/// A spine chain with one tooth chain hanging (upward) off each spine node:
/// spine nodes have two upper covers, teeth have one.
inline std::shared_ptr<const ForestCauset> comb_forest() {
    ForestSpec s;
    s.roots = 1;
    s.children = [](const std::vector<std::size_t>& p) {
        bool on_spine = true;
        for (std::size_t i = 1; i < p.size(); ++i)
            if (p[i] != 0) { on_spine = false; break; }
        return on_spine ? 2u : 1u;
    };
    s.name = "comb";
    return forest_causet(std::move(s));
}

} // namespace oim
