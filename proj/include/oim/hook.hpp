#pragma once

#include <gmpxx.h>

#include <vector>

#include "error.hpp"
#include "families.hpp"

namespace oim {

/// Partition = weakly decreasing positive row lengths; row r has cells
/// (r, 0..lambda[r]-1).  The empty partition is {}.
using Partition = std::vector<std::size_t>;

inline bool is_partition(const Partition& l) {
    for (std::size_t i = 0; i < l.size(); ++i) {
        if (l[i] == 0) return false;
        if (i + 1 < l.size() && l[i + 1] > l[i]) return false;
    }
    return true;
}

inline std::size_t partition_size(const Partition& l) {
    std::size_t n = 0;
    for (std::size_t r : l) n += r;
    return n;
}

/// Down-sets of the grid are exactly the Young diagrams.  Converts a set of
/// grid element ids to its partition, or throws.
inline Partition grid_partition(const std::vector<ElementId>& cells) {
    std::vector<std::pair<std::size_t, std::size_t>> pts;
    for (ElementId x : cells) pts.push_back(GridCauset::decode(x));
    std::size_t rows = 0;
    for (auto [r, c] : pts) rows = std::max(rows, r + 1);
    Partition l(rows, 0);
    for (auto [r, c] : pts) l[r] = std::max(l[r], c + 1);
    if (partition_size(l) != cells.size() || !is_partition(l))
        throw NotAYoungDiagram();
    // row lengths alone don't prove the set is left-justified
    std::vector<std::vector<bool>> seen(rows);
    for (std::size_t r = 0; r < rows; ++r) seen[r].assign(l[r], false);
    for (auto [r, c] : pts) {
        if (c >= l[r] || seen[r][c]) throw NotAYoungDiagram();
        seen[r][c] = true;
    }
    return l;
}

inline std::vector<ElementId> partition_cells(const Partition& l) {
    std::vector<ElementId> out;
    for (std::size_t r = 0; r < l.size(); ++r)
        for (std::size_t c = 0; c < l[r]; ++c) out.push_back(GridCauset::encode(r, c));
    std::sort(out.begin(), out.end());
    return out;
}

/// Number of standard Young tableaux of straight shape lambda, by the
/// hook-length formula.
inline mpz_class hook_count(const Partition& lambda) {
    if (!is_partition(lambda)) throw NotAYoungDiagram();
    std::size_t n = partition_size(lambda);
    std::vector<std::size_t> conj; // column lengths
    if (!lambda.empty()) {
        conj.assign(lambda[0], 0);
        for (std::size_t r = 0; r < lambda.size(); ++r)
            for (std::size_t c = 0; c < lambda[r]; ++c) ++conj[c];
    }
    mpz_class num, hooks = 1;
    mpz_fac_ui(num.get_mpz_t(), static_cast<unsigned long>(n));
    for (std::size_t r = 0; r < lambda.size(); ++r)
        for (std::size_t c = 0; c < lambda[r]; ++c) {
            std::size_t h = (lambda[r] - c) + (conj[c] - r) - 1;
            hooks *= static_cast<unsigned long>(h);
        }
    return num / hooks;
}

/// Number of standard Young tableaux of skew shape lambda/mu, by the
/// determinant formula f^{lambda/mu} = n! det( 1/(lambda_i - mu_j - i + j)! ).
inline mpz_class skew_count(const Partition& lambda, const Partition& mu) {
    if (!is_partition(lambda) || !is_partition(mu)) throw NotAYoungDiagram();
    if (mu.size() > lambda.size()) throw NotAYoungDiagram("inner shape exceeds outer shape");
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (mu[i] > lambda[i]) throw NotAYoungDiagram("inner shape exceeds outer shape");
    std::size_t k = lambda.size();
    std::size_t n = partition_size(lambda) - partition_size(mu);
    if (k == 0) return 1;

    // rational determinant of M_ij = 1/(lambda_i - mu_j - i + j)!
    std::vector<std::vector<mpq_class>> M(k, std::vector<mpq_class>(k));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            long e = static_cast<long>(lambda[i]) - static_cast<long>(j < mu.size() ? mu[j] : 0)
                     - static_cast<long>(i) + static_cast<long>(j);
            if (e < 0) {
                M[i][j] = 0;
            } else {
                mpz_class f;
                mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(e));
                M[i][j] = mpq_class(1) / mpq_class(f);
            }
        }
    mpq_class det = 1;
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        while (piv < k && M[piv][col] == 0) ++piv;
        if (piv == k) return 0;
        if (piv != col) {
            std::swap(M[piv], M[col]);
            det = -det;
        }
        det *= M[col][col];
        for (std::size_t i = col + 1; i < k; ++i) {
            mpq_class f = M[i][col] / M[col][col];
            for (std::size_t j = col; j < k; ++j) M[i][j] -= f * M[col][j];
        }
    }
    mpz_class nf;
    mpz_fac_ui(nf.get_mpz_t(), static_cast<unsigned long>(n));
    mpq_class r = mpq_class(nf) * det;
    r.canonicalize();
    if (r.get_den() != 1 || r < 0) throw Error("skew determinant is not a nonnegative integer");
    return r.get_num();
}

/// nu^X(E(s)) for the grid restricted to the square [n] x [n], where s is an
/// ordered stem whose underlying set is a Young diagram mu inside the square:
/// the fraction of linear extensions of the square extending s, computed as
/// f^{lambda/mu} / f^{lambda} with lambda the full square.  The stem order
/// itself does not matter beyond being one fixed extension of mu.
inline mpq_class grid_square_nu(std::size_t n, const std::vector<ElementId>& stem_cells) {
    Partition mu = grid_partition(stem_cells);
    Partition lambda(n, n);
    if (mu.size() > n || (!mu.empty() && mu[0] > n))
        throw NotAYoungDiagram("stem does not fit in the square");
    mpq_class r(skew_count(lambda, mu), hook_count(lambda));
    r.canonicalize();
    return r;
}

} // namespace oim
