// intmat.hpp -- small dense integer matrices and the exact linear algebra the
// lattice computations need: Smith/Hermite normal forms, determinants and
// characteristic polynomials.  Everything is exact; dimensions are tiny
// (bounded by MAX_RANK), so the implementations favour clarity over
// asymptotics.
#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <vector>

#include "torsion_atlas/errors.hpp"

namespace torsion_atlas {

inline constexpr int MAX_RANK = 16;

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;

// Trial-division primality test; fine for the word-sized inputs we see
// (classification primes and Frobenius parameters q).
inline bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// Row-major integer matrix with run-time dimensions m x n (each <= MAX_RANK
// for the lattice uses; the container itself accepts anything).
struct IMat {
    int rows = 0, cols = 0;
    std::vector<i64> a;

    IMat() = default;
    IMat(int m_, int n_) : rows(m_), cols(n_), a(static_cast<size_t>(m_) * n_, 0) {}

    i64& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    i64 at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static IMat identity(int n_) {
        IMat r(n_, n_);
        for (int i = 0; i < n_; ++i) r.at(i, i) = 1;
        return r;
    }

    bool operator==(const IMat& o) const { return rows == o.rows && cols == o.cols && a == o.a; }
};

inline IMat mat_mul(const IMat& x, const IMat& y) {
    if (x.cols != y.rows) throw InvariantViolation("mat_mul: shape mismatch");
    IMat r(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            i64 v = x.at(i, k);
            if (v == 0) continue;
            for (int j = 0; j < y.cols; ++j) r.at(i, j) += v * y.at(k, j);
        }
    return r;
}

inline IMat transpose(const IMat& x) {
    IMat r(x.cols, x.rows);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) r.at(j, i) = x.at(i, j);
    return r;
}

// Fraction-free Gaussian elimination (Bareiss).  Exact for any integer
// matrix whose intermediate minors fit in 128 bits -- far beyond anything a
// rank-16 lattice computation produces.
inline i128 det_i128(const IMat& x) {
    if (x.rows != x.cols) throw InvariantViolation("det: not square");
    int n = x.cols;
    std::vector<i128> b(x.a.begin(), x.a.end());
    auto at = [&](int i, int j) -> i128& { return b[static_cast<size_t>(i) * n + j]; };
    i128 prev = 1;
    int sign = 1;
    for (int k = 0; k < n; ++k) {
        if (at(k, k) == 0) {
            int piv = -1;
            for (int i = k + 1; i < n; ++i)
                if (at(i, k) != 0) { piv = i; break; }
            if (piv < 0) return 0;
            for (int j = 0; j < n; ++j) std::swap(at(k, j), at(piv, j));
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j)
                at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / prev;
        prev = at(k, k);
    }
    return sign * at(n - 1, n - 1);
}

inline i64 det(const IMat& x) {
    i128 d = det_i128(x);
    if (d > i128(INT64_MAX) || d < i128(INT64_MIN))
        throw InvariantViolation("det: overflow");
    return static_cast<i64>(d);
}

// Smith normal form.  Returns the invariant factors d_1 | d_2 | ... (zeros
// for the rank deficiency) and, when requested, unimodular U, V with
// U * A * V = diag(d_i).
struct SmithResult {
    std::vector<i64> invariants;  // length min(m, n), divisibility chain, >= 0
    IMat U, V;                    // unimodular transforms
};

inline SmithResult smith_normal_form(IMat A) {
    const int m = A.rows, n = A.cols;
    SmithResult res;
    res.U = IMat::identity(m);
    res.V = IMat::identity(n);

    auto row_op = [&](IMat& M, int i, int j, i64 c) {  // row_i += c * row_j
        for (int k = 0; k < M.cols; ++k) M.at(i, k) += c * M.at(j, k);
    };
    auto col_op = [&](IMat& M, int i, int j, i64 c) {  // col_i += c * col_j
        for (int k = 0; k < M.rows; ++k) M.at(k, i) += c * M.at(k, j);
    };
    auto swap_rows = [&](IMat& M, int i, int j) {
        for (int k = 0; k < M.cols; ++k) std::swap(M.at(i, k), M.at(j, k));
    };
    auto swap_cols = [&](IMat& M, int i, int j) {
        for (int k = 0; k < M.rows; ++k) std::swap(M.at(k, i), M.at(k, j));
    };

    int t = 0;
    const int steps = std::min(m, n);
    while (t < steps) {
        // Find a pivot with minimal absolute value in the remaining block.
        int pi = -1, pj = -1;
        i64 best = 0;
        for (int i = t; i < m; ++i)
            for (int j = t; j < n; ++j) {
                i64 v = A.at(i, j) < 0 ? -A.at(i, j) : A.at(i, j);
                if (v != 0 && (pi < 0 || v < best)) { pi = i; pj = j; best = v; }
            }
        if (pi < 0) break;  // remaining block is zero
        if (pi != t) { swap_rows(A, t, pi); swap_rows(res.U, t, pi); }
        if (pj != t) { swap_cols(A, t, pj); swap_cols(res.V, t, pj); }

        bool clean = true;
        for (int i = t + 1; i < m; ++i)
            if (A.at(i, t) != 0) {
                i64 q = A.at(i, t) / A.at(t, t);
                row_op(A, i, t, -q);
                row_op(res.U, i, t, -q);
                if (A.at(i, t) != 0) clean = false;
            }
        for (int j = t + 1; j < n; ++j)
            if (A.at(t, j) != 0) {
                i64 q = A.at(t, j) / A.at(t, t);
                col_op(A, j, t, -q);
                col_op(res.V, j, t, -q);
                if (A.at(t, j) != 0) clean = false;
            }
        if (!clean) continue;  // smaller pivot appeared; redo this step

        // Enforce the divisibility chain: pivot must divide the whole block.
        bool divides = true;
        for (int i = t + 1; i < m && divides; ++i)
            for (int j = t + 1; j < n && divides; ++j)
                if (A.at(i, j) % A.at(t, t) != 0) {
                    row_op(A, t, i, 1);
                    row_op(res.U, t, i, 1);
                    divides = false;
                }
        if (!divides) continue;

        if (A.at(t, t) < 0) {
            for (int k = 0; k < n; ++k) A.at(t, k) = -A.at(t, k);
            for (int k = 0; k < res.U.cols; ++k) res.U.at(t, k) = -res.U.at(t, k);
        }
        ++t;
    }
    res.invariants.assign(steps, 0);
    for (int i = 0; i < t; ++i) res.invariants[i] = A.at(i, i);
    return res;
}

// Invariant factors > 1 of Z^n / (row lattice of A): the torsion of the
// cokernel, dropping trivial ones.  A need not be square; zero invariants
// (free rank of the cokernel) are not reported here.
inline std::vector<i64> cokernel_torsion(const IMat& A) {
    SmithResult s = smith_normal_form(A);
    std::vector<i64> out;
    for (i64 d : s.invariants)
        if (d > 1) out.push_back(d);
    return out;
}

// Hermite normal form of the row lattice (row-style, lower-left echelon with
// positive pivots and reduced entries above them is not needed; we only need
// *a* canonical basis).  Returns a basis of the lattice spanned by the rows
// of A as the rows of the result, rank rows total.
inline IMat hnf_row_basis(IMat A) {
    const int m = A.rows, n = A.cols;
    int row = 0;
    for (int col = 0; col < n && row < m; ++col) {
        // Reduce column `col` below `row` with a Euclidean cascade.
        while (true) {
            int piv = -1;
            i64 best = 0;
            for (int i = row; i < m; ++i) {
                i64 v = A.at(i, col) < 0 ? -A.at(i, col) : A.at(i, col);
                if (v != 0 && (piv < 0 || v < best)) { piv = i; best = v; }
            }
            if (piv < 0) break;
            if (piv != row)
                for (int k = 0; k < n; ++k) std::swap(A.at(row, k), A.at(piv, k));
            bool done = true;
            for (int i = row + 1; i < m; ++i)
                if (A.at(i, col) != 0) {
                    i64 q = A.at(i, col) / A.at(row, col);
                    for (int k = 0; k < n; ++k) A.at(i, k) -= q * A.at(row, k);
                    if (A.at(i, col) != 0) done = false;
                }
            if (done) break;
        }
        if (A.at(row, col) != 0) {
            if (A.at(row, col) < 0)
                for (int k = 0; k < n; ++k) A.at(row, k) = -A.at(row, k);
            // Reduce the entries above the pivot so the form is canonical.
            for (int i = 0; i < row; ++i) {
                i64 q = A.at(i, col) / A.at(row, col);
                if (A.at(i, col) % A.at(row, col) < 0) q -= 1;
                if (q != 0)
                    for (int k = 0; k < n; ++k) A.at(i, k) -= q * A.at(row, k);
            }
            ++row;
        }
    }
    IMat out(row, n);
    for (int i = 0; i < row; ++i)
        for (int j = 0; j < n; ++j) out.at(i, j) = A.at(i, j);
    return out;
}

// Solve x * B = v exactly over the integers for a square unimodular-ish B
// (any invertible B whose inverse times v is integral).  Returns false if no
// integer solution exists.
inline bool solve_left_integer(const IMat& B, const std::vector<i64>& v, std::vector<i64>& x) {
    if (B.rows != B.cols || static_cast<int>(v.size()) != B.cols)
        throw InvariantViolation("solve_left_integer: shape mismatch");
    const int n = B.cols;
    // Work with the transposed system B^T x^T = v^T via fraction-free
    // elimination, then check integrality with the determinant.
    i128 d = det_i128(B);
    if (d == 0) return false;
    // Cramer's rule, column by column; n <= MAX_RANK keeps this cheap.
    x.assign(n, 0);
    for (int j = 0; j < n; ++j) {
        IMat Bj = B;
        for (int k = 0; k < n; ++k) Bj.at(j, k) = v[k];  // replace row j (left-mult)
        i128 dj = det_i128(Bj);
        if (dj % d != 0) return false;
        i128 q = dj / d;
        if (q > i128(INT64_MAX) || q < i128(INT64_MIN)) return false;
        x[j] = static_cast<i64>(q);
    }
    return true;
}

// Characteristic polynomial det(x*I - M) of a square integer matrix.
// Coefficients returned lowest degree first, length n+1.  Computed by
// evaluation at n+1 points with Bareiss determinants and exact Lagrange
// interpolation in 128-bit arithmetic.
inline std::vector<i64> char_poly(const IMat& M) {
    if (M.rows != M.cols) throw InvariantViolation("char_poly: not square");
    const int n = M.cols;
    std::vector<i128> ys(n + 1);
    for (int t = 0; t <= n; ++t) {
        IMat A(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) A.at(i, j) = (i == j ? t : 0) - M.at(i, j);
        ys[t] = det_i128(A);
    }
    // Newton forward differences give exact integer coefficients in the
    // binomial basis; convert to the monomial basis at the end.
    std::vector<i128> diff = ys;
    for (int k = 1; k <= n; ++k)
        for (int i = n; i >= k; --i) diff[i] = diff[i] - diff[i - 1];
    // p(x) = sum_k diff[k] * C(x, k); expand C(x, k) = x(x-1)...(x-k+1)/k!.
    std::vector<i128> coeff(n + 1, 0);
    std::vector<i128> falling = {1};  // polynomial x(x-1)...(x-k+1), coeffs low->high
    for (int k = 0; k <= n; ++k) {
        if (k > 0) {
            // falling *= (x - (k-1))
            std::vector<i128> next(falling.size() + 1, 0);
            for (size_t i = 0; i < falling.size(); ++i) {
                next[i + 1] += falling[i];
                next[i] -= falling[i] * (k - 1);
            }
            falling = std::move(next);
        }
        i128 kfact = 1;
        for (int i = 2; i <= k; ++i) kfact *= i;
        if (diff[k] % kfact != 0)
            throw InvariantViolation("char_poly: interpolation not integral");
        i128 c = diff[k] / kfact;
        for (size_t i = 0; i < falling.size(); ++i) coeff[i] += c * falling[i];
    }
    std::vector<i64> out(n + 1);
    for (int i = 0; i <= n; ++i) {
        if (coeff[i] > i128(INT64_MAX) || coeff[i] < i128(INT64_MIN))
            throw InvariantViolation("char_poly: coefficient overflow");
        out[i] = static_cast<i64>(coeff[i]);
    }
    return out;
}

// Kernel of the pairing map y |-> (<a, y>)_a for the given list of row
// functionals, intersected with Z^n: a basis (rows) of the saturated
// sublattice { y : F * y^T = 0 }.  F is given as rows of functionals.
inline IMat integer_kernel_basis(const IMat& F) {
    // Kernel via SNF: U F V = D  =>  kernel of F = V * kernel of D.
    // Columns of V beyond rank(D) span the kernel on the coordinate side.
    // We need row vectors y with F y^T = 0, i.e. kernel of the linear map
    // with matrix F acting on column vectors.
    SmithResult s = smith_normal_form(F);
    int rank = 0;
    for (i64 d : s.invariants)
        if (d != 0) ++rank;
    const int n = F.cols;
    IMat out(n - rank, n);
    // F = U^-1 D V^-1, so F v = 0 iff D V^-1 v = 0 iff V^-1 v has zeros in
    // the first `rank` coordinates; columns rank..n-1 of V span the kernel.
    for (int c = rank; c < n; ++c)
        for (int i = 0; i < n; ++i) out.at(c - rank, i) = s.V.at(i, c);
    return hnf_row_basis(out);
}

}  // namespace torsion_atlas
