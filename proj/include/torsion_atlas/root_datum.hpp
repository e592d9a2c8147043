// root_datum.hpp -- split root data of simple algebraic groups, one per
// (type, isogeny) pair.
//
// Coordinate conventions, fixed once and used everywhere:
//   * The ambient lattice is the coweight lattice P^vee of the root system,
//     written in its basis of fundamental coweights, so "ambient coordinates"
//     are integer r-tuples.  Every cocharacter lattice Y sits inside P^vee as
//     a full-rank sublattice containing the coroot lattice Q^vee.
//   * rd.yBasis has the chosen basis of Y as rows (for the simply connected
//     form these are exactly the simple coroots; for every other form a basis
//     derived from the Smith normal form of a generating set).
//   * Elements of Y are stored in coordinates w.r.t. that basis ("Y-coords");
//     characters are stored in the dual basis ("X-coords").  The perfect
//     pairing X x Y -> Z is then the plain dot product, i.e. the pairing
//     matrix is the identity.
//   * Roots are stored in X-coords, coroots in Y-coords.  Roots 0..N-1 are
//     the positive roots sorted by (height, simple index / lexicographic);
//     root N+i is the negative of root i.
#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "torsion_atlas/cartan.hpp"
#include "torsion_atlas/errors.hpp"
#include "torsion_atlas/intmat.hpp"

namespace torsion_atlas {

using Vec16 = std::array<i64, MAX_RANK>;

inline Vec16 zero_vec() { Vec16 v{}; return v; }

inline i64 dot(const Vec16& a, const Vec16& b, int n) {
    i64 s = 0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

// ---------------------------------------------------------------------------
// Isogeny types
// ---------------------------------------------------------------------------

enum class IsogenyKind {
    SimplyConnected,
    Adjoint,
    Intermediate,       // quotient by the unique central subgroup of order d
    SpecialOrthogonal,  // type D: quotient by the vector-representation kernel
    HalfSpinPlus,       // type D, even rank only
    HalfSpinMinus,      // type D, even rank only
};

struct Isogeny {
    IsogenyKind kind = IsogenyKind::SimplyConnected;
    i64 d = 1;  // used by Intermediate only

    std::string label() const {
        switch (kind) {
            case IsogenyKind::SimplyConnected: return "sc";
            case IsogenyKind::Adjoint: return "ad";
            case IsogenyKind::Intermediate: return "int:" + std::to_string(d);
            case IsogenyKind::SpecialOrthogonal: return "so";
            case IsogenyKind::HalfSpinPlus: return "hspin-plus";
            case IsogenyKind::HalfSpinMinus: return "hspin-minus";
        }
        return "?";
    }
};

inline Isogeny parse_isogeny(const std::string& s) {
    if (s == "sc") return {IsogenyKind::SimplyConnected, 1};
    if (s == "ad") return {IsogenyKind::Adjoint, 1};
    if (s == "so") return {IsogenyKind::SpecialOrthogonal, 1};
    if (s == "hspin-plus" || s == "hspin+") return {IsogenyKind::HalfSpinPlus, 1};
    if (s == "hspin-minus" || s == "hspin-") return {IsogenyKind::HalfSpinMinus, 1};
    if (s.rfind("int:", 0) == 0) {
        i64 d = 0;
        for (size_t i = 4; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9') throw IllegalIsogeny("cannot parse isogeny '" + s + "'");
            d = d * 10 + (s[i] - '0');
        }
        if (d <= 0) throw IllegalIsogeny("cannot parse isogeny '" + s + "'");
        return {IsogenyKind::Intermediate, d};
    }
    throw IllegalIsogeny("unknown isogeny '" + s + "'");
}

// ---------------------------------------------------------------------------
// Root datum
// ---------------------------------------------------------------------------

enum class ModuleKind { Adjoint, Minimal };

struct WeightSystem {
    // One entry per distinct weight (in X-coords); parallel multiplicities.
    std::vector<Vec16> weights;
    std::vector<int> mult;
    int dim = 0;
};

struct RootDatum {
    LieType type;
    Isogeny isogeny;
    int rank = 0;
    int positiveCount = 0;

    IMat cartan;               // A[i][j] = <alpha_i, alpha_j^vee>
    std::vector<int> degrees;  // reflection degrees of W
    u64 weylOrder = 1;

    IMat yBasis;          // rows: basis of Y in ambient (coweight) coordinates
    IMat pairingMatrix;   // <x, y> in these coordinates; identity by design

    std::vector<Vec16> rootsX;     // all 2N roots, X-coords
    std::vector<Vec16> rootsLat;   // same roots, simple-root coordinates
    std::vector<Vec16> corootsY;   // corresponding coroots, Y-coords
    std::vector<int> rootRelNorm;  // squared length relative to shortest root
    std::vector<int> rootHeight;   // height in simple-root coordinates

    // Invariant factors (>1) of pi_1 = Y / Q^vee and of the character group
    // of the centre, X / Z-span(roots).
    std::vector<i64> fundamentalGroup;
    std::vector<i64> centerInvariants;

    int rootCount() const { return 2 * positiveCount; }
    int oppositeRoot(int i) const {
        return i < positiveCount ? i + positiveCount : i - positiveCount;
    }

    // Reflection in the given root, acting on Y-coordinate column vectors:
    //   s(y) = y - <alpha, y> alpha^vee.
    IMat reflection(int rootIdx) const {
        IMat m = IMat::identity(rank);
        for (int a = 0; a < rank; ++a)
            for (int b = 0; b < rank; ++b)
                m.at(a, b) -= corootsY[rootIdx][a] * rootsX[rootIdx][b];
        return m;
    }

    i64 pairRoot(int rootIdx, const Vec16& y) const { return dot(rootsX[rootIdx], y, rank); }
};

namespace detail {

// Order of an element written in the invariant-factor coordinates of a
// finite abelian group (t_i modulo D_i).
inline i64 tuple_order(const std::vector<i64>& t, const std::vector<i64>& D) {
    i64 ord = 1;
    for (size_t i = 0; i < t.size(); ++i) {
        if (D[i] == 0) continue;
        i64 ti = ((t[i] % D[i]) + D[i]) % D[i];
        i64 o = D[i] / std::gcd(D[i], ti == 0 ? D[i] : ti);
        ord = std::lcm(ord, o);
    }
    return ord;
}

// Rows of the inverse of a unimodular matrix (exact; throws if not integral).
inline IMat unimodular_inverse(const IMat& V) {
    const int n = V.rows;
    IMat inv(n, n);
    for (int i = 0; i < n; ++i) {
        std::vector<i64> e(n, 0), x;
        e[i] = 1;
        if (!solve_left_integer(V, e, x))
            throw InvariantViolation("matrix expected to be unimodular is not");
        for (int j = 0; j < n; ++j) inv.at(i, j) = x[j];
    }
    return inv;
}

struct CenterStructure {
    std::vector<i64> D;  // invariant factors of P^vee / Q^vee (all, incl. 1)
    IMat Vinv;           // lift: class tuple t -> ambient vector t * Vinv
    IMat V;              // project: ambient z -> class tuple (z*V) mod D
};

inline CenterStructure center_structure(const IMat& corootRows) {
    SmithResult s = smith_normal_form(corootRows);
    CenterStructure c;
    c.D = s.invariants;
    c.V = s.V;
    c.Vinv = unimodular_inverse(s.V);
    return c;
}

inline std::vector<i64> class_of(const CenterStructure& c, const std::vector<i64>& z) {
    const int n = c.V.rows;
    std::vector<i64> t(n, 0);
    for (int j = 0; j < n; ++j) {
        i64 s = 0;
        for (int i = 0; i < n; ++i) s += z[i] * c.V.at(i, j);
        t[j] = c.D[j] == 0 ? s : ((s % c.D[j]) + c.D[j]) % c.D[j];
    }
    return t;
}

}  // namespace detail

inline RootDatum build_root_datum(const LieType& type, Isogeny isogeny) {
    validate_type(type);
    const int n = type.rank;

    RootDatum rd;
    rd.type = type;
    rd.rank = n;
    rd.cartan = cartan_matrix(type);
    rd.degrees = reflection_degrees(type);
    rd.weylOrder = weyl_order(type);
    rd.pairingMatrix = IMat::identity(n);

    const IMat& A = rd.cartan;
    const std::vector<int> relNorm = simple_root_rel_norms(type);

    // --- close the root system in simple-root coordinates ------------------
    // s_j(alpha) = alpha - <alpha, alpha_j^vee> alpha_j, with
    // <alpha, alpha_j^vee> = sum_i a_i A[i][j].
    std::set<Vec16> seen;
    std::vector<Vec16> frontier;
    for (int i = 0; i < n; ++i) {
        Vec16 e = zero_vec();
        e[i] = 1;
        seen.insert(e);
        frontier.push_back(e);
    }
    while (!frontier.empty()) {
        std::vector<Vec16> next;
        for (const Vec16& a : frontier) {
            for (int j = 0; j < n; ++j) {
                i64 pair = 0;
                for (int i = 0; i < n; ++i) pair += a[i] * A.at(i, j);
                Vec16 b = a;
                b[j] -= pair;
                if (seen.insert(b).second) next.push_back(b);
            }
        }
        frontier = std::move(next);
    }
    std::vector<Vec16> positives;
    for (const Vec16& a : seen) {
        i64 h = 0;
        for (int i = 0; i < n; ++i) h += a[i];
        if (h > 0) positives.push_back(a);
    }
    if (static_cast<int>(2 * positives.size()) != root_count(type))
        throw CrossCheckFailure("root closure produced wrong number of roots for " + type.label());

    // Canonical positive order: by height; the height-one block are the
    // simples, kept in Bourbaki index order; ties elsewhere broken
    // lexicographically.
    auto heightOf = [&](const Vec16& a) {
        i64 h = 0;
        for (int i = 0; i < n; ++i) h += a[i];
        return h;
    };
    std::sort(positives.begin(), positives.end(), [&](const Vec16& a, const Vec16& b) {
        i64 ha = heightOf(a), hb = heightOf(b);
        if (ha != hb) return ha < hb;
        if (ha == 1) {
            int ia = 0, ib = 0;
            for (int i = 0; i < n; ++i) {
                if (a[i] == 1) ia = i;
                if (b[i] == 1) ib = i;
            }
            return ia < ib;
        }
        return a < b;
    });
    const int N = static_cast<int>(positives.size());
    rd.positiveCount = N;

    // --- choose the cocharacter lattice Y ----------------------------------
    // Ambient coords of alpha_j^vee are column j of the Cartan matrix, so the
    // matrix with the simple coroots as rows is A^T.
    IMat corootRows = transpose(A);

    detail::CenterStructure cs = detail::center_structure(corootRows);
    i64 centerOrder = 1;
    for (i64 d : cs.D) centerOrder *= d;

    // Canonicalize the requested isogeny against the actual centre.
    if (isogeny.kind == IsogenyKind::Intermediate) {
        if (isogeny.d == 1) isogeny = {IsogenyKind::SimplyConnected, 1};
        else if (isogeny.d == centerOrder) isogeny = {IsogenyKind::Adjoint, 1};
    }
    if (type.family == LieFamily::D && isogeny.kind == IsogenyKind::Intermediate &&
        isogeny.d == 2 && n % 2 == 1)
        isogeny = {IsogenyKind::SpecialOrthogonal, 1};

    std::vector<std::vector<i64>> extraGenerators;  // ambient lifts
    switch (isogeny.kind) {
        case IsogenyKind::SimplyConnected:
            break;
        case IsogenyKind::Adjoint:
            for (int i = 0; i < n; ++i) {
                std::vector<i64> e(n, 0);
                e[i] = 1;
                extraGenerators.push_back(e);
            }
            break;
        case IsogenyKind::Intermediate: {
            if (isogeny.d <= 0 || centerOrder % isogeny.d != 0)
                throw IllegalIsogeny("no central subgroup of order " + std::to_string(isogeny.d) +
                                     " in " + type.label() + " (centre has order " +
                                     std::to_string(centerOrder) + ")");
            if (type.family == LieFamily::D && n % 2 == 0 && isogeny.d == 2)
                throw IllegalIsogeny(
                    "centre of even " + type.label() +
                    " has three subgroups of order 2; use so, hspin-plus or hspin-minus");
            // Centre is cyclic here: take (order/d) times a generator.
            std::vector<i64> gen;
            for (int i = 0; i < n; ++i) {
                std::vector<i64> e(n, 0);
                e[i] = 1;
                std::vector<i64> t = detail::class_of(cs, e);
                if (detail::tuple_order(t, cs.D) == centerOrder) { gen = t; break; }
            }
            if (gen.empty())
                throw InvariantViolation("no generator found in cyclic centre of " + type.label());
            std::vector<i64> t(n, 0);
            i64 k = centerOrder / isogeny.d;
            for (int i = 0; i < n; ++i) t[i] = cs.D[i] ? (gen[i] * k) % cs.D[i] : gen[i] * k;
            std::vector<i64> lift(n, 0);
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) lift[j] += t[i] * cs.Vinv.at(i, j);
            extraGenerators.push_back(lift);
            break;
        }
        case IsogenyKind::SpecialOrthogonal:
        case IsogenyKind::HalfSpinPlus:
        case IsogenyKind::HalfSpinMinus: {
            if (type.family != LieFamily::D)
                throw IllegalIsogeny(isogeny.label() + " is only defined in type D");
            if (isogeny.kind != IsogenyKind::SpecialOrthogonal && n % 2 == 1)
                throw IllegalIsogeny("half-spin quotients exist only for even rank (got " +
                                     type.label() + ")");
            // Fundamental coweights at the vector node (1) and the two spin
            // nodes (n-1, n) generate the three order-2 central classes.
            // The fundamental coweights at the vector node (1) and the two
            // spin nodes (n-1, n) represent the three nontrivial central
            // classes for even n; for odd n the vector coweight represents
            // the unique class of order 2 in the cyclic centre Z/4.
            int node = isogeny.kind == IsogenyKind::SpecialOrthogonal ? 0
                       : isogeny.kind == IsogenyKind::HalfSpinMinus   ? n - 2
                                                                      : n - 1;
            std::vector<i64> e(n, 0);
            e[node] = 1;
            extraGenerators.push_back(e);
            break;
        }
    }
    rd.isogeny = isogeny;

    if (isogeny.kind == IsogenyKind::SimplyConnected) {
        rd.yBasis = corootRows;  // the simple coroots themselves
    } else if (isogeny.kind == IsogenyKind::Adjoint) {
        rd.yBasis = IMat::identity(n);  // the full coweight lattice
    } else {
        // Basis of the lattice spanned by Q^vee and the extra generators,
        // derived from the Smith normal form of the stacked generator matrix:
        // row space of G equals row space of D * V^{-1}.
        IMat G(static_cast<int>(n + extraGenerators.size()), n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) G.at(i, j) = corootRows.at(i, j);
        for (size_t g = 0; g < extraGenerators.size(); ++g)
            for (int j = 0; j < n; ++j) G.at(n + static_cast<int>(g), j) = extraGenerators[g][j];
        SmithResult s = smith_normal_form(G);
        IMat Vinv = detail::unimodular_inverse(s.V);
        rd.yBasis = IMat(n, n);
        for (int i = 0; i < n; ++i) {
            if (i >= static_cast<int>(s.invariants.size()) || s.invariants[i] == 0)
                throw InvariantViolation("cocharacter lattice is not full rank");
            for (int j = 0; j < n; ++j) rd.yBasis.at(i, j) = s.invariants[i] * Vinv.at(i, j);
        }
    }

    // Index check: |det yBasis| * [Y : Q^vee] must equal |det A|.
    i64 wanted = 1;
    switch (isogeny.kind) {
        case IsogenyKind::SimplyConnected: wanted = 1; break;
        case IsogenyKind::Adjoint: wanted = centerOrder; break;
        case IsogenyKind::Intermediate: wanted = isogeny.d; break;
        default: wanted = 2; break;
    }
    {
        i128 dy = det_i128(rd.yBasis), da = det_i128(corootRows);
        if (dy < 0) dy = -dy;
        if (da < 0) da = -da;
        if (dy * wanted != da)
            throw CrossCheckFailure("cocharacter lattice has wrong index for " + type.label() +
                                    " " + isogeny.label());
    }

    // --- roots in X-coords, coroots in Y-coords ----------------------------
    // X-coords of a character chi (given in simple-root coordinates c) are
    // its pairings with the rows of yBasis: c * yBasis^T.
    const IMat yT = transpose(rd.yBasis);
    auto toX = [&](const Vec16& c) {
        Vec16 x = zero_vec();
        for (int j = 0; j < n; ++j) {
            i64 s = 0;
            for (int i = 0; i < n; ++i) s += c[i] * yT.at(i, j);
            x[j] = s;
        }
        return x;
    };

    // Symmetrized form for lengths: (alpha, beta) with shortest norm 2.
    IMat sym(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) sym.at(i, j) = A.at(i, j) * relNorm[j];

    const int total = 2 * N;
    rd.rootsX.resize(total);
    rd.rootsLat.resize(total);
    rd.corootsY.resize(total);
    rd.rootRelNorm.resize(total);
    rd.rootHeight.resize(total);
    for (int i = 0; i < N; ++i) {
        const Vec16& c = positives[i];
        rd.rootsLat[i] = c;
        rd.rootsX[i] = toX(c);
        i64 norm2 = 0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) norm2 += c[a] * sym.at(a, b) * c[b];
        if (norm2 % 2 != 0) throw InvariantViolation("odd squared root length");
        rd.rootRelNorm[i] = static_cast<int>(norm2 / 2);
        rd.rootHeight[i] = static_cast<int>(heightOf(c));

        // alpha^vee = 2 alpha / (alpha, alpha) on the coroot side: in ambient
        // coords, alpha^vee = sum_i c_i relNorm_i / (norm2/2) * alpha_i^vee.
        std::vector<i64> amb(n, 0);
        for (int j = 0; j < n; ++j) {
            i64 s = 0;
            for (int a = 0; a < n; ++a) s += c[a] * relNorm[a] * A.at(j, a);
            if (s % rd.rootRelNorm[i] != 0)
                throw InvariantViolation("coroot is not integral");
            amb[j] = s / rd.rootRelNorm[i];
        }
        std::vector<i64> u;
        if (!solve_left_integer(rd.yBasis, amb, u))
            throw InvariantViolation("coroot does not lie in the cocharacter lattice");
        Vec16 uy = zero_vec();
        for (int j = 0; j < n; ++j) uy[j] = u[j];
        rd.corootsY[i] = uy;

        // Negative root.
        Vec16 nc = zero_vec(), nx = zero_vec(), nu = zero_vec();
        for (int j = 0; j < n; ++j) {
            nc[j] = -c[j];
            nx[j] = -rd.rootsX[i][j];
            nu[j] = -uy[j];
        }
        rd.rootsLat[N + i] = nc;
        rd.rootsX[N + i] = nx;
        rd.corootsY[N + i] = nu;
        rd.rootRelNorm[N + i] = rd.rootRelNorm[i];
        rd.rootHeight[N + i] = -rd.rootHeight[i];
    }

    // <alpha_i, alpha_j^vee> recovered from the stored coordinates must give
    // back the Cartan matrix.
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (dot(rd.rootsX[i], rd.corootsY[j], n) != A.at(i, j))
                throw CrossCheckFailure("stored roots/coroots do not reproduce the Cartan matrix");

    // --- fundamental group and centre --------------------------------------
    {
        IMat simpleCorootsY(n, n), simpleRootsX(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                simpleCorootsY.at(i, j) = rd.corootsY[i][j];
                simpleRootsX.at(i, j) = rd.rootsX[i][j];
            }
        rd.fundamentalGroup = cokernel_torsion(simpleCorootsY);
        rd.centerInvariants = cokernel_torsion(simpleRootsX);
    }
    i64 fg = 1;
    for (i64 d : rd.fundamentalGroup) fg *= d;
    if (fg != wanted)
        throw CrossCheckFailure("fundamental group order mismatch for " + type.label() + " " +
                                isogeny.label());

    return rd;
}

inline RootDatum build_root_datum(const std::string& type, const std::string& isogeny) {
    return build_root_datum(parse_type(type), parse_isogeny(isogeny));
}

// Torsion primes of the group: torsion primes of the root system together
// with the primes dividing the order of the fundamental group.
inline std::vector<int> torsion_primes(const RootDatum& rd) {
    std::vector<int> out = root_system_torsion_primes(rd.type);
    i64 fg = 1;
    for (i64 d : rd.fundamentalGroup) fg *= d;
    for (i64 p = 2; fg > 1; ++p) {
        if (p * p > fg) p = fg;
        if (fg % p != 0) continue;
        if (std::find(out.begin(), out.end(), static_cast<int>(p)) == out.end())
            out.push_back(static_cast<int>(p));
        while (fg % p == 0) fg /= p;
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Simple reflections as integer matrices acting on Y-coordinate columns.
inline std::vector<IMat> weyl_generators(const RootDatum& rd) {
    std::vector<IMat> gens;
    gens.reserve(rd.rank);
    for (int i = 0; i < rd.rank; ++i) gens.push_back(rd.reflection(i));
    return gens;
}

namespace detail {

// W-orbit of a weight given by its X-coords (reflections act on X by
// chi |-> chi - <chi, alpha_j^vee> alpha_j).
inline std::set<Vec16> weight_orbit(const RootDatum& rd, const Vec16& start) {
    std::set<Vec16> seen{start};
    std::vector<Vec16> frontier{start};
    while (!frontier.empty()) {
        std::vector<Vec16> next;
        for (const Vec16& w : frontier) {
            for (int j = 0; j < rd.rank; ++j) {
                i64 pair = dot(w, rd.corootsY[j], rd.rank);
                Vec16 v = w;
                for (int a = 0; a < rd.rank; ++a) v[a] -= pair * rd.rootsX[j][a];
                if (seen.insert(v).second) next.push_back(v);
            }
        }
        frontier = std::move(next);
    }
    return seen;
}

// X-coords of the fundamental weight omega_k, or nullopt-style failure if it
// does not lie in the character lattice of this isogeny type.
inline bool fundamental_weight_x(const RootDatum& rd, int k, Vec16& out) {
    const int n = rd.rank;
    // Simple-root coordinates of omega_k solve c * A = e_k (rationally).
    std::vector<i64> e(n, 0);
    e[k] = 1;
    i128 den = det_i128(rd.cartan);
    std::vector<i128> num(n);
    for (int j = 0; j < n; ++j) {
        IMat M = rd.cartan;
        for (int col = 0; col < n; ++col) M.at(j, col) = e[col];
        num[j] = det_i128(M);
    }
    // X-coords = c * yBasis^T; integral iff den divides every entry.
    for (int col = 0; col < n; ++col) {
        i128 s = 0;
        for (int j = 0; j < n; ++j) s += num[j] * static_cast<i128>(rd.yBasis.at(col, j));
        if (s % den != 0) return false;
        i128 q = s / den;
        out[col] = static_cast<i64>(q);
    }
    for (int col = n; col < MAX_RANK; ++col) out[col] = 0;
    return true;
}

}  // namespace detail

// Weight system of the adjoint module or of the minimal faithful-dimension
// module of the family (natural modules for classical types, the 7-, 26-,
// 27- and 56-dimensional modules for G2, F4, E6, E7).
inline WeightSystem weight_system(const RootDatum& rd, ModuleKind kind) {
    WeightSystem ws;
    const int n = rd.rank;
    if (kind == ModuleKind::Adjoint) {
        for (int i = 0; i < rd.rootCount(); ++i) {
            ws.weights.push_back(rd.rootsX[i]);
            ws.mult.push_back(1);
        }
        ws.weights.push_back(zero_vec());
        ws.mult.push_back(n);
        ws.dim = rd.rootCount() + n;
        return ws;
    }

    int highestNode = -1;  // Bourbaki node of the defining dominant weight
    int zeroMult = 0;
    int expectDim = 0;
    switch (rd.type.family) {
        case LieFamily::A: highestNode = 0; expectDim = n + 1; break;
        case LieFamily::B: highestNode = 0; zeroMult = 1; expectDim = 2 * n + 1; break;
        case LieFamily::C: highestNode = 0; expectDim = 2 * n; break;
        case LieFamily::D: highestNode = 0; expectDim = 2 * n; break;
        case LieFamily::G: highestNode = 0; zeroMult = 1; expectDim = 7; break;
        case LieFamily::F: highestNode = 3; zeroMult = 2; expectDim = 26; break;
        case LieFamily::E:
            if (n == 6) { highestNode = 0; expectDim = 27; }
            else if (n == 7) { highestNode = 6; expectDim = 56; }
            else throw UnsupportedModule("E8 has no module smaller than the adjoint one");
            break;
    }
    Vec16 top = zero_vec();
    if (!detail::fundamental_weight_x(rd, highestNode, top))
        throw UnsupportedModule("minimal module of " + rd.type.label() +
                                " is not a module of the " + rd.isogeny.label() + " form");
    std::set<Vec16> orbit = detail::weight_orbit(rd, top);
    for (const Vec16& w : orbit) {
        ws.weights.push_back(w);
        ws.mult.push_back(1);
    }
    if (zeroMult > 0) {
        ws.weights.push_back(zero_vec());
        ws.mult.push_back(zeroMult);
    }
    ws.dim = static_cast<int>(orbit.size()) + zeroMult;
    if (ws.dim != expectDim)
        throw CrossCheckFailure("minimal module of " + rd.type.label() + " has dimension " +
                                std::to_string(ws.dim) + ", expected " +
                                std::to_string(expectDim));
    return ws;
}

}  // namespace torsion_atlas
