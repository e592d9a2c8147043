// Root data of all simple types and isogeny variants, checked against
// independent closed-form oracles: root counts, Weyl orders as explicit
// factorials, centre orders as Cartan determinants, fundamental groups,
// torsion primes, reflection relations, weight systems.
#include <catch2/catch_amalgamated.hpp>

#include "torsion_atlas/root_datum.hpp"

using namespace torsion_atlas;

namespace {

u64 factorial(int n) {
    u64 f = 1;
    for (int i = 2; i <= n; ++i) f *= static_cast<u64>(i);
    return f;
}

// Closed-form Weyl group orders, independent of the degree lists.
u64 weyl_order_oracle(const LieType& t) {
    const int n = t.rank;
    switch (t.family) {
        case LieFamily::A: return factorial(n + 1);
        case LieFamily::B:
        case LieFamily::C: return (u64{1} << n) * factorial(n);
        case LieFamily::D: return (u64{1} << (n - 1)) * factorial(n);
        case LieFamily::G: return 12;
        case LieFamily::F: return 1152;
        case LieFamily::E: return n == 6 ? 51840u : (n == 7 ? 2903040u : 696729600u);
    }
    return 0;
}

i64 center_order_oracle(const LieType& t) {
    switch (t.family) {
        case LieFamily::A: return t.rank + 1;
        case LieFamily::B:
        case LieFamily::C: return 2;
        case LieFamily::D: return 4;
        case LieFamily::E: return t.rank == 6 ? 3 : (t.rank == 7 ? 2 : 1);
        default: return 1;
    }
}

int matrix_order(const IMat& m, int cap = 64) {
    IMat p = m;
    for (int k = 1; k <= cap; ++k) {
        if (p == IMat::identity(m.rows)) return k;
        p = mat_mul(p, m);
    }
    return -1;
}

const std::vector<LieType> kAllTypes = {
    {LieFamily::A, 1}, {LieFamily::A, 2}, {LieFamily::A, 3}, {LieFamily::A, 5},
    {LieFamily::B, 2}, {LieFamily::B, 3}, {LieFamily::B, 4},
    {LieFamily::C, 2}, {LieFamily::C, 3}, {LieFamily::C, 4},
    {LieFamily::D, 3}, {LieFamily::D, 4}, {LieFamily::D, 5}, {LieFamily::D, 6},
    {LieFamily::G, 2}, {LieFamily::F, 4},
    {LieFamily::E, 6}, {LieFamily::E, 7}, {LieFamily::E, 8},
};

}  // namespace

TEST_CASE("type parsing and validation") {
    REQUIRE(parse_type("E8").label() == "E8");
    REQUIRE(parse_type("a3").label() == "A3");
    REQUIRE_THROWS_AS(parse_type("E9"), UnsupportedModule);
    REQUIRE_THROWS_AS(parse_type("B1"), UnsupportedModule);
    REQUIRE_THROWS_AS(parse_type("D2"), UnsupportedModule);
    REQUIRE_THROWS_AS(parse_type("H4"), UnsupportedModule);
    REQUIRE_THROWS_AS(parse_type("A20"), UnsupportedModule);
}

TEST_CASE("Cartan matrices: determinants and symmetrizability") {
    for (const LieType& t : kAllTypes) {
        INFO(t.label());
        IMat a = cartan_matrix(t);
        REQUIRE(static_cast<i64>(det_i128(a)) == center_order_oracle(t));
        std::vector<int> d = simple_root_rel_norms(t);
        for (int i = 0; i < t.rank; ++i) {
            REQUIRE(a.at(i, i) == 2);
            for (int j = 0; j < t.rank; ++j) {
                // A[i][j] d[j] is symmetric, and off-diagonal signs match.
                REQUIRE(a.at(i, j) * d[j] == a.at(j, i) * d[i]);
                if (i != j) REQUIRE((a.at(i, j) == 0) == (a.at(j, i) == 0));
            }
        }
    }
}

TEST_CASE("root systems close to the correct size with the right lengths") {
    for (const LieType& t : kAllTypes) {
        INFO(t.label());
        RootDatum rd = build_root_datum(t, {IsogenyKind::SimplyConnected, 1});
        REQUIRE(rd.rootCount() == root_count(t));
        REQUIRE(rd.weylOrder == weyl_order_oracle(t));

        // Highest root height is the Coxeter number minus one.
        int h = root_count(t) / t.rank;
        REQUIRE(rd.rootHeight[rd.positiveCount - 1] == h - 1);

        // Length statistics: counts of long roots per family.
        int longCount = 0;
        for (int i = 0; i < rd.rootCount(); ++i)
            if (rd.rootRelNorm[i] > 1) ++longCount;
        int expectLong = 0;
        switch (t.family) {
            case LieFamily::B: expectLong = 2 * t.rank * (t.rank - 1); break;
            case LieFamily::C: expectLong = 2 * t.rank; break;
            case LieFamily::F: expectLong = 24; break;
            case LieFamily::G: expectLong = 6; break;
            default: expectLong = 0; break;
        }
        REQUIRE(longCount == expectLong);

        // Simples come first, in order.
        for (int i = 0; i < t.rank; ++i) {
            REQUIRE(rd.rootHeight[i] == 1);
            for (int j = 0; j < t.rank; ++j)
                REQUIRE(rd.rootsLat[i][j] == (i == j ? 1 : 0));
        }
        // Negatives mirror positives.
        for (int i = 0; i < rd.positiveCount; ++i)
            for (int j = 0; j < t.rank; ++j)
                REQUIRE(rd.rootsLat[i + rd.positiveCount][j] == -rd.rootsLat[i][j]);
    }
}

TEST_CASE("simply connected basis is the simple coroots; pairing is the dot product") {
    for (const LieType& t : kAllTypes) {
        INFO(t.label());
        RootDatum rd = build_root_datum(t, {IsogenyKind::SimplyConnected, 1});
        IMat at = transpose(rd.cartan);
        REQUIRE(rd.yBasis == at);
        // In sc coordinates the i-th simple coroot is the i-th basis vector
        // and the i-th simple root has the i-th Cartan row as coordinates.
        for (int i = 0; i < t.rank; ++i)
            for (int j = 0; j < t.rank; ++j) {
                REQUIRE(rd.corootsY[i][j] == (i == j ? 1 : 0));
                REQUIRE(rd.rootsX[i][j] == rd.cartan.at(i, j));
            }
        REQUIRE(rd.pairingMatrix == IMat::identity(t.rank));
    }
}

TEST_CASE("fundamental groups across the isogeny lattice") {
    auto fg = [](const std::string& type, const std::string& iso) {
        return build_root_datum(type, iso).fundamentalGroup;
    };
    REQUIRE(fg("A3", "sc").empty());
    REQUIRE(fg("A3", "ad") == std::vector<i64>{4});
    REQUIRE(fg("A3", "int:2") == std::vector<i64>{2});
    REQUIRE(fg("A5", "int:3") == std::vector<i64>{3});
    REQUIRE(fg("D4", "so") == std::vector<i64>{2});
    REQUIRE(fg("D4", "hspin-plus") == std::vector<i64>{2});
    REQUIRE(fg("D4", "hspin-minus") == std::vector<i64>{2});
    REQUIRE(fg("D4", "ad") == (std::vector<i64>{2, 2}));
    REQUIRE(fg("D5", "ad") == std::vector<i64>{4});
    REQUIRE(fg("D5", "so") == std::vector<i64>{2});
    REQUIRE(fg("E6", "ad") == std::vector<i64>{3});
    REQUIRE(fg("E7", "ad") == std::vector<i64>{2});
    REQUIRE(fg("E8", "sc").empty());
    REQUIRE(fg("E8", "ad").empty());

    // Centre character groups go the other way.
    REQUIRE(build_root_datum("A3", "sc").centerInvariants == std::vector<i64>{4});
    REQUIRE(build_root_datum("A3", "ad").centerInvariants.empty());
    REQUIRE(build_root_datum("A3", "int:2").centerInvariants == std::vector<i64>{2});
    REQUIRE(build_root_datum("D4", "sc").centerInvariants == (std::vector<i64>{2, 2}));

    // The three order-2 quotients of even D are genuinely different lattices.
    IMat so = build_root_datum("D4", "so").yBasis;
    IMat hp = build_root_datum("D4", "hspin-plus").yBasis;
    IMat hm = build_root_datum("D4", "hspin-minus").yBasis;
    REQUIRE_FALSE(so == hp);
    REQUIRE_FALSE(so == hm);
    REQUIRE_FALSE(hp == hm);
}

TEST_CASE("illegal isogenies are refused") {
    REQUIRE_THROWS_AS(build_root_datum("A3", "int:3"), IllegalIsogeny);
    REQUIRE_THROWS_AS(build_root_datum("E8", "int:2"), IllegalIsogeny);
    REQUIRE_THROWS_AS(build_root_datum("D4", "int:2"), IllegalIsogeny);  // ambiguous
    REQUIRE_THROWS_AS(build_root_datum("D5", "hspin-plus"), IllegalIsogeny);
    REQUIRE_THROWS_AS(build_root_datum("B3", "so"), IllegalIsogeny);
    REQUIRE_THROWS_AS(build_root_datum("A2", "nonsense"), IllegalIsogeny);
    // Degenerate intermediates canonicalize instead of failing.
    REQUIRE(build_root_datum("A3", "int:1").isogeny.kind == IsogenyKind::SimplyConnected);
    REQUIRE(build_root_datum("A3", "int:4").isogeny.kind == IsogenyKind::Adjoint);
    REQUIRE(build_root_datum("D5", "int:2").isogeny.kind == IsogenyKind::SpecialOrthogonal);
    // Trivial centre: sc and ad give the same lattice (with different bases).
    REQUIRE(hnf_row_basis(build_root_datum("E8", "ad").yBasis) ==
            hnf_row_basis(build_root_datum("E8", "sc").yBasis));
}

TEST_CASE("torsion primes") {
    auto tp = [](const std::string& type, const std::string& iso) {
        RootDatum rd = build_root_datum(type, iso);
        return torsion_primes(rd);
    };
    REQUIRE(tp("A1", "sc").empty());
    REQUIRE(tp("A1", "ad") == std::vector<int>{2});
    REQUIRE(tp("A2", "ad") == std::vector<int>{3});
    REQUIRE(tp("A5", "int:2") == std::vector<int>{2});
    REQUIRE(tp("A5", "ad") == (std::vector<int>{2, 3}));
    REQUIRE(tp("B2", "sc").empty());
    REQUIRE(tp("B2", "ad") == std::vector<int>{2});
    REQUIRE(tp("B3", "sc") == std::vector<int>{2});
    REQUIRE(tp("C3", "sc").empty());
    REQUIRE(tp("C3", "ad") == std::vector<int>{2});
    REQUIRE(tp("D3", "sc").empty());
    REQUIRE(tp("D4", "sc") == std::vector<int>{2});
    REQUIRE(tp("G2", "sc") == std::vector<int>{2});
    REQUIRE(tp("F4", "sc") == (std::vector<int>{2, 3}));
    REQUIRE(tp("E6", "sc") == (std::vector<int>{2, 3}));
    REQUIRE(tp("E6", "ad") == (std::vector<int>{2, 3}));
    REQUIRE(tp("E7", "sc") == (std::vector<int>{2, 3}));
    REQUIRE(tp("E8", "sc") == (std::vector<int>{2, 3, 5}));
}

TEST_CASE("reflections satisfy the Coxeter relations") {
    for (const std::string& iso : {"sc", "ad"}) {
        for (const LieType& t : {parse_type("A3"), parse_type("B3"), parse_type("G2"),
                                 parse_type("F4"), parse_type("D4")}) {
            INFO(t.label() << " " << iso);
            RootDatum rd = build_root_datum(t, parse_isogeny(iso));
            std::vector<IMat> s = weyl_generators(rd);
            for (int i = 0; i < t.rank; ++i) {
                REQUIRE(matrix_order(s[i]) == 2);
                i128 d = det_i128(s[i]);
                REQUIRE(d == -1);
                for (int j = i + 1; j < t.rank; ++j) {
                    int aij = static_cast<int>(rd.cartan.at(i, j) * rd.cartan.at(j, i));
                    int want = aij == 0 ? 2 : (aij == 1 ? 3 : (aij == 2 ? 4 : 6));
                    REQUIRE(matrix_order(mat_mul(s[i], s[j])) == want);
                }
            }
        }
    }
    // Reflections in non-simple roots are conjugate involutions.
    RootDatum rd = build_root_datum("F4", "sc");
    for (int k = 0; k < rd.rootCount(); k += 7) REQUIRE(matrix_order(rd.reflection(k)) == 2);
}

TEST_CASE("weight systems of adjoint and minimal modules") {
    auto dim = [](const std::string& type, const std::string& iso, ModuleKind k) {
        RootDatum rd = build_root_datum(type, iso);
        return weight_system(rd, k).dim;
    };
    REQUIRE(dim("E8", "sc", ModuleKind::Adjoint) == 248);
    REQUIRE(dim("E7", "ad", ModuleKind::Adjoint) == 133);
    REQUIRE(dim("G2", "sc", ModuleKind::Adjoint) == 14);
    REQUIRE(dim("B3", "ad", ModuleKind::Adjoint) == 21);

    REQUIRE(dim("A3", "sc", ModuleKind::Minimal) == 4);
    REQUIRE(dim("B3", "sc", ModuleKind::Minimal) == 7);
    REQUIRE(dim("B3", "ad", ModuleKind::Minimal) == 7);
    REQUIRE(dim("C3", "sc", ModuleKind::Minimal) == 6);
    REQUIRE(dim("D4", "sc", ModuleKind::Minimal) == 8);
    REQUIRE(dim("D4", "so", ModuleKind::Minimal) == 8);
    REQUIRE(dim("G2", "sc", ModuleKind::Minimal) == 7);
    REQUIRE(dim("F4", "sc", ModuleKind::Minimal) == 26);
    REQUIRE(dim("E6", "sc", ModuleKind::Minimal) == 27);
    REQUIRE(dim("E7", "sc", ModuleKind::Minimal) == 56);

    REQUIRE_THROWS_AS(dim("A3", "ad", ModuleKind::Minimal), UnsupportedModule);
    REQUIRE_THROWS_AS(dim("C3", "ad", ModuleKind::Minimal), UnsupportedModule);
    REQUIRE_THROWS_AS(dim("D4", "ad", ModuleKind::Minimal), UnsupportedModule);
    REQUIRE_THROWS_AS(dim("D4", "hspin-plus", ModuleKind::Minimal), UnsupportedModule);
    REQUIRE_THROWS_AS(dim("E6", "ad", ModuleKind::Minimal), UnsupportedModule);
    REQUIRE_THROWS_AS(dim("E7", "ad", ModuleKind::Minimal), UnsupportedModule);
    REQUIRE_THROWS_AS(dim("E8", "sc", ModuleKind::Minimal), UnsupportedModule);

    // Weight multiplicities sum to the dimension.
    RootDatum rd = build_root_datum("F4", "sc");
    WeightSystem ws = weight_system(rd, ModuleKind::Minimal);
    int total = 0;
    for (int m : ws.mult) total += m;
    REQUIRE(total == ws.dim);
}

TEST_CASE("weights are invariant under the Weyl group as a set") {
    RootDatum rd = build_root_datum("E6", "sc");
    WeightSystem ws = weight_system(rd, ModuleKind::Minimal);
    std::set<Vec16> bag(ws.weights.begin(), ws.weights.end());
    for (int j = 0; j < rd.rank; ++j) {
        for (const Vec16& w : ws.weights) {
            i64 pair = dot(w, rd.corootsY[j], rd.rank);
            Vec16 img = w;
            for (int a = 0; a < rd.rank; ++a) img[a] -= pair * rd.rootsX[j][a];
            REQUIRE(bag.count(img) == 1);
        }
    }
}
