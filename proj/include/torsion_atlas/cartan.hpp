// cartan.hpp -- hard-coded per-family data: Cartan matrices in Bourbaki
// numbering, relative root lengths, reflection-group degrees, and the
// torsion primes of each irreducible root system.
#pragma once

#include <string>
#include <vector>

#include "torsion_atlas/errors.hpp"
#include "torsion_atlas/intmat.hpp"

namespace torsion_atlas {

enum class LieFamily : char { A = 'A', B = 'B', C = 'C', D = 'D', E = 'E', F = 'F', G = 'G' };

struct LieType {
    LieFamily family = LieFamily::A;
    int rank = 1;

    std::string label() const {
        return std::string(1, static_cast<char>(family)) + std::to_string(rank);
    }
    bool operator==(const LieType& o) const { return family == o.family && rank == o.rank; }
};

inline void validate_type(const LieType& t) {
    const int n = t.rank;
    bool ok = false;
    switch (t.family) {
        case LieFamily::A: ok = n >= 1; break;
        case LieFamily::B: ok = n >= 2; break;
        case LieFamily::C: ok = n >= 2; break;
        case LieFamily::D: ok = n >= 3; break;
        case LieFamily::E: ok = n >= 6 && n <= 8; break;
        case LieFamily::F: ok = n == 4; break;
        case LieFamily::G: ok = n == 2; break;
    }
    if (!ok) throw UnsupportedModule("no simple type " + t.label());
    if (n > MAX_RANK) throw UnsupportedModule("rank exceeds compiled maximum of 16");
}

inline LieType parse_type(const std::string& s) {
    if (s.size() < 2) throw UnsupportedModule("cannot parse type '" + s + "'");
    char f = s[0];
    if (f >= 'a' && f <= 'g') f = static_cast<char>(f - 'a' + 'A');
    if (f < 'A' || f > 'G') throw UnsupportedModule("cannot parse type '" + s + "'");
    int n = 0;
    for (size_t i = 1; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') throw UnsupportedModule("cannot parse type '" + s + "'");
        n = n * 10 + (s[i] - '0');
    }
    LieType t{static_cast<LieFamily>(f), n};
    validate_type(t);
    return t;
}

// Cartan matrix A[i][j] = <alpha_i, alpha_j^vee>, Bourbaki numbering.
inline IMat cartan_matrix(const LieType& t) {
    validate_type(t);
    const int n = t.rank;
    IMat A(n, n);
    for (int i = 0; i < n; ++i) A.at(i, i) = 2;
    auto link = [&](int i, int j) { A.at(i, j) = -1; A.at(j, i) = -1; };
    switch (t.family) {
        case LieFamily::A:
            for (int i = 0; i + 1 < n; ++i) link(i, i + 1);
            break;
        case LieFamily::B:  // alpha_n short
            for (int i = 0; i + 1 < n; ++i) link(i, i + 1);
            A.at(n - 2, n - 1) = -2;
            break;
        case LieFamily::C:  // alpha_n long
            for (int i = 0; i + 1 < n; ++i) link(i, i + 1);
            A.at(n - 1, n - 2) = -2;
            break;
        case LieFamily::D:
            for (int i = 0; i + 1 < n - 1; ++i) link(i, i + 1);
            link(n - 3, n - 1);
            break;
        case LieFamily::E:
            // chain 1-3-4-5-6(-7)(-8), node 2 hangs off node 4
            link(0, 2);
            for (int i = 2; i + 1 < n; ++i) link(i, i + 1);
            link(1, 3);
            break;
        case LieFamily::F:  // alpha_1, alpha_2 long; alpha_3, alpha_4 short
            link(0, 1); link(1, 2); link(2, 3);
            A.at(1, 2) = -2;
            break;
        case LieFamily::G:  // alpha_1 short, alpha_2 long
            A.at(0, 1) = -1;
            A.at(1, 0) = -3;
            break;
    }
    return A;
}

// Relative squared lengths of the simple roots, shortest = 1.
inline std::vector<int> simple_root_rel_norms(const LieType& t) {
    const int n = t.rank;
    std::vector<int> d(n, 1);
    switch (t.family) {
        case LieFamily::B: for (int i = 0; i + 1 < n; ++i) d[i] = 2; break;
        case LieFamily::C: d[n - 1] = 2; break;
        case LieFamily::F: d[0] = d[1] = 2; break;
        case LieFamily::G: d[1] = 3; break;
        default: break;
    }
    return d;
}

inline std::vector<int> reflection_degrees(const LieType& t) {
    const int n = t.rank;
    std::vector<int> deg;
    switch (t.family) {
        case LieFamily::A: for (int i = 2; i <= n + 1; ++i) deg.push_back(i); break;
        case LieFamily::B:
        case LieFamily::C: for (int i = 1; i <= n; ++i) deg.push_back(2 * i); break;
        case LieFamily::D:
            for (int i = 1; i < n; ++i) deg.push_back(2 * i);
            deg.push_back(n);
            break;
        case LieFamily::G: deg = {2, 6}; break;
        case LieFamily::F: deg = {2, 6, 8, 12}; break;
        case LieFamily::E:
            if (n == 6) deg = {2, 5, 6, 8, 9, 12};
            else if (n == 7) deg = {2, 6, 8, 10, 12, 14, 18};
            else deg = {2, 8, 12, 14, 18, 20, 24, 30};
            break;
    }
    return deg;
}

inline u64 weyl_order(const LieType& t) {
    u64 o = 1;
    for (int d : reflection_degrees(t)) o *= static_cast<u64>(d);
    return o;
}

inline int root_count(const LieType& t) {
    const int n = t.rank;
    switch (t.family) {
        case LieFamily::A: return n * (n + 1);
        case LieFamily::B:
        case LieFamily::C: return 2 * n * n;
        case LieFamily::D: return 2 * n * (n - 1);
        case LieFamily::G: return 12;
        case LieFamily::F: return 48;
        case LieFamily::E: return n == 6 ? 72 : (n == 7 ? 126 : 240);
    }
    return 0;
}

inline int group_dimension(const LieType& t) { return root_count(t) + t.rank; }

// Torsion primes of the irreducible *root system* (isogeny-independent part;
// the group-level set also picks up primes from the fundamental group).
inline std::vector<int> root_system_torsion_primes(const LieType& t) {
    switch (t.family) {
        case LieFamily::A: return {};
        case LieFamily::B: return t.rank >= 3 ? std::vector<int>{2} : std::vector<int>{};
        case LieFamily::C: return {};
        case LieFamily::D: return t.rank >= 4 ? std::vector<int>{2} : std::vector<int>{};
        case LieFamily::G: return {2};
        case LieFamily::F: return {2, 3};
        case LieFamily::E: return t.rank <= 7 ? std::vector<int>{2, 3} : std::vector<int>{2, 3, 5};
    }
    return {};
}

}  // namespace torsion_atlas
