// cyclotomic.hpp -- exact arithmetic in Z[zeta_p] for a prime p, with
// elements written in the power basis 1, zeta, ..., zeta^(p-2) (the p-th
// cyclotomic polynomial reduces zeta^(p-1) to -(1 + zeta + ... + zeta^(p-2))).
// This representation is a free Z-basis, so equality, integrality and
// reality tests are exact coefficient checks.
#pragma once

#include <string>
#include <vector>

#include "torsion_atlas/errors.hpp"
#include "torsion_atlas/intmat.hpp"

namespace torsion_atlas {

struct Cyclotomic {
    int p = 2;
    std::vector<i64> c;  // length p-1, coefficient of zeta^k at index k

    explicit Cyclotomic(int prime) : p(prime), c(static_cast<size_t>(prime - 1), 0) {
        if (prime < 2) throw InvariantViolation("cyclotomic order must be a prime >= 2");
    }

    static Cyclotomic integer(int prime, i64 v) {
        Cyclotomic z(prime);
        z.c[0] = v;
        return z;
    }

    // Add m * zeta^k (k arbitrary, reduced mod p).
    void add_root_power(i64 k, i64 m = 1) {
        i64 e = ((k % p) + p) % p;
        if (e <= p - 2) {
            c[static_cast<size_t>(e)] += m;
        } else {  // zeta^(p-1) = -(1 + zeta + ... + zeta^(p-2))
            for (i64& x : c) x -= m;
        }
    }

    Cyclotomic& operator+=(const Cyclotomic& o) {
        check_same(o);
        for (size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
        return *this;
    }
    Cyclotomic& operator-=(const Cyclotomic& o) {
        check_same(o);
        for (size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
        return *this;
    }
    friend Cyclotomic operator+(Cyclotomic a, const Cyclotomic& b) { return a += b; }
    friend Cyclotomic operator-(Cyclotomic a, const Cyclotomic& b) { return a -= b; }

    friend Cyclotomic operator*(const Cyclotomic& a, const Cyclotomic& b) {
        a.check_same(b);
        Cyclotomic r(a.p);
        for (size_t i = 0; i < a.c.size(); ++i) {
            if (a.c[i] == 0) continue;
            for (size_t j = 0; j < b.c.size(); ++j) {
                if (b.c[j] == 0) continue;
                r.add_root_power(static_cast<i64>(i + j), a.c[i] * b.c[j]);
            }
        }
        return r;
    }

    bool operator==(const Cyclotomic& o) const { return p == o.p && c == o.c; }

    Cyclotomic conjugate() const {  // zeta -> zeta^(-1)
        Cyclotomic r(p);
        for (size_t k = 0; k < c.size(); ++k)
            if (c[k] != 0) r.add_root_power(-static_cast<i64>(k), c[k]);
        return r;
    }

    bool is_integer() const {
        for (size_t k = 1; k < c.size(); ++k)
            if (c[k] != 0) return false;
        return true;
    }
    i64 to_integer() const {
        if (!is_integer()) throw InvariantViolation("cyclotomic value is not rational");
        return c[0];
    }
    bool is_real() const { return *this == conjugate(); }
    bool is_zero() const {
        for (i64 x : c)
            if (x != 0) return false;
        return true;
    }

    std::string to_string() const {
        std::string s;
        bool first = true;
        for (size_t k = 0; k < c.size(); ++k) {
            if (c[k] == 0) continue;
            if (!first) s += c[k] > 0 ? " + " : " - ";
            else if (c[k] < 0) s += "-";
            i64 a = c[k] < 0 ? -c[k] : c[k];
            std::string term;
            if (k == 0) term = std::to_string(a);
            else {
                if (a != 1) term = std::to_string(a) + "*";
                term += "z";
                if (k > 1) term += "^" + std::to_string(k);
            }
            s += term;
            first = false;
        }
        return first ? "0" : s;
    }

  private:
    void check_same(const Cyclotomic& o) const {
        if (p != o.p) throw InvariantViolation("mixed cyclotomic orders");
    }
};

}  // namespace torsion_atlas
