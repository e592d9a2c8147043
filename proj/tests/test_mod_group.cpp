// Tests for the mod-m matrix group kernel: matrix arithmetic, orbit trees,
// stabilizer chains and the full-domain orbit partition.  The oracle
// throughout is explicit element enumeration: for small Weyl groups the whole
// matrix group is materialized by closure under multiplication, and orders,
// stabilizers and orbits are counted directly against it.

#include <catch2/catch_amalgamated.hpp>

#include <unordered_set>

#include "torsion_atlas/modgroup.hpp"
#include "torsion_atlas/root_datum.hpp"

using namespace torsion_atlas;

namespace {

// All elements of the group generated by `gens`, by breadth-first closure.
std::vector<PMat> element_closure(const std::vector<PMat>& gens, int mod) {
  REQUIRE(!gens.empty());
  std::vector<PMat> elems;
  std::unordered_set<PMat, PMatHash> seen;
  PMat id = PMat::identity(gens[0].n);
  elems.push_back(id);
  seen.insert(id);
  for (size_t qi = 0; qi < elems.size(); ++qi)
    for (const PMat& g : gens) {
      PMat h = pmat_mul(elems[qi], g, mod);
      if (seen.insert(h).second) elems.push_back(h);
      REQUIRE(elems.size() <= 100000);
    }
  return elems;
}

ModMatrixGroup weyl_mod_group(const RootDatum& rd, int mod, bool setOrder) {
  ModMatrixGroup g;
  g.modulus = mod;
  g.rank = rd.rank;
  for (int i = 0; i < rd.rank; ++i)
    g.generators.push_back(pmat_from_imat(rd.reflection(i), mod));
  if (setOrder) g.knownOrder = rd.weylOrder;
  return g;
}

}  // namespace

TEST_CASE("mod-m matrix arithmetic") {
  SECTION("inverse over prime fields") {
    for (int p : {2, 3, 5, 7, 11, 13}) {
      std::mt19937_64 rng(7 * p);
      for (int trial = 0; trial < 40; ++trial) {
        int n = 1 + int(rng() % 5);
        PMat m;
        m.n = n;
        // Random invertible: random entries until the Gauss inverse succeeds.
        for (;;) {
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m.at(i, j) = uint8_t(rng() % u64(p));
          try {
            PMat inv = pmat_inverse_prime(m, p);
            REQUIRE(pmat_mul(m, inv, p).is_identity());
            REQUIRE(pmat_mul(inv, m, p).is_identity());
            break;
          } catch (const InvariantViolation&) {
            continue;  // singular draw; redraw
          }
        }
      }
    }
  }

  SECTION("inverse mod 4 by Newton lift") {
    std::mt19937_64 rng(99);
    int tested = 0;
    while (tested < 60) {
      int n = 1 + int(rng() % 5);
      PMat m;
      m.n = n;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.at(i, j) = uint8_t(rng() % 4);
      // Invertible mod 4 iff invertible mod 2.
      try {
        pmat_inverse_prime(pmat_reduce(m, 2), 2);
      } catch (const InvariantViolation&) {
        continue;
      }
      PMat inv = pmat_inverse(m, 4);
      REQUIRE(pmat_mul(m, inv, 4).is_identity());
      REQUIRE(pmat_mul(inv, m, 4).is_identity());
      ++tested;
    }
  }

  SECTION("pack/unpack round trip") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
      int r = 1 + int(rng() % MAX_RANK);
      PVec v{};
      for (int i = 0; i < r; ++i) v[i] = uint8_t(rng() % 13);
      REQUIRE(unpack_vec(pack_vec(v, r), r) == v);
    }
  }
}

TEST_CASE("stabilizer chains against explicit element lists") {
  struct Case {
    const char* type;
    int mod;
  };
  const Case cases[] = {
      {"A1", 4}, {"A2", 5}, {"A3", 3}, {"B2", 3}, {"B2", 4},
      {"C3", 5}, {"G2", 4}, {"G2", 7}, {"A2", 4}, {"B3", 4},
  };
  for (const Case& c : cases) {
    RootDatum rd = build_root_datum(c.type, "sc");
    ModMatrixGroup g = weyl_mod_group(rd, c.mod, true);
    std::vector<PMat> elems = element_closure(g.generators, c.mod);
    INFO(c.type << " mod " << c.mod);
    // Mod 4 and mod p >= 3 are faithful, so closure size equals |W|.
    REQUIRE(u64(elems.size()) == rd.weylOrder);

    SECTION(std::string("group order: ") + c.type + " mod " + std::to_string(c.mod)) {
      REQUIRE(group_order(g) == rd.weylOrder);
      // Deterministic path (no declared order) must agree.
      ModMatrixGroup noOrder = g;
      noOrder.knownOrder.reset();
      REQUIRE(group_order(noOrder) == rd.weylOrder);
    }

    SECTION(std::string("membership: ") + c.type + " mod " + std::to_string(c.mod)) {
      Bsgs chain = Bsgs::build(g, {});
      for (size_t i = 0; i < elems.size(); i += std::max<size_t>(1, elems.size() / 25))
        REQUIRE(chain.contains(elems[i]));
      // A scalar that is not ±1 cannot lie in a reflection group image.
      if (c.mod >= 5) {
        PMat twice = PMat::identity(rd.rank);
        for (int i = 0; i < rd.rank; ++i) twice.at(i, i) = 2;
        REQUIRE(!chain.contains(twice));
      }
    }

    SECTION(std::string("point stabilizers: ") + c.type + " mod " + std::to_string(c.mod)) {
      // Stabilizer of e_0, ambient mode: oracle counts fixing elements.
      PVec e0{};
      e0[0] = 1;
      u64 key = pack_vec(e0, rd.rank);
      u64 fixCount = 0;
      for (const PMat& m : elems)
        if (apply_point(g, m, key, ActionMode::Ambient) == key) ++fixCount;
      Bsgs chain = Bsgs::build(g, {{ActionMode::Ambient, key}});
      StabilizerHandle h = chain.stabilizer(1);
      REQUIRE(h.order == fixCount);
      for (const PMat& m : h.generators)
        REQUIRE(apply_point(g, m, key, ActionMode::Ambient) == key);
    }
  }
}

TEST_CASE("induced mod-2 stabilizers are full preimages") {
  // W(A1) = {1, s} acts mod 4 by [1] and [3].  Mod 2 both are the identity,
  // so the mod-2 stabilizer of the vector (1) is the whole group of order 2,
  // kernel included.
  RootDatum rd = build_root_datum("A1", "sc");
  ModMatrixGroup g = weyl_mod_group(rd, 4, true);
  PVec v{};
  v[0] = 1;
  Bsgs chain = Bsgs::build(g, {{ActionMode::InducedMod2, pack_vec(v, 1)}});
  REQUIRE(chain.order() == 2);
  REQUIRE(chain.stabilizer(1).order == 2);

  // Same phenomenon for B2: -I is in the kernel of reduction, so every mod-2
  // point stabilizer picks it up.
  RootDatum rdB = build_root_datum("B2", "sc");
  ModMatrixGroup gB = weyl_mod_group(rdB, 4, true);
  std::vector<PMat> elems = element_closure(gB.generators, 4);
  PVec w{};
  w[0] = 1;
  u64 wKey = pack_vec(w, 2);
  u64 fixCount = 0;
  for (const PMat& m : elems)
    if (apply_point(gB, m, wKey, ActionMode::InducedMod2) == wKey) ++fixCount;
  Bsgs chainB = Bsgs::build(gB, {{ActionMode::InducedMod2, wKey}});
  REQUIRE(chainB.stabilizer(1).order == fixCount);
  PMat minusI = PMat::identity(2);
  minusI.at(0, 0) = 3;
  minusI.at(1, 1) = 3;
  REQUIRE(std::find(elems.begin(), elems.end(), minusI) != elems.end());
  // -I fixes every mod-2 point, so it must be counted.
  REQUIRE(fixCount % 2 == 0);
}

TEST_CASE("full-domain orbit partition") {
  for (const char* type : {"A2", "B2", "G2", "A3", "B3"}) {
    for (int p : {2, 3}) {
      RootDatum rd = build_root_datum(type, "sc");
      ModMatrixGroup g = weyl_mod_group(rd, p == 2 ? 4 : p, true);
      ActionMode mode = p == 2 ? ActionMode::InducedMod2 : ActionMode::Ambient;
      OrbitPartition part = orbit_partition(g, mode);
      INFO(type << " p=" << p);
      u64 domain = 1;
      for (int i = 0; i < rd.rank; ++i) domain *= u64(p);
      REQUIRE(part.domain == domain);
      // Sizes sum to the domain; the zero vector is alone in its orbit.
      u64 sum = 0;
      for (u64 s : part.orbitSize) sum += s;
      REQUIRE(sum == domain);
      REQUIRE(part.orbitOf[part.index_of_key(0)] < part.repKey.size());
      REQUIRE(part.orbitSize[part.orbitOf[part.index_of_key(0)]] == 1);

      // Oracle: explicit orbits from the element list.
      std::vector<PMat> elems = element_closure(g.generators, g.modulus);
      std::vector<u64> lexOrder;  // domain keys in lex order
      {
        PVec v{};
        for (u64 lex = 0; lex < domain; ++lex) {
          u64 x = lex;
          for (int i = rd.rank - 1; i >= 0; --i) {
            v[i] = uint8_t(x % u64(p));
            x /= u64(p);
          }
          lexOrder.push_back(pack_vec(v, rd.rank));
        }
      }
      for (u64 key : lexOrder) {
        std::unordered_set<u64> orbit;
        for (const PMat& m : elems) orbit.insert(apply_point(g, m, key, mode));
        uint32_t id = part.orbitOf[part.index_of_key(key)];
        REQUIRE(part.orbitSize[id] == orbit.size());
        // The recorded representative lies in the orbit and is lex-minimal:
        // no strictly earlier lex key shares the orbit.
        REQUIRE(orbit.count(part.repKey[id]) == 1);
        for (u64 other : lexOrder) {
          if (other == part.repKey[id]) break;
          REQUIRE(orbit.count(other) == 0);
        }
      }
    }
  }
}

TEST_CASE("chain determinism") {
  RootDatum rd = build_root_datum("F4", "sc");
  ModMatrixGroup g = weyl_mod_group(rd, 4, true);
  Bsgs c1 = Bsgs::build(g, {});
  Bsgs c2 = Bsgs::build(g, {});
  REQUIRE(c1.order() == c2.order());
  REQUIRE(c1.level_count() == c2.level_count());
  for (size_t i = 0; i < c1.level_count(); ++i)
    REQUIRE(c1.level(i).tree.size() == c2.level(i).tree.size());
}
