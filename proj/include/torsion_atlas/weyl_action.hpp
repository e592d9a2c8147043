#pragma once

// The Weyl group acting on the cocharacter lattice mod p.
//
// Toral elementary abelian p-subgroups of a simple algebraic group (p not the
// defining characteristic) live inside a maximal torus, and conjugacy of such
// subgroups is controlled by the Weyl group acting on Y/pY.  For odd p the
// reduction W -> GL(Y/pY) is faithful; for p = 2 it need not be, so the group
// is stored mod 4 (always faithful) and acts on Y/2Y through reduction.
// Stabilizers taken through the reduced action are then full preimages, which
// is what centralizer component groups need.
//
// Subspaces of (F_p)^r are represented by reduced row echelon bases, which
// are canonical per subspace, and packed into 256-bit keys for hashing.

#include <algorithm>
#include <unordered_map>
#include <vector>

#include "torsion_atlas/errors.hpp"
#include "torsion_atlas/modgroup.hpp"
#include "torsion_atlas/root_datum.hpp"

namespace torsion_atlas {

// The Weyl group of a root datum in its mod-p incarnation.  Holds its own
// copy of the datum, so the action stays valid independently of the caller's
// object lifetimes.
struct WeylModAction {
  RootDatum datum;
  int p = 0;              // the prime; subspaces live over F_p
  ModMatrixGroup group;   // matrices mod p (odd) or mod 4 (p = 2), faithful
  ActionMode mode = ActionMode::Ambient;  // how matrices act on F_p^r points
  u64 weylOrder = 0;      // |W| = order of `group`

  int rank() const { return datum.rank; }
  // Matrices reduced to F_p, for the subspace action (same as `group` for
  // odd p; the mod-2 reductions for p = 2).
  std::vector<PMat> pGens;
};

inline WeylModAction make_weyl_action(const RootDatum& rd, int p) {
  if (p < 2 || !is_prime_u64(u64(p))) throw NonPrime(p);
  if (p > 13)
    throw UnsupportedModule("mod-p Weyl action supports p <= 13 only");
  WeylModAction act;
  act.datum = rd;
  act.p = p;
  act.group.modulus = (p == 2) ? 4 : p;
  act.group.rank = rd.rank;
  act.group.knownOrder = rd.weylOrder;
  act.weylOrder = rd.weylOrder;
  act.mode = (p == 2) ? ActionMode::InducedMod2 : ActionMode::Ambient;
  for (int i = 0; i < rd.rank; ++i) {
    PMat m = pmat_from_imat(rd.reflection(i), act.group.modulus);
    act.group.generators.push_back(m);
    act.pGens.push_back(p == 2 ? pmat_reduce(m, 2) : m);
  }
  return act;
}

// Order of the kernel of the mod-2 reduction of the mod-4 group (1 for odd
// p).  The mod-4 representation itself is faithful, so this measures exactly
// how much the naive mod-2 action forgets.
inline u64 mod2_kernel_order(const WeylModAction& act) {
  if (act.p != 2) return 1;
  ModMatrixGroup reduced;
  reduced.modulus = 2;
  reduced.rank = act.group.rank;
  for (const PMat& m : act.group.generators)
    reduced.generators.push_back(pmat_reduce(m, 2));
  u64 imageOrder = group_order(reduced);  // deterministic chain, domain 2^r
  if (act.weylOrder % imageOrder != 0)
    throw InvariantViolation("mod2_kernel_order: image order does not divide");
  return act.weylOrder / imageOrder;
}

// ---------------------------------------------------------------------------
// Vector orbits.

struct VectorOrbitSummary {
  PVec rep{};     // lexicographically smallest vector in the orbit
  u64 size = 0;   // orbit size in F_p^r
};

struct VectorOrbits {
  OrbitPartition partition;  // full-domain partition, for fast lookups
  std::vector<VectorOrbitSummary> nonzero;  // nonzero orbits, reps lex-sorted
};

inline VectorOrbits vector_orbits(const WeylModAction& act) {
  VectorOrbits vo;
  vo.partition = orbit_partition(act.group, act.mode);
  for (size_t id = 0; id < vo.partition.repKey.size(); ++id) {
    if (vo.partition.repKey[id] == 0) continue;  // zero vector's orbit
    vo.nonzero.push_back(
        {unpack_vec(vo.partition.repKey[id], act.rank()), vo.partition.orbitSize[id]});
  }
  return vo;
}

// ---------------------------------------------------------------------------
// Subspace representation: reduced row echelon basis over F_p.

struct SubspaceRep {
  int r = 0;  // ambient dimension
  int k = 0;  // subspace rank
  std::array<PVec, MAX_RANK> rows{};
};

// In-place row reduction mod p; returns the rank.  Rows end up in reduced
// echelon form with pivots 1, pivot columns strictly increasing, and zeros
// above and below each pivot.
inline int rref_rows(int p, std::array<PVec, MAX_RANK>& rows, int count, int r) {
  int rank = 0;
  for (int col = 0; col < r && rank < count; ++col) {
    int piv = -1;
    for (int i = rank; i < count; ++i)
      if (rows[i][col] % p != 0) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    std::swap(rows[rank], rows[piv]);
    // Scale pivot row to make the pivot 1.
    int inv = 1;
    {
      int v = rows[rank][col] % p, e = p - 2, b = v;
      inv = 1;
      while (e) {
        if (e & 1) inv = inv * b % p;
        b = b * b % p;
        e >>= 1;
      }
    }
    for (int j = 0; j < r; ++j)
      rows[rank][j] = uint8_t(int(rows[rank][j]) * inv % p);
    for (int i = 0; i < count; ++i) {
      if (i == rank) continue;
      int f = rows[i][col] % p;
      if (!f) continue;
      for (int j = 0; j < r; ++j) {
        int e = (int(rows[i][j]) - f * int(rows[rank][j])) % p;
        rows[i][j] = uint8_t((e % p + p) % p);
      }
    }
    ++rank;
  }
  for (int i = rank; i < count; ++i) rows[i] = PVec{};
  return rank;
}

inline SubspaceRep subspace_from_vectors(int p, int r,
                                         const std::vector<PVec>& vecs) {
  if (vecs.size() > MAX_RANK)
    throw InvariantViolation("subspace_from_vectors: too many generators");
  SubspaceRep s;
  s.r = r;
  for (size_t i = 0; i < vecs.size(); ++i) s.rows[i] = vecs[i];
  for (size_t i = 0; i < vecs.size(); ++i)
    for (int j = 0; j < r; ++j) s.rows[i][j] = uint8_t(s.rows[i][j] % p);
  s.k = rref_rows(p, s.rows, int(vecs.size()), r);
  return s;
}

inline bool subspace_contains(int p, const SubspaceRep& s, PVec v) {
  // Reduce v against the echelon rows.
  for (int i = 0; i < s.k; ++i) {
    int col = -1;
    for (int j = 0; j < s.r; ++j)
      if (s.rows[i][j]) {
        col = j;
        break;
      }
    int f = v[col] % p;
    if (!f) continue;
    for (int j = 0; j < s.r; ++j) {
      int e = (int(v[j]) - f * int(s.rows[i][j])) % p;
      v[j] = uint8_t((e + p * p) % p);
    }
  }
  for (int j = 0; j < s.r; ++j)
    if (v[j] % p != 0) return false;
  return true;
}

// Image of a subspace under a matrix (matrix may be mod 4 for p = 2; the
// result is reduced mod p and re-echelonized).
inline SubspaceRep apply_subspace(int p, const PMat& m, const SubspaceRep& s) {
  SubspaceRep t;
  t.r = s.r;
  int mod = p == 2 ? 2 : p;
  for (int i = 0; i < s.k; ++i) {
    PVec img{};
    for (int a = 0; a < s.r; ++a) {
      int acc = 0;
      for (int b = 0; b < s.r; ++b) acc += int(m.at(a, b)) * int(s.rows[i][b]);
      img[a] = uint8_t(acc % mod);
    }
    t.rows[i] = img;
  }
  t.k = rref_rows(p, t.rows, s.k, s.r);
  if (t.k != s.k) throw InvariantViolation("apply_subspace: rank dropped");
  return t;
}

// 256-bit packed key of an echelon basis (4 bits per entry, row-major).
struct SubKey {
  std::array<u64, 4> w{};
  friend bool operator==(const SubKey& a, const SubKey& b) { return a.w == b.w; }
};

struct SubKeyHash {
  size_t operator()(const SubKey& k) const {
    u64 h = 1469598103934665603ull;
    for (u64 x : k.w) {
      h ^= x;
      h *= 1099511628211ull;
    }
    return size_t(h);
  }
};

inline SubKey sub_key(const SubspaceRep& s) {
  if (s.k * s.r > 64)
    throw BudgetExceeded("subspace key overflow: rank*dim exceeds 64 entries");
  SubKey key;
  int t = 0;
  for (int i = 0; i < s.k; ++i)
    for (int j = 0; j < s.r; ++j, ++t)
      key.w[t >> 4] |= u64(s.rows[i][j] & 0xF) << ((t & 15) * 4);
  return key;
}

inline SubspaceRep sub_from_key(const SubKey& key, int r, int k) {
  SubspaceRep s;
  s.r = r;
  s.k = k;
  int t = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < r; ++j, ++t)
      s.rows[i][j] = uint8_t((key.w[t >> 4] >> ((t & 15) * 4)) & 0xF);
  return s;
}

// Entry-wise lexicographic comparison of two packed echelon bases of the same
// shape (row-major, entry 0 most significant).
inline bool sub_key_less(const SubKey& a, const SubKey& b, int entries) {
  for (int t = 0; t < entries; ++t) {
    int ea = int((a.w[t >> 4] >> ((t & 15) * 4)) & 0xF);
    int eb = int((b.w[t >> 4] >> ((t & 15) * 4)) & 0xF);
    if (ea != eb) return ea < eb;
  }
  return false;
}

// Number of k-dimensional subspaces of F_p^r, clamped at 2^63 on overflow.
// Computed by the q-Pascal recurrence [n m] = [n-1 m-1] + p^m [n-1 m], which
// stays integral throughout.
inline u64 gaussian_binomial(int r, int k, int p) {
  if (k < 0 || k > r) return 0;
  const u128 cap = u128(1) << 63;
  std::vector<std::vector<u128>> g(size_t(r) + 1, std::vector<u128>(size_t(r) + 1, 0));
  for (int n = 0; n <= r; ++n) g[size_t(n)][0] = 1;
  for (int n = 1; n <= r; ++n)
    for (int m = 1; m <= n; ++m) {
      u128 qm = 1;
      for (int i = 0; i < m; ++i) {
        qm *= u128(unsigned(p));
        if (qm > cap) qm = cap;
      }
      u128 v = g[size_t(n) - 1][size_t(m) - 1] +
               qm * (m <= n - 1 ? g[size_t(n) - 1][size_t(m)] : 0);
      g[size_t(n)][size_t(m)] = v > cap ? cap : v;
    }
  u128 v = g[size_t(r)][size_t(k)];
  return v >= cap ? u64(u128(1) << 63) : u64(v);
}

// ---------------------------------------------------------------------------
// Pointwise stabilizer.

// Stabilizer of every vector in the subspace (equivalently of a basis), as a
// subgroup of the faithful matrix group: for p = 2 this is the full preimage
// of the mod-2 stabilizer inside the mod-4 group, kernel included.
inline StabilizerHandle pointwise_stabilizer(const WeylModAction& act,
                                             const SubspaceRep& e) {
  std::vector<BasePoint> base;
  for (int i = 0; i < e.k; ++i) base.push_back({act.mode, pack_vec(e.rows[i], act.rank())});
  Bsgs chain = Bsgs::build(act.group, base);
  return chain.stabilizer(size_t(e.k));
}

// ---------------------------------------------------------------------------
// Single subspace orbit with a certified setwise stabilizer.

struct SubspaceOrbitResult {
  u64 size = 0;
  std::vector<SubKey> keys;       // discovery order; keys[0] = start
  SubspaceRep canonicalRep;       // lexicographically smallest in the orbit
  StabilizerHandle setwise;       // full-preimage setwise stabilizer
};

namespace detail {

// Random Schreier generators, certified against the known stabilizer order.
inline StabilizerHandle certify_stabilizer(
    const ModMatrixGroup& g, u64 targetOrder,
    const std::unordered_map<SubKey, std::pair<uint32_t, int16_t>, SubKeyHash>&
        tree,
    const std::vector<SubKey>& keys, int p, int r, int k) {
  StabilizerHandle h;
  h.order = targetOrder;
  if (targetOrder == 1) {
    h.generators.push_back(PMat::identity(r));
    return h;
  }
  auto transversal = [&](SubKey x) {
    // Walk the BFS tree back to the root, multiplying generators.
    std::vector<int> path;
    SubKey cur = x;
    for (;;) {
      auto it = tree.find(cur);
      if (it == tree.end())
        throw InvariantViolation("certify_stabilizer: point outside orbit");
      if (it->second.second < 0) break;  // root
      path.push_back(it->second.second);
      cur = keys[it->second.first];
    }
    PMat t = PMat::identity(r);
    for (size_t i = path.size(); i-- > 0;)
      t = pmat_mul(g.generators[path[i]], t, g.modulus);
    return t;
  };
  SubspaceRep start = sub_from_key(keys[0], r, k);
  std::vector<PMat> gens;
  ModMatrixGroup shell;  // action shell for the incremental chain
  shell.modulus = g.modulus;
  shell.rank = g.rank;
  Bsgs chain = Bsgs::build(shell, {});
  detail::RandomWalk rw(g, 0xbadcafe5ULL);
  for (int round = 0; round < 6000; ++round) {
    PMat w = rw.step();
    SubKey x = sub_key(apply_subspace(p, w, start));
    PMat t = transversal(x);
    PMat n = pmat_mul(pmat_inverse(t, g.modulus), w, g.modulus);
    if (n.is_identity() ||
        std::find(gens.begin(), gens.end(), n) != gens.end())
      continue;
    gens.push_back(n);
    chain.absorb(n);
    u64 reached = chain.order();
    if (reached > targetOrder)
      throw InvariantViolation(
          "certify_stabilizer: stabilizer exceeds its target order");
    if (reached == targetOrder) {
      h.generators = gens;
      return h;
    }
  }
  throw InvariantViolation("certify_stabilizer: random generation stalled");
}

}  // namespace detail

inline SubspaceOrbitResult subspace_orbit(const WeylModAction& act,
                                          const SubspaceRep& start,
                                          u64 budget = 1000000) {
  SubspaceOrbitResult res;
  const int r = act.rank(), k = start.k, p = act.p;
  std::unordered_map<SubKey, std::pair<uint32_t, int16_t>, SubKeyHash> tree;
  std::vector<SubKey> keys;
  SubKey k0 = sub_key(start);
  tree.emplace(k0, std::make_pair(0u, int16_t(-1)));
  keys.push_back(k0);
  SubKey best = k0;
  for (size_t qi = 0; qi < keys.size(); ++qi) {
    SubspaceRep cur = sub_from_key(keys[qi], r, k);
    for (size_t gi = 0; gi < act.group.generators.size(); ++gi) {
      SubKey img = sub_key(apply_subspace(p, act.group.generators[gi], cur));
      if (tree.emplace(img, std::make_pair(uint32_t(qi), int16_t(gi))).second) {
        keys.push_back(img);
        if (keys.size() > budget)
          throw BudgetExceeded("subspace_orbit: orbit exceeds budget");
        if (sub_key_less(img, best, k * r)) best = img;
      }
    }
  }
  res.size = keys.size();
  res.keys = keys;
  res.canonicalRep = sub_from_key(best, r, k);
  if (act.weylOrder % res.size != 0)
    throw InvariantViolation("subspace_orbit: orbit size does not divide |W|");
  if (res.size == 1) {
    // Fixed subspace: the whole group is its setwise stabilizer.
    res.setwise.generators = act.group.generators;
    res.setwise.order = act.weylOrder;
  } else {
    res.setwise = detail::certify_stabilizer(act.group, act.weylOrder / res.size,
                                             tree, keys, p, r, k);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Exhaustive classification by full enumeration (the oracle path).

struct SubspaceClass {
  SubspaceRep rep;  // lexicographically smallest echelon basis in the orbit
  int rank = 0;
  u64 orbitSize = 0;
};

// Visit every subspace of rank <= maxRank as an echelon basis, rank by rank,
// in a deterministic order.  Total count is pre-checked against the budget.
template <typename Fn>
void enumerate_subspaces(int p, int r, int maxRank, u64 budget, Fn&& fn) {
  u64 total = 0;
  for (int k = 0; k <= maxRank; ++k) {
    total += gaussian_binomial(r, k, p);
    if (total > budget)
      throw BudgetExceeded("subspace enumeration: count " + std::to_string(total) +
                           " exceeds budget " + std::to_string(budget));
  }
  SubspaceRep s;
  s.r = r;
  s.k = 0;
  fn(s);  // the zero subspace
  std::vector<int> pivots;
  for (int k = 1; k <= maxRank; ++k) {
    s.k = k;
    // Iterate pivot column combinations in lexicographic order.
    pivots.assign(size_t(k), 0);
    for (int i = 0; i < k; ++i) pivots[size_t(i)] = i;
    for (;;) {
      // Free positions: row i, columns j > pivots[i] with j not a pivot.
      std::vector<std::pair<int, int>> freePos;
      for (int i = 0; i < k; ++i)
        for (int j = pivots[size_t(i)] + 1; j < r; ++j) {
          bool isPivot = false;
          for (int t = 0; t < k; ++t)
            if (pivots[size_t(t)] == j) isPivot = true;
          if (!isPivot) freePos.emplace_back(i, j);
        }
      for (int i = 0; i < k; ++i) {
        s.rows[i] = PVec{};
        s.rows[i][pivots[size_t(i)]] = 1;
      }
      // Odometer over free entry assignments.
      std::vector<uint8_t> vals(freePos.size(), 0);
      for (;;) {
        for (size_t t = 0; t < freePos.size(); ++t)
          s.rows[freePos[t].first][freePos[t].second] = vals[t];
        fn(s);
        size_t t = 0;
        while (t < vals.size() && ++vals[t] == p) vals[t++] = 0;
        if (t == vals.size() && !vals.empty()) break;
        if (vals.empty()) break;
      }
      // Next pivot combination.
      int i = k - 1;
      while (i >= 0 && pivots[size_t(i)] == r - k + i) --i;
      if (i < 0) break;
      ++pivots[size_t(i)];
      for (int j = i + 1; j < k; ++j) pivots[size_t(j)] = pivots[size_t(j - 1)] + 1;
    }
  }
}

// Classify all subspaces of rank <= maxRank by enumerating the whole domain
// and partitioning it under the generators.  Deterministic; classes sorted by
// (rank, representative).  The default budget matches the library-wide
// enumeration budget of 10^6 subspaces.
inline std::vector<SubspaceClass> brute_force_classify(const WeylModAction& act,
                                                       int maxRank = -1,
                                                       u64 budget = 1000000) {
  const int r = act.rank(), p = act.p;
  if (maxRank < 0) maxRank = r;
  if (maxRank > r) maxRank = r;
  // Enumerate and index all subspaces, rank by rank.
  std::unordered_map<SubKey, uint32_t, SubKeyHash> index;
  std::vector<SubKey> byId;
  std::vector<uint8_t> rankById;
  enumerate_subspaces(p, r, maxRank, budget, [&](const SubspaceRep& s) {
    SubKey key = sub_key(s);
    uint32_t id = uint32_t(byId.size());
    if (index.emplace(key, id).second) {
      byId.push_back(key);
      rankById.push_back(uint8_t(s.k));
    }
  });
  // BFS partition.
  std::vector<uint8_t> seen(byId.size(), 0);
  std::vector<SubspaceClass> classes;
  std::vector<uint32_t> queue;
  for (uint32_t seed = 0; seed < byId.size(); ++seed) {
    if (seen[seed]) continue;
    int k = rankById[seed];
    queue.clear();
    queue.push_back(seed);
    seen[seed] = 1;
    SubKey best = byId[seed];
    u64 count = 1;
    for (size_t qi = 0; qi < queue.size(); ++qi) {
      SubspaceRep cur = sub_from_key(byId[queue[qi]], r, k);
      for (const PMat& g : act.pGens) {
        SubKey img = sub_key(apply_subspace(p, g, cur));
        auto it = index.find(img);
        if (it == index.end())
          throw InvariantViolation("brute_force_classify: orbit left the index");
        if (!seen[it->second]) {
          seen[it->second] = 1;
          queue.push_back(it->second);
          ++count;
          if (sub_key_less(img, best, k * r)) best = img;
        }
      }
    }
    SubspaceClass c;
    c.rep = sub_from_key(best, r, k);
    c.rank = k;
    c.orbitSize = count;
    classes.push_back(c);
  }
  std::sort(classes.begin(), classes.end(),
            [&](const SubspaceClass& a, const SubspaceClass& b) {
              if (a.rank != b.rank) return a.rank < b.rank;
              return sub_key_less(sub_key(a.rep), sub_key(b.rep), a.rank * r);
            });
  return classes;
}

}  // namespace torsion_atlas
