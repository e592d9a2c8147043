// finite_transfer.hpp -- transfer of a toral class to a split finite group
// of Lie type.  Fix a prime power q with p | q - 1 (and 4 | q - 1 when
// p = 2), and let F be the q-power Frobenius endomorphism of the ambient
// group in its split form, so that the p-torsion of the split maximal torus
// is fixed pointwise by F.  A single algebraic conjugacy class of toral
// elementary abelian p-subgroups then meets the finite fixed-point group in
// one class per orbit of the normalizer's conjugation action on the
// centralizer's component group: F fixes that component group elementwise
// for split q, so twisted classes are plain conjugation orbits.  For each
// orbit the record carries the twisting component w, the characteristic
// polynomial of w on the central torus of the connected centralizer (whose
// value at q is the order of the w-twisted fixed-point torus), and the exact
// orders of the centralizers of w in the component and normalizer quotients.
//
// The twisting components live in the faithful mod-m Weyl representation;
// their action on the central torus needs the honest integer matrix, which
// is reconstructed from the induced permutation of the coroots (solved from
// the simple coroots, verified against all coroots and the mod-m image, and
// disambiguated through a reduced-word descent when the ambient lattice
// leaves several integral candidates).
#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "torsion_atlas/errors.hpp"
#include "torsion_atlas/intmat.hpp"
#include "torsion_atlas/modgroup.hpp"
#include "torsion_atlas/root_datum.hpp"
#include "torsion_atlas/toral_classes.hpp"
#include "torsion_atlas/weyl_action.hpp"

namespace torsion_atlas {

// --------------------------------------------------------------------------
// Frobenius parameters.

// A split q-power Frobenius endomorphism compatible with p-torsion: every
// element of T[p] is defined over F_q exactly when p | q - 1, and the
// quadratic twists of involution centralizers stay split when 4 | q - 1.
struct FrobeniusSpec {
  i64 q = 0;          // prime power, the size of the fixed field
  int p = 0;          // the subgroup prime; coprime to q by the constraint
  bool split = true;  // only untwisted (split) Frobenius maps are in scope
};

namespace detail {

// Smallest prime factor of q if q is a prime power, 0 otherwise.
inline i64 prime_power_base(i64 q) {
  if (q < 2) return 0;
  for (i64 d = 2; d * d <= q; ++d) {
    if (q % d != 0) continue;
    while (q % d == 0) q /= d;
    return q == 1 ? d : 0;
  }
  return q;  // q itself is prime
}

}  // namespace detail

inline void validate_frobenius(const FrobeniusSpec& f) {
  if (!f.split)
    throw IncompatibleFrobenius("only split (untwisted) Frobenius endomorphisms are supported");
  if (f.p < 2 || !is_prime_u64(u64(f.p))) throw NonPrime(f.p);
  if (detail::prime_power_base(f.q) == 0)
    throw IncompatibleFrobenius("q = " + std::to_string(f.q) + " is not a prime power");
  if ((f.q - 1) % f.p != 0)
    throw IncompatibleFrobenius("p = " + std::to_string(f.p) + " does not divide q - 1 = " +
                                std::to_string(f.q - 1));
  if (f.p == 2 && (f.q - 1) % 4 != 0)
    throw IncompatibleFrobenius("p = 2 requires 4 | q - 1, but q = " + std::to_string(f.q));
}

inline FrobeniusSpec make_frobenius(i64 q, int p) {
  FrobeniusSpec f;
  f.q = q;
  f.p = p;
  validate_frobenius(f);
  return f;
}

// Smallest prime q with q = 1 mod p, and additionally q = 1 mod 4 when
// p = 2, so that make_frobenius(q, p) always succeeds.
inline i64 choose_split_q(int p) {
  if (p < 2 || !is_prime_u64(u64(p))) throw NonPrime(p);
  const i64 step = (p == 2) ? 4 : p;
  for (i64 q = step + 1; q < (i64(1) << 40); q += step)
    if (is_prime_u64(u64(q))) return q;
  throw InvariantViolation("no split prime found below 2^40");  // unreachable
}

// --------------------------------------------------------------------------
// Transfer context: the mod-m Weyl action plus the coroot lookup tables the
// integer-lift reconstruction needs.

struct TransferContext {
  int p = 0;
  WeylModAction act;  // owns its copy of the root datum
  // Coroots indexed by their reduction mod the matrix-group modulus (several
  // coroots can share a residue in small lattices) and by exact value.
  std::unordered_map<u64, std::vector<int>> corootsByResidue;
  std::map<std::vector<i64>, int> corootsExact;
};

inline TransferContext make_transfer_context(const RootDatum& rd, int p) {
  TransferContext ctx;
  ctx.p = p;
  ctx.act = make_weyl_action(rd, p);
  const RootDatum& datum = ctx.act.datum;
  const int mod = ctx.act.group.modulus;
  for (int c = 0; c < datum.rootCount(); ++c) {
    PVec res{};
    std::vector<i64> exact(size_t(datum.rank));
    for (int i = 0; i < datum.rank; ++i) {
      const i64 v = datum.corootsY[size_t(c)][size_t(i)];
      exact[size_t(i)] = v;
      res[size_t(i)] = uint8_t(((v % mod) + mod) % mod);
    }
    ctx.corootsByResidue[pack_vec(res, datum.rank)].push_back(c);
    if (!ctx.corootsExact.emplace(std::move(exact), c).second)
      throw InvariantViolation("duplicate coroot in the root datum");
  }
  return ctx;
}

// --------------------------------------------------------------------------
// Integer lift of a mod-m Weyl element.

namespace detail {

// Exact image index of a coroot under an integer matrix acting on
// Y-coordinate columns, or -1 when the image is not a coroot.
inline int coroot_image_index(const TransferContext& ctx, const IMat& m, int coroot) {
  const RootDatum& rd = ctx.act.datum;
  std::vector<i64> img(size_t(rd.rank));
  for (int i = 0; i < rd.rank; ++i) {
    i64 s = 0;
    for (int j = 0; j < rd.rank; ++j)
      s += m.at(i, j) * rd.corootsY[size_t(coroot)][size_t(j)];
    img[size_t(i)] = s;
  }
  const auto it = ctx.corootsExact.find(img);
  return it == ctx.corootsExact.end() ? -1 : it->second;
}

// Whether the integer matrix permutes the coroots (hence normalizes the
// root system on the cocharacter side).
inline bool permutes_coroots(const TransferContext& ctx, const IMat& m) {
  const int n = ctx.act.datum.rootCount();
  std::vector<char> seen(size_t(n), 0);
  for (int c = 0; c < n; ++c) {
    const int img = coroot_image_index(ctx, m, c);
    if (img < 0 || seen[size_t(img)]) return false;
    seen[size_t(img)] = 1;
  }
  return true;
}

// Whether a root-system-normalizing integer matrix lies in the Weyl group
// proper: peel simple reflections off while some simple coroot maps to a
// negative coroot; the residue then permutes the simple system, and it is a
// Weyl element exactly when that residual diagram automorphism is trivial.
inline bool weyl_membership(const TransferContext& ctx, IMat m) {
  const RootDatum& rd = ctx.act.datum;
  for (int guard = 0; guard <= rd.positiveCount; ++guard) {
    int descent = -1;
    for (int i = 0; i < rd.rank && descent < 0; ++i) {
      const int img = coroot_image_index(ctx, m, i);
      if (img < 0)
        throw InvariantViolation("weyl membership test on a matrix that does not permute coroots");
      if (img >= rd.positiveCount) descent = i;
    }
    if (descent < 0) {
      for (int i = 0; i < rd.rank; ++i)
        for (int j = 0; j < rd.rank; ++j)
          if (m.at(i, j) != (i == j ? 1 : 0)) return false;
      return true;
    }
    m = mat_mul(m, rd.reflection(descent));
  }
  throw InvariantViolation("weyl membership descent failed to terminate");
}

// The unique integer Weyl matrix with the given faithful mod-m image.  The
// images of the simple coroots are located among the coroots sharing the
// right residue; each candidate assignment is solved to a rational matrix,
// and a candidate survives only if that matrix is integral, permutes all
// coroots, and reduces back to the input.  Residue collisions can let the
// composite of the true element with an outer lattice automorphism survive
// alongside it, so ties are broken by Weyl membership, which keeps exactly
// one candidate.
inline IMat integer_weyl_lift(const TransferContext& ctx, const PMat& g) {
  const RootDatum& rd = ctx.act.datum;
  const int r = rd.rank;
  const int mod = ctx.act.group.modulus;

  std::vector<const std::vector<int>*> cands(size_t(r));
  u64 combos = 1;
  for (int a = 0; a < r; ++a) {
    PVec v{};
    for (int i = 0; i < r; ++i) {
      const i64 e = rd.corootsY[size_t(a)][size_t(i)] % mod;
      v[size_t(i)] = uint8_t(e < 0 ? e + mod : e);
    }
    v = pmat_apply(g, v, mod);
    const auto it = ctx.corootsByResidue.find(pack_vec(v, r));
    if (it == ctx.corootsByResidue.end())
      throw InvariantViolation("weyl lift: a simple coroot image matches no coroot residue");
    cands[size_t(a)] = &it->second;
    combos *= it->second.size();
    if (combos > 4096)
      throw BudgetExceeded("weyl lift: more than 4096 candidate coroot assignments");
  }

  IMat anchors(r, r);  // column a = the a-th simple coroot
  for (int j = 0; j < r; ++j)
    for (int a = 0; a < r; ++a) anchors.at(j, a) = rd.corootsY[size_t(a)][size_t(j)];

  std::vector<IMat> survivors;
  for (u64 combo = 0; combo < combos; ++combo) {
    std::vector<int> pick(size_t(r));
    u64 t = combo;
    for (int a = 0; a < r; ++a) {
      pick[size_t(a)] = int(t % cands[size_t(a)]->size());
      t /= cands[size_t(a)]->size();
    }
    IMat lift(r, r);
    bool ok = true;
    for (int i = 0; i < r && ok; ++i) {
      std::vector<i64> v(size_t(r)), x;
      for (int a = 0; a < r; ++a)
        v[size_t(a)] = rd.corootsY[size_t((*cands[size_t(a)])[size_t(pick[size_t(a)])])][size_t(i)];
      ok = solve_left_integer(anchors, v, x);
      if (ok)
        for (int j = 0; j < r; ++j) lift.at(i, j) = x[size_t(j)];
    }
    if (!ok) continue;
    if (!(pmat_from_imat(lift, mod) == g)) continue;
    if (!permutes_coroots(ctx, lift)) continue;
    survivors.push_back(lift);
  }

  if (survivors.size() > 1) {
    std::vector<IMat> inner;
    for (const IMat& m : survivors)
      if (weyl_membership(ctx, m)) inner.push_back(m);
    survivors = std::move(inner);
  }
  if (survivors.size() != 1)
    throw InvariantViolation("weyl lift: " + std::to_string(survivors.size()) +
                             " integral lifts survive verification");
  return survivors[0];
}

// Row basis of the cocharacter lattice of the central torus of the
// centralizer's identity component: the saturated kernel of pairing against
// the subsystem's simple roots.
inline IMat central_torus_basis(const RootDatum& rd, const std::vector<int>& simples) {
  if (simples.empty()) return IMat::identity(rd.rank);
  IMat pairings(int(simples.size()), rd.rank);
  for (size_t i = 0; i < simples.size(); ++i)
    for (int j = 0; j < rd.rank; ++j)
      pairings.at(int(i), j) = rd.rootsX[size_t(simples[i])][size_t(j)];
  return integer_kernel_basis(pairings);
}

// Matrix of the action induced on the span of the basis rows by an integer
// matrix acting on Y-coordinate columns, solved through the echelon pivot
// columns and verified across the full rows.  Throws if the action does not
// preserve the sublattice.
inline IMat restrict_to_lattice(const IMat& basis, const IMat& action) {
  const int t = basis.rows, r = basis.cols;
  if (t == 0) return IMat(0, 0);
  IMat images(t, r);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < r; ++j) {
      i64 s = 0;
      for (int k = 0; k < r; ++k) s += action.at(j, k) * basis.at(i, k);
      images.at(i, j) = s;
    }
  std::vector<int> pivots;
  for (int i = 0; i < t; ++i) {
    int c = 0;
    while (c < r && basis.at(i, c) == 0) ++c;
    if (c == r) throw InvariantViolation("central torus basis has a zero row");
    pivots.push_back(c);
  }
  IMat square(t, t);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j) square.at(i, j) = basis.at(i, pivots[size_t(j)]);
  IMat restricted(t, t);
  for (int i = 0; i < t; ++i) {
    std::vector<i64> v(size_t(t)), x;
    for (int j = 0; j < t; ++j) v[size_t(j)] = images.at(i, pivots[size_t(j)]);
    if (!solve_left_integer(square, v, x))
      throw InvariantViolation("central torus action is not integral over the basis");
    for (int j = 0; j < t; ++j) restricted.at(i, j) = x[size_t(j)];
    for (int c = 0; c < r; ++c) {
      i64 s = 0;
      for (int j = 0; j < t; ++j) s += x[size_t(j)] * basis.at(j, c);
      if (s != images.at(i, c))
        throw InvariantViolation("central torus action escapes the sublattice");
    }
  }
  return restricted;
}

}  // namespace detail

// --------------------------------------------------------------------------
// Component cosets of one toral class, with the full multiplication table
// and the normalizer's conjugation action.  This is the finite skeleton the
// transfer quotients live on; tests replay group-theoretic counts on the
// table to check the orbit computations independently.

struct ComponentCosetTable {
  std::vector<PMat> reps;              // coset representatives; reps[0] = identity
  std::vector<int> inverse;            // coset index of each representative's inverse
  std::vector<std::vector<int>> mult;  // mult[i][j] = coset of reps[i] * reps[j]
  // One permutation of the cosets per setwise-stabilizer generator, sending
  // a coset to its conjugate.  Together they generate the full conjugation
  // action of the normalizer on the component group.
  std::vector<std::vector<int>> normalizerAction;
  u64 setwiseOrder = 0;
  u64 pointwiseOrder = 0;
};

inline ComponentCosetTable component_coset_table(const TransferContext& ctx,
                                                 const ToralClass& tc,
                                                 u64 orbitBudget = 1000000) {
  const WeylModAction& act = ctx.act;
  const RootDatum& rd = act.datum;
  const int modulus = act.group.modulus;

  const SubspaceOrbitResult orbit = subspace_orbit(act, tc.representative, orbitBudget);
  if (orbit.size != tc.orbitSize)
    throw CrossCheckFailure("subspace orbit has size " + std::to_string(orbit.size) +
                            ", the class records " + std::to_string(tc.orbitSize));
  const StabilizerHandle pointwise = pointwise_stabilizer(act, tc.representative);
  if (orbit.setwise.order % pointwise.order != 0 ||
      orbit.setwise.order / pointwise.order != tc.normalizerQuotientOrder)
    throw CrossCheckFailure("stabilizer orders disagree with the recorded normalizer quotient");

  const detail::SubsystemStructure ss = detail::analyze_subsystem(rd, tc.centralizer.subsystem);
  ModMatrixGroup refl;
  refl.modulus = modulus;
  refl.rank = rd.rank;
  for (int s : ss.simples)
    refl.generators.push_back(pmat_from_imat(rd.reflection(s), modulus));
  refl.knownOrder = ss.weylOrder;
  const Bsgs reflChain = Bsgs::build(refl, {});
  if (reflChain.order() != ss.weylOrder)
    throw CrossCheckFailure("subsystem reflection group failed its order certificate");

  struct Entry { PMat m, inv; };
  std::vector<Entry> cosets{{PMat::identity(rd.rank), PMat::identity(rd.rank)}};
  const auto locate = [&](const PMat& g) -> int {
    for (size_t c = 0; c < cosets.size(); ++c)
      if (reflChain.contains(pmat_mul(g, cosets[c].inv, modulus))) return int(c);
    return -1;
  };
  for (size_t head = 0; head < cosets.size(); ++head)
    for (const PMat& g : pointwise.generators) {
      const PMat next = pmat_mul(cosets[head].m, g, modulus);
      if (locate(next) < 0) {
        if (cosets.size() >= 4096)
          throw BudgetExceeded("component group larger than 4096");
        cosets.push_back({next, pmat_inverse(next, modulus)});
      }
    }
  if (u64(cosets.size()) != tc.centralizer.componentGroupOrder)
    throw CrossCheckFailure("coset count " + std::to_string(cosets.size()) +
                            " differs from the recorded component group order " +
                            std::to_string(tc.centralizer.componentGroupOrder));

  ComponentCosetTable table;
  table.setwiseOrder = orbit.setwise.order;
  table.pointwiseOrder = pointwise.order;
  const int n = int(cosets.size());
  for (const Entry& e : cosets) table.reps.push_back(e.m);
  table.inverse.resize(size_t(n));
  table.mult.assign(size_t(n), std::vector<int>(size_t(n), -1));
  for (int i = 0; i < n; ++i) {
    table.inverse[size_t(i)] = locate(cosets[size_t(i)].inv);
    for (int j = 0; j < n; ++j)
      table.mult[size_t(i)][size_t(j)] =
          locate(pmat_mul(cosets[size_t(i)].m, cosets[size_t(j)].m, modulus));
  }
  for (int i = 0; i < n; ++i) {
    if (table.inverse[size_t(i)] < 0) throw InvariantViolation("coset inverse left the table");
    for (int j = 0; j < n; ++j)
      if (table.mult[size_t(i)][size_t(j)] < 0)
        throw InvariantViolation("coset product left the table");
  }
  for (const PMat& g : orbit.setwise.generators) {
    const PMat gInv = pmat_inverse(g, modulus);
    std::vector<int> perm(size_t(n), -1);
    for (int j = 0; j < n; ++j) {
      const PMat conj = pmat_mul(pmat_mul(g, cosets[size_t(j)].m, modulus), gInv, modulus);
      perm[size_t(j)] = locate(conj);
      if (perm[size_t(j)] < 0)
        throw InvariantViolation("normalizer conjugation left the component group");
    }
    table.normalizerAction.push_back(std::move(perm));
  }
  return table;
}

// --------------------------------------------------------------------------
// Finite class records.

// One conjugacy class of the finite group inside an algebraic toral class:
// the orbit of a twisting component w under the normalizer's conjugation
// action, with the local-structure skeleton of the w-twisted centralizer.
struct FiniteClassRecord {
  const ToralClass* sourceClass = nullptr;  // the input class the record refines
  PMat twist;                      // coset representative of w in the mod-m Weyl group
  u64 orbitSize = 1;               // size of the conjugation orbit of w
  std::vector<i64> torusCharPoly;  // det(x I - M_w) on the central torus, ascending
  std::vector<int> subsystem;      // root indices of the subsystem of the connected part
  u64 componentPart = 1;           // order of the centralizer of w in the component group
  u64 normalizerComponentPart = 1; // order of the centralizer of w in N/C^0
};

inline std::vector<FiniteClassRecord> finite_classes(const TransferContext& ctx,
                                                     const ToralClass& tc,
                                                     const FrobeniusSpec& f,
                                                     u64 orbitBudget = 1000000) {
  validate_frobenius(f);
  if (f.p != ctx.p)
    throw InvariantViolation("transfer context prime differs from the Frobenius prime");
  const RootDatum& rd = ctx.act.datum;

  const ComponentCosetTable table = component_coset_table(ctx, tc, orbitBudget);
  const int n = int(table.reps.size());

  // Conjugation orbits of the normalizer on the component group.  The orbit
  // seeded at index 0 is the fixed point of the identity coset, so the
  // identity record always comes first.
  std::vector<int> orbitOf(size_t(n), -1);
  std::vector<std::vector<int>> orbits;
  for (int s = 0; s < n; ++s) {
    if (orbitOf[size_t(s)] >= 0) continue;
    const int id = int(orbits.size());
    orbits.push_back({});
    std::vector<int> queue{s};
    orbitOf[size_t(s)] = id;
    while (!queue.empty()) {
      const int j = queue.back();
      queue.pop_back();
      orbits[size_t(id)].push_back(j);
      for (const std::vector<int>& perm : table.normalizerAction) {
        const int im = perm[size_t(j)];
        if (orbitOf[size_t(im)] < 0) {
          orbitOf[size_t(im)] = id;
          queue.push_back(im);
        }
      }
    }
    std::sort(orbits[size_t(id)].begin(), orbits[size_t(id)].end());
  }
  u64 total = 0;
  for (const std::vector<int>& o : orbits) total += o.size();
  if (total != tc.centralizer.componentGroupOrder)
    throw CrossCheckFailure("conjugation orbits do not partition the component group");

  const detail::SubsystemStructure ss = detail::analyze_subsystem(rd, tc.centralizer.subsystem);
  const IMat basis = detail::central_torus_basis(rd, ss.simples);
  if (basis.rows != tc.centralizer.centralTorusRank)
    throw CrossCheckFailure("central torus basis rank " + std::to_string(basis.rows) +
                            " differs from the recorded rank " +
                            std::to_string(tc.centralizer.centralTorusRank));
  const u64 normalizerOrder = tc.normalizerQuotientOrder * tc.centralizer.componentGroupOrder;

  std::vector<FiniteClassRecord> out;
  for (const std::vector<int>& orbit : orbits) {
    const int rep = orbit.front();
    FiniteClassRecord rec;
    rec.sourceClass = &tc;
    rec.twist = table.reps[size_t(rep)];
    rec.orbitSize = orbit.size();
    rec.subsystem = tc.centralizer.subsystem;

    // Conjugacy class of the twist inside the component group itself; the
    // normalizer orbit is a union of such classes of equal size.
    std::set<int> innerClass;
    for (int u = 0; u < n; ++u)
      innerClass.insert(
          table.mult[size_t(u)][size_t(table.mult[size_t(rep)][size_t(table.inverse[size_t(u)])])]);
    if (u64(n) % innerClass.size() != 0 || rec.orbitSize % innerClass.size() != 0)
      throw InvariantViolation("conjugacy class size fails the counting identities");
    rec.componentPart = u64(n) / innerClass.size();
    if (normalizerOrder % rec.orbitSize != 0)
      throw InvariantViolation("orbit size does not divide the normalizer quotient order");
    rec.normalizerComponentPart = normalizerOrder / rec.orbitSize;

    if (basis.rows == 0) {
      rec.torusCharPoly = {1};
    } else {
      const IMat lift = detail::integer_weyl_lift(ctx, rec.twist);
      const IMat action = detail::restrict_to_lattice(basis, lift);
      rec.torusCharPoly = char_poly(action);
      if (rec.torusCharPoly.back() != 1)
        throw InvariantViolation("central torus polynomial is not monic");
      const i64 constant = rec.torusCharPoly.front();
      if (constant != 1 && constant != -1)
        throw InvariantViolation("central torus polynomial has non-unit constant term");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<FiniteClassRecord> finite_classes(const RootDatum& rd, const ToralClass& tc,
                                                     const FrobeniusSpec& f,
                                                     u64 orbitBudget = 1000000) {
  const TransferContext ctx = make_transfer_context(rd, f.p);
  return finite_classes(ctx, tc, f, orbitBudget);
}

// --------------------------------------------------------------------------
// Local structure of one finite class.

// Order skeleton of the centralizer and normalizer of the subgroup in the
// finite group: the exact order of the w-twisted central torus, the
// subsystem factors of the connected centralizer reported symbolically (the
// twisted forms of the factors are not named), and the component-group
// centralizer orders.
struct FiniteLocalStructure {
  u64 centralTorusOrder = 1;  // |det(q I - M_w)|, the twisted fixed-point count
  int centralTorusRank = 0;
  std::vector<SimpleFactor> reductiveFactors;
  u64 componentPart = 1;
  u64 normalizerComponentPart = 1;
};

inline FiniteLocalStructure finite_local_structure(const FiniteClassRecord& rec,
                                                   const FrobeniusSpec& f) {
  validate_frobenius(f);
  FiniteLocalStructure ls;
  ls.centralTorusRank = int(rec.torusCharPoly.size()) - 1;
  i128 value = 0;
  for (size_t i = rec.torusCharPoly.size(); i-- > 0;)
    value = value * f.q + rec.torusCharPoly[i];
  if (value <= 0)
    throw InvariantViolation("twisted torus order is not positive at q = " + std::to_string(f.q));
  if (value > i128(u64(-1)))
    throw InvariantViolation("twisted torus order exceeds 64 bits");
  ls.centralTorusOrder = u64(value);
  if (rec.sourceClass != nullptr)
    ls.reductiveFactors = rec.sourceClass->centralizer.simpleFactors;
  ls.componentPart = rec.componentPart;
  ls.normalizerComponentPart = rec.normalizerComponentPart;
  return ls;
}

// --------------------------------------------------------------------------
// Full-automorphism certificate.

// Recomputes whether the normalizer quotient realizes every automorphism of
// the subgroup, i.e. has order |GL_k(p)|, and cross-checks the stored flag.
// When true, all subgroups of the finite group conjugate in the ambient
// algebraic group are already conjugate under its fixed-point subgroup.
inline bool aut_full_check(const ToralClass& tc, int p) {
  if (p < 2 || !is_prime_u64(u64(p))) throw NonPrime(p);
  using u128 = unsigned __int128;
  u128 pk = 1;
  bool overflow = false;
  for (int i = 0; i < tc.rank && !overflow; ++i) {
    pk *= u128(u64(p));
    if (pk > (u128(1) << 96)) overflow = true;
  }
  u128 gl = 1;
  u128 pi = 1;
  for (int i = 0; i < tc.rank && !overflow; ++i) {
    gl *= pk - pi;
    pi *= u128(u64(p));
    if (gl > (u128(1) << 96)) overflow = true;
  }
  const bool full = !overflow && gl == u128(tc.normalizerQuotientOrder);
  if (full != tc.autFull)
    throw CrossCheckFailure("stored full-automorphism flag disagrees with the recomputation");
  return full;
}

}  // namespace torsion_atlas
