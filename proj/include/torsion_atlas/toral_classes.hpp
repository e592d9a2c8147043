// toral_classes.hpp -- conjugacy classification of toral elementary abelian
// p-subgroups E <= T[p] of a simple algebraic group, via the Weyl group
// action on T[p] = Y/pY.  For every class the module computes the local
// structure of the centralizer C_G(E): the root subsystem of its identity
// component with recognized simple factors and their lattice invariants, the
// component group C_G(E)/C_G(E)^0 = C_W(E)/W(Phi_E), the action induced on E
// by its setwise stabilizer (the normalizer quotient N_G(E)/C_G(E)), and the
// distribution of the nontrivial elements of E into semisimple conjugacy
// classes with exact cyclotomic character values on the adjoint and minimal
// modules.  A separate recursion over centralizer subsystems certifies the
// torsion dichotomy: all component groups over all toral E are trivial if
// and only if p is not a torsion prime of the root datum.
//
// All arithmetic is exact (integers and Z[zeta_p]); results are independent
// of the defining characteristic as long as it differs from p.
#pragma once

#include <algorithm>
#include <functional>
#include <future>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "torsion_atlas/backtrack.hpp"
#include "torsion_atlas/cyclotomic.hpp"
#include "torsion_atlas/element_labels.hpp"
#include "torsion_atlas/errors.hpp"
#include "torsion_atlas/intmat.hpp"
#include "torsion_atlas/modgroup.hpp"
#include "torsion_atlas/root_datum.hpp"
#include "torsion_atlas/weyl_action.hpp"

namespace torsion_atlas {

// --------------------------------------------------------------------------
// Result types.

// One simple factor of the centralizer's identity component.  The lattice
// invariants are the invariant factors (> 1) of the torsion of Y / Z-span of
// the factor's coroots; an empty list means the factor is simply connected,
// and the full list of reflection-group invariants otherwise pins down the
// isogeny type of the factor.
struct SimpleFactor {
  LieType type;
  std::vector<i64> latticeInvariants;
};

struct CentralizerData {
  std::vector<int> subsystem;    // indices into rd.rootsX of all roots of Phi_E
  int connectedDimension = 0;    // dim C_G(E)^0 = rank + |Phi_E|
  std::vector<SimpleFactor> simpleFactors;
  int centralTorusRank = 0;      // rank - rank of span of Phi_E
  u64 componentGroupOrder = 1;   // |C_W(E) / W(Phi_E)|, always a power of p
  std::vector<PMat> componentGroupGenerators;  // ambient coset representatives
  bool componentGroupAbelian = true;
  std::vector<u64> componentGroupAbelianInvariants;  // ascending, empty if not abelian
};

// Conjugacy invariants of a single element of T[p], with exact character
// values; `label` is the atlas name when the invariants match a unique
// embedded class row, a "/"-joined list on ties, or a synthetic code.
struct ElementSignature {
  int elementOrder = 1;
  int scLiftOrder = 1;           // least order of a preimage in the sc cover
  int centralizerDimension = 0;
  Cyclotomic adjointTrace{2};
  std::optional<Cyclotomic> minimalTrace;
  std::string label;
};

namespace detail {

inline int cyclotomic_compare(const Cyclotomic& a, const Cyclotomic& b) {
  const size_t n = std::max(a.c.size(), b.c.size());
  for (size_t i = 0; i < n; ++i) {
    const i64 x = i < a.c.size() ? a.c[i] : 0;
    const i64 y = i < b.c.size() ? b.c[i] : 0;
    if (x != y) return x < y ? -1 : 1;
  }
  return 0;
}

// Total order on signatures by their mathematical fields (the label is a
// function of those plus the ambient datum, so it is excluded).
inline int signature_compare(const ElementSignature& a, const ElementSignature& b) {
  if (a.elementOrder != b.elementOrder) return a.elementOrder < b.elementOrder ? -1 : 1;
  if (a.scLiftOrder != b.scLiftOrder) return a.scLiftOrder < b.scLiftOrder ? -1 : 1;
  if (a.centralizerDimension != b.centralizerDimension)
    return a.centralizerDimension < b.centralizerDimension ? -1 : 1;
  if (int c = cyclotomic_compare(a.adjointTrace, b.adjointTrace)) return c;
  if (a.minimalTrace.has_value() != b.minimalTrace.has_value())
    return a.minimalTrace.has_value() ? 1 : -1;
  if (a.minimalTrace) return cyclotomic_compare(*a.minimalTrace, *b.minimalTrace);
  return 0;
}

struct SignatureLess {
  bool operator()(const ElementSignature& a, const ElementSignature& b) const {
    return signature_compare(a, b) < 0;
  }
};

}  // namespace detail

struct ToralClass {
  SubspaceRep representative;    // reduced-echelon basis of E in Y/pY
  int rank = 0;                  // dimension of E over F_p
  u64 orbitSize = 1;             // number of subspaces in the W-orbit
  bool repIsOrbitMinimal = true; // representative certified lex-minimal?
  CentralizerData centralizer;
  u64 normalizerQuotientOrder = 1;             // |N_G(E)/C_G(E)|
  std::vector<PMat> normalizerQuotientGenerators;  // k x k matrices over F_p
  bool autFull = false;          // normalizer quotient is all of GL(E)?
  std::vector<std::pair<ElementSignature, u64>> distribution;  // class -> count
};

struct ToralClassOptions {
  int maxRank = -1;              // -1 = all ranks up to the ambient rank
  u64 enumerationBudget = 1000000;  // max total subspace count for the
                                    // direct enumeration; larger problems go
                                    // through the incremental classifier
  IncrementalOptions incremental{};
  int parallelism = 1;           // classes are finished independently
};

// --------------------------------------------------------------------------
// Small helpers.

namespace detail {

inline i64 mod_inverse(i64 a, i64 m) {
  i64 t = 0, newT = 1, r = m, newR = ((a % m) + m) % m;
  while (newR != 0) {
    const i64 q = r / newR;
    t -= q * newT; std::swap(t, newT);
    r -= q * newR; std::swap(r, newR);
  }
  if (r != 1) throw InvariantViolation("element not invertible in modular inverse");
  return ((t % m) + m) % m;
}

inline bool pmat_equal(const PMat& a, const PMat& b) {
  if (a.n != b.n) return false;
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j)
      if (a.at(i, j) != b.at(i, j)) return false;
  return true;
}

// <root, lambda> mod p for a mod-p coordinate vector lambda in the Y-basis.
inline int pair_mod(const Vec16& rootX, const PVec& lambda, int r, int p) {
  i64 s = 0;
  for (int i = 0; i < r; ++i) s += rootX[i] * i64(lambda[i]);
  return int(((s % p) + p) % p);
}

}  // namespace detail

// --------------------------------------------------------------------------
// Centralizer subsystem: all roots vanishing mod p on every element of E.

inline std::vector<int> centralizer_subsystem(const RootDatum& rd, int p,
                                              const SubspaceRep& e) {
  std::vector<int> out;
  for (int i = 0; i < rd.rootCount(); ++i) {
    bool allZero = true;
    for (int b = 0; b < e.k && allZero; ++b)
      allZero = detail::pair_mod(rd.rootsX[i], e.rows[b], rd.rank, p) == 0;
    if (allZero) out.push_back(i);
  }
  return out;
}

// --------------------------------------------------------------------------
// Recognition of a closed subsystem: simple system, irreducible components,
// component types, per-factor lattice invariants, and the Weyl group order.

namespace detail {

struct SubsystemStructure {
  std::vector<int> simples;                  // positive root indices
  std::vector<std::vector<int>> components;  // linkage components of `simples`
  std::vector<SimpleFactor> factors;         // parallel to `components`
  u64 weylOrder = 1;
  int spanRank = 0;
};

// Permutation match of the pairing matrix `m` against the Cartan matrix of a
// candidate type; positions are filled left to right with full consistency
// checks against everything already placed.
inline bool cartan_permutation_match(const IMat& target,
                                     const std::vector<std::vector<i64>>& m,
                                     std::vector<int>& perm,
                                     std::vector<char>& used, int pos) {
  const int k = target.rows;
  if (pos == k) return true;
  for (int cand = 0; cand < k; ++cand) {
    if (used[cand]) continue;
    bool ok = true;
    for (int j = 0; j < pos && ok; ++j) {
      ok = target.at(pos, j) == m[cand][perm[j]] &&
           target.at(j, pos) == m[perm[j]][cand];
    }
    if (!ok) continue;
    used[cand] = 1;
    perm[pos] = cand;
    if (cartan_permutation_match(target, m, perm, used, pos + 1)) return true;
    used[cand] = 0;
  }
  return false;
}

inline LieType recognize_component(const IMat& /*unused*/,
                                   const std::vector<std::vector<i64>>& m) {
  const int k = int(m.size());
  static const LieFamily order[] = {LieFamily::A, LieFamily::B, LieFamily::C,
                                    LieFamily::D, LieFamily::E, LieFamily::F,
                                    LieFamily::G};
  for (LieFamily fam : order) {
    bool valid = false;
    switch (fam) {
      case LieFamily::A: valid = k >= 1; break;
      case LieFamily::B: valid = k >= 2; break;
      case LieFamily::C: valid = k >= 2; break;
      case LieFamily::D: valid = k >= 3; break;
      case LieFamily::E: valid = k >= 6 && k <= 8; break;
      case LieFamily::F: valid = k == 4; break;
      case LieFamily::G: valid = k == 2; break;
    }
    if (!valid) continue;
    const LieType t{fam, k};
    const IMat target = cartan_matrix(t);
    std::vector<int> perm(size_t(k), -1);
    std::vector<char> used(size_t(k), 0);
    if (cartan_permutation_match(target, m, perm, used, 0)) return t;
  }
  throw InvariantViolation("pairing matrix matches no simple type");
}

inline SubsystemStructure analyze_subsystem(const RootDatum& rd,
                                            const std::vector<int>& roots) {
  SubsystemStructure ss;
  const int r = rd.rank;

  std::vector<int> positives;
  std::set<Vec16> posLat;
  for (int idx : roots)
    if (idx < rd.positiveCount) {
      positives.push_back(idx);
      posLat.insert(rd.rootsLat[idx]);
    }

  // A positive root of the subsystem is simple there iff it is not the sum
  // of two positive subsystem roots (valid because Phi_E is closed).
  for (int g : positives) {
    bool isSum = false;
    for (int a : positives) {
      if (a == g) continue;
      Vec16 diff = rd.rootsLat[g];
      for (int i = 0; i < r; ++i) diff[i] -= rd.rootsLat[a][i];
      if (posLat.count(diff)) { isSum = true; break; }
    }
    if (!isSum) ss.simples.push_back(g);
  }
  const int k = int(ss.simples.size());
  ss.spanRank = k;

  // Pairing matrix of the simple system and its linkage components.
  std::vector<std::vector<i64>> pairing(size_t(k), std::vector<i64>(size_t(k), 0));
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      pairing[a][b] = dot(rd.rootsX[ss.simples[a]], rd.corootsY[ss.simples[b]], r);

  std::vector<int> comp(size_t(k), -1);
  int nComp = 0;
  for (int s = 0; s < k; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> stack{s};
    comp[s] = nComp;
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      for (int t = 0; t < k; ++t)
        if (comp[t] < 0 && pairing[cur][t] != 0) {
          comp[t] = nComp;
          stack.push_back(t);
        }
    }
    ++nComp;
  }
  ss.components.assign(size_t(nComp), {});
  for (int s = 0; s < k; ++s) ss.components[size_t(comp[s])].push_back(s);

  int rootTotal = 0;
  for (const std::vector<int>& c : ss.components) {
    const int kc = int(c.size());
    std::vector<std::vector<i64>> m(size_t(kc), std::vector<i64>(size_t(kc), 0));
    for (int a = 0; a < kc; ++a)
      for (int b = 0; b < kc; ++b)
        m[size_t(a)][size_t(b)] = pairing[c[size_t(a)]][c[size_t(b)]];
    SimpleFactor f;
    f.type = recognize_component(IMat{}, m);
    IMat corootRows(kc, r);
    for (int a = 0; a < kc; ++a)
      for (int j = 0; j < r; ++j)
        corootRows.at(a, j) = rd.corootsY[ss.simples[size_t(c[size_t(a)])]][j];
    const SmithResult snf = smith_normal_form(corootRows);
    for (i64 d : snf.invariants)
      if (d > 1) f.latticeInvariants.push_back(d);
    ss.weylOrder *= weyl_order(f.type);
    rootTotal += root_count(f.type);
    ss.factors.push_back(std::move(f));
  }
  if (rootTotal != int(roots.size()))
    throw InvariantViolation("subsystem recognition lost roots: got " +
                             std::to_string(rootTotal) + " of " +
                             std::to_string(roots.size()));
  return ss;
}

}  // namespace detail

// --------------------------------------------------------------------------
// Component group of the centralizer: C_W(E) / W(Phi_E), where C_W(E) is the
// pointwise stabilizer handle and W(Phi_E) is generated by the reflections
// of the subsystem's simple system (a normal subgroup, since C_W(E)
// permutes the roots vanishing on E).

namespace detail {

inline void fill_component_group(const WeylModAction& act,
                                 const SubsystemStructure& ss,
                                 const StabilizerHandle& stab,
                                 CentralizerData& cd) {
  const int modulus = act.group.modulus;
  const RootDatum& rd = act.datum;

  ModMatrixGroup refl;
  refl.modulus = modulus;
  refl.rank = rd.rank;
  for (int s : ss.simples)
    refl.generators.push_back(pmat_from_imat(rd.reflection(s), modulus));
  refl.knownOrder = ss.weylOrder;
  const Bsgs reflChain = Bsgs::build(refl, {});
  if (reflChain.order() != ss.weylOrder)
    throw CrossCheckFailure("subsystem reflection group has order " +
                            std::to_string(reflChain.order()) + ", expected " +
                            std::to_string(ss.weylOrder));
  if (stab.order % ss.weylOrder != 0)
    throw CrossCheckFailure("subsystem Weyl order does not divide the stabilizer order");
  const u64 expected = stab.order / ss.weylOrder;

  struct CosetRep { PMat m, inv; };
  std::vector<CosetRep> reps;
  reps.push_back({PMat::identity(rd.rank), PMat::identity(rd.rank)});
  std::vector<PMat> quotientGens;
  for (size_t head = 0; head < reps.size(); ++head) {
    for (const PMat& g : stab.generators) {
      const PMat n = pmat_mul(reps[head].m, g, modulus);
      bool known = false;
      for (const CosetRep& rep : reps)
        if (reflChain.contains(pmat_mul(n, rep.inv, modulus))) { known = true; break; }
      if (!known) {
        if (reps.size() >= 4096)
          throw BudgetExceeded("component group larger than 4096");
        reps.push_back({n, pmat_inverse(n, modulus)});
      }
    }
  }
  if (u64(reps.size()) != expected)
    throw CrossCheckFailure("component coset count " + std::to_string(reps.size()) +
                            " != index " + std::to_string(expected));
  cd.componentGroupOrder = expected;

  // The order must be a power of p: the centralizer's component group of a
  // p-group inside a connected group is a p-group.
  u64 q = expected;
  while (q % u64(act.p) == 0) q /= u64(act.p);
  if (q != 1)
    throw InvariantViolation("component group order " + std::to_string(expected) +
                             " is not a power of " + std::to_string(act.p));

  // Generators: images of the stabilizer generators outside the reflection
  // subgroup, deduplicated coset-wise.
  for (const PMat& g : stab.generators) {
    if (reflChain.contains(g)) continue;
    bool dup = false;
    const PMat gInv = pmat_inverse(g, modulus);
    for (const PMat& h : quotientGens)
      if (reflChain.contains(pmat_mul(h, gInv, modulus))) { dup = true; break; }
    if (!dup) quotientGens.push_back(g);
  }
  cd.componentGroupGenerators = std::move(quotientGens);

  // Abelianness of the quotient: commutators of generator images.
  bool abelian = true;
  for (size_t i = 0; i < cd.componentGroupGenerators.size() && abelian; ++i)
    for (size_t j = i + 1; j < cd.componentGroupGenerators.size() && abelian; ++j) {
      const PMat& a = cd.componentGroupGenerators[i];
      const PMat& b = cd.componentGroupGenerators[j];
      PMat c = pmat_mul(a, b, modulus);
      c = pmat_mul(c, pmat_inverse(a, modulus), modulus);
      c = pmat_mul(c, pmat_inverse(b, modulus), modulus);
      abelian = reflChain.contains(c);
    }
  cd.componentGroupAbelian = abelian;
  cd.componentGroupAbelianInvariants.clear();

  if (abelian && expected > 1) {
    // Counting p^j-th powers that fall back into W(Phi_E) determines the
    // abelian invariants: with N(j) = #{cosets killed by p^j}, the number of
    // invariants >= p^j is log_p(N(j)/N(j-1)) read as a conjugate partition.
    const u64 p64 = u64(act.p);
    std::vector<u64> layer;  // c_j = log_p(N(j) / N(j-1))
    u64 prevCount = 1;
    for (int j = 1; prevCount < expected; ++j) {
      u64 pj = 1;
      for (int t = 0; t < j; ++t) pj *= p64;
      u64 count = 0;
      for (const CosetRep& rep : reps) {
        PMat pw = PMat::identity(rd.rank);
        u64 e = pj;
        PMat base = rep.m;
        while (e > 0) {
          if (e & 1) pw = pmat_mul(pw, base, modulus);
          base = pmat_mul(base, base, modulus);
          e >>= 1;
        }
        if (reflChain.contains(pw)) ++count;
      }
      if (count % prevCount != 0)
        throw InvariantViolation("power-count layers of the component group do not nest");
      u64 ratio = count / prevCount, c = 0;
      while (ratio > 1) {
        if (ratio % p64 != 0)
          throw InvariantViolation("component power count is not a p-power layer");
        ratio /= p64;
        ++c;
      }
      layer.push_back(c);
      prevCount = count;
    }
    const u64 nInv = layer.empty() ? 0 : layer[0];
    std::vector<u64> exponents(size_t(nInv), 0);
    for (u64 i = 0; i < nInv; ++i)
      for (u64 cj : layer)
        if (cj >= i + 1) ++exponents[size_t(i)];
    for (u64 i = nInv; i > 0; --i) {
      u64 v = 1;
      for (u64 t = 0; t < exponents[size_t(i - 1)]; ++t) v *= p64;
      cd.componentGroupAbelianInvariants.push_back(v);
    }
  }
}

}  // namespace detail

// Convenience entry: full centralizer data (subsystem, factors, component
// group) for one subspace, given its pointwise stabilizer.
inline CentralizerData component_group(const WeylModAction& act, const SubspaceRep& e,
                                       const StabilizerHandle& stab) {
  const RootDatum& rd = act.datum;
  CentralizerData cd;
  cd.subsystem = centralizer_subsystem(rd, act.p, e);
  const detail::SubsystemStructure ss = detail::analyze_subsystem(rd, cd.subsystem);
  cd.connectedDimension = rd.rank + int(cd.subsystem.size());
  cd.simpleFactors = ss.factors;
  cd.centralTorusRank = rd.rank - ss.spanRank;
  detail::fill_component_group(act, ss, stab, cd);
  return cd;
}

// --------------------------------------------------------------------------
// Character values.  The adjoint trace needs only the roots; the minimal
// module's trace comes from the form's own weight system when the module
// descends to it, and otherwise from the canonical order-p lift to the
// simply connected cover (possible exactly when p does not divide the
// fundamental group).

struct TraceContext {
  enum class MinimalSource { None, Direct, Lift };

  int p = 2;
  RootDatum datum;
  bool pi1Trivial = true;
  MinimalSource source = MinimalSource::None;
  WeightSystem minimal;          // weights of the carrier of the minimal module
  RootDatum sc;                  // simply connected form; valid iff !pi1Trivial
  SmithResult liftSolve;         // Smith data of transpose(sc.yBasis), Lift only
  i64 liftMultiplier = 1;        // |pi_1| of the acting form
  i64 liftMultiplierInv = 1;     // its inverse mod p, Lift only
  // Lattice tests for the least lift order: entry j-1 holds (V, invariants)
  // of the stacked matrix [sc Y-basis ; p^j * Y-basis].
  std::vector<std::pair<IMat, std::vector<i64>>> orderLattices;
};

inline TraceContext build_trace_context(const RootDatum& rd, int p) {
  TraceContext tc;
  tc.p = p;
  tc.datum = rd;
  tc.pi1Trivial = rd.fundamentalGroup.empty();
  for (i64 d : rd.fundamentalGroup) tc.liftMultiplier *= d;
  bool pDividesPi1 = false;
  for (i64 d : rd.fundamentalGroup)
    if (d % p == 0) pDividesPi1 = true;

  const int r = rd.rank;
  if (!tc.pi1Trivial) {
    tc.sc = build_root_datum(rd.type, parse_isogeny("sc"));
    for (int j = 1; j <= 4; ++j) {
      i64 pj = 1;
      for (int t = 0; t < j; ++t) pj *= p;
      IMat stacked(2 * r, r);
      for (int i = 0; i < r; ++i)
        for (int c = 0; c < r; ++c) {
          stacked.at(i, c) = tc.sc.yBasis.at(i, c);
          stacked.at(r + i, c) = pj * rd.yBasis.at(i, c);
        }
      SmithResult s = smith_normal_form(stacked);
      tc.orderLattices.emplace_back(std::move(s.V), std::move(s.invariants));
    }
  }

  if (rd.type.family == LieFamily::E && rd.type.rank == 8) {
    tc.source = TraceContext::MinimalSource::None;  // adjoint is already minimal
    return tc;
  }
  try {
    tc.minimal = weight_system(rd, ModuleKind::Minimal);
    tc.source = TraceContext::MinimalSource::Direct;
  } catch (const UnsupportedModule&) {
    if (pDividesPi1) {
      tc.source = TraceContext::MinimalSource::None;  // no canonical lift
    } else {
      tc.source = TraceContext::MinimalSource::Lift;
      tc.minimal = weight_system(tc.sc, ModuleKind::Minimal);
      tc.liftSolve = smith_normal_form(transpose(tc.sc.yBasis));
      tc.liftMultiplierInv = detail::mod_inverse(tc.liftMultiplier % p, p);
    }
  }
  return tc;
}

namespace detail {

// Least order of a preimage of lambda's torus element in the simply
// connected cover: the smallest p^j with p^{j-1} y in Y_sc + p^j Y, where y
// is an integer representative of lambda.
inline int sc_lift_order(const TraceContext& tc, const PVec& lambda) {
  if (tc.pi1Trivial) return tc.p;
  const RootDatum& rd = tc.datum;
  const int r = rd.rank;
  Vec16 y = zero_vec();
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < r; ++i) y[j] += i64(lambda[i]) * rd.yBasis.at(i, j);
  i64 scale = 1;  // p^{j-1}
  int order = tc.p;
  for (size_t lvl = 0; lvl < tc.orderLattices.size(); ++lvl) {
    const IMat& V = tc.orderLattices[lvl].first;
    const std::vector<i64>& inv = tc.orderLattices[lvl].second;
    bool member = true;
    for (int i = 0; i < r && member; ++i) {
      i64 c = 0;
      for (int b = 0; b < r; ++b) c += scale * y[b] * V.at(b, i);
      if (i < int(inv.size()) && inv[size_t(i)] != 0)
        member = c % inv[size_t(i)] == 0;
      else
        member = c == 0;
    }
    if (member) return order;
    scale *= tc.p;
    order *= tc.p;
  }
  throw InvariantViolation("no lift order found within p^4");
}

inline Cyclotomic minimal_trace_direct(const TraceContext& tc, const PVec& lambda) {
  const RootDatum& rd = tc.datum;
  Cyclotomic t{tc.p};
  for (size_t w = 0; w < tc.minimal.weights.size(); ++w)
    t.add_root_power(pair_mod(tc.minimal.weights[w], lambda, rd.rank, tc.p),
                     tc.minimal.mult[w]);
  return t;
}

inline Cyclotomic minimal_trace_via_lift(const TraceContext& tc, const PVec& lambda) {
  const RootDatum& rd = tc.datum;
  const int r = rd.rank, p = tc.p;
  // Integer representative y of lambda; m*y lies in Y_sc, and its sc-basis
  // coordinates z follow from the Smith decomposition U*A*V = D of
  // A = transpose(sc.yBasis):  z = V * (U * (m*y)) / D.
  std::vector<i64> c(size_t(r), 0);
  for (int j = 0; j < r; ++j) {
    i64 y = 0;
    for (int i = 0; i < r; ++i) y += i64(lambda[i]) * rd.yBasis.at(i, j);
    c[size_t(j)] = tc.liftMultiplier * y;
  }
  std::vector<i64> w(size_t(r), 0);
  for (int i = 0; i < r; ++i) {
    i64 s = 0;
    for (int j = 0; j < r; ++j) s += tc.liftSolve.U.at(i, j) * c[size_t(j)];
    const i64 d = tc.liftSolve.invariants[size_t(i)];
    if (d == 0 || s % d != 0)
      throw InvariantViolation("lift representative is not in the cover's lattice");
    w[size_t(i)] = s / d;
  }
  PVec x{};
  for (int i = 0; i < r; ++i) {
    i64 z = 0;
    for (int j = 0; j < r; ++j) z += tc.liftSolve.V.at(i, j) * w[size_t(j)];
    z = ((z % p) + p) % p;
    x[size_t(i)] = uint8_t((z * tc.liftMultiplierInv) % p);
  }
  Cyclotomic t{p};
  for (size_t wt = 0; wt < tc.minimal.weights.size(); ++wt)
    t.add_root_power(pair_mod(tc.minimal.weights[wt], x, r, p), tc.minimal.mult[wt]);
  return t;
}

}  // namespace detail

// Full signature of one element of T[p] given by its mod-p Y-coordinates.
inline ElementSignature element_signature(const TraceContext& tc, const PVec& lambda) {
  const RootDatum& rd = tc.datum;
  const int r = rd.rank, p = tc.p;
  ElementSignature sig;
  sig.adjointTrace = Cyclotomic{p};

  bool isZero = true;
  for (int i = 0; i < r && isZero; ++i) isZero = lambda[size_t(i)] == 0;

  int vanishing = 0;
  Cyclotomic adj = Cyclotomic::integer(p, r);
  for (int i = 0; i < rd.rootCount(); ++i) {
    const int v = detail::pair_mod(rd.rootsX[size_t(i)], lambda, r, p);
    if (v == 0) ++vanishing;
    adj.add_root_power(v, 1);
  }
  sig.centralizerDimension = r + vanishing;
  sig.adjointTrace = adj;
  if (isZero) {
    sig.elementOrder = 1;
    sig.scLiftOrder = 1;
    sig.label = "1";
    return sig;
  }
  sig.elementOrder = p;
  sig.scLiftOrder = detail::sc_lift_order(tc, lambda);
  switch (tc.source) {
    case TraceContext::MinimalSource::None: break;
    case TraceContext::MinimalSource::Direct:
      sig.minimalTrace = detail::minimal_trace_direct(tc, lambda);
      break;
    case TraceContext::MinimalSource::Lift:
      sig.minimalTrace = detail::minimal_trace_via_lift(tc, lambda);
      break;
  }
  ElementInvariants inv{sig.elementOrder, sig.scLiftOrder, sig.centralizerDimension,
                        sig.adjointTrace, sig.minimalTrace};
  sig.label = element_class_label(rd, inv);
  return sig;
}

// Signatures are constant on W-orbits; cache them per orbit representative.
struct SignatureCache {
  std::map<u64, ElementSignature> byRepKey;
};

inline const ElementSignature& orbit_signature(const TraceContext& tc,
                                               const VectorOrbits& orbits,
                                               SignatureCache& cache, uint32_t orbitId) {
  const u64 key = orbits.partition.repKey[orbitId];
  auto it = cache.byRepKey.find(key);
  if (it == cache.byRepKey.end()) {
    const PVec rep = unpack_vec(key, orbits.partition.rank);
    it = cache.byRepKey.emplace(key, element_signature(tc, rep)).first;
  }
  return it->second;
}

// --------------------------------------------------------------------------
// Distribution of the nontrivial elements of E into semisimple classes.

inline std::vector<std::pair<ElementSignature, u64>> element_distribution(
    const WeylModAction& act, const TraceContext& tc, const VectorOrbits& orbits,
    SignatureCache& cache, const SubspaceRep& e) {
  const int p = act.p, r = act.rank(), k = e.k;
  std::map<uint32_t, u64> counts;
  if (k == r) {
    // Full-rank subgroups contain every vector: counts are the orbit sizes.
    for (size_t id = 0; id < orbits.partition.repKey.size(); ++id)
      if (orbits.partition.repKey[id] != 0)
        counts[uint32_t(id)] = orbits.partition.orbitSize[id];
  } else if (k > 0) {
    u64 total = 1;
    for (int i = 0; i < k; ++i) total *= u64(p);
    std::vector<int> digit(size_t(k), 0);
    for (u64 it = 1; it < total; ++it) {
      int pos = 0;
      while (true) {
        if (++digit[size_t(pos)] < p) break;
        digit[size_t(pos)] = 0;
        ++pos;
      }
      PVec v{};
      for (int j = 0; j < r; ++j) {
        i64 s = 0;
        for (int i = 0; i < k; ++i) s += i64(digit[size_t(i)]) * i64(e.rows[size_t(i)][size_t(j)]);
        v[size_t(j)] = uint8_t(s % p);
      }
      const u64 idx = orbits.partition.index_of_key(pack_vec(v, r));
      ++counts[orbits.partition.orbitOf[idx]];
    }
  }

  std::map<ElementSignature, u64, detail::SignatureLess> agg;
  u64 sum = 0;
  for (const auto& [id, c] : counts) {
    agg[orbit_signature(tc, orbits, cache, id)] += c;
    sum += c;
  }
  u64 expect = 1;
  for (int i = 0; i < k; ++i) expect *= u64(p);
  if (sum != expect - 1)
    throw CrossCheckFailure("distribution counts sum to " + std::to_string(sum) +
                            ", expected " + std::to_string(expect - 1));
  return {agg.begin(), agg.end()};
}

// Convenience entry building all context for one subspace.
inline std::vector<std::pair<ElementSignature, u64>> element_distribution(
    const RootDatum& rd, int p, const SubspaceRep& e) {
  const WeylModAction act = make_weyl_action(rd, p);
  const TraceContext tc = build_trace_context(rd, p);
  const VectorOrbits orbits = vector_orbits(act);
  SignatureCache cache;
  return element_distribution(act, tc, orbits, cache, e);
}

// --------------------------------------------------------------------------
// Dimension cross-check: dim C_G(E) from the root count must match the
// average of the adjoint character over E, computed in exact cyclotomic
// arithmetic.

inline int dim_centralizer_crosscheck(
    const RootDatum& rd, int p, const SubspaceRep& e,
    const std::vector<std::pair<ElementSignature, u64>>& distribution) {
  const int dimRoots = rd.rank + int(centralizer_subsystem(rd, p, e).size());
  const i64 dimG = rd.rank + rd.rootCount();
  Cyclotomic sum = Cyclotomic::integer(p, dimG);
  u64 order = 1;
  for (const auto& [sig, count] : distribution) {
    sum += sig.adjointTrace * Cyclotomic::integer(p, i64(count));
    order += count;
  }
  if (!sum.is_integer())
    throw CrossCheckFailure("adjoint character sum over the subgroup is irrational");
  const i64 s = sum.to_integer();
  if (s % i64(order) != 0)
    throw CrossCheckFailure("adjoint character sum " + std::to_string(s) +
                            " is not divisible by the subgroup order " +
                            std::to_string(order));
  const i64 dimTrace = s / i64(order);
  if (dimTrace != i64(dimRoots))
    throw CrossCheckFailure("centralizer dimension mismatch: roots give " +
                            std::to_string(dimRoots) + ", trace average gives " +
                            std::to_string(dimTrace));
  return dimRoots;
}

// --------------------------------------------------------------------------
// Torsion dichotomy: decide whether every toral elementary abelian
// p-subgroup has connected centralizer, without enumerating subgroup
// classes.  The recursion walks flags element by element: at a node with
// root subsystem Phi' (the roots vanishing on the flag so far), every
// W(Phi')-orbit representative mu must satisfy |C_{W(Phi')}(mu)| =
// |W(Phi'_mu)|; a mismatch exhibits a subgroup with disconnected
// centralizer (returned through `witness` as the flag of generators), and a
// match lets the recursion descend into Phi'_mu.  Nodes whose Weyl order is
// prime to p pass outright, because all component groups below them are
// p-groups of order dividing |W(Phi')|.

inline bool verify_steinberg(const RootDatum& rd, int p,
                             std::vector<PVec>* witness = nullptr) {
  const WeylModAction act = make_weyl_action(rd, p);
  const int r = rd.rank, modulus = act.group.modulus;
  std::set<std::vector<int>> passed;  // memo: subsystems fully verified
  std::vector<PVec> flag;

  std::function<bool(const std::vector<int>&)> verify =
      [&](const std::vector<int>& roots) -> bool {
    const detail::SubsystemStructure ss = detail::analyze_subsystem(rd, roots);
    if (ss.weylOrder % u64(p) != 0) return true;
    if (passed.count(roots)) return true;

    struct Child { std::vector<int> roots; PVec mu; };
    std::vector<Child> deeper;
    {
      ModMatrixGroup sub;
      sub.modulus = modulus;
      sub.rank = r;
      for (int s : ss.simples)
        sub.generators.push_back(pmat_from_imat(rd.reflection(s), modulus));
      sub.knownOrder = ss.weylOrder;
      const OrbitPartition part = orbit_partition(sub, act.mode);

      std::set<std::vector<int>> queued;
      for (size_t id = 0; id < part.repKey.size(); ++id) {
        const u64 key = part.repKey[id];
        if (key == 0) continue;
        const PVec mu = unpack_vec(key, r);
        std::vector<int> childRoots;
        for (int idx : roots)
          if (detail::pair_mod(rd.rootsX[size_t(idx)], mu, r, p) == 0)
            childRoots.push_back(idx);
        if (ss.weylOrder % part.orbitSize[id] != 0)
          throw InvariantViolation("orbit size does not divide the subsystem Weyl order");
        const u64 pointStab = ss.weylOrder / part.orbitSize[id];
        const u64 childWeyl = detail::analyze_subsystem(rd, childRoots).weylOrder;
        if (pointStab != childWeyl) {
          if (witness) {
            *witness = flag;
            witness->push_back(mu);
          }
          return false;
        }
        if (childRoots.size() == roots.size()) continue;  // mu fixed by all of W(Phi')
        if (childWeyl % u64(p) != 0) continue;            // subtree passes outright
        if (queued.insert(childRoots).second)
          deeper.push_back({std::move(childRoots), mu});
      }
    }
    for (const Child& ch : deeper) {
      flag.push_back(ch.mu);
      const bool ok = verify(ch.roots);
      flag.pop_back();
      if (!ok) return false;
    }
    passed.insert(roots);
    return true;
  };

  std::vector<int> all(size_t(rd.rootCount()));
  std::iota(all.begin(), all.end(), 0);
  return verify(all);
}

// --------------------------------------------------------------------------
// Full classification.

namespace detail {

inline ToralClass build_toral_class(const WeylModAction& act, const TraceContext& tc,
                                    const VectorOrbits& orbits, SignatureCache& cache,
                                    const SubspaceRep& rep, int rank, u64 orbitSize,
                                    const StabilizerHandle& setwise, bool repMinimal) {
  const RootDatum& rd = act.datum;
  const int p = act.p, r = act.rank(), k = rank;
  ToralClass tclass;
  tclass.representative = rep;
  tclass.rank = rank;
  tclass.orbitSize = orbitSize;
  tclass.repIsOrbitMinimal = repMinimal;

  if (orbitSize * setwise.order != act.weylOrder)
    throw CrossCheckFailure("orbit size times setwise stabilizer order is " +
                            std::to_string(orbitSize * setwise.order) +
                            ", expected the Weyl order " +
                            std::to_string(act.weylOrder));

  const StabilizerHandle pointwise = pointwise_stabilizer(act, rep);
  tclass.centralizer = component_group(act, rep, pointwise);

  if (setwise.order % pointwise.order != 0)
    throw CrossCheckFailure("pointwise stabilizer order does not divide the setwise order");
  tclass.normalizerQuotientOrder = setwise.order / pointwise.order;

  // Induced action of the setwise stabilizer on E, written in the basis of
  // the representative's echelon rows (coefficients read off at the pivots).
  std::vector<int> pivots;
  for (int i = 0; i < k; ++i) {
    int col = 0;
    while (col < r && rep.rows[size_t(i)][size_t(col)] == 0) ++col;
    pivots.push_back(col);
  }
  for (const PMat& g : setwise.generators) {
    const PMat gp = act.mode == ActionMode::InducedMod2 ? pmat_reduce(g, 2) : g;
    PMat ind = PMat::identity(k);
    std::array<PVec, MAX_RANK> image{};
    for (int i = 0; i < k; ++i) image[size_t(i)] = pmat_apply(gp, rep.rows[size_t(i)], p);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        ind.at(i, j) = image[size_t(i)][size_t(pivots[size_t(j)])];
    for (int i = 0; i < k; ++i)
      for (int c = 0; c < r; ++c) {
        i64 s = 0;
        for (int j = 0; j < k; ++j)
          s += i64(ind.at(i, j)) * i64(rep.rows[size_t(j)][size_t(c)]);
        if (uint8_t(((s % p) + p) % p) != image[size_t(i)][size_t(c)])
          throw InvariantViolation("setwise generator does not act on the subspace basis");
      }
    if (ind.is_identity()) continue;
    bool dup = false;
    for (const PMat& h : tclass.normalizerQuotientGenerators)
      if (pmat_equal(h, ind)) { dup = true; break; }
    if (!dup) tclass.normalizerQuotientGenerators.push_back(ind);
  }

  unsigned __int128 gl = 1;
  bool glOverflow = false;
  unsigned __int128 pk = 1;
  for (int i = 0; i < k; ++i) pk *= unsigned(p);
  for (int i = 0; i < k && !glOverflow; ++i) {
    unsigned __int128 pi = 1;
    for (int t = 0; t < i; ++t) pi *= unsigned(p);
    gl *= pk - pi;
    if (gl > (unsigned __int128)UINT64_MAX) glOverflow = true;
  }
  tclass.autFull = !glOverflow && tclass.normalizerQuotientOrder == u64(gl);

  tclass.distribution = element_distribution(act, tc, orbits, cache, rep);
  dim_centralizer_crosscheck(rd, p, rep, tclass.distribution);
  return tclass;
}

}  // namespace detail

inline std::vector<ToralClass> classify_toral(const RootDatum& rd, int p,
                                              const ToralClassOptions& options = {}) {
  const WeylModAction act = make_weyl_action(rd, p);
  const int r = rd.rank;
  int maxRank = options.maxRank < 0 ? r : std::min(options.maxRank, r);

  u64 total = 0;
  bool overBudget = false;
  for (int k = 0; k <= maxRank && !overBudget; ++k) {
    total += gaussian_binomial(r, k, p);
    if (total > options.enumerationBudget) overBudget = true;
  }

  struct BaseClass {
    SubspaceRep rep;
    int rank = 0;
    u64 orbitSize = 0;
    StabilizerHandle setwise;
    bool repMinimal = true;
  };
  std::vector<BaseClass> base;
  if (!overBudget) {
    for (const SubspaceClass& c :
         brute_force_classify(act, maxRank, options.enumerationBudget)) {
      const SubspaceOrbitResult orbit =
          subspace_orbit(act, c.rep, options.enumerationBudget);
      if (orbit.size != c.orbitSize)
        throw CrossCheckFailure("orbit re-enumeration disagrees with the class size");
      base.push_back({c.rep, c.rank, c.orbitSize, orbit.setwise, true});
    }
  } else {
    IncrementalOptions io = options.incremental;
    io.maxRank = maxRank;
    for (const IncrementalClass& c : classify_subspaces_incremental(act, io))
      base.push_back({c.rep, c.rank, c.orbitSize, c.setwise, c.repIsOrbitMinimal});
  }

  const TraceContext tc = build_trace_context(rd, p);
  const VectorOrbits orbits = vector_orbits(act);

  std::vector<ToralClass> out(base.size());
  const int workers = std::max(1, options.parallelism);
  if (workers == 1 || base.size() <= 1) {
    SignatureCache cache;
    for (size_t i = 0; i < base.size(); ++i)
      out[i] = detail::build_toral_class(act, tc, orbits, cache, base[i].rep,
                                         base[i].rank, base[i].orbitSize,
                                         base[i].setwise, base[i].repMinimal);
  } else {
    std::vector<std::future<void>> tasks;
    std::atomic<size_t> next{0};
    for (int w = 0; w < workers; ++w)
      tasks.push_back(std::async(std::launch::async, [&]() {
        SignatureCache cache;  // per-worker cache; entries are pure functions
        for (size_t i = next.fetch_add(1); i < base.size(); i = next.fetch_add(1))
          out[i] = detail::build_toral_class(act, tc, orbits, cache, base[i].rep,
                                             base[i].rank, base[i].orbitSize,
                                             base[i].setwise, base[i].repMinimal);
      }));
    for (std::future<void>& t : tasks) t.get();
  }

  std::sort(out.begin(), out.end(), [r](const ToralClass& a, const ToralClass& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    for (int i = 0; i < a.rank; ++i)
      for (int j = 0; j < r; ++j) {
        const uint8_t x = a.representative.rows[size_t(i)][size_t(j)];
        const uint8_t y = b.representative.rows[size_t(i)][size_t(j)];
        if (x != y) return x < y;
      }
    return false;
  });
  return out;
}

}  // namespace torsion_atlas
