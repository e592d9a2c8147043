#pragma once

// Backtracking over a stabilizer chain: subspace transporters and the
// incremental subspace classifier.
//
// The transporter search walks a chain whose leading base points are a basis
// of the source subspace.  Writing a group element as a product of one
// transversal element per level, the image of base i is fixed by the first
// i+1 factors, so a depth-first search over transversal choices can constrain
// each basis image to lie in the target's point set; forcing the chosen
// images to stay linearly independent makes every completed branch an exact
// transporter.  This answers conjugacy of two subspaces ("is there w with
// w.A = B?") without touching the full orbit of either.
//
// The incremental classifier builds rank-(k+1) classes from rank-k classes:
// extension candidates are vector orbits of the rank-k setwise stabilizer,
// fusion across candidates is by transporter tests, and the new setwise
// stabilizer comes from the flag stabilizer and equivalent-hyperplane count
//
//   |N(E')| = |N(E) meet N(E')| * #{hyperplanes F of E' flag-conjugate to E}
//
// (orbit-stabilizer for N(E') acting on the hyperplanes of E'), so orbit
// sizes never require orbit enumeration.  Assembled stabilizers are certified
// against their computed order, and a flag double-count identity cross-checks
// orbit sizes on small instances.

#include <algorithm>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "torsion_atlas/errors.hpp"
#include "torsion_atlas/modgroup.hpp"
#include "torsion_atlas/weyl_action.hpp"

namespace torsion_atlas {

namespace detail {

// Sorted packed point keys of a subspace in the action domain (mod-2 keys
// for p = 2, mod-p keys otherwise).  Constraint set of the transporter DFS.
struct PointSet {
  std::vector<u64> keys;
  bool contains(u64 k) const {
    return std::binary_search(keys.begin(), keys.end(), k);
  }
};

inline PointSet subspace_point_set(const WeylModAction& act,
                                   const SubspaceRep& s) {
  const int p = act.p, r = act.rank();
  u64 count = 1;
  for (int i = 0; i < s.k; ++i) {
    count *= u64(p);
    if (count > (u64(1) << 23))
      throw BudgetExceeded("subspace point set: too many points");
  }
  PointSet ps;
  ps.keys.reserve(size_t(count));
  std::vector<uint8_t> coeff(size_t(s.k), 0);
  for (;;) {
    PVec v{};
    for (int i = 0; i < s.k; ++i) {
      if (!coeff[size_t(i)]) continue;
      for (int j = 0; j < r; ++j)
        v[j] = uint8_t((v[j] + coeff[size_t(i)] * s.rows[i][j]) % p);
    }
    ps.keys.push_back(pack_vec(v, r));
    size_t t = 0;
    while (t < coeff.size() && ++coeff[t] == p) coeff[t++] = 0;
    if (t == coeff.size()) break;
  }
  std::sort(ps.keys.begin(), ps.keys.end());
  return ps;
}

// Append v to an echelonized row set unless it is already in the span.
inline bool extend_echelon(int p, int r, std::array<PVec, MAX_RANK>& rows,
                           int& count, const PVec& v) {
  if (count >= MAX_RANK) return false;
  std::array<PVec, MAX_RANK> tmp = rows;
  tmp[size_t(count)] = v;
  if (rref_rows(p, tmp, count + 1, r) != count + 1) return false;
  rows = tmp;
  ++count;
  return true;
}

}  // namespace detail

namespace detail {

// A stabilizer chain heap-bundled with the group object it references, so
// every transport chain reusing its levels shares one build.
struct ChainSegment {
  ModMatrixGroup grp;
  Bsgs chain;
};

}  // namespace detail

// A stabilizer chain view whose base points are a basis of one subspace
// instance; transporter searches run from that instance.  Level i holds the
// orbit of basis row i under the subgroup fixing rows 0..i-1 and is served by
// a shared segment: a child chain extends its parent's view by one level, so
// sibling instances share every ancestor level instead of each rebuilding a
// full chain of the whole group.
struct TransportChain {
  int k = 0;                   // number of leading base levels
  std::vector<PVec> baseRows;  // the basis rows behind the base points
  std::vector<std::pair<std::shared_ptr<const detail::ChainSegment>, size_t>>
      owners;  // (segment, level index within it) per base level
  const Bsgs::Level& level(size_t i) const {
    return owners[i].first->chain.level(owners[i].second);
  }
};

// Build a chain with all of `rows` prescribed as base points of one segment.
inline TransportChain make_transport_chain(const WeylModAction& act,
                                           const std::vector<PVec>& rows) {
  std::vector<BasePoint> base;
  for (const PVec& v : rows)
    base.push_back({act.mode, pack_vec(v, act.rank())});
  auto seg = std::make_shared<detail::ChainSegment>();
  seg->grp = act.group;
  seg->chain = Bsgs::build(seg->grp, base);
  TransportChain tc;
  tc.k = int(rows.size());
  tc.baseRows = rows;
  for (size_t i = 0; i < rows.size(); ++i) tc.owners.emplace_back(seg, i);
  return tc;
}

// Extend a parent chain by one more base row.  Only the new level is built,
// inside the (usually far smaller) pointwise stabilizer of the parent rows,
// whose certified generators and order the parent's last segment provides.
inline TransportChain extend_transport_chain(const WeylModAction& act,
                                             const TransportChain& parent,
                                             const PVec& v) {
  auto seg = std::make_shared<detail::ChainSegment>();
  if (parent.k == 0) {
    seg->grp = act.group;
  } else {
    const auto& [pseg, plvl] = parent.owners.back();
    StabilizerHandle h = pseg->chain.stabilizer(plvl + 1);
    seg->grp.modulus = act.group.modulus;
    seg->grp.rank = act.group.rank;
    seg->grp.generators = std::move(h.generators);
    seg->grp.knownOrder = h.order;
  }
  seg->chain =
      Bsgs::build(seg->grp, {BasePoint{act.mode, pack_vec(v, act.rank())}});
  TransportChain tc;
  tc.k = parent.k + 1;
  tc.baseRows = parent.baseRows;
  tc.baseRows.push_back(v);
  tc.owners = parent.owners;
  tc.owners.emplace_back(seg, 0);
  return tc;
}

namespace detail {

// Depth-first search for a group element whose images of the chain's leading
// base points land in the prescribed sets and stay independent.
struct TransportSearch {
  const WeylModAction* act = nullptr;
  const TransportChain* tc = nullptr;
  const std::vector<const PointSet*>* allowed = nullptr;
  u64 budget = 0;
  u64 nodes = 0;

  std::optional<PMat> run() {
    std::array<PVec, MAX_RANK> ech{};
    return dfs(0, PMat::identity(act->group.rank), ech, 0);
  }

  std::optional<PMat> dfs(int lvl, const PMat& g,
                          const std::array<PVec, MAX_RANK>& ech, int echK) {
    if (lvl == tc->k) return g;
    const Bsgs::Level& level = tc->level(size_t(lvl));
    const PointSet& target = *(*allowed)[size_t(lvl)];
    const int mod = act->group.modulus, r = act->group.rank, fp = act->p;
    auto try_point = [&](u64 y, u64 image) -> std::optional<PMat> {
      if (++nodes > budget)
        throw BudgetExceeded("transporter search exceeded its node budget");
      std::array<PVec, MAX_RANK> ech2 = ech;
      int echK2 = echK;
      if (!extend_echelon(fp, r, ech2, echK2, unpack_vec(image, r)))
        return std::nullopt;
      PMat u = level.tree.transversal(y, level.gens);
      return dfs(lvl + 1, pmat_mul(g, u, mod), ech2, echK2);
    };
    if (target.keys.size() < level.tree.size()) {
      PMat gInv = pmat_inverse(g, mod);
      for (u64 image : target.keys) {
        u64 y = apply_point(act->group, gInv, image, act->mode);
        if (!level.tree.has(y)) continue;
        if (auto res = try_point(y, image)) return res;
      }
    } else {
      for (u64 y : level.tree.points()) {
        u64 image = apply_point(act->group, g, y, act->mode);
        if (!target.contains(image)) continue;
        if (auto res = try_point(y, image)) return res;
      }
    }
    return std::nullopt;
  }
};

}  // namespace detail

// Element w with w . (chain instance) = target, or nullopt if the two
// subspaces lie in different orbits.  `targetSet` must be the point set of
// `target`; the overload below computes it when the caller has none at hand.
inline std::optional<PMat> transport_subspace(const WeylModAction& act,
                                              const TransportChain& tc,
                                              const SubspaceRep& target,
                                              const detail::PointSet& targetSet,
                                              u64 budget = 50000000) {
  if (target.k != tc.k)
    throw InvariantViolation("transport_subspace: rank mismatch");
  if (tc.k == 0) return PMat::identity(act.group.rank);
  std::vector<const detail::PointSet*> allowed(size_t(tc.k), &targetSet);
  detail::TransportSearch search{&act, &tc, &allowed, budget, 0};
  std::optional<PMat> w = search.run();
  if (w) {
    SubspaceRep inst = subspace_from_vectors(act.p, act.rank(), tc.baseRows);
    if (!(sub_key(apply_subspace(act.p, *w, inst)) == sub_key(target)))
      throw InvariantViolation("transport_subspace: returned element is wrong");
  }
  return w;
}

inline std::optional<PMat> transport_subspace(const WeylModAction& act,
                                              const TransportChain& tc,
                                              const SubspaceRep& target,
                                              u64 budget = 50000000) {
  if (tc.k == 0 && target.k == 0) return PMat::identity(act.group.rank);
  detail::PointSet ps = detail::subspace_point_set(act, target);
  return transport_subspace(act, tc, target, ps, budget);
}

// Element w fixing the chain instance's span setwise while mapping the span
// of its first k-1 base rows onto the hyperplane F.  The chain must have been
// built on a basis listing the hyperplane part first; `wholeSet` is the point
// set of the full instance span.
inline std::optional<PMat> transport_flag(const WeylModAction& act,
                                          const TransportChain& tc,
                                          const SubspaceRep& f,
                                          const detail::PointSet& wholeSet,
                                          u64 budget = 50000000) {
  if (f.k + 1 != tc.k)
    throw InvariantViolation("transport_flag: hyperplane rank mismatch");
  detail::PointSet fs = detail::subspace_point_set(act, f);
  std::vector<const detail::PointSet*> allowed(size_t(tc.k), &fs);
  allowed.back() = &wholeSet;
  detail::TransportSearch search{&act, &tc, &allowed, budget, 0};
  std::optional<PMat> w = search.run();
  if (w) {
    std::vector<PVec> part(tc.baseRows.begin(), tc.baseRows.end() - 1);
    SubspaceRep epart = subspace_from_vectors(act.p, act.rank(), part);
    SubspaceRep whole = subspace_from_vectors(act.p, act.rank(), tc.baseRows);
    if (!(sub_key(apply_subspace(act.p, *w, epart)) == sub_key(f)) ||
        !(sub_key(apply_subspace(act.p, *w, whole)) == sub_key(whole)))
      throw InvariantViolation("transport_flag: returned element is wrong");
  }
  return w;
}

// ---------------------------------------------------------------------------
// Incremental classification.

// Number of roots vanishing identically on the subspace mod p: the cheap
// conjugacy invariant used to shortlist classes before transporter tests.
inline long count_vanishing_roots(const WeylModAction& act,
                                  const SubspaceRep& s) {
  const RootDatum& rd = act.datum;
  long count = 0;
  for (size_t a = 0; a < rd.rootsX.size(); ++a) {
    bool vanishes = true;
    for (int i = 0; i < s.k && vanishes; ++i) {
      i64 pair = 0;
      for (int j = 0; j < rd.rank; ++j)
        pair += rd.rootsX[a][size_t(j)] * i64(s.rows[i][j]);
      if (pair % act.p != 0) vanishes = false;
    }
    if (vanishes) ++count;
  }
  return count;
}

struct IncrementalClass {
  SubspaceRep rep;
  int rank = 0;
  u64 orbitSize = 0;
  StabilizerHandle setwise;       // setwise stabilizer of `rep`
  bool repIsOrbitMinimal = true;  // exact lexicographic orbit minimum?
};

struct IncrementalOptions {
  int maxRank = -1;               // -1 = full ambient rank
  u64 canonicalBudget = 1000000;  // orbit size cap for exact minimal reps
  u64 dfsBudget = 50000000;       // transporter search node budget
  u64 hyperplaneCheckCap = 1200;  // flag double count: orbit tests per class
  u64 maxClasses = 4096;          // per-rank class cap; beyond is infeasible
};

namespace detail {

// Orbit of a subspace under a subgroup given by generators with known order,
// optionally with the certified stabilizer of the start point inside it.
struct SubgroupOrbit {
  u64 size = 0;
  std::vector<SubKey> keys;  // discovery order; keys[0] = start
  StabilizerHandle stab;     // filled only when requested
};

inline SubgroupOrbit subgroup_subspace_orbit(const ModMatrixGroup& sub, int p,
                                             int r, const SubspaceRep& start,
                                             u64 budget,
                                             bool wantStabilizer = true) {
  SubgroupOrbit res;
  std::unordered_map<SubKey, std::pair<uint32_t, int16_t>, SubKeyHash> tree;
  std::vector<SubKey>& keys = res.keys;
  SubKey k0 = sub_key(start);
  tree.emplace(k0, std::make_pair(0u, int16_t(-1)));
  keys.push_back(k0);
  for (size_t qi = 0; qi < keys.size(); ++qi) {
    SubspaceRep cur = sub_from_key(keys[qi], r, start.k);
    for (size_t gi = 0; gi < sub.generators.size(); ++gi) {
      SubKey img = sub_key(apply_subspace(p, sub.generators[gi], cur));
      if (tree.emplace(img, std::make_pair(uint32_t(qi), int16_t(gi))).second) {
        keys.push_back(img);
        if (keys.size() > budget)
          throw BudgetExceeded("subgroup subspace orbit exceeds budget");
      }
    }
  }
  res.size = keys.size();
  if (!wantStabilizer) return res;
  u64 subOrder = sub.knownOrder ? *sub.knownOrder : group_order(sub);
  if (subOrder % res.size != 0)
    throw InvariantViolation("subgroup orbit size does not divide the order");
  if (res.size == 1) {
    res.stab.generators = sub.generators;
    res.stab.order = subOrder;
  } else {
    res.stab = certify_stabilizer(sub, subOrder / res.size, tree, keys, p, r,
                                  start.k);
  }
  return res;
}

// Content-addressed cache of transporter chains.  Keys are the packed
// echelon form of the instance a chain serves, which survives class
// reordering.  A miss resolves the row prefix recursively and extends that
// chain, so only one new stabilizer-chain level is built per instance.
struct ChainCache {
  const WeylModAction* act = nullptr;
  size_t cap = 0;
  u64 tick = 0;
  std::unordered_map<SubKey, std::pair<std::shared_ptr<TransportChain>, u64>,
                     SubKeyHash>
      entries;

  std::shared_ptr<TransportChain> get(const std::vector<PVec>& rows) {
    if (rows.empty()) return std::make_shared<TransportChain>();
    SubKey id = sub_key(subspace_from_vectors(act->p, act->rank(), rows));
    auto it = entries.find(id);
    if (it != entries.end()) {
      it->second.second = ++tick;
      return it->second.first;
    }
    std::vector<PVec> prefix(rows.begin(), rows.end() - 1);
    std::shared_ptr<TransportChain> parent = get(prefix);
    auto chain = std::make_shared<TransportChain>(
        extend_transport_chain(*act, *parent, rows.back()));
    if (entries.size() >= cap) {
      auto oldest = entries.begin();
      for (auto jt = entries.begin(); jt != entries.end(); ++jt)
        if (jt->second.second < oldest->second.second) oldest = jt;
      entries.erase(oldest);
    }
    entries.emplace(id, std::make_pair(chain, ++tick));
    return chain;
  }
};

}  // namespace detail

// Classify subspaces rank by rank: extension candidates up to the parent's
// setwise stabilizer, transporter fusion, and stabilizers by the hyperplane
// formula.  Class representatives are exact orbit minima whenever the orbit
// fits the canonical budget; beyond it they are deterministic class members
// (flagged on the class record), since finding the orbit minimum without
// enumerating the orbit is not supported.
inline std::vector<IncrementalClass> classify_subspaces_incremental(
    const WeylModAction& act, const IncrementalOptions& opt = {}) {
  const int r = act.rank(), p = act.p;
  const int maxRank = opt.maxRank < 0 ? r : std::min(opt.maxRank, r);

  struct Work {
    std::vector<PVec> baseRows;  // construction basis: parent rows then v
    SubspaceRep inst;            // RREF of baseRows; stabGens stabilize this
    SubspaceRep rep;             // reported representative
    bool repMinimal = false;
    long phi = 0;  // vanishing-root count
    u64 stabOrder = 0;
    std::vector<PMat> stabGens;
    u64 orbitSize = 0;
    std::vector<uint32_t> vectorIds;  // lazy secondary invariant
  };

  // Full-group vector orbits: candidate partition at rank 0 and the lazy
  // secondary invariant.  The invariant is the orbit-id multiset over every
  // nonzero vector of the subspace — projective representatives would not do,
  // since a scalar multiple can lie in a different orbit when the scalars are
  // not realized inside the group (type A_n, odd p).
  OrbitPartition wOrbits = orbit_partition(act.group, act.mode);
  auto vector_ids = [&](const SubspaceRep& s) {
    std::vector<uint32_t> ids;
    std::vector<uint8_t> coeff(size_t(s.k), 0);
    for (;;) {
      size_t t = 0;
      while (t < coeff.size() && ++coeff[t] == p) coeff[t++] = 0;
      if (t == coeff.size()) break;
      PVec v{};
      for (int i = 0; i < s.k; ++i) {
        if (!coeff[size_t(i)]) continue;
        for (int j = 0; j < r; ++j)
          v[j] = uint8_t((v[j] + coeff[size_t(i)] * s.rows[i][j]) % p);
      }
      ids.push_back(
          wOrbits.orbitOf[size_t(wOrbits.index_of_key(pack_vec(v, r)))]);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  };

  std::vector<std::vector<Work>> byRank(size_t(r) + 1);
  {
    Work w0;
    w0.inst = subspace_from_vectors(p, r, {});
    w0.rep = w0.inst;
    w0.repMinimal = true;
    w0.phi = long(act.datum.rootsX.size());
    w0.stabOrder = act.weylOrder;
    w0.stabGens = act.group.generators;
    w0.orbitSize = 1;
    byRank[0].push_back(std::move(w0));
  }

  detail::ChainCache cache{&act, size_t(1) << 20, 0, {}};

  for (int k = 0; k < maxRank; ++k) {
    auto& parents = byRank[size_t(k)];
    auto& out = byRank[size_t(k) + 1];
    for (size_t ci = 0; ci < parents.size(); ++ci) {
      Work& c = parents[ci];
      ModMatrixGroup sub;
      sub.modulus = act.group.modulus;
      sub.rank = r;
      sub.generators = c.stabGens;
      sub.knownOrder = c.stabOrder;
      // Superspaces of the parent correspond to projective points of the
      // quotient by it.  Each coset of the parent holds a unique vector
      // vanishing on the parent's pivot columns, so the representatives live
      // on the free columns, and normalizing the highest nonzero free
      // coordinate to 1 visits every superspace exactly once.  A whole
      // parent-stabilizer orbit of superspaces is fused the moment one of
      // its members is identified.
      std::vector<int> freeCols;
      {
        std::array<bool, MAX_RANK> pivots{};
        for (int i = 0; i < c.inst.k; ++i) {
          int col = 0;
          while (col < r && c.inst.rows[i][col] == 0) ++col;
          if (col == r) throw InvariantViolation("incremental: zero basis row");
          pivots[size_t(col)] = true;
        }
        for (int col = 0; col < r; ++col)
          if (!pivots[size_t(col)]) freeCols.push_back(col);
      }
      std::unordered_map<SubKey, size_t, SubKeyHash> fused;  // space -> class
      std::unordered_map<size_t, u64> scount;  // class -> superspaces fused
      std::unordered_map<size_t, u64> hplain;  // discovered here -> plain count
      for (size_t top = 0; top < freeCols.size(); ++top) {
        std::vector<uint8_t> digit(top, 0);
        for (;;) {
          PVec v{};
          v[size_t(freeCols[top])] = 1;
          for (size_t i = 0; i < top; ++i) v[size_t(freeCols[i])] = digit[i];
          std::vector<PVec> rows = c.baseRows;
          rows.push_back(v);
          SubspaceRep cand = subspace_from_vectors(p, r, rows);
          if (cand.k != k + 1)
            throw InvariantViolation("incremental: extension rank is wrong");
          auto known = fused.find(sub_key(cand));
          if (known != fused.end()) {
            // Already fused when its orbit representative was identified.
            size_t t = 0;
            while (t < digit.size() && ++digit[t] == p) digit[t++] = 0;
            if (t == digit.size()) break;
            continue;
          }
          size_t found = size_t(-1);
          if (k + 1 == r) {
            // The full space is a single fixed class.
            if (out.empty()) {
              Work d;
              d.baseRows = rows;
              d.inst = cand;
              d.rep = cand;
              d.repMinimal = true;
              d.phi = count_vanishing_roots(act, cand);
              d.stabOrder = act.weylOrder;
              d.stabGens = act.group.generators;
              d.orbitSize = 1;
              out.push_back(std::move(d));
            }
            found = 0;
            fused.emplace(sub_key(cand), found);
            scount[found] += 1;
          } else {
            long phiCand = count_vanishing_roots(act, cand);
            std::vector<uint32_t> candIds;
            std::optional<detail::PointSet> candSet;
            for (size_t di = 0; di < out.size(); ++di) {
              if (out[di].phi != phiCand) continue;
              if (out[di].vectorIds.empty())
                out[di].vectorIds = vector_ids(out[di].inst);
              if (candIds.empty()) candIds = vector_ids(cand);
              if (out[di].vectorIds != candIds) continue;
              auto chain = cache.get(out[di].baseRows);
              if (!candSet) candSet = detail::subspace_point_set(act, cand);
              if (transport_subspace(act, *chain, cand, *candSet,
                                     opt.dfsBudget)) {
                found = di;
                break;
              }
            }
            if (found == size_t(-1)) {
              // New class: flag stabilizer, then the hyperplane sweep.
              Work d;
              d.baseRows = rows;
              d.inst = cand;
              d.rep = cand;
              d.phi = phiCand;
              detail::SubgroupOrbit flagOrbit = detail::subgroup_subspace_orbit(
                  sub, p, r, cand, u64(1) << 21);
              auto dChain = cache.get(rows);
              detail::PointSet wholeSet = detail::subspace_point_set(act, cand);
              SubKey epartKey = sub_key(c.inst);
              // Hyperplanes of cand = kernels of projective functionals on its
              // coefficient space (highest nonzero functional entry pinned to 1).
              std::vector<SubspaceRep> hypers;
              std::unordered_map<SubKey, uint32_t, SubKeyHash> hyperIdx;
              for (int top = 0; top <= k; ++top) {
                std::vector<uint8_t> phi(size_t(top), 0);
                for (;;) {
                  std::vector<PVec> fRows;
                  for (int j = 0; j <= k; ++j) {
                    if (j == top) continue;
                    int pj = j < top ? int(phi[size_t(j)]) : 0;
                    // Kernel basis vector e_j - phi_j e_top, in ambient coords.
                    PVec w{};
                    for (int col = 0; col < r; ++col) {
                      int e = int(cand.rows[j][col]) -
                              pj * int(cand.rows[top][col]);
                      w[col] = uint8_t(((e % p) + p) % p);
                    }
                    fRows.push_back(w);
                  }
                  SubspaceRep f = subspace_from_vectors(p, r, fRows);
                  if (f.k != k)
                    throw InvariantViolation("incremental: bad hyperplane");
                  hyperIdx.emplace(sub_key(f), uint32_t(hypers.size()));
                  hypers.push_back(f);
                  size_t t = 0;
                  while (t < phi.size() && ++phi[t] == p) phi[t++] = 0;
                  if (t == phi.size()) break;
                }
              }
              auto apply_to = [&](const PMat& m, uint32_t idx) {
                auto it = hyperIdx.find(sub_key(apply_subspace(p, m, hypers[idx])));
                if (it == hyperIdx.end())
                  throw InvariantViolation(
                      "incremental: stabilizer leaves the hyperplane set");
                return it->second;
              };
              // Sweep the hyperplanes by orbit under the stabilizer generators
              // known so far: one exact flag test decides a whole orbit, and
              // each successful transporter joins the generator list, so only
              // a few searches run even when hyperplanes are plentiful.
              std::vector<PMat> hgens = flagOrbit.stab.generators;
              std::vector<uint8_t> status(hypers.size(), 0);  // 1 in, 2 out
              std::vector<uint32_t> inOrbit;
              auto push_in = [&](uint32_t idx) {
                if (status[idx] == 2)
                  throw CrossCheckFailure(
                      "incremental: flag orbit met a rejected hyperplane");
                if (status[idx] == 1) return;
                status[idx] = 1;
                inOrbit.push_back(idx);
              };
              auto itEp = hyperIdx.find(epartKey);
              if (itEp == hyperIdx.end())
                throw InvariantViolation(
                    "incremental: parent is not a hyperplane of its extension");
              push_in(itEp->second);
              size_t closed = 0;
              auto close_in = [&]() {
                for (; closed < inOrbit.size(); ++closed)
                  for (const PMat& m : hgens) push_in(apply_to(m, inOrbit[closed]));
              };
              close_in();
              for (uint32_t fi = 0; fi < uint32_t(hypers.size()); ++fi) {
                if (status[fi] != 0) continue;
                if (count_vanishing_roots(act, hypers[fi]) != c.phi) {
                  status[fi] = 2;  // invariant mismatch; orbits cannot reach it
                  continue;
                }
                if (auto t = transport_flag(act, *dChain, hypers[fi], wholeSet,
                                            opt.dfsBudget)) {
                  hgens.push_back(*t);
                  push_in(fi);
                  closed = 0;  // reprocess members under the larger generator set
                  close_in();
                } else {
                  // Not flag-conjugate, so neither is anything reachable from it
                  // under the stabilizer generators found so far.
                  std::vector<uint32_t> queue{fi};
                  status[fi] = 2;
                  for (size_t qi = 0; qi < queue.size(); ++qi)
                    for (const PMat& m : hgens) {
                      uint32_t idx = apply_to(m, queue[qi]);
                      if (status[idx] == 1)
                        throw CrossCheckFailure(
                            "incremental: flag orbit met a rejected hyperplane");
                      if (status[idx] == 0) {
                        status[idx] = 2;
                        queue.push_back(idx);
                      }
                    }
                }
              }
              u64 hFlag = inOrbit.size();
              d.stabOrder = flagOrbit.stab.order * hFlag;
              if (d.stabOrder == 0 || act.weylOrder % d.stabOrder != 0)
                throw InvariantViolation(
                    "incremental: stabilizer order does not divide the group");
              d.orbitSize = act.weylOrder / d.stabOrder;
              d.stabGens = hgens;
              // Certify the assembled stabilizer against its computed order.
              {
                ModMatrixGroup ver;
                ver.modulus = act.group.modulus;
                ver.rank = r;
                ver.generators = d.stabGens;
                ver.knownOrder = d.stabOrder;
                bool reached = false;
                try {
                  Bsgs::build(ver, {}, &reached);
                } catch (const InvariantViolation&) {
                  throw CrossCheckFailure(
                      "incremental: assembled stabilizer exceeds computed order");
                }
                if (!reached)
                  throw CrossCheckFailure(
                      "incremental: stabilizer failed order certification");
              }
              // Hyperplanes plainly conjugate to the parent, counted one test
              // per orbit of the now-certified setwise stabilizer.
              u64 hPlain = 0;
              bool doPlain = k > 0;
              if (k == 0) {
                hPlain = 1;  // the zero space is the only hyperplane
              } else {
                std::shared_ptr<TransportChain> cChain = cache.get(c.baseRows);
                std::vector<uint8_t> seen(hypers.size(), 0);
                u64 repTests = 0;
                for (uint32_t fi = 0; fi < uint32_t(hypers.size()) && doPlain;
                     ++fi) {
                  if (seen[fi]) continue;
                  std::vector<uint32_t> queue{fi};
                  seen[fi] = 1;
                  for (size_t qi = 0; qi < queue.size(); ++qi)
                    for (const PMat& m : hgens) {
                      uint32_t idx = apply_to(m, queue[qi]);
                      if (!seen[idx]) {
                        seen[idx] = 1;
                        queue.push_back(idx);
                      }
                    }
                  if (status[fi] == 1) {
                    hPlain += queue.size();  // flag-conjugates are conjugates
                    continue;
                  }
                  if (count_vanishing_roots(act, hypers[fi]) != c.phi) continue;
                  if (++repTests > opt.hyperplaneCheckCap) {
                    doPlain = false;
                    break;
                  }
                  if (transport_subspace(act, *cChain, hypers[fi],
                                         opt.dfsBudget))
                    hPlain += queue.size();
                }
              }
              if (out.size() >= opt.maxClasses)
                throw BudgetExceeded(
                    "incremental: class count exceeds its budget");
              found = out.size();
              out.push_back(std::move(d));
              if (doPlain || k == 0) hplain[found] = hPlain;
              for (const SubKey& sk : flagOrbit.keys)
                if (!fused.emplace(sk, found).second)
                  throw CrossCheckFailure(
                      "incremental: superspace orbits overlap");
              scount[found] += flagOrbit.size;
            } else {
              // Fused into a known class: mark its whole stabilizer orbit so
              // later coset representatives skip identification entirely.
              detail::SubgroupOrbit norb = detail::subgroup_subspace_orbit(
                  sub, p, r, cand, u64(1) << 21, false);
              for (const SubKey& sk : norb.keys)
                if (!fused.emplace(sk, found).second)
                  throw CrossCheckFailure(
                      "incremental: superspace orbits overlap");
              scount[found] += norb.size;
            }
          }
          Work& d = out[found];
          if (!d.repMinimal &&
              sub_key_less(sub_key(cand), sub_key(d.rep), (k + 1) * r))
            d.rep = cand;
          size_t t = 0;
          while (t < digit.size() && ++digit[t] == p) digit[t++] = 0;
          if (t == digit.size()) break;
        }
      }
      // Superspace accounting: the coset representatives cover each superspace
      // of the parent exactly once, so the fused totals must add up to the
      // number of projective points of the quotient.
      u64 totalSup = 0;
      for (const auto& kv : scount) totalSup += kv.second;
      u64 expectSup = 1;
      for (int i = 0; i < r - k; ++i) expectSup *= u64(p);
      expectSup = (expectSup - 1) / u64(p - 1);
      if (totalSup != expectSup)
        throw CrossCheckFailure("incremental: superspace count mismatch");
      // Flag double count: for every class first discovered from this parent,
      // |orbit(E')| * #(hyperplanes of E' conjugate to E) must equal
      // |orbit(E)| * #(superspaces of E lying in the class of E').
      for (const auto& [di, hp] : hplain) {
        if (u128(out[di].orbitSize) * hp != u128(c.orbitSize) * scount.at(di))
          throw CrossCheckFailure("incremental: flag double count failed");
      }
    }
    if (out.empty())
      throw InvariantViolation("incremental: no classes at a feasible rank");
    // Canonicalize within budget, then order the level.
    for (Work& d : out) {
      if (d.orbitSize <= opt.canonicalBudget) {
        SubspaceOrbitResult orb = subspace_orbit(act, d.inst, d.orbitSize);
        if (orb.size != d.orbitSize)
          throw CrossCheckFailure("incremental: orbit size mismatch");
        if (orb.setwise.order != d.stabOrder)
          throw CrossCheckFailure("incremental: stabilizer order mismatch");
        d.rep = orb.canonicalRep;
        d.repMinimal = true;
      }
    }
    std::sort(out.begin(), out.end(), [&](const Work& a, const Work& b) {
      return sub_key_less(sub_key(a.rep), sub_key(b.rep), (k + 1) * r);
    });
  }

  // Conjugate stabilizer generators onto the reported representative and
  // assemble the flat ordered list.
  std::vector<IncrementalClass> classes;
  for (int k = 0; k <= maxRank; ++k) {
    for (Work& w : byRank[size_t(k)]) {
      IncrementalClass c;
      c.rep = w.rep;
      c.rank = k;
      c.orbitSize = w.orbitSize;
      c.repIsOrbitMinimal = w.repMinimal;
      c.setwise.order = w.stabOrder;
      if (sub_key(w.rep) == sub_key(w.inst)) {
        c.setwise.generators = w.stabGens;
      } else {
        auto chain = cache.get(w.baseRows);
        std::optional<PMat> t = transport_subspace(act, *chain, w.rep);
        if (!t)
          throw InvariantViolation(
              "incremental: representative left its own class");
        PMat tInv = pmat_inverse(*t, act.group.modulus);
        for (const PMat& g : w.stabGens)
          c.setwise.generators.push_back(pmat_mul(
              pmat_mul(*t, g, act.group.modulus), tInv, act.group.modulus));
      }
      for (const PMat& g : c.setwise.generators)
        if (!(sub_key(apply_subspace(p, g, c.rep)) == sub_key(c.rep)))
          throw InvariantViolation(
              "incremental: conjugated generator misses the representative");
      classes.push_back(std::move(c));
    }
  }
  return classes;
}

}  // namespace torsion_atlas
