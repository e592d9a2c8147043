#pragma once

// Matrix groups over Z/m for small m (m <= 13) acting on (Z/m)^r, r <= MAX_RANK.
//
// This is the computational kernel behind every orbit, stabilizer and order
// computation in the library.  Design points:
//
//   * Matrices are dense uint8 arrays with a runtime dimension.  All entries
//     are kept reduced to [0, m).
//
//   * Points of the action are vectors packed into a u64 at 4 bits per
//     coordinate (m <= 13 < 16), so hashing and equality are single-word
//     operations.
//
//   * Two point actions are supported.  Ambient is the plain action of the
//     matrices mod m.  InducedMod2 reduces the image mod 2; it is used for the
//     p = 2 case, where the group is stored mod 4 (the smallest modulus with a
//     faithful Weyl action when p = 2) while elementary abelian 2-subgroups
//     live mod 2.  Stabilizers taken in InducedMod2 mode are then full
//     preimages and include the kernel of reduction, which is exactly what the
//     component-group computations need.
//
//   * Stabilizer chains (BSGS) support mixed-mode base points.  When the
//     group's order is known in advance (Weyl groups: product of degrees) the
//     chain is completed by seeded-random sifting until the order is reached,
//     which certifies the result.  Without a known order a deterministic
//     exhaustive Schreier-Sims is run; it is only intended for small domains.

#include <cstdint>
#include <optional>
#include <queue>
#include <random>
#include <unordered_map>
#include <vector>

#include "torsion_atlas/errors.hpp"
#include "torsion_atlas/intmat.hpp"

namespace torsion_atlas {

using PVec = std::array<uint8_t, MAX_RANK>;

inline u64 pack_vec(const PVec& v, int r) {
  u64 key = 0;
  for (int i = 0; i < r; ++i) key |= u64(v[i] & 0xF) << (4 * i);
  return key;
}

inline PVec unpack_vec(u64 key, int r) {
  PVec v{};
  for (int i = 0; i < r; ++i) v[i] = uint8_t((key >> (4 * i)) & 0xF);
  return v;
}

// Dense square matrix over Z/m, entries reduced, runtime dimension n.
struct PMat {
  int n = 0;
  std::array<uint8_t, MAX_RANK * MAX_RANK> a{};

  uint8_t& at(int i, int j) { return a[i * MAX_RANK + j]; }
  uint8_t at(int i, int j) const { return a[i * MAX_RANK + j]; }

  static PMat identity(int n) {
    PMat m;
    m.n = n;
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  bool is_identity() const {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (at(i, j) != (i == j ? 1 : 0)) return false;
    return true;
  }

  friend bool operator==(const PMat& x, const PMat& y) {
    if (x.n != y.n) return false;
    for (int i = 0; i < x.n; ++i)
      for (int j = 0; j < x.n; ++j)
        if (x.at(i, j) != y.at(i, j)) return false;
    return true;
  }
};

struct PMatHash {
  size_t operator()(const PMat& m) const {
    u64 h = 1469598103934665603ull;
    for (int i = 0; i < m.n; ++i)
      for (int j = 0; j < m.n; ++j) {
        h ^= m.at(i, j);
        h *= 1099511628211ull;
      }
    return size_t(h);
  }
};

inline PMat pmat_from_imat(const IMat& m, int mod) {
  if (m.rows != m.cols || m.rows > MAX_RANK)
    throw InvariantViolation("pmat_from_imat: bad shape");
  PMat r;
  r.n = m.rows;
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) {
      i64 e = m.at(i, j) % mod;
      if (e < 0) e += mod;
      r.at(i, j) = uint8_t(e);
    }
  return r;
}

inline PMat pmat_mul(const PMat& x, const PMat& y, int mod) {
  PMat r;
  r.n = x.n;
  for (int i = 0; i < x.n; ++i)
    for (int j = 0; j < x.n; ++j) {
      int s = 0;
      for (int k = 0; k < x.n; ++k) s += int(x.at(i, k)) * int(y.at(k, j));
      r.at(i, j) = uint8_t(s % mod);
    }
  return r;
}

inline PVec pmat_apply(const PMat& m, const PVec& v, int mod) {
  PVec r{};
  for (int i = 0; i < m.n; ++i) {
    int s = 0;
    for (int j = 0; j < m.n; ++j) s += int(m.at(i, j)) * int(v[j]);
    r[i] = uint8_t(s % mod);
  }
  return r;
}

inline PMat pmat_reduce(const PMat& m, int newMod) {
  PMat r = m;
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) r.at(i, j) = uint8_t(m.at(i, j) % newMod);
  return r;
}

// Inverse over the field Z/p by Gauss-Jordan elimination.
inline PMat pmat_inverse_prime(const PMat& m, int p) {
  int n = m.n;
  // Augmented [m | I], row-reduce in place.
  std::array<std::array<int, 2 * MAX_RANK>, MAX_RANK> w{};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) w[i][j] = m.at(i, j);
    w[i][n + i] = 1;
  }
  auto inv_mod = [p](int x) {
    int r = 1, b = x % p, e = p - 2;  // Fermat
    while (e) {
      if (e & 1) r = r * b % p;
      b = b * b % p;
      e >>= 1;
    }
    return r;
  };
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    for (int i = col; i < n; ++i)
      if (w[i][col] % p != 0) {
        piv = i;
        break;
      }
    if (piv < 0) throw InvariantViolation("pmat_inverse_prime: singular matrix");
    std::swap(w[col], w[piv]);
    int s = inv_mod(w[col][col] % p);
    for (int j = 0; j < 2 * n; ++j) w[col][j] = w[col][j] * s % p;
    for (int i = 0; i < n; ++i) {
      if (i == col) continue;
      int f = w[i][col] % p;
      if (!f) continue;
      for (int j = 0; j < 2 * n; ++j)
        w[i][j] = ((w[i][j] - f * w[col][j]) % p + p * p) % p;
    }
  }
  PMat r;
  r.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r.at(i, j) = uint8_t(w[i][n + j] % p);
  return r;
}

// Inverse mod 4 by one Newton step from the mod-2 inverse: if X2 inverts m
// mod 2 then X = X2 (2I - m X2) inverts m mod 4.
inline PMat pmat_inverse_mod4(const PMat& m) {
  PMat x2 = pmat_inverse_prime(pmat_reduce(m, 2), 2);
  PMat mx = pmat_mul(m, x2, 4);
  PMat corr;
  corr.n = m.n;
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) {
      int e = ((i == j ? 2 : 0) - int(mx.at(i, j))) % 4;
      corr.at(i, j) = uint8_t((e + 4) % 4);
    }
  PMat x = pmat_mul(x2, corr, 4);
  if (!pmat_mul(m, x, 4).is_identity())
    throw InvariantViolation("pmat_inverse_mod4: lift failed");
  return x;
}

inline PMat pmat_inverse(const PMat& m, int mod) {
  if (mod == 4) return pmat_inverse_mod4(m);
  return pmat_inverse_prime(m, mod);
}

// How a matrix group element acts on packed points.
enum class ActionMode : uint8_t {
  Ambient,      // plain action mod the group's modulus
  InducedMod2,  // act, then reduce the image mod 2 (requires modulus 2 or 4)
};

// A finitely generated group of invertible matrices over Z/modulus.
struct ModMatrixGroup {
  int modulus = 0;
  int rank = 0;
  std::vector<PMat> generators;
  // Exact group order when known in advance (e.g. Weyl group degree product).
  // A known order lets stabilizer chains certify completeness cheaply.
  std::optional<u64> knownOrder;
};

inline u64 apply_point(const ModMatrixGroup& g, const PMat& m, u64 key,
                       ActionMode mode) {
  PVec v = unpack_vec(key, g.rank);
  PVec w = pmat_apply(m, v, g.modulus);
  if (mode == ActionMode::InducedMod2)
    for (int i = 0; i < g.rank; ++i) w[i] &= 1;
  return pack_vec(w, g.rank);
}

inline int domain_radix(const ModMatrixGroup& g, ActionMode mode) {
  return mode == ActionMode::InducedMod2 ? 2 : g.modulus;
}

namespace detail {

// Orbit of one point with a Schreier tree (generator index + parent per
// point).  Uses flat arrays when radix^rank is small enough, a hash map
// otherwise.  The flat limit is deliberately modest: the flat index array
// costs 4 bytes per DOMAIN point per tree no matter how small the orbit is,
// and long-lived stabilizer chains hold one tree per level, so large domains
// must pay per orbit point instead.  Supports incremental extension when new
// generators arrive.
class OrbitTree {
 public:
  static constexpr u64 kFlatLimit = u64(1) << 16;
  static constexpr uint32_t kUnset = 0xFFFFFFFFu;

  void init(const ModMatrixGroup* g, ActionMode mode, u64 root) {
    group_ = g;
    mode_ = mode;
    root_ = root;
    int radix = domain_radix(*g, mode);
    u64 domain = 1;
    flat_ = true;
    for (int i = 0; i < g->rank; ++i) {
      domain *= u64(radix);
      if (domain > kFlatLimit) {
        flat_ = false;
        break;
      }
    }
    if (flat_) {
      flatIdx_.assign(size_t(domain), kUnset);
      // Flat index = packed key compressed through the radix; for radix that
      // is a power of two the packed key itself would do, but mixed radices
      // need the compression, so always compute it.
    }
    points_.clear();
    parent_.clear();
    genIdx_.clear();
    add_point(root, 0, -1);
  }

  u64 root() const { return root_; }
  u64 size() const { return points_.size(); }
  const std::vector<u64>& points() const { return points_; }

  bool has(u64 key) const { return lookup(key) != kUnset; }

  // Breadth-first closure of the current point set under gens[from..).
  // `gens` is the full generator list the tree has been built against so far;
  // pass from = 0 on first build, or the index of the first new generator when
  // extending.  Every point (old and new) is scanned against the new
  // generators, and new points against all generators.
  void close(const std::vector<PMat>& gens, size_t from) {
    size_t firstNew = points_.size();
    // Old points against new generators.
    for (size_t pi = 0; pi < firstNew; ++pi)
      for (size_t gi = from; gi < gens.size(); ++gi) {
        u64 img = apply_point(*group_, gens[gi], points_[pi], mode_);
        if (!has(img)) add_point(img, uint32_t(pi), int(gi));
      }
    // New points against all generators (standard BFS).
    for (size_t pi = firstNew; pi < points_.size(); ++pi)
      for (size_t gi = 0; gi < gens.size(); ++gi) {
        u64 img = apply_point(*group_, gens[gi], points_[pi], mode_);
        if (!has(img)) add_point(img, uint32_t(pi), int(gi));
      }
  }

  // Transversal element mapping root -> key, as a product of generators.
  PMat transversal(u64 key, const std::vector<PMat>& gens) const {
    std::vector<int> path;
    uint32_t cur = lookup(key);
    if (cur == kUnset) throw InvariantViolation("OrbitTree: point not in orbit");
    while (genIdx_[cur] >= 0) {
      path.push_back(genIdx_[cur]);
      cur = parent_[cur];
    }
    PMat t = PMat::identity(group_->rank);
    // path holds generator indices from key back to root; the element is
    // gens[path[0]] * gens[path[1]] * ... applied to root last.
    for (size_t i = path.size(); i-- > 0;)
      t = pmat_mul(gens[path[i]], t, group_->modulus);
    return t;
  }

  // Inverse transversal via precomputed generator inverses.  The forward
  // transversal is gens[path[0]] * ... * gens[path.back()] (outermost factor
  // applied last on the walk from the root), so the inverse multiplies the
  // generator inverses in the opposite order.
  PMat transversal_inverse(u64 key, const std::vector<PMat>& genInv) const {
    std::vector<int> path;
    uint32_t cur = lookup(key);
    if (cur == kUnset) throw InvariantViolation("OrbitTree: point not in orbit");
    while (genIdx_[cur] >= 0) {
      path.push_back(genIdx_[cur]);
      cur = parent_[cur];
    }
    PMat t = PMat::identity(group_->rank);
    for (size_t i = 0; i < path.size(); ++i)
      t = pmat_mul(genInv[path[i]], t, group_->modulus);
    return t;
  }

 private:
  uint32_t lookup(u64 key) const {
    if (flat_) {
      u64 idx = flat_index(key);
      return flatIdx_[size_t(idx)];
    }
    auto it = sparseIdx_.find(key);
    return it == sparseIdx_.end() ? kUnset : it->second;
  }

  u64 flat_index(u64 key) const {
    int radix = domain_radix(*group_, mode_);
    u64 idx = 0, mul = 1;
    for (int i = 0; i < group_->rank; ++i) {
      idx += ((key >> (4 * i)) & 0xF) * mul;
      mul *= u64(radix);
    }
    return idx;
  }

  void add_point(u64 key, uint32_t parent, int gen) {
    uint32_t id = uint32_t(points_.size());
    points_.push_back(key);
    parent_.push_back(parent);
    genIdx_.push_back(gen);
    if (flat_)
      flatIdx_[size_t(flat_index(key))] = id;
    else
      sparseIdx_.emplace(key, id);
  }

  const ModMatrixGroup* group_ = nullptr;
  ActionMode mode_ = ActionMode::Ambient;
  u64 root_ = 0;
  bool flat_ = true;
  std::vector<uint32_t> flatIdx_;
  std::unordered_map<u64, uint32_t> sparseIdx_;
  std::vector<u64> points_;
  std::vector<uint32_t> parent_;
  std::vector<int> genIdx_;
};

// Product-replacement style random element source, deterministic by seed.
class RandomWalk {
 public:
  RandomWalk(const ModMatrixGroup& g, u64 seed) : g_(g), rng_(seed) {
    pool_.push_back(PMat::identity(g.rank));
    for (const PMat& m : g.generators) {
      pool_.push_back(m);
      pool_.push_back(pmat_inverse(m, g.modulus));
    }
    while (pool_.size() < 8) pool_.push_back(PMat::identity(g.rank));
    for (int i = 0; i < 50; ++i) step();  // burn in
  }

  PMat step() {
    size_t i = rng_() % pool_.size();
    size_t j = rng_() % pool_.size();
    if (i == j) j = (j + 1) % pool_.size();
    pool_[i] = pmat_mul(pool_[i], pool_[j], g_.modulus);
    return pool_[i];
  }

 private:
  const ModMatrixGroup& g_;
  std::mt19937_64 rng_;
  std::vector<PMat> pool_;
};

}  // namespace detail

// A base point of a stabilizer chain, with the action mode it uses.
struct BasePoint {
  ActionMode mode = ActionMode::Ambient;
  u64 key = 0;
};

// Generators-plus-order handle for a stabilizer subgroup.
struct StabilizerHandle {
  std::vector<PMat> generators;
  u64 order = 1;
};

// Base-and-strong-generating-set chain for a ModMatrixGroup, with mixed-mode
// base points.  Level i holds the orbit of base i under the subgroup fixing
// bases 0..i-1.
class Bsgs {
 public:
  struct Level {
    BasePoint base;
    std::vector<PMat> gens;    // strong generators fixing all earlier bases
    std::vector<PMat> genInv;  // inverses, parallel to gens
    detail::OrbitTree tree;
  };

  // Build a chain for `g`, with the given base points first (later levels are
  // appended automatically until the chain is complete).  If g.knownOrder is
  // set, seeded-random sifting runs until the chain order reaches it, which
  // certifies completeness; on a stall the build throws, unless `reached` is
  // non-null, in which case *reached reports whether the order was attained
  // (used when probing whether a candidate generating set suffices).
  // Without a known order a deterministic exhaustive Schreier-Sims runs; it
  // is quadratic in orbit sizes and meant for small domains only.
  static Bsgs build(const ModMatrixGroup& g,
                    const std::vector<BasePoint>& prescribed,
                    bool* reached = nullptr, u64 stallLimit = 200000) {
    Bsgs c;
    c.g_ = &g;
    for (const BasePoint& b : prescribed) c.append_level(b);
    for (const PMat& m : g.generators)
      if (!m.is_identity()) c.add_strong_generator(m);
    if (g.knownOrder) {
      bool ok = c.complete_random(*g.knownOrder, stallLimit);
      if (reached)
        *reached = ok;
      else if (!ok)
        throw InvariantViolation("Bsgs: random completion stalled");
    } else {
      c.complete_deterministic();
      if (reached) *reached = true;
    }
    return c;
  }

  u64 order() const {
    u64 o = 1;
    for (const Level& l : levels_) o *= l.tree.size();
    return o;
  }

  // Order of the subgroup fixing the first k base points.
  u64 stabilizer_order(size_t k) const {
    u64 o = 1;
    for (size_t i = k; i < levels_.size(); ++i) o *= levels_[i].tree.size();
    return o;
  }

  // Generators of the subgroup fixing the first k base points.  Level k's
  // generator list already contains every strong generator fixing bases
  // 0..k-1 (insertion adds a generator to all levels at or below its sift
  // depth), so it is the whole stabilizer generating set.
  StabilizerHandle stabilizer(size_t k) const {
    StabilizerHandle h;
    h.order = stabilizer_order(k);
    if (k < levels_.size()) h.generators = levels_[k].gens;
    if (h.generators.empty()) h.generators.push_back(PMat::identity(g_->rank));
    return h;
  }

  bool contains(PMat m) const {
    for (const Level& l : levels_) {
      u64 img = apply_point(*g_, m, l.base.key, l.base.mode);
      if (!l.tree.has(img)) return false;
      m = pmat_mul(l.tree.transversal_inverse(img, l.genInv), m, g_->modulus);
    }
    return m.is_identity();
  }

  // Sift m and absorb a non-identity residue as a strong generator; returns
  // whether the chain grew.  Incremental alternative to a fresh build() for
  // callers certifying against a known order as candidate elements arrive.
  bool absorb(const PMat& m) {
    PMat res = sift(m);
    if (res.is_identity()) return false;
    add_strong_generator(res);
    return true;
  }

  size_t level_count() const { return levels_.size(); }
  const Level& level(size_t i) const { return levels_[i]; }

 private:
  void append_level(const BasePoint& b) {
    levels_.emplace_back();
    Level& l = levels_.back();
    l.base = b;
    l.tree.init(g_, b.mode, b.key);
  }

  // Insert m as a strong generator at the deepest level whose earlier bases
  // it fixes, extending orbits at that level and above.
  void add_strong_generator(const PMat& m) {
    size_t lvl = 0;
    while (lvl < levels_.size()) {
      u64 img = apply_point(*g_, m, levels_[lvl].base.key, levels_[lvl].base.mode);
      if (img != levels_[lvl].base.key) break;
      ++lvl;
    }
    if (lvl == levels_.size()) {
      // m fixes all current bases; find a point it moves in ambient mode.
      PVec e{};
      int moved = -1;
      for (int i = 0; i < g_->rank && moved < 0; ++i) {
        e = PVec{};
        e[i] = 1;
        u64 key = pack_vec(e, g_->rank);
        if (apply_point(*g_, m, key, ActionMode::Ambient) != key) moved = i;
      }
      if (moved < 0)
        throw InvariantViolation("Bsgs: non-identity element fixing all e_i");
      append_level({ActionMode::Ambient, pack_vec([&] {
                      PVec v{};
                      v[moved] = 1;
                      return v;
                    }(), g_->rank)});
    }
    // m fixes bases 0..lvl-1, so it lies in the stabilizer of every prefix
    // of length <= lvl and joins the generator list of each such level.
    for (size_t i = 0; i <= lvl && i < levels_.size(); ++i) {
      Level& l = levels_[i];
      l.gens.push_back(m);
      l.genInv.push_back(pmat_inverse(m, g_->modulus));
      l.tree.close(l.gens, l.gens.size() - 1);
    }
  }

  // Sift m through the chain; returns the residue (identity iff m is in the
  // group generated by the current strong generators and the orbits).
  PMat sift(PMat m) const {
    for (const Level& l : levels_) {
      u64 img = apply_point(*g_, m, l.base.key, l.base.mode);
      if (!l.tree.has(img)) return m;
      m = pmat_mul(l.tree.transversal_inverse(img, l.genInv), m, g_->modulus);
    }
    return m;
  }

  // Returns true iff the chain order reached `target` before stalling.
  bool complete_random(u64 target, u64 stallLimit) {
    if (order() > target)
      throw InvariantViolation("Bsgs: chain exceeds the declared group order");
    if (order() == target) return true;
    detail::RandomWalk walk(*g_, 0x5eed5eedULL);
    u64 stall = 0;
    while (order() < target) {
      PMat r = sift(walk.step());
      if (r.is_identity()) {
        if (++stall > stallLimit) return false;
        continue;
      }
      stall = 0;
      add_strong_generator(r);
      if (order() > target)
        throw InvariantViolation("Bsgs: chain exceeds the declared group order");
    }
    return true;
  }

  // Exhaustive Schreier generator processing; only for small domains.
  void complete_deterministic() {
    bool again = true;
    while (again) {
      again = false;
      for (size_t li = 0; li < levels_.size() && !again; ++li) {
        Level& l = levels_[li];
        // Snapshot: close() may extend the orbit while we scan.
        for (size_t pi = 0; pi < l.tree.size() && !again; ++pi) {
          u64 x = l.tree.points()[pi];
          PMat tx = l.tree.transversal(x, l.gens);
          for (size_t gi = 0; gi < l.gens.size() && !again; ++gi) {
            u64 gx = apply_point(*g_, l.gens[gi], x, l.base.mode);
            PMat tgxInv = l.tree.transversal_inverse(gx, l.genInv);
            PMat schreier =
                pmat_mul(tgxInv, pmat_mul(l.gens[gi], tx, g_->modulus),
                         g_->modulus);
            PMat res = sift(schreier);
            if (!res.is_identity()) {
              add_strong_generator(res);
              again = true;
            }
          }
        }
      }
    }
  }

  const ModMatrixGroup* g_ = nullptr;
  std::vector<Level> levels_;
};

// Exact order of the group.  Uses the cached order when present (the chain
// then certifies it); otherwise runs the deterministic chain.
inline u64 group_order(const ModMatrixGroup& g) {
  if (g.generators.empty()) return 1;
  Bsgs c = Bsgs::build(g, {});
  u64 o = c.order();
  if (g.knownOrder && *g.knownOrder != o)
    throw InvariantViolation("group_order: chain order mismatch");
  return o;
}

// Partition of the full point domain into orbits.  Requires a flat domain
// (radix^rank bounded); used for element distributions and the centralizer
// order computations, where radix^rank <= ~6M.
struct OrbitPartition {
  int rank = 0;
  int radix = 0;
  u64 domain = 0;
  std::vector<uint32_t> orbitOf;  // domain index -> orbit id
  std::vector<u64> repKey;        // orbit id -> packed key of lex-min rep
  std::vector<u64> orbitSize;     // orbit id -> size

  u64 index_of_key(u64 key) const {
    u64 idx = 0, mul = 1;
    for (int i = 0; i < rank; ++i) {
      idx += ((key >> (4 * i)) & 0xF) * mul;
      mul *= u64(radix);
    }
    return idx;
  }
};

// BFS orbit partition of the whole domain.  Seeds are visited in an order
// that makes each orbit's representative the lexicographically smallest
// vector it contains (coordinate 0 most significant).
inline OrbitPartition orbit_partition(const ModMatrixGroup& g, ActionMode mode) {
  OrbitPartition p;
  p.rank = g.rank;
  p.radix = domain_radix(g, mode);
  p.domain = 1;
  for (int i = 0; i < g.rank; ++i) {
    p.domain *= u64(p.radix);
    if (p.domain > (u64(1) << 24))
      throw BudgetExceeded("orbit_partition: domain too large for a flat scan");
  }
  p.orbitOf.assign(size_t(p.domain), 0xFFFFFFFFu);
  // Lexicographic seed order: coordinate 0 most significant.
  auto lex_to_key = [&](u64 lex) {
    PVec v{};
    for (int i = g.rank - 1; i >= 0; --i) {
      v[i] = uint8_t(lex % u64(p.radix));
      lex /= u64(p.radix);
    }
    return pack_vec(v, g.rank);
  };
  std::vector<u64> queue;
  for (u64 lex = 0; lex < p.domain; ++lex) {
    u64 seed = lex_to_key(lex);
    u64 seedIdx = p.index_of_key(seed);
    if (p.orbitOf[size_t(seedIdx)] != 0xFFFFFFFFu) continue;
    uint32_t id = uint32_t(p.repKey.size());
    p.repKey.push_back(seed);
    p.orbitOf[size_t(seedIdx)] = id;
    queue.clear();
    queue.push_back(seed);
    u64 count = 1;
    for (size_t qi = 0; qi < queue.size(); ++qi) {
      u64 cur = queue[qi];
      for (const PMat& m : g.generators) {
        u64 img = apply_point(g, m, cur, mode);
        u64 idx = p.index_of_key(img);
        if (p.orbitOf[size_t(idx)] == 0xFFFFFFFFu) {
          p.orbitOf[size_t(idx)] = id;
          queue.push_back(img);
          ++count;
        }
      }
    }
    p.orbitSize.push_back(count);
  }
  return p;
}

}  // namespace torsion_atlas
