// element_labels.hpp -- standard class labels ("2A", "3B", ...) for
// semisimple elements of small prime order in the exceptional simple
// algebraic groups.  A class is recognised purely from conjugation
// invariants that the classifier computes exactly: the element order, the
// least order of a preimage in the simply connected cover, the dimension of
// the centraliser, and the traces on the adjoint module and (where one
// exists) the smallest faithful module.  Labels follow the established
// conventions of the computational group theory literature.
//
// A primed label denotes the inverse class of the unprimed one, for the two
// cases where inversion does not preserve the class.  For an adjoint group
// whose fundamental group order is divisible by the element order, classes
// of the cover can fuse or fail to lift; such image classes carry their own
// rows, marked adjointOnly, keyed additionally by the least lift order
// (e.g. the involution class of adjoint E7 covered by the two simply
// connected classes 2B and 2C is written 2BC, while the involution classes
// covered only by order-4 elements keep the labels 4A and 4H of the
// covering classes).  Elements matching no row receive a deterministic
// synthetic label built from the invariants themselves.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "torsion_atlas/cyclotomic.hpp"
#include "torsion_atlas/root_datum.hpp"

namespace torsion_atlas {

struct ElementClassRow {
  LieFamily family;
  int rank;
  bool adjointOnly;    // class of the adjoint form with no same-order lift rule
  int order;           // element order in the form the row describes
  int scLiftOrder;     // least order of a preimage in the simply connected cover
  const char* label;
  int centralizerDim;  // dimension of the centraliser of the element
  i64 adjointTrace;    // trace on the Lie algebra (always rational for these)
  bool hasMinimalTrace;
  i64 minimalTrace0;   // trace on the smallest module, written c0 + c1*zeta_3
  i64 minimalTrace1;
};

inline const std::vector<ElementClassRow>& element_class_rows() {
  using F = LieFamily;
  static const std::vector<ElementClassRow> rows = {
      // family rank adOnly ord lift label  dim  chiL  min?  c0   c1
      {F::G, 2, false, 2, 2, "2A", 6, -2, true, -1, 0},

      {F::F, 4, false, 2, 2, "2A", 24, -4, true, 2, 0},
      {F::F, 4, false, 2, 2, "2B", 36, 20, true, -6, 0},
      {F::F, 4, false, 3, 3, "3A", 22, 7, true, 8, 0},
      {F::F, 4, false, 3, 3, "3C", 16, -2, true, -1, 0},
      {F::F, 4, false, 3, 3, "3D", 22, 7, true, -1, 0},

      {F::E, 6, false, 2, 2, "2A", 38, -2, true, 3, 0},
      {F::E, 6, false, 2, 2, "2B", 46, 14, true, -5, 0},
      {F::E, 6, false, 3, 3, "3A", 36, 15, true, 9, 0},
      {F::E, 6, false, 3, 3, "3B", 36, 15, true, 0, 9},
      {F::E, 6, false, 3, 3, "3B'", 36, 15, true, -9, -9},
      {F::E, 6, false, 3, 3, "3C", 24, -3, true, 0, 0},
      {F::E, 6, false, 3, 3, "3D", 30, 6, true, 0, 0},
      {F::E, 6, false, 3, 3, "3E", 78, 78, true, 0, 27},
      {F::E, 6, false, 3, 3, "3E'", 78, 78, true, -27, -27},

      {F::E, 7, false, 2, 2, "2A", 133, 133, true, -56, 0},
      {F::E, 7, false, 2, 2, "2B", 69, 5, true, 8, 0},
      {F::E, 7, false, 2, 2, "2C", 69, 5, true, -8, 0},
      {F::E, 7, false, 3, 3, "3A", 49, 7, true, -7, 0},
      {F::E, 7, false, 3, 3, "3B", 79, 52, true, -25, 0},
      {F::E, 7, false, 3, 3, "3C", 43, -2, true, 2, 0},
      {F::E, 7, false, 3, 3, "3D", 49, 7, true, 2, 0},
      {F::E, 7, false, 3, 3, "3E", 67, 34, true, 20, 0},
      {F::E, 7, false, 4, 4, "4A", 63, -7, true, 0, 0},
      {F::E, 7, false, 4, 4, "4H", 79, 25, true, 0, 0},

      {F::E, 8, false, 2, 2, "2A", 136, 24, false, 0, 0},
      {F::E, 8, false, 2, 2, "2B", 120, -8, false, 0, 0},
      {F::E, 8, false, 3, 3, "3A", 80, -4, false, 0, 0},
      {F::E, 8, false, 3, 3, "3B", 86, 5, false, 0, 0},
      {F::E, 8, false, 3, 3, "3C", 92, 14, false, 0, 0},
      {F::E, 8, false, 3, 3, "3D", 134, 77, false, 0, 0},
      {F::E, 8, false, 5, 5, "5C", 48, -2, false, 0, 0},

      // Image classes in the adjoint forms, for element orders dividing the
      // fundamental group order.  The traces are on the modules of the
      // adjoint form, so no minimal-module trace applies.
      {F::E, 6, true, 3, 3, "3AB", 36, 15, false, 0, 0},
      {F::E, 6, true, 3, 3, "3C", 24, -3, false, 0, 0},
      {F::E, 6, true, 3, 3, "3D", 30, 6, false, 0, 0},
      {F::E, 7, true, 2, 2, "2BC", 69, 5, false, 0, 0},
      {F::E, 7, true, 2, 4, "4A", 63, -7, false, 0, 0},
      {F::E, 7, true, 2, 4, "4H", 79, 25, false, 0, 0},
  };
  return rows;
}

// Conjugation invariants of a single semisimple element of prime order.
struct ElementInvariants {
  int order = 1;        // the element's order, a prime
  int scLiftOrder = 1;  // least order of a preimage in the simply connected cover
  int centralizerDim = 0;
  Cyclotomic adjointTrace{2};
  std::optional<Cyclotomic> minimalTrace;
};

namespace detail {

// True when the trace equals c0 + c1*zeta with all higher power-basis
// coefficients zero (the tabulated traces involve at most the first power).
inline bool trace_matches(const Cyclotomic& t, i64 c0, i64 c1) {
  if (t.c.empty() || t.c[0] != c0) return false;
  if (t.c.size() >= 2) {
    if (t.c[1] != c1) return false;
    for (size_t k = 2; k < t.c.size(); ++k)
      if (t.c[k] != 0) return false;
    return true;
  }
  return c1 == 0;
}

inline std::string compact_trace(const Cyclotomic& t) {
  std::string s = t.to_string();
  std::string out;
  for (char ch : s)
    if (ch != ' ') out += ch;
  return out;
}

}  // namespace detail

// Assigns the standard label to an element of the group described by the
// root datum, or a deterministic synthetic label "x<order>d<dim>t<trace>..."
// when the invariants match no tabulated class.  Should several tabulated
// classes remain indistinguishable (which the shipped table never allows
// when a minimal-module trace is supplied), the candidates are joined with
// "/" rather than guessed between.
inline std::string element_class_label(const RootDatum& rd,
                                       const ElementInvariants& inv) {
  bool adMode = false;
  for (i64 d : rd.fundamentalGroup)
    if (d % inv.order == 0) adMode = true;

  std::vector<const ElementClassRow*> hits;
  for (const ElementClassRow& row : element_class_rows()) {
    if (row.family != rd.type.family || row.rank != rd.type.rank) continue;
    if (row.adjointOnly != adMode) continue;
    if (row.order != inv.order || row.scLiftOrder != inv.scLiftOrder) continue;
    if (row.centralizerDim != inv.centralizerDim) continue;
    if (!detail::trace_matches(inv.adjointTrace, row.adjointTrace, 0)) continue;
    if (row.hasMinimalTrace && inv.minimalTrace &&
        !detail::trace_matches(*inv.minimalTrace, row.minimalTrace0,
                               row.minimalTrace1))
      continue;
    hits.push_back(&row);
  }

  if (hits.size() == 1) return hits[0]->label;
  if (hits.size() > 1) {
    std::string joined = hits[0]->label;
    for (size_t i = 1; i < hits.size(); ++i) {
      joined += "/";
      joined += hits[i]->label;
    }
    return joined;
  }

  std::string s = "x" + std::to_string(inv.order) + "d" +
                  std::to_string(inv.centralizerDim) + "t" +
                  detail::compact_trace(inv.adjointTrace);
  if (inv.scLiftOrder != inv.order)
    s += "l" + std::to_string(inv.scLiftOrder);
  else if (inv.minimalTrace)
    s += "m" + detail::compact_trace(*inv.minimalTrace);
  return s;
}

}  // namespace torsion_atlas
