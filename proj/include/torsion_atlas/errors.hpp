// errors.hpp -- exception types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace torsion_atlas {

// Requested construction is not defined (e.g. a minimal module for a type
// that has none, or an operation outside the supported rank range).
struct UnsupportedModule : std::runtime_error {
    explicit UnsupportedModule(const std::string& what) : std::runtime_error(what) {}
};

// Isogeny selection does not name a subgroup of the fundamental group
// (wrong order, non-unique subgroup, or a label that needs a different type).
struct IllegalIsogeny : std::runtime_error {
    explicit IllegalIsogeny(const std::string& what) : std::runtime_error(what) {}
};

// An enumeration would exceed the configured budget.  Deliberate refusal,
// not an internal error: callers can raise the budget or restrict the rank.
struct BudgetExceeded : std::runtime_error {
    explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

// Two independently computed values that must agree, disagree.
struct CrossCheckFailure : std::logic_error {
    explicit CrossCheckFailure(const std::string& what) : std::logic_error(what) {}
};

// A data table failed structural validation while loading.
struct SchemaViolation : std::runtime_error {
    explicit SchemaViolation(const std::string& what) : std::runtime_error(what) {}
};

// Frobenius parameters incompatible with the requested transfer.
struct IncompatibleFrobenius : std::runtime_error {
    explicit IncompatibleFrobenius(const std::string& what) : std::runtime_error(what) {}
};

// A classification was requested at a non-prime "p".
struct NonPrime : std::runtime_error {
    explicit NonPrime(long long p)
        : std::runtime_error("p = " + std::to_string(p) + " is not prime") {}
};

// A distribution label in a table row has no unique resolution against the
// element-class table.
struct UnresolvedLabel : std::runtime_error {
    explicit UnresolvedLabel(const std::string& what) : std::runtime_error(what) {}
};

// An inclusion edge references a class label absent from the class tables.
struct DanglingLabel : std::runtime_error {
    explicit DanglingLabel(const std::string& what) : std::runtime_error(what) {}
};

// An internal invariant that should hold unconditionally was violated.
struct InvariantViolation : std::logic_error {
    explicit InvariantViolation(const std::string& what) : std::logic_error(what) {}
};

}  // namespace torsion_atlas
