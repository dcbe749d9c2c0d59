// solver.hpp - normalizing solver for linear integer path conditions
//
// Path conditions are kept in a normal form: equalities with a unit
// coefficient are solved and substituted away, single-variable constraints
// become interval bounds, and the remaining linear atoms are stored with
// gcd-reduced coefficients. Loop guards are recorded separately, as written,
// because normalization would simplify away the ones already entailed.

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "diverge/ast.hpp"

namespace diverge {

/// A symbolic value. Identifiers are allocated per analysis lineage and are
/// never reused within one procedure analysis.
struct SymValue {
  std::uint32_t id = 0;

  friend auto operator<=>(const SymValue&, const SymValue&) = default;
};

using Namer = std::function<std::string(SymValue)>;
std::string default_name(SymValue v);

/// Integer linear combination `sum(c_i * v_i) + constant`, variables sorted
/// by identifier with no zero coefficients.
class Term {
 public:
  Term() = default;
  static Term constant(std::int64_t c);
  static Term var(SymValue v, std::int64_t coeff = 1);

  bool is_constant() const { return coeffs_.empty(); }
  /// The variable, when the term is exactly `1 * v + 0`.
  std::optional<SymValue> as_var() const;
  std::int64_t constant_part() const { return constant_; }
  const std::vector<std::pair<SymValue, std::int64_t>>& coeffs() const { return coeffs_; }
  std::int64_t coeff_of(SymValue v) const;
  bool mentions(SymValue v) const { return coeff_of(v) != 0; }
  std::vector<SymValue> vars() const;

  Term operator+(const Term& o) const;
  Term operator-(const Term& o) const;
  Term operator-() const { return scaled(-1); }
  Term scaled(std::int64_t k) const;
  Term plus_constant(std::int64_t c) const;
  /// Replaces `v` by `replacement`.
  Term substitute(SymValue v, const Term& replacement) const;
  Term rename(const std::function<SymValue(SymValue)>& f) const;

  std::string to_string(const Namer& namer = default_name) const;

  friend auto operator<=>(const Term&, const Term&) = default;
  friend bool operator==(const Term&, const Term&) = default;

 private:
  std::vector<std::pair<SymValue, std::int64_t>> coeffs_;
  std::int64_t constant_ = 0;

  void normalize();
};

/// Thrown when term arithmetic leaves the 64-bit range.
class ArithmeticOverflow : public std::runtime_error {
 public:
  ArithmeticOverflow() : std::runtime_error("integer overflow in symbolic arithmetic") {}
};

enum class Rel { Eq, Ne, Le };
enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

/// `term REL 0`. Built from two-sided comparisons by `make_atom`; `<`, `>`
/// and `>=` are rewritten into `<=` over the integers.
struct Atom {
  Rel rel = Rel::Eq;
  Term term;

  /// Constant atoms evaluate directly.
  std::optional<bool> constant_truth() const;
  std::vector<SymValue> vars() const { return term.vars(); }
  Atom negated_le() const;  // only for Le: `t <= 0` becomes `-t + 1 <= 0`
  std::string to_string(const Namer& namer = default_name) const;

  friend auto operator<=>(const Atom&, const Atom&) = default;
  friend bool operator==(const Atom&, const Atom&) = default;
};

Atom make_atom(const Term& lhs, CmpOp op, const Term& rhs);
/// gcd reduction and sign convention. Returns nullopt for a contradiction
/// detected by divisibility (e.g. `2x = 1`).
std::optional<Atom> normalize_atom(const Atom& a);
/// Atoms whose conjunction is equivalent to `not a`. `=` negates to two
/// alternatives, returned as separate disjuncts.
std::vector<Atom> negate(const Atom& a);

struct Interval {
  std::optional<std::int64_t> lo, hi;
  bool contains(std::int64_t v) const {
    return (!lo || v >= *lo) && (!hi || v <= *hi);
  }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// An uninterpreted application: equal arguments imply equal results.
struct OpaqueKey {
  std::string op;
  std::vector<Term> args;
  friend auto operator<=>(const OpaqueKey&, const OpaqueKey&) = default;
};

/// Normalized conjunction of path constraints. Value-semantic: every
/// update returns a new PathCondition.
class PathCondition {
 public:
  /// Conjoins `a`. Returns nullopt when the result is detected unsatisfiable
  /// by normalization (constant folding, bounds, divisibility).
  std::optional<PathCondition> assert_atom(const Atom& a) const;
  /// Convenience: asserts and then runs the decision procedure on the
  /// affected variables.
  std::optional<PathCondition> assume(const Atom& a) const;

  Term normalize(const Term& t) const;
  Term normalize(SymValue v) const { return normalize(Term::var(v)); }

  /// The value standing for `op(args)`, interned so that equal arguments
  /// (after normalization) give the same value.
  std::pair<SymValue, PathCondition> intern(const std::string& op, std::vector<Term> args,
                                            const std::function<SymValue()>& fresh) const;
  std::optional<OpaqueKey> opaque_definition(SymValue v) const;

  const std::map<SymValue, Term>& definitions() const { return defs_; }
  const std::map<SymValue, Interval>& bounds() const { return bounds_; }
  const std::set<Atom>& atoms() const { return atoms_; }
  const std::map<OpaqueKey, SymValue>& opaque() const { return opaque_; }
  Interval bounds_of(SymValue v) const;

  /// Every constraint as an atom list: definitions as equalities, bounds as
  /// `<=` atoms, then the stored atoms. Opaque applications are not atoms.
  std::vector<Atom> constraints() const;
  /// Free (non-eliminated) variables mentioned by any constraint or
  /// opaque application.
  std::set<SymValue> free_vars() const;

  std::string to_string(const Namer& namer = default_name) const;

  friend bool operator==(const PathCondition&, const PathCondition&) = default;

  // Raw construction for deserialization.
  static PathCondition from_parts(std::map<SymValue, Term> defs,
                                  std::map<SymValue, Interval> bounds, std::set<Atom> atoms,
                                  std::map<OpaqueKey, SymValue> opaque);

 private:
  std::map<SymValue, Term> defs_;
  std::map<SymValue, Interval> bounds_;
  std::set<Atom> atoms_;
  std::map<OpaqueKey, SymValue> opaque_;

  friend class PcEditor;
};

/// Sound for unsatisfiability: never returns false for a satisfiable
/// condition. Complete for bounded conjunctions of up to 8 variables.
bool is_sat(const PathCondition& pc);
/// Decides only the constraints connected to `vars`.
bool is_sat_around(const PathCondition& pc, const std::vector<SymValue>& vars);
/// `pc` implies `a`, proven by refuting `pc /\ not a`.
bool entails(const PathCondition& pc, const Atom& a);

/// Searches for an integer model of `pc` restricted to the constraints that
/// mention `wanted`, enumerating free variables inside [-bound, bound]
/// intersected with their known bounds. Defined variables get values from
/// their definitions.
std::optional<std::map<SymValue, std::int64_t>> find_model(const PathCondition& pc,
                                                           const std::vector<SymValue>& wanted,
                                                           std::int64_t bound);

/// Brute-force reference decision over [-bound, bound]^n (n <= 6).
struct OracleResult {
  bool sat = false;
  std::map<SymValue, std::int64_t> model;
};
OracleResult oracle_sat(const std::vector<Atom>& atoms, std::int64_t bound);

/// A loop guard, kept as written over the values current when it was met.
struct TerminationCondition {
  Atom guard;
  int head = -1;
  SourceLoc loc;
  bool polarity = true;

  friend bool operator==(const TerminationCondition&, const TerminationCondition&) = default;
};

std::vector<TerminationCondition> record_termination_condition(
    std::vector<TerminationCondition> tcs, const Atom& guard, int head, SourceLoc loc,
    bool polarity);

/// Alpha-renamed projection of a path condition, termination conditions and
/// heap fragment. Two forms are equal iff the inputs are equal up to
/// renaming of symbolic values.
struct CanonicalForm {
  std::vector<std::string> atoms;
  std::vector<std::string> tcs;
  std::vector<std::string> heap;
  std::vector<std::string> tracked;  // values of the tracked variables, in order

  std::string to_string() const;
  friend bool operator==(const CanonicalForm&, const CanonicalForm&) = default;
};

/// A points-to cell as seen by canonicalization.
struct HeapCell {
  SymValue addr;
  SymValue content;
};

/// `tracked` lists further values whose identity matters (the variables a
/// loop reads); they are named right after the termination conditions.
CanonicalForm canonicalize(const PathCondition& pc, const std::vector<TerminationCondition>& tcs,
                           const std::vector<HeapCell>& heap, const std::set<SymValue>& support,
                           const std::vector<Term>& tracked = {});

/// The support closure: `seeds` plus every value connected to them through
/// constraints, opaque applications, and heap cells.
std::set<SymValue> support_closure(const PathCondition& pc, const std::vector<HeapCell>& heap,
                                   std::set<SymValue> seeds);

}  // namespace diverge
