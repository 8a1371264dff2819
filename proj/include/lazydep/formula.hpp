#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace lazydep {

using Feature = std::string;
using FeatureSet = std::set<Feature>;
// A configuration is any set of features; a product is a configuration that
// a feature model accepts. Both are kept as sorted sets.
using Configuration = FeatureSet;
using Product = FeatureSet;
using Assignment = std::map<Feature, bool>;

// True iff `name` matches [A-Za-z0-9_][A-Za-z0-9_:+./@-]* and is not reserved.
bool is_valid_feature_name(std::string_view name);
bool is_reserved_word(std::string_view name);
// Throws ParseError when `name` is not a valid feature name.
void validate_feature_name(std::string_view name);

// Immutable propositional formula over feature names. Nodes are shared, so
// copies are cheap and values may be shared across threads.
class Formula {
 public:
  enum class Kind { kConst, kVar, kNot, kAnd, kOr, kImplies };

  // Const(true).
  Formula();

  static Formula constant(bool value);
  static Formula var(std::string name);
  static Formula negation(Formula operand);
  static Formula conjunction(Formula lhs, Formula rhs);
  static Formula disjunction(Formula lhs, Formula rhs);
  static Formula implication(Formula lhs, Formula rhs);

  Kind kind() const;
  bool is_const() const { return kind() == Kind::kConst; }
  bool is_var() const { return kind() == Kind::kVar; }

  // Only meaningful for the matching kind.
  bool value() const;
  const Feature& name() const;
  const Formula& operand() const;
  const Formula& lhs() const;
  const Formula& rhs() const;

  // Number of nodes in the tree.
  std::size_t size() const;

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

inline Formula operator!(Formula f) { return Formula::negation(std::move(f)); }
inline Formula operator&&(Formula a, Formula b) {
  return Formula::conjunction(std::move(a), std::move(b));
}
inline Formula operator||(Formula a, Formula b) {
  return Formula::disjunction(std::move(a), std::move(b));
}
inline Formula implies(Formula a, Formula b) {
  return Formula::implication(std::move(a), std::move(b));
}

// Left-associated conjunction; Const(true) for an empty list.
Formula conjoin(const std::vector<Formula>& parts);
// Left-associated disjunction; Const(false) for an empty list.
Formula disjoin(const std::vector<Formula>& parts);

// Propositional feature model (features, constraint).
struct PropFM {
  FeatureSet features;
  Formula constraint;

  friend bool operator==(const PropFM&, const PropFM&) = default;
};

// Throws PreconditionError unless free_features(constraint) ⊆ features.
void validate(const PropFM& fm);

// Grammar, loosest binding first:
//   formula := impl
//   impl    := or ("->" impl)?
//   or      := and ("|" and)*
//   and     := unary ("&" unary)*
//   unary   := "!" unary | "(" formula ")" | "true" | "false" | FEATURE
// Whitespace is insignificant and `#` starts a comment running to end of line.
Formula parse_formula(std::string_view text);

// Number of parse_formula calls made by this process. Used to check that
// index construction never touches constraint text.
std::size_t formula_parse_count();

// Canonical text with minimal parentheses; parse_formula(to_string(f)) == f.
std::string to_string(const Formula& f);

// Closed-world evaluation: a variable is true iff `lookup` says so.
bool eval_formula(const Formula& f, const std::function<bool(const Feature&)>& lookup);
bool eval_formula(const Formula& f, const Assignment& a);
bool eval_formula(const Formula& f, const FeatureSet& true_features);

FeatureSet free_features(const Formula& f);

// Replaces constant subterms; the result is Const or free of Const nodes.
Formula fold_constants(const Formula& f);

enum class VarKind { kFeature, kAuxiliary };

// CNF over named variables. Variable i (1-based) is variables[i-1]; clause
// literals use DIMACS signs.
struct ClauseSet {
  std::vector<std::string> variables;
  std::vector<VarKind> kinds;
  std::vector<std::vector<int>> clauses;

  // 1-based index of `name`, or 0 when absent.
  int index_of(std::string_view name) const;
};

// Tseitin encoding; feature-variable projections of its models are exactly
// the models of `f`. Auxiliary names live in the reserved `@aux/<n>` space.
ClauseSet to_cnf(const Formula& f);

}  // namespace lazydep
