#pragma once

// Extensional feature models: an explicit feature set plus an explicit set of
// products. Everything here enumerates, so it is capped at desk scale and is
// used as the ground truth the symbolic machinery is checked against.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lazydep/formula.hpp"

namespace lazydep {

using ProductSet = std::set<Product>;

inline constexpr std::size_t kEnumerationCap = 20;
inline constexpr std::size_t kBruteForceCutCap = 12;

struct ExtFM {
  FeatureSet features;
  ProductSet products;

  bool is_void() const { return products.empty(); }
  friend bool operator==(const ExtFM&, const ExtFM&) = default;
};

// (∅, {∅}): no features, only the empty product.
ExtFM empty_fm();
// (F, ∅).
ExtFM void_fm(FeatureSet features = {});
// (F, 2^F). Capped.
ExtFM powerset_fm(const FeatureSet& features);

ExtFM enumerate_products(const PropFM& m);

bool is_interface(const ExtFM& sub, const ExtFM& m);
ExtFM slice(const ExtFM& m, const FeatureSet& y);
ExtFM compose_ext(const ExtFM& a, const ExtFM& b);
ExtFM compose_ext(const std::vector<ExtFM>& ms);
bool is_pre_product(const ExtFM& m, const Configuration& c);

bool is_conservative_interface(const ExtFM& sub, const ExtFM& m);
// slice(m, y) ⪯ sub ⪯ m.
bool is_extended_slice(const ExtFM& sub, const ExtFM& m, const FeatureSet& y);
bool is_cut(const ExtFM& sub, const ExtFM& m, const FeatureSet& y);

// One application of the fixpoint step: adds every product of `m` whose
// every strictly smaller product of `m` differs from it on a feature of
// `current`, then adds those products' features.
ExtFM minimum_cut_step(const ExtFM& m, const ExtFM& current);
// Least fixpoint of minimum_cut_step starting at (F ∩ y, ∅).
ExtFM minimum_cut_fixpoint(const ExtFM& m, const FeatureSet& y);
// Independent oracle: searches every slice whose feature set lies between
// F ∩ y and F, keeps the cuts and returns the least one.
ExtFM minimum_cut_bruteforce(const ExtFM& m, const FeatureSet& y);

// Lexicographically smallest product of the composition containing c.
std::optional<Product> discover_ext(const std::vector<ExtFM>& ms, const Configuration& c);

// Slice-based compatibility check for pairwise feature-disjoint models.
// Throws PreconditionError when two models share a feature.
bool disjoint_compat_criterion(const std::vector<ExtFM>& ms, const Configuration& c);

// Debug text format:
//   features: a b c
//   product: a b
//   product:
std::string to_text(const ExtFM& m);
ExtFM parse_ext_fm(std::string_view text);

// Set helpers shared by the oracle and its tests.
FeatureSet intersect(const FeatureSet& a, const FeatureSet& b);
FeatureSet unite(const FeatureSet& a, const FeatureSet& b);
bool is_subset(const FeatureSet& a, const FeatureSet& b);

}  // namespace lazydep
