#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "lazydep/formula.hpp"
#include "lazydep/sat.hpp"

namespace lazydep {

struct SessionStats {
  std::uint64_t solve_calls = 0;
  std::uint64_t clauses_added = 0;
};

// Monotone incremental solving session. Feature models are conjoined into
// the clause store and never retracted; select() solves under positive
// assumptions so a request never pollutes the store.
//
// A session is owned by one discovery run. It can be moved between threads
// but not used from two at once.
class SolverSession {
 public:
  explicit SolverSession(std::uint64_t seed = 0);

  // Registers the features and conjoins to_cnf(fm.constraint).
  void assert_fm(const PropFM& fm);

  // Registers `name` as an (unconstrained) feature variable.
  sat::Var declare_feature(const Feature& name);
  bool has_feature(const Feature& name) const { return features_.contains(name); }

  // A product of the asserted conjunction that contains `c`, restricted to
  // `fm_features`; nullopt when none exists.
  std::optional<Product> select(const FeatureSet& fm_features, const Configuration& c);

  // DIMACS CNF of every clause asserted so far, preceded by a comment block
  // mapping feature names to variable indices.
  void dump_dimacs(std::ostream& out) const;

  const SessionStats& stats() const { return stats_; }
  const sat::Stats& engine_stats() const { return engine_.stats(); }
  std::size_t feature_count() const { return features_.size(); }

 private:
  sat::Solver engine_;
  std::unordered_map<Feature, sat::Var> features_;
  std::vector<std::pair<Feature, sat::Var>> feature_order_;
  std::vector<std::vector<sat::Lit>> clauses_;
  SessionStats stats_;
};

}  // namespace lazydep
