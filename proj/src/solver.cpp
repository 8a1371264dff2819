#include "lazydep/solver.hpp"

#include <cstdlib>

namespace lazydep {

SolverSession::SolverSession(std::uint64_t seed) : engine_(seed) {}

sat::Var SolverSession::declare_feature(const Feature& name) {
  auto it = features_.find(name);
  if (it != features_.end()) return it->second;
  sat::Var v = engine_.new_var();
  features_.emplace(name, v);
  feature_order_.emplace_back(name, v);
  return v;
}

void SolverSession::assert_fm(const PropFM& fm) {
  for (const auto& f : fm.features) declare_feature(f);
  ClauseSet cnf = to_cnf(fm.constraint);

  // Local CNF indices map onto session variables; auxiliaries are fresh.
  std::vector<sat::Var> local(cnf.variables.size());
  for (std::size_t i = 0; i < cnf.variables.size(); ++i) {
    local[i] = cnf.kinds[i] == VarKind::kFeature ? declare_feature(cnf.variables[i])
                                                 : engine_.new_var();
  }
  for (const auto& clause : cnf.clauses) {
    std::vector<sat::Lit> lits;
    lits.reserve(clause.size());
    for (int d : clause) lits.emplace_back(local[std::abs(d) - 1], d < 0);
    engine_.add_clause(lits);
    clauses_.push_back(std::move(lits));
    stats_.clauses_added++;
  }
}

std::optional<Product> SolverSession::select(const FeatureSet& fm_features,
                                             const Configuration& c) {
  std::vector<sat::Lit> assumptions;
  assumptions.reserve(c.size());
  for (const auto& f : c) assumptions.emplace_back(declare_feature(f), false);
  stats_.solve_calls++;
  if (engine_.solve(assumptions) != sat::Result::kSat) return std::nullopt;

  Product p;
  for (const auto& f : fm_features) {
    auto it = features_.find(f);
    if (it != features_.end() && engine_.model_value(it->second)) p.insert(p.end(), f);
  }
  // Requested features not otherwise listed still belong to the product.
  p.insert(c.begin(), c.end());
  return p;
}

void SolverSession::dump_dimacs(std::ostream& out) const {
  for (const auto& [name, var] : feature_order_) out << "c feature " << var + 1 << ' ' << name << '\n';
  out << "p cnf " << engine_.num_vars() << ' ' << clauses_.size() << '\n';
  for (const auto& clause : clauses_) {
    for (const auto& lit : clause) out << lit.dimacs() << ' ';
    out << "0\n";
  }
}

}  // namespace lazydep
