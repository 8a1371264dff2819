#include "lazydep/discovery.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>

#include "lazydep/error.hpp"
#include "lazydep/solver.hpp"

namespace lazydep {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void require_known(const RepositoryIndex& index, const Configuration& request) {
  std::vector<std::string> unknown;
  for (const auto& f : request) {
    if (!index.all_features().contains(f)) unknown.push_back(f);
  }
  if (!unknown.empty()) throw UnknownFeatureError(std::move(unknown));
}

// Fragments parsed so far in one discovery run.
class FragmentCache {
 public:
  explicit FragmentCache(const RepositoryIndex& index) : index_(index) {}

  const Fragment& get(const std::string& id) {
    auto it = cache_.find(id);
    if (it == cache_.end()) it = cache_.emplace(id, load_fragment(index_, id)).first;
    return it->second;
  }

 private:
  const RepositoryIndex& index_;
  std::map<std::string, Fragment> cache_;
};

void record_iteration(const DiscoveryOptions& options, const Configuration& request,
                      const DiscoveryState& state, bool exit_state, DiscoveryResult& result) {
  if (!options.debug) return;
  const DiscoveryState* previous = result.trace.empty() ? nullptr : &result.trace.back();
  for (auto& v : check_invariants(state, request, previous, exit_state)) {
    result.violations.push_back("iteration " + std::to_string(result.trace.size()) + ": " + v);
  }
  result.trace.push_back(state);
}

bool done(const DiscoveryState& state) {
  return !state.solution || is_subset(*state.solution, state.examined);
}

DiscoveryResult lazy_full_or_trivial(const RepositoryIndex& index, const Configuration& request,
                                     const DiscoveryOptions& options) {
  DiscoveryResult result;
  SolverSession session(options.seed);
  FragmentCache cache(index);
  DiscoveryState state;
  state.examined = request;
  FeatureSet loaded_features;

  // The cut of a fragment only ever moves from trivial to full as Y grows,
  // so each fragment is asserted at most once.
  auto load = [&](const std::string& id) {
    if (!state.loaded.insert(id).second) return;
    const Fragment& fragment = cache.get(id);
    session.assert_fm(fragment.fm);
    loaded_features.insert(fragment.fm.features.begin(), fragment.fm.features.end());
  };
  auto load_guarded_by = [&](const Feature& f) {
    for (const auto& id : index.guarded_by(f)) load(id);
  };

  for (const auto& entry : index.entries()) {
    if (!entry.guard) load(entry.id);
  }
  for (const auto& f : request) {
    session.declare_feature(f);
    load_guarded_by(f);
  }

  while (true) {
    state.composed_features = unite(loaded_features, state.examined);
    state.solution = session.select(state.composed_features, request);
    result.stats.iterations++;
    const bool exit = done(state);
    record_iteration(options, request, state, exit, result);
    if (exit) break;

    FeatureSet fresh;
    for (const auto& f : *state.solution) {
      if (!state.examined.contains(f)) fresh.insert(f);
    }
    state.examined.insert(fresh.begin(), fresh.end());
    for (const auto& f : fresh) load_guarded_by(f);
  }

  result.product = state.solution;
  result.stats.fragments_loaded = state.loaded.size();
  result.stats.features_loaded = loaded_features.size();
  result.stats.solver_calls = session.stats().solve_calls;
  if (options.dump_cnf != nullptr) session.dump_dimacs(*options.dump_cnf);
  return result;
}

// The minimum cut for a larger Y has more products, so clauses asserted for an
// earlier Y would over-constrain. Each iteration solves in a fresh session.
DiscoveryResult lazy_minimum(const RepositoryIndex& index, const Configuration& request,
                             const DiscoveryOptions& options) {
  DiscoveryResult result;
  FragmentCache cache(index);
  DiscoveryState state;
  state.examined = request;
  FeatureSet loaded_features;

  while (true) {
    std::vector<CutFM> cuts;
    for (const auto& entry : index.entries()) {
      if (entry.guard && !state.examined.contains(*entry.guard)) {
        cuts.push_back(CutFM{PropFM{intersect(state.examined, entry.features), Formula::constant(true)}, true});
        continue;
      }
      const Fragment& fragment = cache.get(entry.id);
      if (state.loaded.insert(entry.id).second) {
        loaded_features.insert(fragment.fm.features.begin(), fragment.fm.features.end());
      }
      cuts.push_back(pick_cut(fragment, state.examined, CutStrategy::kMinimum));
    }
    PropFM composed = compose_symbolic(cuts);
    SolverSession session(options.seed);
    session.assert_fm(composed);
    state.composed_features = composed.features;
    state.solution = session.select(state.composed_features, request);
    result.stats.iterations++;
    result.stats.solver_calls++;
    const bool exit = done(state);
    record_iteration(options, request, state, exit, result);
    if (exit) {
      if (options.dump_cnf != nullptr) session.dump_dimacs(*options.dump_cnf);
      break;
    }
    state.examined.insert(state.solution->begin(), state.solution->end());
  }

  result.product = state.solution;
  result.stats.fragments_loaded = state.loaded.size();
  result.stats.features_loaded = loaded_features.size();
  return result;
}

std::vector<ExtFM> enumerate_repository(const RepositoryIndex& index) {
  if (index.total_features() > kEnumerationCap) {
    throw CapExceededError(index.total_features(), kEnumerationCap);
  }
  std::vector<ExtFM> models;
  for (const auto& entry : index.entries()) {
    models.push_back(enumerate_products(load_fragment(index, entry.id).fm));
  }
  return models;
}

}  // namespace

DiscoveryResult lazy_discover(const RepositoryIndex& index, const Configuration& request,
                              const DiscoveryOptions& options) {
  const auto start = Clock::now();
  require_known(index, request);
  DiscoveryResult result = options.strategy == CutStrategy::kMinimum
                               ? lazy_minimum(index, request, options)
                               : lazy_full_or_trivial(index, request, options);
  result.stats.total_features = index.total_features();
  result.stats.wall_ms = elapsed_ms(start);
  return result;
}

DiscoveryResult eager_discover(const RepositoryIndex& index, const Configuration& request,
                               const DiscoveryOptions& options) {
  const auto start = Clock::now();
  require_known(index, request);
  DiscoveryResult result;
  SolverSession session(options.seed);
  DiscoveryState state;
  state.examined = request;
  FeatureSet loaded_features;
  for (const auto& entry : index.entries()) {
    Fragment fragment = load_fragment(index, entry.id);
    session.assert_fm(fragment.fm);
    loaded_features.insert(fragment.fm.features.begin(), fragment.fm.features.end());
    state.loaded.insert(entry.id);
  }
  state.composed_features = unite(loaded_features, request);
  state.solution = session.select(state.composed_features, request);
  result.stats.iterations = 1;
  if (options.debug) {
    // The eager model is the full composition; the examined set is all of it.
    DiscoveryState exit_state = state;
    exit_state.examined = state.composed_features;
    record_iteration(options, request, exit_state, true, result);
  }
  result.product = state.solution;
  result.stats.fragments_loaded = state.loaded.size();
  result.stats.features_loaded = loaded_features.size();
  result.stats.total_features = index.total_features();
  result.stats.solver_calls = session.stats().solve_calls;
  if (options.dump_cnf != nullptr) session.dump_dimacs(*options.dump_cnf);
  result.stats.wall_ms = elapsed_ms(start);
  return result;
}

std::optional<Product> oracle_discover(const RepositoryIndex& index, const Configuration& request) {
  require_known(index, request);
  return discover_ext(enumerate_repository(index), request);
}

Verification verify_result(const RepositoryIndex& index, const Configuration& request,
                           const DiscoveryResult& result) {
  std::vector<ExtFM> models;
  try {
    models = enumerate_repository(index);
  } catch (const CapExceededError&) {
    return Verification::kSkipped;
  }
  if (result.product) {
    if (!is_subset(request, *result.product)) return Verification::kFailed;
    return compose_ext(models).products.contains(*result.product) ? Verification::kPassed
                                                                  : Verification::kFailed;
  }
  return discover_ext(models, request) ? Verification::kFailed : Verification::kPassed;
}

std::vector<std::string> check_invariants(const DiscoveryState& state,
                                          const Configuration& request,
                                          const DiscoveryState* previous, bool exit_state) {
  std::vector<std::string> out;
  if (!is_subset(request, state.examined)) out.push_back("Inv1: request not contained in Y");
  if (state.solution && !is_subset(request, *state.solution)) {
    out.push_back("Inv2: solution does not contain the request");
  }
  if (previous != nullptr) {
    if (!is_subset(previous->examined, state.examined)) out.push_back("monotonicity: Y shrank");
    if (!std::includes(state.loaded.begin(), state.loaded.end(), previous->loaded.begin(),
                       previous->loaded.end())) {
      out.push_back("monotonicity: loaded fragments shrank");
    }
  }
  if (exit_state && state.solution && !is_subset(*state.solution, state.examined)) {
    out.push_back("Inv3: exit solution not contained in Y");
  }
  return out;
}

std::string to_csv_row(const std::string& problem_id, const std::string& mode,
                       const DiscoveryResult& result) {
  const DiscoveryStats& s = result.stats;
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.3f", s.wall_ms);
  return problem_id + "," + mode + "," + (result.found() ? "true" : "false") + "," +
         std::to_string(s.iterations) + "," + std::to_string(s.fragments_loaded) + "," +
         std::to_string(s.features_loaded) + "," + std::to_string(s.total_features) + "," +
         std::to_string(s.solver_calls) + "," + wall;
}

}  // namespace lazydep
