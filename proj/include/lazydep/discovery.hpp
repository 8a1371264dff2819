#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "lazydep/fragments.hpp"

namespace lazydep {

// Snapshot of the lazy loop at its `while` test.
struct DiscoveryState {
  FeatureSet examined;             // Y
  std::set<std::string> loaded;    // fragments whose constraint is asserted
  FeatureSet composed_features;    // features of the composed cut model
  std::optional<Product> solution;
};

struct DiscoveryStats {
  std::uint64_t iterations = 0;  // select calls made by the loop
  std::uint64_t fragments_loaded = 0;
  std::uint64_t features_loaded = 0;
  std::uint64_t total_features = 0;
  std::uint64_t solver_calls = 0;
  double wall_ms = 0.0;
};

struct DiscoveryResult {
  std::optional<Product> product;  // nullopt: no product contains the request
  DiscoveryStats stats;
  // Debug mode only.
  std::vector<DiscoveryState> trace;
  std::vector<std::string> violations;

  bool found() const { return product.has_value(); }
};

struct DiscoveryOptions {
  CutStrategy strategy = CutStrategy::kFullOrTrivial;
  std::uint64_t seed = 0;
  // Records a trace and checks loop invariants after every iteration.
  bool debug = false;
  // Receives the final clause store in DIMACS form when set.
  std::ostream* dump_cnf = nullptr;
};

// Lazy product discovery: loads only the fragments whose cut for the current
// examined set is non-trivial and grows that set until the candidate product
// lies inside it. Throws UnknownFeatureError if the request mentions a
// feature no fragment declares.
DiscoveryResult lazy_discover(const RepositoryIndex& index, const Configuration& request,
                              const DiscoveryOptions& options = {});

// Baseline: loads and asserts every fragment, then solves once.
DiscoveryResult eager_discover(const RepositoryIndex& index, const Configuration& request,
                               const DiscoveryOptions& options = {});

enum class Verification { kPassed, kFailed, kSkipped };

// Checks a result against the extensional composition of the whole
// repository. kSkipped when the repository exceeds the enumeration caps.
Verification verify_result(const RepositoryIndex& index, const Configuration& request,
                           const DiscoveryResult& result);

// Inv1 (request ⊆ Y), monotonicity of Y and of the loaded set against
// `previous`, and solution ⊆ Y on an exit state.
std::vector<std::string> check_invariants(const DiscoveryState& state,
                                          const Configuration& request,
                                          const DiscoveryState* previous = nullptr,
                                          bool exit_state = false);

// Extensional answer over the whole repository (cap-guarded).
std::optional<Product> oracle_discover(const RepositoryIndex& index, const Configuration& request);

inline constexpr const char* kCsvHeader =
    "problem_id,mode,found,iterations,fragments_loaded,features_loaded,total_features,"
    "solver_calls,wall_ms";

std::string to_csv_row(const std::string& problem_id, const std::string& mode,
                       const DiscoveryResult& result);

}  // namespace lazydep
