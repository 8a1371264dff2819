#pragma once

// Synthetic repositories, request generation and the CSV bench harness.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "lazydep/fragments.hpp"

namespace lazydep {

struct GenSpec {
  std::size_t fragments = 0;
  std::size_t features_per_fragment = 1;  // guard plus local flags
  std::size_t dep_out_degree = 0;
  double share_prob = 0.0;
  std::uint64_t seed = 0;
};

// Fragment i has guard `pkg<i>`, flags `pkg<i>:f1 .. pkg<i>:f<k-1>` and
// dep_out_degree edges to distinct later fragments, each one of
//   pkg<t>,  flag -> pkg<t>,  flag -> !pkg<t>,  flag -> (pkg<t> | pkg<u>)
// With probability share_prob a positive reference also requires one of the
// target's flags. Byte-identical output for equal specs.
std::vector<Fragment> generate_fragments(const GenSpec& spec);
RepositoryIndex run_generate(const GenSpec& spec, const std::filesystem::path& out);

// pkg0 -> pkg1 -> ... -> pkg<depth>, then disconnected fragments up to
// `total` fragments overall.
RepositoryIndex generate_chain_repository(std::size_t depth, std::size_t total,
                                          const std::filesystem::path& out);

// Fragment ids reachable from the fragments guarded by request features,
// following every declared feature that guards another fragment. An upper
// bound on what lazy discovery can load.
std::set<std::string> dependency_closure(const RepositoryIndex& index, const Configuration& request);

// `count` requests of 1 to 10 distinct guard features, each with a union
// closure of at most `max_closure` fragments.
std::vector<Configuration> make_problems(const RepositoryIndex& index, std::size_t count,
                                         std::size_t max_closure, std::uint64_t seed);

// One comma-separated request per line; blank lines and `#` lines skipped.
std::vector<Configuration> read_problems(const std::filesystem::path& path);
void write_problems(const std::filesystem::path& path, const std::vector<Configuration>& problems);

// Modes: "lazy", "lazy-min", "eager".
void run_bench(const RepositoryIndex& index, const std::vector<Configuration>& problems,
               const std::vector<std::string>& modes, std::ostream& out, std::size_t jobs = 1,
               std::uint64_t seed = 0);

}  // namespace lazydep
