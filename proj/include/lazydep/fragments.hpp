#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lazydep/extfm.hpp"
#include "lazydep/formula.hpp"

namespace lazydep {

// One feature model of a repository. A guarded fragment has the shape
// (F, guard -> psi): its constraints only bite once the guard is selected.
struct Fragment {
  std::string id;
  PropFM fm;
  std::optional<Feature> guard;
};

struct IndexEntry {
  std::string id;
  std::filesystem::path file;  // relative to the repository root
  std::optional<Feature> guard;
  FeatureSet features;
};

// Manifest-level view of a repository. Built without reading any fragment
// body; immutable afterwards and safe to share between threads.
class RepositoryIndex {
 public:
  RepositoryIndex() = default;
  RepositoryIndex(std::filesystem::path root, std::vector<IndexEntry> entries);

  const std::filesystem::path& root() const { return root_; }
  // Manifest order.
  const std::vector<IndexEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const IndexEntry* find(std::string_view id) const;

  // Ids of the fragments declaring `f`.
  const std::set<std::string>& owners(const Feature& f) const;
  // Ids of the fragments whose guard is `f`.
  const std::set<std::string>& guarded_by(const Feature& f) const;

  const FeatureSet& all_features() const { return all_features_; }
  std::size_t total_features() const { return all_features_.size(); }

 private:
  std::filesystem::path root_;
  std::vector<IndexEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::map<Feature, std::set<std::string>> feature_owners_;
  std::map<Feature, std::set<std::string>> guard_owners_;
  FeatureSet all_features_;
};

// Reads `<root>/manifest.txt`. Each non-comment line is
//   <id> <relative-file> guard=<feature|none> features=<f1,f2,...>
RepositoryIndex load_repository(const std::filesystem::path& root);

// Parses the fragment file of `id` and checks it against the manifest.
Fragment load_fragment(const RepositoryIndex& index, std::string_view id);

// Fragment file body: `feature <name>` lines then `constraint <formula>`
// lines (conjoined). `#` starts a comment.
Fragment parse_fragment(std::string id, std::string_view text);
std::string format_fragment(const Fragment& fragment);

// Writes manifest.txt plus one `<id>.fm` per fragment under `root`.
RepositoryIndex write_repository(const std::filesystem::path& root,
                                 std::span<const Fragment> fragments);

// Some(f) iff the constraint is syntactically Implies(Var f, psi) with f a
// declared feature.
std::optional<Feature> detect_guard(const PropFM& fm);

// A fragment with its guard detected.
Fragment make_fragment(std::string id, PropFM fm);

struct CutFM {
  PropFM fm;
  bool trivial = false;
};

enum class CutStrategy {
  // Guarded fragment whose guard is unexamined -> (y ∩ F, true); otherwise
  // the whole fragment.
  kFullOrTrivial,
  // Minimum cut via extensional enumeration; desk scale only.
  kMinimum,
};

CutFM pick_cut(const Fragment& fragment, const FeatureSet& y,
               CutStrategy strategy = CutStrategy::kFullOrTrivial);

// (∪ features, ∧ non-trivial constraints).
PropFM compose_symbolic(std::span<const CutFM> cuts);

// Propositional form of an extensional model: true for a full powerset,
// otherwise the disjunction of its product minterms.
PropFM to_prop_fm(const ExtFM& m);

}  // namespace lazydep
