#pragma once

// A subset of Gentoo's dependency notation and its translation into guarded
// fragments. A package `cat/pkg` becomes the feature `cat/pkg`, its use flag
// `doc` becomes `cat/pkg:doc`, and the whole dependency is guarded by the
// package feature. Versions, slots and REQUIRED_USE are not modelled.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lazydep/fragments.hpp"

namespace lazydep {

struct DependExpr {
  enum class Kind { kAtom, kUseCond, kAnyOf, kGroup };

  Kind kind = Kind::kAtom;
  std::string name;  // package for atoms, flag for use conditionals
  bool negated = false;
  std::vector<DependExpr> body;

  static DependExpr atom(std::string package, bool negated = false);
  static DependExpr use_cond(std::string flag, std::vector<DependExpr> body);
  static DependExpr any_of(std::vector<DependExpr> body);
  static DependExpr group(std::vector<DependExpr> body);

  friend bool operator==(const DependExpr&, const DependExpr&) = default;
};

//   item := "flag?" "(" item* ")" | "||" "(" item+ ")" | "(" item* ")" | ["!"] cat/name
std::vector<DependExpr> parse_depend(std::string_view text);
std::string to_string(const std::vector<DependExpr>& items);

bool is_valid_package_name(std::string_view name);
bool is_valid_use_flag(std::string_view flag);

struct PackageDecl {
  std::string name;
  std::vector<std::string> use_flags;
  std::vector<DependExpr> depend;
};

// `.pkg` file: `name <cat/pkg>`, `iuse <flag>...` and `depend <text>` lines;
// repeated iuse/depend lines accumulate.
PackageDecl parse_package(std::string_view text);

Fragment translate_package(const PackageDecl& decl);

// Translates every `*.pkg` under `pkg_dir` (sorted by path) into a fragment
// repository at `out`.
RepositoryIndex translate_directory(const std::filesystem::path& pkg_dir,
                                    const std::filesystem::path& out);

}  // namespace lazydep
