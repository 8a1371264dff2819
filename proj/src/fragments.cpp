#include "lazydep/fragments.hpp"

#include <fstream>
#include <sstream>

#include "lazydep/error.hpp"

namespace lazydep {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kNoIds;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RepositoryError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string strip_comment(std::string line) {
  if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
  return line;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(sep, start);
    if (end == std::string_view::npos) end = text.size();
    out.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

bool is_valid_id(std::string_view id) {
  if (!is_valid_feature_name(id)) return false;
  for (const auto& part : split(id, '/')) {
    if (part.empty() || part == "." || part == "..") return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Index

RepositoryIndex::RepositoryIndex(fs::path root, std::vector<IndexEntry> entries)
    : root_(std::move(root)), entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const IndexEntry& e = entries_[i];
    if (!by_id_.emplace(e.id, i).second) throw RepositoryError("duplicate fragment id '" + e.id + "'");
    for (const auto& f : e.features) {
      feature_owners_[f].insert(e.id);
      all_features_.insert(f);
    }
    if (e.guard) guard_owners_[*e.guard].insert(e.id);
  }
}

const IndexEntry* RepositoryIndex::find(std::string_view id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &entries_[it->second];
}

const std::set<std::string>& RepositoryIndex::owners(const Feature& f) const {
  auto it = feature_owners_.find(f);
  return it == feature_owners_.end() ? kNoIds : it->second;
}

const std::set<std::string>& RepositoryIndex::guarded_by(const Feature& f) const {
  auto it = guard_owners_.find(f);
  return it == guard_owners_.end() ? kNoIds : it->second;
}

RepositoryIndex load_repository(const fs::path& root) {
  const fs::path manifest = root / "manifest.txt";
  std::istringstream in(read_file(manifest));
  std::vector<IndexEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_comment(line);
    std::istringstream words(line);
    std::vector<std::string> fields;
    for (std::string w; words >> w;) fields.push_back(w);
    if (fields.empty()) continue;

    auto fail = [&](const std::string& msg) -> RepositoryError {
      return RepositoryError(manifest.string() + ":" + std::to_string(line_no) + ": " + msg);
    };
    if (fields.size() != 4) throw fail("expected '<id> <file> guard=<g> features=<list>'");
    if (fields[2].rfind("guard=", 0) != 0) throw fail("missing guard= field");
    if (fields[3].rfind("features=", 0) != 0) throw fail("missing features= field");

    IndexEntry e;
    e.id = fields[0];
    if (!is_valid_id(e.id)) throw fail("invalid fragment id '" + e.id + "'");
    e.file = fields[1];
    if (e.file.is_absolute()) throw fail("fragment file must be relative");

    std::string features = fields[3].substr(9);
    if (!features.empty()) {
      for (const auto& f : split(features, ',')) {
        if (!is_valid_feature_name(f)) throw fail("invalid feature name '" + f + "'");
        e.features.insert(f);
      }
    }
    std::string guard = fields[2].substr(6);
    if (guard != "none") {
      if (!is_valid_feature_name(guard)) throw fail("invalid guard '" + guard + "'");
      if (!e.features.contains(guard)) throw fail("guard '" + guard + "' is not a declared feature");
      e.guard = guard;
    }
    entries.push_back(std::move(e));
  }
  return RepositoryIndex(root, std::move(entries));
}

// ---------------------------------------------------------------------------
// Fragment files

std::optional<Feature> detect_guard(const PropFM& fm) {
  const Formula& c = fm.constraint;
  if (c.kind() != Formula::Kind::kImplies || !c.lhs().is_var()) return std::nullopt;
  if (!fm.features.contains(c.lhs().name())) return std::nullopt;
  return c.lhs().name();
}

Fragment make_fragment(std::string id, PropFM fm) {
  validate(fm);
  auto guard = detect_guard(fm);
  return Fragment{std::move(id), std::move(fm), std::move(guard)};
}

Fragment parse_fragment(std::string id, std::string_view text) {
  PropFM fm;
  std::vector<Formula> constraints;
  std::size_t offset = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::size_t end = line.find_first_of(" \t", start);
    std::string keyword = line.substr(start, end == std::string::npos ? end : end - start);
    std::string rest = end == std::string::npos ? "" : line.substr(end + 1);
    if (keyword == "feature") {
      std::istringstream words(strip_comment(rest));
      std::string name;
      std::string extra;
      if (!(words >> name) || (words >> extra)) {
        throw ParseError("fragment '" + id + "': expected exactly one feature name", line_offset);
      }
      if (!is_valid_feature_name(name)) {
        throw ParseError("fragment '" + id + "': invalid feature name '" + name + "'", line_offset);
      }
      fm.features.insert(name);
    } else if (keyword == "constraint") {
      try {
        constraints.push_back(parse_formula(rest));
      } catch (const ParseError& e) {
        throw ParseError("fragment '" + id + "': " + e.what(),
                         line_offset + (end == std::string::npos ? line.size() : end + 1) +
                             e.offset());
      }
    } else {
      throw ParseError("fragment '" + id + "': unknown keyword '" + keyword + "'", line_offset);
    }
  }
  if (constraints.empty()) throw ParseError("fragment '" + id + "' has no constraint line", offset);

  // Lines sharing one guard g stay in guarded form: g -> (psi1 & psi2 ...).
  bool shared_guard = constraints.size() > 1;
  for (const auto& c : constraints) {
    if (c.kind() != Formula::Kind::kImplies || !c.lhs().is_var() ||
        c.lhs().name() != constraints.front().lhs().name()) {
      shared_guard = false;
      break;
    }
  }
  if (shared_guard) {
    std::vector<Formula> bodies;
    for (const auto& c : constraints) bodies.push_back(c.rhs());
    fm.constraint = implies(constraints.front().lhs(), conjoin(bodies));
  } else {
    fm.constraint = conjoin(constraints);
  }
  try {
    validate(fm);
  } catch (const PreconditionError& e) {
    throw ParseError("fragment '" + id + "': " + e.what(), 0);
  }
  return make_fragment(std::move(id), std::move(fm));
}

std::string format_fragment(const Fragment& fragment) {
  std::string out = "# fragment " + fragment.id + "\n";
  for (const auto& f : fragment.fm.features) out += "feature " + f + "\n";
  out += "constraint " + to_string(fragment.fm.constraint) + "\n";
  return out;
}

Fragment load_fragment(const RepositoryIndex& index, std::string_view id) {
  const IndexEntry* entry = index.find(id);
  if (entry == nullptr) throw RepositoryError("unknown fragment id '" + std::string(id) + "'");
  Fragment fragment = parse_fragment(entry->id, read_file(index.root() / entry->file));
  if (fragment.fm.features != entry->features) {
    throw RepositoryError("fragment '" + entry->id +
                          "': declared features differ from the manifest");
  }
  if (entry->guard) {
    if (fragment.guard != entry->guard) {
      throw RepositoryError("fragment '" + entry->id + "': constraint is not guarded by '" +
                            *entry->guard + "'");
    }
  } else {
    // The manifest is authoritative: no guard means no trivial cuts.
    fragment.guard.reset();
  }
  return fragment;
}

RepositoryIndex write_repository(const fs::path& root, std::span<const Fragment> fragments) {
  fs::create_directories(root);
  std::vector<IndexEntry> entries;
  std::string manifest;
  for (const auto& fragment : fragments) {
    if (!is_valid_id(fragment.id)) throw RepositoryError("invalid fragment id '" + fragment.id + "'");
    IndexEntry e{fragment.id, fs::path(fragment.id + ".fm"), fragment.guard, fragment.fm.features};
    manifest += e.id + " " + e.file.generic_string() + " guard=" + (e.guard ? *e.guard : "none") +
                " features=";
    bool first = true;
    for (const auto& f : e.features) {
      if (!first) manifest += ',';
      manifest += f;
      first = false;
    }
    manifest += '\n';

    const fs::path path = root / e.file;
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << format_fragment(fragment);
    if (!out) throw RepositoryError("cannot write " + path.string());
    entries.push_back(std::move(e));
  }
  std::ofstream out(root / "manifest.txt", std::ios::binary | std::ios::trunc);
  out << manifest;
  if (!out) throw RepositoryError("cannot write manifest in " + root.string());
  return RepositoryIndex(root, std::move(entries));
}

// ---------------------------------------------------------------------------
// Cuts and composition

PropFM to_prop_fm(const ExtFM& m) {
  if (m.products.size() == (std::size_t{1} << m.features.size())) {
    return PropFM{m.features, Formula::constant(true)};
  }
  std::vector<Formula> minterms;
  for (const auto& p : m.products) {
    std::vector<Formula> lits;
    for (const auto& f : m.features) {
      lits.push_back(p.contains(f) ? Formula::var(f) : !Formula::var(f));
    }
    minterms.push_back(conjoin(lits));
  }
  return PropFM{m.features, disjoin(minterms)};
}

CutFM pick_cut(const Fragment& fragment, const FeatureSet& y, CutStrategy strategy) {
  if (fragment.guard && !y.contains(*fragment.guard)) {
    return CutFM{PropFM{intersect(y, fragment.fm.features), Formula::constant(true)}, true};
  }
  if (strategy == CutStrategy::kMinimum) {
    ExtFM cut = minimum_cut_fixpoint(enumerate_products(fragment.fm), y);
    PropFM fm = to_prop_fm(cut);
    bool trivial = fm.constraint.is_const() && fm.constraint.value();
    return CutFM{std::move(fm), trivial};
  }
  return CutFM{fragment.fm, false};
}

PropFM compose_symbolic(std::span<const CutFM> cuts) {
  PropFM out{{}, Formula::constant(true)};
  std::vector<Formula> parts;
  for (const auto& cut : cuts) {
    out.features.insert(cut.fm.features.begin(), cut.fm.features.end());
    if (!cut.trivial) parts.push_back(cut.fm.constraint);
  }
  out.constraint = conjoin(parts);
  return out;
}

}  // namespace lazydep
