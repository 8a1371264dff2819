#include "lazydep/depparse.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "lazydep/error.hpp"

namespace lazydep {

namespace fs = std::filesystem;

DependExpr DependExpr::atom(std::string package, bool negated) {
  DependExpr e;
  e.kind = Kind::kAtom;
  e.name = std::move(package);
  e.negated = negated;
  return e;
}

DependExpr DependExpr::use_cond(std::string flag, std::vector<DependExpr> body) {
  DependExpr e;
  e.kind = Kind::kUseCond;
  e.name = std::move(flag);
  e.body = std::move(body);
  return e;
}

DependExpr DependExpr::any_of(std::vector<DependExpr> body) {
  DependExpr e;
  e.kind = Kind::kAnyOf;
  e.body = std::move(body);
  return e;
}

DependExpr DependExpr::group(std::vector<DependExpr> body) {
  DependExpr e;
  e.kind = Kind::kGroup;
  e.body = std::move(body);
  return e;
}

namespace {

bool is_pkg_char(char ch) {
  return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '+' || ch == '.' ||
         ch == '-';
}

bool is_pkg_part(std::string_view part) {
  if (part.empty()) return false;
  char first = part.front();
  if (!std::isalnum(static_cast<unsigned char>(first)) && first != '_') return false;
  return std::all_of(part.begin(), part.end(), is_pkg_char);
}

struct Token {
  std::string text;
  std::size_t offset;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    char ch = text[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
    } else if (ch == '(' || ch == ')') {
      out.push_back({std::string(1, ch), i});
      ++i;
    } else {
      std::size_t start = i;
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
             text[i] != '(' && text[i] != ')') {
        ++i;
      }
      out.push_back({std::string(text.substr(start, i - start)), start});
    }
  }
  return out;
}

class DependParser {
 public:
  explicit DependParser(std::string_view text) : tokens_(tokenize(text)), end_(text.size()) {}

  std::vector<DependExpr> parse() {
    std::vector<DependExpr> items = parse_items();
    if (pos_ < tokens_.size()) throw ParseError("unbalanced ')'", tokens_[pos_].offset);
    return items;
  }

 private:
  std::vector<DependExpr> parse_items() {
    std::vector<DependExpr> items;
    while (pos_ < tokens_.size() && tokens_[pos_].text != ")") items.push_back(parse_item());
    return items;
  }

  std::vector<DependExpr> parse_parenthesized(std::size_t owner_offset) {
    if (pos_ >= tokens_.size() || tokens_[pos_].text != "(") {
      throw ParseError("expected '('", pos_ < tokens_.size() ? tokens_[pos_].offset : end_);
    }
    ++pos_;
    std::vector<DependExpr> body = parse_items();
    if (pos_ >= tokens_.size()) throw ParseError("unbalanced '(': missing ')'", owner_offset);
    ++pos_;
    return body;
  }

  DependExpr parse_item() {
    const Token tok = tokens_[pos_];
    if (tok.text == "(") {
      return DependExpr::group(parse_parenthesized(tok.offset));
    }
    ++pos_;
    if (tok.text == "||") {
      std::vector<DependExpr> body = parse_parenthesized(tok.offset);
      if (body.empty()) throw ParseError("empty '|| ( )' group", tok.offset);
      return DependExpr::any_of(std::move(body));
    }
    if (tok.text.back() == '?') {
      std::string flag = tok.text.substr(0, tok.text.size() - 1);
      if (!is_valid_use_flag(flag)) throw ParseError("bad use flag '" + flag + "'", tok.offset);
      return DependExpr::use_cond(std::move(flag), parse_parenthesized(tok.offset));
    }
    bool negated = tok.text.front() == '!';
    std::string package = negated ? tok.text.substr(1) : tok.text;
    if (!is_valid_package_name(package)) {
      throw ParseError("bad atom '" + tok.text + "'", tok.offset);
    }
    return DependExpr::atom(std::move(package), negated);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t end_;
};

void print(const DependExpr& e, std::string& out);

void print_list(const std::vector<DependExpr>& items, std::string& out) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ' ';
    print(items[i], out);
  }
}

void print_body(const std::vector<DependExpr>& body, std::string& out) {
  out += "( ";
  print_list(body, out);
  out += body.empty() ? ")" : " )";
}

void print(const DependExpr& e, std::string& out) {
  switch (e.kind) {
    case DependExpr::Kind::kAtom:
      if (e.negated) out += '!';
      out += e.name;
      break;
    case DependExpr::Kind::kUseCond:
      out += e.name + "? ";
      print_body(e.body, out);
      break;
    case DependExpr::Kind::kAnyOf:
      out += "|| ";
      print_body(e.body, out);
      break;
    case DependExpr::Kind::kGroup:
      print_body(e.body, out);
      break;
  }
}

class Translator {
 public:
  explicit Translator(const PackageDecl& decl) : decl_(decl) {
    for (const auto& flag : decl.use_flags) {
      if (!flags_.insert(flag).second) {
        throw PreconditionError("package '" + decl.name + "': duplicate use flag '" + flag + "'");
      }
    }
  }

  Formula conj(const std::vector<DependExpr>& items) {
    std::vector<Formula> parts;
    for (const auto& item : items) parts.push_back(translate(item));
    return conjoin(parts);
  }

  Formula translate(const DependExpr& e) {
    switch (e.kind) {
      case DependExpr::Kind::kAtom: {
        referenced.insert(e.name);
        Formula v = Formula::var(e.name);
        return e.negated ? !v : v;
      }
      case DependExpr::Kind::kUseCond:
        if (!flags_.contains(e.name)) {
          throw PreconditionError("package '" + decl_.name + "': use flag '" + e.name +
                                  "' is not in IUSE");
        }
        return implies(Formula::var(decl_.name + ":" + e.name), conj(e.body));
      case DependExpr::Kind::kAnyOf: {
        std::vector<Formula> parts;
        for (const auto& item : e.body) parts.push_back(translate(item));
        return disjoin(parts);
      }
      case DependExpr::Kind::kGroup:
        return conj(e.body);
    }
    return Formula::constant(true);
  }

  FeatureSet referenced;

 private:
  const PackageDecl& decl_;
  std::set<std::string> flags_;
};

}  // namespace

bool is_valid_package_name(std::string_view name) {
  auto slash = name.find('/');
  if (slash == std::string_view::npos || name.find('/', slash + 1) != std::string_view::npos) {
    return false;
  }
  return is_pkg_part(name.substr(0, slash)) && is_pkg_part(name.substr(slash + 1)) &&
         is_valid_feature_name(name);
}

bool is_valid_use_flag(std::string_view flag) {
  if (flag.empty() || !std::isalnum(static_cast<unsigned char>(flag.front()))) return false;
  return std::all_of(flag.begin(), flag.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '+' || ch == '@' ||
           ch == '-' || ch == '.';
  });
}

std::vector<DependExpr> parse_depend(std::string_view text) { return DependParser(text).parse(); }

std::string to_string(const std::vector<DependExpr>& items) {
  std::string out;
  print_list(items, out);
  return out;
}

PackageDecl parse_package(std::string_view text) {
  PackageDecl decl;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;
    std::size_t end = line.find_first_of(" \t", start);
    std::string keyword = line.substr(start, end == std::string::npos ? end : end - start);
    std::string rest = end == std::string::npos ? "" : line.substr(end + 1);
    std::istringstream words(rest);
    if (keyword == "name") {
      if (!(words >> decl.name) || !is_valid_package_name(decl.name)) {
        throw ParseError("bad package name", line_offset);
      }
    } else if (keyword == "iuse") {
      for (std::string flag; words >> flag;) {
        if (!is_valid_use_flag(flag)) throw ParseError("bad use flag '" + flag + "'", line_offset);
        decl.use_flags.push_back(flag);
      }
    } else if (keyword == "depend") {
      try {
        for (auto& item : parse_depend(rest)) decl.depend.push_back(std::move(item));
      } catch (const ParseError& e) {
        throw ParseError(e.what(), line_offset + end + 1 + e.offset());
      }
    } else {
      throw ParseError("unknown keyword '" + keyword + "'", line_offset);
    }
  }
  if (decl.name.empty()) throw ParseError("missing 'name' line", 0);
  return decl;
}

Fragment translate_package(const PackageDecl& decl) {
  Translator t(decl);
  Formula body = t.conj(decl.depend);
  PropFM fm;
  fm.features.insert(decl.name);
  for (const auto& flag : decl.use_flags) fm.features.insert(decl.name + ":" + flag);
  fm.features.insert(t.referenced.begin(), t.referenced.end());
  fm.constraint = implies(Formula::var(decl.name), body);
  return make_fragment(decl.name, std::move(fm));
}

RepositoryIndex translate_directory(const fs::path& pkg_dir, const fs::path& out) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(pkg_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pkg") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Fragment> fragments;
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
      fragments.push_back(translate_package(parse_package(buf.str())));
    } catch (const Error& e) {
      throw RepositoryError(file.string() + ": " + e.what());
    }
  }
  return write_repository(out, fragments);
}

}  // namespace lazydep
