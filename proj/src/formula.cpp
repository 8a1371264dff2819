#include "lazydep/formula.hpp"

#include <atomic>
#include <cctype>
#include <optional>
#include <unordered_map>

#include "lazydep/error.hpp"

namespace lazydep {

namespace {

bool is_name_start(char ch) {
  return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_';
}

bool is_name_char(char ch) {
  return is_name_start(ch) || ch == ':' || ch == '+' || ch == '.' || ch == '/' || ch == '@' ||
         ch == '-';
}

std::atomic<std::size_t> g_parse_count{0};

}  // namespace

bool is_reserved_word(std::string_view name) {
  return name == "true" || name == "false" || name == "and" || name == "or" || name == "not" ||
         name == "impl";
}

bool is_valid_feature_name(std::string_view name) {
  if (name.empty() || !is_name_start(name.front())) return false;
  for (char ch : name) {
    if (!is_name_char(ch)) return false;
  }
  return !is_reserved_word(name);
}

void validate_feature_name(std::string_view name) {
  if (is_reserved_word(name)) {
    throw ParseError("reserved word '" + std::string(name) + "' used as a feature name", 0);
  }
  if (!is_valid_feature_name(name)) {
    throw ParseError("invalid feature name '" + std::string(name) + "'", 0);
  }
}

// ---------------------------------------------------------------------------
// Formula nodes

struct Formula::Node {
  Kind kind = Kind::kConst;
  bool value = true;
  Feature name;
  std::optional<Formula> lhs;
  std::optional<Formula> rhs;
  std::size_t size = 1;
};

Formula::Formula() {
  static const auto kTrue = std::make_shared<const Node>();
  node_ = kTrue;
}

Formula Formula::constant(bool value) {
  static const auto kTrue = Formula().node_;
  static const auto kFalse = [] {
    auto n = std::make_shared<Node>();
    n->value = false;
    return std::shared_ptr<const Node>(std::move(n));
  }();
  return Formula(value ? kTrue : kFalse);
}

Formula Formula::var(std::string name) {
  validate_feature_name(name);
  auto n = std::make_shared<Node>();
  n->kind = Kind::kVar;
  n->name = std::move(name);
  return Formula(std::move(n));
}

Formula Formula::negation(Formula operand) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kNot;
  n->size = operand.size() + 1;
  n->lhs = std::move(operand);
  return Formula(std::move(n));
}

namespace {
template <typename NodeT, typename KindT>
std::shared_ptr<const NodeT> make_binary(KindT kind, Formula lhs, Formula rhs) {
  auto n = std::make_shared<NodeT>();
  n->kind = kind;
  n->size = lhs.size() + rhs.size() + 1;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}
}  // namespace

Formula Formula::conjunction(Formula lhs, Formula rhs) {
  return Formula(make_binary<Node>(Kind::kAnd, std::move(lhs), std::move(rhs)));
}

Formula Formula::disjunction(Formula lhs, Formula rhs) {
  return Formula(make_binary<Node>(Kind::kOr, std::move(lhs), std::move(rhs)));
}

Formula Formula::implication(Formula lhs, Formula rhs) {
  return Formula(make_binary<Node>(Kind::kImplies, std::move(lhs), std::move(rhs)));
}

Formula::Kind Formula::kind() const { return node_->kind; }
bool Formula::value() const { return node_->value; }
const Feature& Formula::name() const { return node_->name; }
const Formula& Formula::operand() const { return *node_->lhs; }
const Formula& Formula::lhs() const { return *node_->lhs; }
const Formula& Formula::rhs() const { return *node_->rhs; }
std::size_t Formula::size() const { return node_->size; }

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind() || a.size() != b.size()) return false;
  switch (a.kind()) {
    case Formula::Kind::kConst:
      return a.value() == b.value();
    case Formula::Kind::kVar:
      return a.name() == b.name();
    case Formula::Kind::kNot:
      return a.operand() == b.operand();
    default:
      return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
}

Formula conjoin(const std::vector<Formula>& parts) {
  if (parts.empty()) return Formula::constant(true);
  Formula out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) out = out && parts[i];
  return out;
}

Formula disjoin(const std::vector<Formula>& parts) {
  if (parts.empty()) return Formula::constant(false);
  Formula out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) out = out || parts[i];
  return out;
}

void validate(const PropFM& fm) {
  for (const auto& f : free_features(fm.constraint)) {
    if (!fm.features.contains(f)) {
      throw PreconditionError("constraint mentions undeclared feature '" + f + "'");
    }
  }
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok { kEnd, kLParen, kRParen, kNot, kAnd, kOr, kArrow, kName };

class FormulaParser {
 public:
  explicit FormulaParser(std::string_view text) : text_(text) { advance(); }

  Formula parse() {
    Formula f = parse_impl();
    if (tok_ != Tok::kEnd) fail("unexpected trailing input");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, tok_start_); }

  void skip_space() {
    while (pos_ < text_.size()) {
      char ch = text_[pos_];
      if (ch == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  void advance() {
    skip_space();
    tok_start_ = pos_;
    if (pos_ >= text_.size()) {
      tok_ = Tok::kEnd;
      return;
    }
    char ch = text_[pos_];
    switch (ch) {
      case '(': tok_ = Tok::kLParen; ++pos_; return;
      case ')': tok_ = Tok::kRParen; ++pos_; return;
      case '!': tok_ = Tok::kNot; ++pos_; return;
      case '&': tok_ = Tok::kAnd; ++pos_; return;
      case '|': tok_ = Tok::kOr; ++pos_; return;
      default: break;
    }
    if (ch == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
      tok_ = Tok::kArrow;
      pos_ += 2;
      return;
    }
    if (!is_name_start(ch)) fail(std::string("unexpected character '") + ch + "'");
    std::size_t end = pos_ + 1;
    while (end < text_.size() && is_name_char(text_[end])) {
      // `a->b` ends the name before the arrow.
      if (text_[end] == '-' && end + 1 < text_.size() && text_[end + 1] == '>') break;
      ++end;
    }
    name_ = text_.substr(pos_, end - pos_);
    pos_ = end;
    tok_ = Tok::kName;
  }

  Formula parse_impl() {
    Formula lhs = parse_or();
    if (tok_ == Tok::kArrow) {
      advance();
      return implies(std::move(lhs), parse_impl());
    }
    return lhs;
  }

  Formula parse_or() {
    Formula lhs = parse_and();
    while (tok_ == Tok::kOr) {
      advance();
      lhs = std::move(lhs) || parse_and();
    }
    return lhs;
  }

  Formula parse_and() {
    Formula lhs = parse_unary();
    while (tok_ == Tok::kAnd) {
      advance();
      lhs = std::move(lhs) && parse_unary();
    }
    return lhs;
  }

  Formula parse_unary() {
    switch (tok_) {
      case Tok::kNot:
        advance();
        return !parse_unary();
      case Tok::kLParen: {
        advance();
        Formula inner = parse_impl();
        if (tok_ != Tok::kRParen) fail("expected ')'");
        advance();
        return inner;
      }
      case Tok::kName: {
        std::string name(name_);
        if (name == "true" || name == "false") {
          advance();
          return Formula::constant(name == "true");
        }
        if (is_reserved_word(name)) fail("reserved word '" + name + "' used as a feature name");
        advance();
        return Formula::var(std::move(name));
      }
      case Tok::kEnd:
        fail("unexpected end of input");
      default:
        fail("expected a feature, constant, '!' or '('");
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t tok_start_ = 0;
  Tok tok_ = Tok::kEnd;
  std::string_view name_;
};

}  // namespace

Formula parse_formula(std::string_view text) {
  g_parse_count.fetch_add(1, std::memory_order_relaxed);
  return FormulaParser(text).parse();
}

std::size_t formula_parse_count() { return g_parse_count.load(std::memory_order_relaxed); }

// ---------------------------------------------------------------------------
// Printing

namespace {

// Binding strength: -> 1, | 2, & 3, ! 4, atoms 5.
void print(const Formula& f, int min_prec, std::string& out) {
  using K = Formula::Kind;
  auto binary = [&](int prec, int lhs_prec, int rhs_prec, const char* op) {
    bool paren = prec < min_prec;
    if (paren) out += '(';
    print(f.lhs(), lhs_prec, out);
    out += op;
    print(f.rhs(), rhs_prec, out);
    if (paren) out += ')';
  };
  switch (f.kind()) {
    case K::kConst:
      out += f.value() ? "true" : "false";
      break;
    case K::kVar:
      out += f.name();
      break;
    case K::kNot:
      out += '!';
      print(f.operand(), 4, out);
      break;
    case K::kAnd:
      binary(3, 3, 4, " & ");
      break;
    case K::kOr:
      binary(2, 2, 3, " | ");
      break;
    case K::kImplies:
      binary(1, 2, 1, " -> ");
      break;
  }
}

}  // namespace

std::string to_string(const Formula& f) {
  std::string out;
  print(f, 0, out);
  return out;
}

// ---------------------------------------------------------------------------
// Semantics

bool eval_formula(const Formula& f, const std::function<bool(const Feature&)>& lookup) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::kConst: return f.value();
    case K::kVar: return lookup(f.name());
    case K::kNot: return !eval_formula(f.operand(), lookup);
    case K::kAnd: return eval_formula(f.lhs(), lookup) && eval_formula(f.rhs(), lookup);
    case K::kOr: return eval_formula(f.lhs(), lookup) || eval_formula(f.rhs(), lookup);
    case K::kImplies: return !eval_formula(f.lhs(), lookup) || eval_formula(f.rhs(), lookup);
  }
  return false;
}

bool eval_formula(const Formula& f, const Assignment& a) {
  return eval_formula(f, [&a](const Feature& name) {
    auto it = a.find(name);
    return it != a.end() && it->second;
  });
}

bool eval_formula(const Formula& f, const FeatureSet& true_features) {
  return eval_formula(f, [&true_features](const Feature& name) {
    return true_features.contains(name);
  });
}

namespace {
void collect_free(const Formula& f, FeatureSet& out) {
  switch (f.kind()) {
    case Formula::Kind::kConst: return;
    case Formula::Kind::kVar: out.insert(f.name()); return;
    case Formula::Kind::kNot: collect_free(f.operand(), out); return;
    default:
      collect_free(f.lhs(), out);
      collect_free(f.rhs(), out);
  }
}
}  // namespace

FeatureSet free_features(const Formula& f) {
  FeatureSet out;
  collect_free(f, out);
  return out;
}

Formula fold_constants(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::kConst:
    case K::kVar:
      return f;
    case K::kNot: {
      Formula x = fold_constants(f.operand());
      if (x.is_const()) return Formula::constant(!x.value());
      return !x;
    }
    default:
      break;
  }
  Formula a = fold_constants(f.lhs());
  Formula b = fold_constants(f.rhs());
  switch (f.kind()) {
    case K::kAnd:
      if (a.is_const()) return a.value() ? b : a;
      if (b.is_const()) return b.value() ? a : b;
      return a && b;
    case K::kOr:
      if (a.is_const()) return a.value() ? a : b;
      if (b.is_const()) return b.value() ? b : a;
      return a || b;
    default:  // kImplies
      if (a.is_const()) return a.value() ? b : Formula::constant(true);
      if (b.is_const()) return b.value() ? b : fold_constants(!a);
      return implies(a, b);
  }
}

// ---------------------------------------------------------------------------
// CNF

int ClauseSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i] == name) return static_cast<int>(i) + 1;
  }
  return 0;
}

namespace {

class TseitinEncoder {
 public:
  explicit TseitinEncoder(ClauseSet& out) : out_(out) {}

  // Adds clauses forcing `f` true. `f` must be constant-free.
  void assert_true(const Formula& f) {
    if (f.kind() == Formula::Kind::kAnd) {
      assert_true(f.lhs());
      assert_true(f.rhs());
      return;
    }
    std::vector<int> clause;
    collect_disjuncts(f, clause);
    out_.clauses.push_back(std::move(clause));
  }

 private:
  void collect_disjuncts(const Formula& f, std::vector<int>& clause) {
    switch (f.kind()) {
      case Formula::Kind::kOr:
        collect_disjuncts(f.lhs(), clause);
        collect_disjuncts(f.rhs(), clause);
        return;
      case Formula::Kind::kImplies:
        clause.push_back(-literal(f.lhs()));
        collect_disjuncts(f.rhs(), clause);
        return;
      default:
        clause.push_back(literal(f));
    }
  }

  int feature_var(const Feature& name) {
    auto [it, inserted] = features_.try_emplace(name, 0);
    if (inserted) it->second = add_var(name, VarKind::kFeature);
    return it->second;
  }

  int add_var(std::string name, VarKind kind) {
    out_.variables.push_back(std::move(name));
    out_.kinds.push_back(kind);
    return static_cast<int>(out_.variables.size());
  }

  // Literal equivalent to `f`; non-literal nodes get a defined auxiliary.
  int literal(const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind()) {
      case K::kVar: return feature_var(f.name());
      case K::kNot: return -literal(f.operand());
      default: break;
    }
    int a = literal(f.lhs());
    int b = literal(f.rhs());
    int t = add_var("@aux/" + std::to_string(++aux_count_), VarKind::kAuxiliary);
    auto& cs = out_.clauses;
    switch (f.kind()) {
      case K::kAnd:
        cs.push_back({-t, a});
        cs.push_back({-t, b});
        cs.push_back({t, -a, -b});
        break;
      case K::kOr:
        cs.push_back({t, -a});
        cs.push_back({t, -b});
        cs.push_back({-t, a, b});
        break;
      default:  // kImplies
        cs.push_back({t, a});
        cs.push_back({t, -b});
        cs.push_back({-t, -a, b});
        break;
    }
    return t;
  }

  ClauseSet& out_;
  std::unordered_map<Feature, int> features_;
  int aux_count_ = 0;
};

}  // namespace

ClauseSet to_cnf(const Formula& f) {
  ClauseSet out;
  Formula folded = fold_constants(f);
  if (folded.is_const()) {
    if (!folded.value()) out.clauses.emplace_back();
    return out;
  }
  TseitinEncoder(out).assert_true(folded);
  return out;
}

}  // namespace lazydep
