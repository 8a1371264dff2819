#include <doctest.h>

#include "lazydep/error.hpp"
#include "lazydep/formula.hpp"
#include "support/random_models.hpp"

using namespace lazydep;
using namespace lazydep::testing;

namespace {

Formula v(const char* name) { return Formula::var(name); }

// Feature-variable models of a clause set over `over`, by brute force over
// every assignment of its variables. Features of `over` that folding removed
// from the clause set are unconstrained.
std::set<FeatureSet> cnf_models(const ClauseSet& cnf, const FeatureSet& over) {
  const std::size_t n = cnf.variables.size();
  std::set<FeatureSet> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    bool sat = true;
    for (const auto& clause : cnf.clauses) {
      bool any = false;
      for (int lit : clause) {
        bool value = mask >> (std::abs(lit) - 1) & 1;
        if ((lit > 0) == value) {
          any = true;
          break;
        }
      }
      if (!any) {
        sat = false;
        break;
      }
    }
    if (!sat) continue;
    FeatureSet model;
    for (std::size_t i = 0; i < n; ++i) {
      if (cnf.kinds[i] == VarKind::kFeature && (mask >> i & 1)) model.insert(cnf.variables[i]);
    }
    out.insert(model);
  }
  FeatureSet absent;
  for (const auto& f : over) {
    if (cnf.index_of(f) == 0) absent.insert(f);
  }
  std::set<FeatureSet> widened;
  for (const auto& m : out) {
    for (const auto& extra : powerset(absent)) widened.insert(unite(m, extra));
  }
  return widened;
}

std::set<FeatureSet> formula_models(const Formula& f, const FeatureSet& over) {
  std::set<FeatureSet> out;
  for (const auto& p : powerset(over)) {
    if (eval_formula(f, p)) out.insert(p);
  }
  return out;
}

}  // namespace

TEST_CASE("feature names") {
  CHECK(is_valid_feature_name("glibc"));
  CHECK(is_valid_feature_name("sys-libs/glibc:vanilla"));
  CHECK(is_valid_feature_name("_x.y+z@1"));
  CHECK_FALSE(is_valid_feature_name(""));
  CHECK_FALSE(is_valid_feature_name("@aux/1"));
  CHECK_FALSE(is_valid_feature_name("-a"));
  CHECK_FALSE(is_valid_feature_name("a b"));
  for (const char* word : {"true", "false", "and", "or", "not", "impl"}) {
    CHECK(is_reserved_word(word));
    CHECK_FALSE(is_valid_feature_name(word));
  }
  CHECK_THROWS_AS(Formula::var("a&b"), ParseError);
}

TEST_CASE("parse the glibc constraint") {
  Formula expected =
      implies(v("glibc"), implies(v("glibc:doc"), v("txinfo")) && implies(v("glibc:v"), !v("tzdata")));
  CHECK(parse_formula(kPhiGlibc) == expected);
}

TEST_CASE("parse constants, associativity and precedence") {
  CHECK(parse_formula("true") == Formula::constant(true));
  CHECK(parse_formula("false") == Formula::constant(false));
  CHECK(parse_formula("a -> b -> c") == implies(v("a"), implies(v("b"), v("c"))));
  CHECK(parse_formula("a | b & !c") == (v("a") || (v("b") && !v("c"))));
  CHECK(parse_formula("a & b | c -> d") == implies((v("a") && v("b")) || v("c"), v("d")));
  CHECK(parse_formula("a | b | c") == ((v("a") || v("b")) || v("c")));
  CHECK(parse_formula("  a # trailing comment\n & b") == (v("a") && v("b")));
  CHECK(parse_formula("!!a") == !!v("a"));
}

TEST_CASE("parse errors carry byte offsets") {
  try {
    parse_formula("a & (b | ");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 9);
  }
  try {
    parse_formula("a & or");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
    CHECK(std::string(e.what()).find("reserved") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_formula(""), ParseError);
  CHECK_THROWS_AS(parse_formula("a b"), ParseError);
  CHECK_THROWS_AS(parse_formula("a -"), ParseError);
  CHECK_THROWS_AS(parse_formula("(a"), ParseError);
  CHECK_THROWS_AS(parse_formula("a)"), ParseError);
}

TEST_CASE("names stop before an arrow") {
  CHECK(parse_formula("a->b") == implies(v("a"), v("b")));
  CHECK(parse_formula("x-y->z") == implies(v("x-y"), v("z")));
}

TEST_CASE("evaluation of the glibc constraint") {
  Formula phi = parse_formula(kPhiGlibc);
  CHECK(eval_formula(phi, fs({"glibc", "glibc:doc", "txinfo"})));
  CHECK_FALSE(eval_formula(phi, fs({"glibc", "glibc:v", "tzdata"})));
  CHECK(eval_formula(phi, FeatureSet{}));
  Assignment a{{"glibc", true}, {"glibc:doc", true}, {"txinfo", false}};
  CHECK_FALSE(eval_formula(phi, a));
  a["txinfo"] = true;
  CHECK(eval_formula(phi, a));
}

TEST_CASE("free features") {
  CHECK(free_features(parse_formula(kPhiGlibc)) ==
        fs({"glibc", "txinfo", "tzdata", "glibc:doc", "glibc:v"}));
  CHECK(free_features(Formula::constant(true)).empty());
  CHECK(free_features(v("a")) == fs({"a"}));
}

TEST_CASE("validate rejects free variables outside the feature set") {
  CHECK_NOTHROW(validate(PropFM{fs({"a", "b", "c"}), parse_formula("a -> b")}));
  CHECK_THROWS_AS(validate(PropFM{fs({"a"}), parse_formula("a -> b")}), PreconditionError);
}

TEST_CASE("constant folding") {
  CHECK(fold_constants(parse_formula("a & true")) == v("a"));
  CHECK(fold_constants(parse_formula("a & false")) == Formula::constant(false));
  CHECK(fold_constants(parse_formula("false -> a")) == Formula::constant(true));
  CHECK(fold_constants(parse_formula("a -> false")) == !v("a"));
  CHECK(fold_constants(parse_formula("!(true | a)")) == Formula::constant(false));
  CHECK(conjoin({}) == Formula::constant(true));
  CHECK(disjoin({}) == Formula::constant(false));
  CHECK(conjoin({v("a"), v("b"), v("c")}) == ((v("a") && v("b")) && v("c")));
}

TEST_CASE("cnf of constants and literals") {
  ClauseSet f = to_cnf(Formula::constant(false));
  REQUIRE(f.clauses.size() == 1);
  CHECK(f.clauses[0].empty());
  CHECK(to_cnf(Formula::constant(true)).clauses.empty());
  ClauseSet a = to_cnf(v("a"));
  REQUIRE(a.variables == std::vector<std::string>{"a"});
  CHECK(a.clauses == std::vector<std::vector<int>>{{1}});
  CHECK(a.index_of("a") == 1);
  CHECK(a.index_of("b") == 0);
}

TEST_CASE("cnf models of the glibc constraint are its products") {
  PropFM fm = glibc_fm();
  ClauseSet cnf = to_cnf(fm.constraint);
  for (std::size_t i = 0; i < cnf.variables.size(); ++i) {
    if (cnf.kinds[i] == VarKind::kAuxiliary) CHECK(cnf.variables[i].rfind("@aux/", 0) == 0);
  }
  CHECK(cnf_models(cnf, fm.features) == formula_models(fm.constraint, fm.features));
}

TEST_CASE("property: print/parse round trip") {
  Random rng(11);
  std::vector<Feature> vars = names("v", 6);
  vars.push_back("sys-libs/glibc:doc");
  for (int i = 0; i < 1000; ++i) {
    Formula f = random_formula(rng, vars, 8);
    INFO(to_string(f));
    CHECK(parse_formula(to_string(f)) == f);
  }
}

TEST_CASE("property: cnf models equal formula models") {
  Random rng(12);
  for (int i = 0; i < 300; ++i) {
    std::vector<Feature> vars = names("v", rng.between(1, 10));
    Formula f = random_formula(rng, vars, 4);
    ClauseSet cnf = to_cnf(f);
    if (cnf.variables.size() > 18) continue;
    FeatureSet features(free_features(f));
    INFO(to_string(f));
    CHECK(cnf_models(cnf, features) == formula_models(f, features));
    std::size_t size = f.size();
    CHECK(cnf.clauses.size() <= 3 * size + 1);
  }
}

TEST_CASE("property: bindings for absent variables do not change evaluation") {
  Random rng(13);
  std::vector<Feature> vars = names("v", 5);
  for (int i = 0; i < 300; ++i) {
    Formula f = random_formula(rng, vars, 5);
    FeatureSet on = random_subset(rng, free_features(f));
    Assignment a;
    for (const auto& x : on) a[x] = true;
    bool before = eval_formula(f, a);
    a["unrelated" + std::to_string(i)] = rng.chance(0.5);
    a["w"] = true;
    CHECK(eval_formula(f, a) == before);
  }
}

TEST_CASE("parse count") {
  std::size_t before = formula_parse_count();
  parse_formula("a");
  CHECK(formula_parse_count() == before + 1);
}
