#include <doctest.h>

#include <sstream>

#include "lazydep/sat.hpp"
#include "lazydep/solver.hpp"
#include "support/random_models.hpp"

using namespace lazydep;
using namespace lazydep::testing;
using sat::Lit;

namespace {

using Cnf = std::vector<std::vector<int>>;

bool brute_force_sat(int vars, const Cnf& cnf, const std::vector<int>& assumptions) {
  for (std::uint32_t mask = 0; mask < (1u << vars); ++mask) {
    auto holds = [&](int lit) { return ((mask >> (std::abs(lit) - 1)) & 1) == (lit > 0 ? 1u : 0u); };
    bool ok = std::all_of(assumptions.begin(), assumptions.end(), holds);
    for (const auto& clause : cnf) {
      if (!ok) break;
      ok = std::any_of(clause.begin(), clause.end(), holds);
    }
    if (ok) return true;
  }
  return false;
}

Cnf random_cnf(Random& rng, int vars, int clauses) {
  Cnf out;
  for (int i = 0; i < clauses; ++i) {
    std::vector<int> c;
    for (std::size_t k = rng.between(1, 3); k > 0; --k) {
      int v = static_cast<int>(rng.between(1, vars));
      c.push_back(rng.chance(0.5) ? v : -v);
    }
    out.push_back(c);
  }
  return out;
}

std::vector<Lit> lits(const std::vector<int>& ds) {
  std::vector<Lit> out;
  for (int d : ds) out.push_back(Lit::from_dimacs(d));
  return out;
}

}  // namespace

TEST_CASE("literal encoding") {
  Lit a(3, false);
  CHECK(a.var() == 3);
  CHECK_FALSE(a.negative());
  CHECK((~a).negative());
  CHECK(a.dimacs() == 4);
  CHECK((~a).dimacs() == -4);
  CHECK(Lit::from_dimacs(-4) == ~a);
  CHECK(Lit().undefined());
}

TEST_CASE("empty and trivial problems") {
  sat::Solver s;
  CHECK(s.solve() == sat::Result::kSat);
  auto x = s.new_var();
  CHECK(s.add_clause({Lit(x, false)}));
  CHECK(s.solve() == sat::Result::kSat);
  CHECK(s.model_value(x));
  CHECK_FALSE(s.add_clause({Lit(x, true)}));
  CHECK(s.solve() == sat::Result::kUnsat);
  CHECK_FALSE(s.okay());
}

TEST_CASE("empty clause") {
  sat::Solver s;
  CHECK_FALSE(s.add_clause(std::span<const Lit>{}));
  CHECK(s.solve() == sat::Result::kUnsat);
}

TEST_CASE("assumptions do not persist") {
  sat::Solver s;
  auto a = s.new_var();
  auto b = s.new_var();
  s.add_clause({Lit(a, true), Lit(b, true)});
  std::vector<Lit> both{Lit(a, false), Lit(b, false)};
  CHECK(s.solve(both) == sat::Result::kUnsat);
  CHECK(s.okay());
  std::vector<Lit> one{Lit(a, false)};
  CHECK(s.solve(one) == sat::Result::kSat);
  CHECK(s.model_value(a));
  CHECK_FALSE(s.model_value(b));
  CHECK(s.solve() == sat::Result::kSat);
}

TEST_CASE("unconstrained variables default to false") {
  sat::Solver s;
  for (int i = 0; i < 5; ++i) s.new_var();
  s.add_clause({Lit(0, false), Lit(1, false)});
  REQUIRE(s.solve() == sat::Result::kSat);
  int on = 0;
  for (int i = 0; i < 5; ++i) on += s.model_value(i);
  CHECK(on == 1);
}

TEST_CASE("pigeonhole 6 into 5 is unsatisfiable") {
  sat::Solver s;
  const int pigeons = 6;
  const int holes = 5;
  auto var = [&](int p, int h) { return p * holes + h; };
  for (int i = 0; i < pigeons * holes; ++i) s.new_var();
  for (int p = 0; p < pigeons; ++p) {
    std::vector<Lit> c;
    for (int h = 0; h < holes; ++h) c.push_back(Lit(var(p, h), false));
    s.add_clause(c);
  }
  for (int h = 0; h < holes; ++h) {
    for (int p = 0; p < pigeons; ++p) {
      for (int q = p + 1; q < pigeons; ++q) s.add_clause({Lit(var(p, h), true), Lit(var(q, h), true)});
    }
  }
  CHECK(s.solve() == sat::Result::kUnsat);
  CHECK(s.stats().conflicts > 0);
}

TEST_CASE("property: engine agrees with brute force, incrementally and under assumptions") {
  Random rng(31);
  for (int round = 0; round < 300; ++round) {
    const int vars = static_cast<int>(rng.between(1, 12));
    sat::Solver s(round);
    for (int i = 0; i < vars; ++i) s.new_var();
    Cnf so_far;
    for (int step = 0; step < 3; ++step) {
      Cnf more = random_cnf(rng, vars, static_cast<int>(rng.between(1, 3 * vars)));
      for (const auto& c : more) {
        s.add_clause(lits(c));
        so_far.push_back(c);
      }
      std::vector<int> assume;
      for (std::size_t k = rng.between(0, 3); k > 0; --k) {
        int v = static_cast<int>(rng.between(1, vars));
        assume.push_back(rng.chance(0.5) ? v : -v);
      }
      const bool expected = brute_force_sat(vars, so_far, assume);
      std::vector<Lit> a = lits(assume);
      const bool got = s.solve(a) == sat::Result::kSat;
      REQUIRE(got == expected);
      if (got) {
        for (int d : assume) CHECK(s.model_value(std::abs(d) - 1) == (d > 0));
        for (const auto& c : so_far) {
          CHECK(std::any_of(c.begin(), c.end(),
                            [&](int d) { return s.model_value(std::abs(d) - 1) == (d > 0); }));
        }
      }
    }
  }
}

TEST_CASE("deterministic for a fixed seed") {
  Random rng(32);
  Cnf cnf = random_cnf(rng, 40, 150);
  auto run = [&] {
    sat::Solver s(7);
    for (int i = 0; i < 40; ++i) s.new_var();
    for (const auto& c : cnf) s.add_clause(lits(c));
    std::vector<bool> model;
    if (s.solve() == sat::Result::kSat) {
      for (int i = 0; i < 40; ++i) model.push_back(s.model_value(i));
    }
    return model;
  };
  CHECK(run() == run());
}

// ---------------------------------------------------------------------------
// Sessions

TEST_CASE("session over glibc") {
  SolverSession s;
  PropFM fm = glibc_fm();
  s.assert_fm(fm);
  auto p = s.select(fm.features, fs({"glibc", "glibc:doc"}));
  REQUIRE(p);
  CHECK(p->contains("txinfo"));
  CHECK(eval_formula(fm.constraint, *p));
}

TEST_CASE("session edge cases") {
  SolverSession empty;
  empty.assert_fm(PropFM{{}, Formula::constant(true)});
  CHECK(empty.stats().clauses_added == 0);
  auto p = empty.select({}, {});
  REQUIRE(p);
  CHECK(p->empty());

  SolverSession bottom;
  bottom.assert_fm(PropFM{fs({"a"}), Formula::constant(false)});
  CHECK_FALSE(bottom.select(fs({"a"}), {}));
  CHECK_FALSE(bottom.select(fs({"a"}), fs({"a"})));
}

TEST_CASE("session over glibc and g-shell") {
  SolverSession s;
  s.assert_fm(glibc_fm());
  s.assert_fm(gshell_fm());
  FeatureSet all = unite(glibc_fm().features, gshell_fm().features);
  CHECK_FALSE(s.select(all, fs({"glibc", "glibc:v", "g-shell", "g-shell:nm"})));
  auto p = s.select(all, fs({"glibc", "tzdata"}));
  REQUIRE(p);
  CHECK(is_subset(fs({"glibc", "tzdata"}), *p));
  CHECK(compose_ext(m_glibc(), m_gshell()).products.contains(*p));
  CHECK(s.stats().solve_calls == 2);
}

TEST_CASE("dimacs dump names features") {
  SolverSession s;
  s.assert_fm(gshell_fm());
  std::ostringstream out;
  s.dump_dimacs(out);
  std::string text = out.str();
  CHECK(text.find("c feature") != std::string::npos);
  CHECK(text.find("g-shell:nm") != std::string::npos);
  CHECK(text.find("p cnf") != std::string::npos);
}

TEST_CASE("property: select agrees with enumeration") {
  Random rng(33);
  for (int i = 0; i < 200; ++i) {
    std::vector<Feature> vars = names("v", rng.between(1, 8));
    PropFM fm{FeatureSet(vars.begin(), vars.end()), random_formula(rng, vars, 4)};
    ExtFM m = enumerate_products(fm);
    Configuration c = random_subset(rng, fm.features, 0.3);
    SolverSession s(i);
    s.assert_fm(fm);
    auto p = s.select(fm.features, c);
    CHECK(p.has_value() == is_pre_product(m, c));
    if (p) {
      CHECK(m.products.contains(*p));
      CHECK(is_subset(c, *p));
      for (const auto& f : *p) CHECK(f.front() != '@');
    }
  }
}

TEST_CASE("property: incremental session equals fresh composed session") {
  Random rng(34);
  for (int i = 0; i < 200; ++i) {
    auto family = random_family(rng, 2, 5, 7);
    if (family.size() < 2) family.push_back(random_family(rng, 1, 5, 7).front());
    FeatureSet all = unite(family[0].features, family[1].features);
    Configuration c = random_subset(rng, all, 0.3);

    SolverSession inc(i);
    inc.assert_fm(family[0]);
    bool first = inc.select(all, c).has_value();
    (void)first;
    inc.assert_fm(family[1]);
    bool incremental = inc.select(all, c).has_value();

    std::vector<CutFM> cuts{CutFM{family[0], false}, CutFM{family[1], false}};
    SolverSession fresh(i);
    fresh.assert_fm(compose_symbolic(cuts));
    CHECK(incremental == fresh.select(all, c).has_value());
  }
}
