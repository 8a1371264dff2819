#include <doctest.h>

#include <sstream>

#include "lazydep/discovery.hpp"
#include "lazydep/error.hpp"
#include "lazydep/workload.hpp"
#include "support/random_models.hpp"

using namespace lazydep;
using namespace lazydep::testing;

namespace {

const Configuration kConflict = {"glibc", "glibc:v", "g-shell", "g-shell:nm"};

}  // namespace

TEST_CASE("lazy discovery on the demo repository") {
  RepositoryIndex index = load_repository(demo_repo());
  DiscoveryOptions debug;
  debug.debug = true;

  DiscoveryResult none = lazy_discover(index, kConflict, debug);
  CHECK_FALSE(none.found());
  CHECK(none.violations.empty());
  CHECK(verify_result(index, kConflict, none) == Verification::kPassed);

  DiscoveryResult r = lazy_discover(index, fs({"glibc", "tzdata"}), debug);
  REQUIRE(r.found());
  CHECK(is_subset(fs({"glibc", "tzdata"}), *r.product));
  CHECK(verify_result(index, fs({"glibc", "tzdata"}), r) == Verification::kPassed);
  CHECK(r.violations.empty());
  // g-shell is never selected, so its fragment stays unloaded.
  CHECK(r.stats.fragments_loaded == 1);
  CHECK(r.stats.features_loaded == 5);
  CHECK(r.stats.total_features == 7);
  REQUIRE_FALSE(r.trace.empty());
  CHECK(is_subset(*r.trace.back().solution, r.trace.back().examined));
  CHECK(check_invariants(r.trace.back(), fs({"glibc", "tzdata"}), nullptr, true).empty());
  // The seeded solver is deterministic; this pins its answer.
  CHECK(*r.product == fs({"glibc", "tzdata"}));
}

TEST_CASE("eager discovery on the demo repository") {
  RepositoryIndex index = load_repository(demo_repo());
  DiscoveryResult none = eager_discover(index, kConflict);
  CHECK_FALSE(none.found());
  CHECK(none.stats.features_loaded == 7);
  CHECK(none.stats.features_loaded == none.stats.total_features);
  DiscoveryResult r = eager_discover(index, fs({"glibc", "tzdata"}));
  CHECK(r.found() == lazy_discover(index, fs({"glibc", "tzdata"})).found());
}

TEST_CASE("empty requests") {
  RepositoryIndex index = load_repository(demo_repo());
  DiscoveryResult r = lazy_discover(index, {});
  REQUIRE(r.found());
  CHECK(r.product->empty());
  CHECK(r.stats.iterations <= 1);

  TempDir dir;
  RepositoryIndex empty = write_repository(dir.path(), std::vector<Fragment>{});
  DiscoveryResult e = eager_discover(empty, {});
  REQUIRE(e.found());
  CHECK(e.product->empty());
}

TEST_CASE("unknown request features are an error") {
  RepositoryIndex index = load_repository(demo_repo());
  try {
    lazy_discover(index, fs({"glibc", "nope", "zzz"}));
    FAIL("expected UnknownFeatureError");
  } catch (const UnknownFeatureError& e) {
    CHECK(e.names() == std::vector<std::string>{"nope", "zzz"});
  }
  CHECK_THROWS_AS(eager_discover(index, fs({"nope"})), UnknownFeatureError);
}

TEST_CASE("verification rejects a product missing the request") {
  RepositoryIndex index = load_repository(demo_repo());
  DiscoveryResult fake;
  fake.product = fs({"g-shell"});
  CHECK(verify_result(index, fs({"glibc"}), fake) == Verification::kFailed);
  DiscoveryResult wrong_none;
  CHECK(verify_result(index, fs({"glibc"}), wrong_none) == Verification::kFailed);
}

TEST_CASE("invariant checks flag corrupted states") {
  DiscoveryState s;
  s.examined = fs({"a"});
  CHECK(check_invariants(s, fs({"a"})).empty());
  CHECK_FALSE(check_invariants(s, fs({"a", "b"})).empty());

  DiscoveryState prev = s;
  prev.examined = fs({"a", "c"});
  prev.loaded = {"x"};
  auto v = check_invariants(s, fs({"a"}), &prev);
  CHECK(v.size() == 2);

  s.solution = fs({"a", "d"});
  CHECK(check_invariants(s, fs({"a"}), nullptr, false).empty());
  CHECK(check_invariants(s, fs({"a"}), nullptr, true).size() == 1);
}

TEST_CASE("csv rows") {
  DiscoveryResult r;
  r.product = Product{};
  r.stats = DiscoveryStats{2, 3, 4, 5, 6, 1.5};
  CHECK(to_csv_row("7", "lazy", r) == "7,lazy,true,2,3,4,5,6,1.500");
  CHECK(std::string(kCsvHeader) ==
        "problem_id,mode,found,iterations,fragments_loaded,features_loaded,total_features,"
        "solver_calls,wall_ms");
}

TEST_CASE("dimacs dump from a discovery run") {
  RepositoryIndex index = load_repository(demo_repo());
  std::ostringstream out;
  DiscoveryOptions options;
  options.dump_cnf = &out;
  lazy_discover(index, fs({"glibc"}), options);
  CHECK(out.str().find("p cnf") != std::string::npos);
}

TEST_CASE("chain repository loads exactly the chain") {
  TempDir dir;
  RepositoryIndex index = generate_chain_repository(10, 100, dir.path());
  DiscoveryResult r = lazy_discover(index, fs({"pkg0"}));
  REQUIRE(r.found());
  CHECK(r.stats.fragments_loaded == 11);
  CHECK(eager_discover(index, fs({"pkg0"})).stats.fragments_loaded == 100);
}

TEST_CASE("property: lazy, eager and the oracle agree") {
  Random rng(51);
  for (int i = 0; i < 120; ++i) {
    TempDir dir;
    RepositoryIndex index = write_repository(dir.path(), random_repository(rng));
    Configuration c = random_subset(rng, index.all_features(), 0.2);
    DiscoveryOptions options;
    options.debug = true;
    options.seed = i;
    DiscoveryResult lazy = lazy_discover(index, c, options);
    DiscoveryResult eager = eager_discover(index, c, options);
    auto expected = oracle_discover(index, c);
    CHECK(lazy.found() == expected.has_value());
    CHECK(eager.found() == expected.has_value());
    CHECK(verify_result(index, c, lazy) == Verification::kPassed);
    CHECK(verify_result(index, c, eager) == Verification::kPassed);
    CHECK(lazy.violations.empty());
    CHECK(lazy.stats.iterations <= lazy.stats.total_features + 1);
    CHECK(lazy.stats.features_loaded <= eager.stats.features_loaded);

    options.strategy = CutStrategy::kMinimum;
    DiscoveryResult minimum = lazy_discover(index, c, options);
    CHECK(minimum.found() == expected.has_value());
    CHECK(verify_result(index, c, minimum) == Verification::kPassed);
    CHECK(minimum.violations.empty());
  }
}

TEST_CASE("lazy loads strictly less when an unreachable guarded fragment exists") {
  TempDir dir;
  std::vector<Fragment> frags{
      make_fragment("a", PropFM{fs({"a", "b"}), parse_formula("a -> b")}),
      make_fragment("b", PropFM{fs({"b"}), parse_formula("b -> true")}),
      make_fragment("z", PropFM{fs({"z", "y"}), parse_formula("z -> y")})};
  RepositoryIndex index = write_repository(dir.path(), frags);
  DiscoveryResult lazy = lazy_discover(index, fs({"a"}));
  DiscoveryResult eager = eager_discover(index, fs({"a"}));
  CHECK(lazy.stats.features_loaded < eager.stats.features_loaded);
  CHECK(lazy.stats.fragments_loaded == 2);
}
