// lazydep: discovery runs, oracle checks, repository generation, benchmarks
// and translation of package declarations.
//
// Exit codes: 0 product found (or command succeeded), 1 no product,
// 2 usage or repository error, 3 a debug check failed.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lazydep/depparse.hpp"
#include "lazydep/discovery.hpp"
#include "lazydep/error.hpp"
#include "lazydep/workload.hpp"

namespace {

using namespace lazydep;
using nlohmann::json;

constexpr int kFound = 0;
constexpr int kNoProduct = 1;
constexpr int kUsage = 2;
constexpr int kCheckFailed = 3;

Configuration parse_request(const std::string& text) {
  Configuration c;
  std::istringstream in(text);
  for (std::string f; std::getline(in, f, ',');) {
    auto b = f.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    f = f.substr(b, f.find_last_not_of(" \t") - b + 1);
    validate_feature_name(f);
    c.insert(f);
  }
  return c;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("LAZYDEP_SEED");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw Error(std::string("LAZYDEP_SEED is not an integer: ") + env);
  return v;
}

json stats_json(const DiscoveryStats& s) {
  return json{{"iterations", s.iterations},           {"fragments_loaded", s.fragments_loaded},
              {"features_loaded", s.features_loaded}, {"total_features", s.total_features},
              {"solver_calls", s.solver_calls},       {"wall_ms", s.wall_ms}};
}

void print_product(const std::optional<Product>& product) {
  if (product) {
    for (const auto& f : *product) std::cout << f << '\n';
  } else {
    std::cerr << "no product contains the request\n";
  }
}

struct DiscoverArgs {
  std::string repo;
  std::string request;
  std::string mode = "lazy";
  bool verify = false;
  bool debug = false;
  std::string dump_cnf;
  std::uint64_t seed = 0;
  std::string stats;
  bool json = false;
};

int run_discover(const DiscoverArgs& a) {
  RepositoryIndex index = load_repository(a.repo);
  Configuration request = parse_request(a.request);
  DiscoveryOptions options;
  options.seed = a.seed;
  options.debug = a.debug;
  std::ofstream cnf;
  if (!a.dump_cnf.empty()) {
    cnf.open(a.dump_cnf, std::ios::binary | std::ios::trunc);
    if (!cnf) throw RepositoryError("cannot write " + a.dump_cnf);
    options.dump_cnf = &cnf;
  }
  if (a.mode == "lazy-min") options.strategy = CutStrategy::kMinimum;
  DiscoveryResult result = a.mode == "eager" ? eager_discover(index, request, options)
                                             : lazy_discover(index, request, options);

  int code = result.found() ? kFound : kNoProduct;
  if (a.verify) {
    switch (verify_result(index, request, result)) {
      case Verification::kPassed:
        break;
      case Verification::kSkipped:
        std::cerr << "warning: repository exceeds the enumeration cap, verification skipped\n";
        break;
      case Verification::kFailed:
        std::cerr << "error: result disagrees with the extensional oracle\n";
        code = kCheckFailed;
        break;
    }
  }
  if (a.debug) {
    for (const auto& v : result.violations) std::cerr << "invariant: " << v << '\n';
    if (result.stats.iterations > result.stats.total_features + 1) {
      std::cerr << "invariant: iteration bound exceeded\n";
      code = kCheckFailed;
    }
    if (!result.violations.empty()) code = kCheckFailed;
  }
  if (!a.stats.empty()) {
    std::ofstream out(a.stats, std::ios::binary | std::ios::trunc);
    out << kCsvHeader << '\n' << to_csv_row("1", a.mode, result) << '\n';
    if (!out) throw RepositoryError("cannot write " + a.stats);
  }
  if (a.json) {
    json j{{"found", result.found()}, {"product", nullptr}, {"stats", stats_json(result.stats)}};
    if (result.product) j["product"] = *result.product;
    std::cout << j.dump() << '\n';
  } else {
    print_product(result.product);
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lazy product discovery over feature-model fragment repositories"};
  app.require_subcommand(1);

  DiscoverArgs d;
  auto* discover = app.add_subcommand("discover", "Find a product containing the request");
  discover->add_option("--repo", d.repo, "Repository directory")->required();
  discover->add_option("--request", d.request, "Comma-separated features")->required();
  discover->add_option("--mode", d.mode, "lazy, lazy-min or eager")
      ->check(CLI::IsMember({"lazy", "lazy-min", "eager"}));
  discover->add_flag("--verify-oracle", d.verify, "Check the answer by enumeration");
  discover->add_flag("--debug-invariants", d.debug, "Check loop invariants every iteration");
  discover->add_option("--dump-cnf", d.dump_cnf, "Write the clause store as DIMACS");
  auto* discover_seed = discover->add_option("--seed", d.seed, "Solver seed");
  discover->add_option("--stats", d.stats, "Write a one-row stats CSV");
  discover->add_flag("--json", d.json, "Emit {found, product, stats}");

  std::string oracle_repo;
  std::string oracle_request;
  auto* oracle = app.add_subcommand("oracle", "Extensional answer (small repositories only)");
  oracle->add_option("--repo", oracle_repo, "Repository directory")->required();
  oracle->add_option("--request", oracle_request, "Comma-separated features")->required();

  GenSpec spec;
  std::string gen_out;
  std::size_t chain_depth = 0;
  std::string problems_path;
  std::size_t problem_count = 50;
  std::size_t max_closure = 60;
  std::uint64_t problem_seed = 1;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic repository");
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--fragments", spec.fragments, "Fragment count");
  gen->add_option("--features-per", spec.features_per_fragment, "Features per fragment");
  gen->add_option("--out-degree", spec.dep_out_degree, "Dependencies per fragment");
  gen->add_option("--share", spec.share_prob, "Probability of requiring a target's flag")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--seed", spec.seed, "Generator seed");
  auto* chain = gen->add_option("--chain-depth", chain_depth,
                                "Generate a chain pkg0 -> .. -> pkg<d> instead");
  gen->add_option("--problems", problems_path, "Also write a problems file");
  gen->add_option("--count", problem_count, "Number of problems");
  gen->add_option("--max-closure", max_closure, "Closure bound per problem");
  gen->add_option("--problem-seed", problem_seed, "Problem sampling seed");

  std::string bench_repo;
  std::string bench_problems;
  std::string bench_modes = "lazy,eager";
  std::string bench_out;
  std::size_t jobs = 1;
  std::uint64_t bench_seed = 0;
  auto* bench = app.add_subcommand("bench", "Run problems and write CSV rows");
  bench->add_option("--repo", bench_repo, "Repository directory")->required();
  bench->add_option("--problems", bench_problems, "Problems file")->required();
  bench->add_option("--modes", bench_modes, "Comma-separated modes");
  bench->add_option("--out", bench_out, "CSV file (default stdout)");
  bench->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* bench_seed_opt = bench->add_option("--seed", bench_seed, "Solver seed");

  std::string pkg_dir;
  std::string translate_out;
  auto* translate = app.add_subcommand("translate", "Translate .pkg files into a repository");
  translate->add_option("--pkgs", pkg_dir, "Directory of .pkg files")->required();
  translate->add_option("--out", translate_out, "Output repository")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsage;
  }

  try {
    if (discover->parsed()) {
      if (discover_seed->count() == 0) d.seed = default_seed();
      return run_discover(d);
    }
    if (oracle->parsed()) {
      RepositoryIndex index = load_repository(oracle_repo);
      auto product = oracle_discover(index, parse_request(oracle_request));
      print_product(product);
      return product ? kFound : kNoProduct;
    }
    if (gen->parsed()) {
      RepositoryIndex index = chain->count() > 0
                                  ? generate_chain_repository(chain_depth, spec.fragments, gen_out)
                                  : run_generate(spec, gen_out);
      if (!problems_path.empty()) {
        write_problems(problems_path, make_problems(index, problem_count, max_closure, problem_seed));
      }
      std::cerr << index.size() << " fragments, " << index.total_features() << " features\n";
      return 0;
    }
    if (bench->parsed()) {
      if (bench_seed_opt->count() == 0) bench_seed = default_seed();
      RepositoryIndex index = load_repository(bench_repo);
      auto problems = read_problems(bench_problems);
      auto modes = split_list(bench_modes);
      if (bench_out.empty()) {
        run_bench(index, problems, modes, std::cout, jobs, bench_seed);
      } else {
        std::ofstream out(bench_out, std::ios::binary | std::ios::trunc);
        if (!out) throw RepositoryError("cannot write " + bench_out);
        run_bench(index, problems, modes, out, jobs, bench_seed);
      }
      return 0;
    }
    if (translate->parsed()) {
      RepositoryIndex index = translate_directory(pkg_dir, translate_out);
      std::cerr << index.size() << " fragments written\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
