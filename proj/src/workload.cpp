#include "lazydep/workload.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <exception>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "lazydep/discovery.hpp"
#include "lazydep/error.hpp"

namespace lazydep {

namespace fs = std::filesystem;

namespace {

// mt19937_64 output is fixed by the standard; the distributions are not, so
// the bounded mappings are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

std::string pkg(std::size_t i) { return "pkg" + std::to_string(i); }
std::string flag(std::size_t i, std::size_t j) { return pkg(i) + ":f" + std::to_string(j); }

std::string join(const Configuration& c) {
  std::string out;
  for (const auto& f : c) {
    if (!out.empty()) out += ',';
    out += f;
  }
  return out;
}

// Closure of `start`, giving up once it exceeds `limit` fragments.
std::set<std::string> closure_from(const RepositoryIndex& index, std::deque<std::string> queue,
                                   std::size_t limit) {
  std::set<std::string> seen(queue.begin(), queue.end());
  while (!queue.empty() && seen.size() <= limit) {
    const IndexEntry* entry = index.find(queue.front());
    queue.pop_front();
    for (const auto& f : entry->features) {
      for (const auto& id : index.guarded_by(f)) {
        if (seen.insert(id).second) queue.push_back(id);
      }
    }
  }
  return seen;
}

DiscoveryResult run_mode(const RepositoryIndex& index, const Configuration& request,
                         const std::string& mode, std::uint64_t seed) {
  DiscoveryOptions options;
  options.seed = seed;
  if (mode == "eager") return eager_discover(index, request, options);
  if (mode == "lazy-min") options.strategy = CutStrategy::kMinimum;
  return lazy_discover(index, request, options);
}

}  // namespace

std::vector<Fragment> generate_fragments(const GenSpec& spec) {
  if (spec.features_per_fragment == 0) throw PreconditionError("features_per_fragment must be >= 1");
  if (!(spec.share_prob >= 0.0 && spec.share_prob <= 1.0)) {
    throw PreconditionError("share_prob must lie in [0, 1]");
  }
  Rng rng(spec.seed);
  const std::size_t n = spec.fragments;
  const std::size_t flags = spec.features_per_fragment - 1;
  std::vector<Fragment> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    PropFM fm;
    fm.features.insert(pkg(i));
    for (std::size_t j = 1; j <= flags; ++j) fm.features.insert(flag(i, j));

    const std::size_t later = n - i - 1;
    std::vector<std::size_t> targets;
    while (targets.size() < std::min(spec.dep_out_degree, later)) {
      std::size_t t = i + 1 + rng.below(later);
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }

    auto ref = [&](std::size_t t) {
      fm.features.insert(pkg(t));
      Formula r = Formula::var(pkg(t));
      if (flags > 0 && rng.unit() < spec.share_prob) {
        std::string shared = flag(t, 1 + rng.below(flags));
        fm.features.insert(shared);
        r = r && Formula::var(shared);
      }
      return r;
    };

    std::vector<Formula> parts;
    for (std::size_t t : targets) {
      std::size_t kind = flags == 0 ? 0 : rng.below(4);
      if (kind == 0) {
        parts.push_back(ref(t));
        continue;
      }
      Formula cond = Formula::var(flag(i, 1 + rng.below(flags)));
      if (kind == 1) {
        parts.push_back(implies(cond, ref(t)));
      } else if (kind == 2) {
        fm.features.insert(pkg(t));
        parts.push_back(implies(cond, !Formula::var(pkg(t))));
      } else {
        std::size_t u = i + 1 + rng.below(later);
        Formula alt = u == t ? ref(t) : ref(t) || ref(u);
        parts.push_back(implies(cond, alt));
      }
    }
    fm.constraint = implies(Formula::var(pkg(i)), conjoin(parts));
    out.push_back(make_fragment(pkg(i), std::move(fm)));
  }
  return out;
}

RepositoryIndex run_generate(const GenSpec& spec, const fs::path& out) {
  return write_repository(out, generate_fragments(spec));
}

RepositoryIndex generate_chain_repository(std::size_t depth, std::size_t total, const fs::path& out) {
  if (total < depth + 1) throw PreconditionError("chain needs at least depth + 1 fragments");
  std::vector<Fragment> fragments;
  for (std::size_t i = 0; i <= depth; ++i) {
    PropFM fm;
    fm.features.insert(pkg(i));
    Formula body = Formula::constant(true);
    if (i < depth) {
      fm.features.insert(pkg(i + 1));
      body = Formula::var(pkg(i + 1));
    }
    fm.constraint = implies(Formula::var(pkg(i)), body);
    fragments.push_back(make_fragment(pkg(i), std::move(fm)));
  }
  for (std::size_t i = depth + 1; i < total; ++i) {
    PropFM fm{{pkg(i), flag(i, 1), flag(i, 2)}, Formula::constant(true)};
    fm.constraint = implies(Formula::var(pkg(i)),
                            implies(Formula::var(flag(i, 1)), Formula::var(flag(i, 2))));
    fragments.push_back(make_fragment(pkg(i), std::move(fm)));
  }
  return write_repository(out, fragments);
}

std::set<std::string> dependency_closure(const RepositoryIndex& index, const Configuration& request) {
  std::deque<std::string> start;
  for (const auto& entry : index.entries()) {
    if (!entry.guard || request.contains(*entry.guard)) start.push_back(entry.id);
  }
  return closure_from(index, std::move(start), index.size());
}

std::vector<Configuration> make_problems(const RepositoryIndex& index, std::size_t count,
                                         std::size_t max_closure, std::uint64_t seed) {
  struct Candidate {
    Feature guard;
    std::set<std::string> closure;
  };
  std::deque<std::string> unguarded;
  for (const auto& entry : index.entries()) {
    if (!entry.guard) unguarded.push_back(entry.id);
  }
  std::vector<Candidate> pool;
  for (const auto& entry : index.entries()) {
    if (!entry.guard) continue;
    std::deque<std::string> start = unguarded;
    start.push_back(entry.id);
    auto closure = closure_from(index, std::move(start), max_closure);
    if (closure.size() <= max_closure) pool.push_back({*entry.guard, std::move(closure)});
  }
  if (count > 0 && pool.empty()) {
    throw PreconditionError("no guard feature has a closure of at most " +
                            std::to_string(max_closure) + " fragments");
  }

  Rng rng(seed);
  std::vector<Configuration> problems;
  for (std::size_t p = 0; p < count; ++p) {
    const std::size_t want = 1 + rng.below(10);
    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    Configuration request;
    std::set<std::string> closure;
    for (std::size_t idx : order) {
      if (request.size() == want) break;
      std::set<std::string> merged = closure;
      merged.insert(pool[idx].closure.begin(), pool[idx].closure.end());
      if (merged.size() > max_closure) continue;
      closure = std::move(merged);
      request.insert(pool[idx].guard);
    }
    problems.push_back(std::move(request));
  }
  return problems;
}

std::vector<Configuration> read_problems(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw RepositoryError("cannot read " + path.string());
  std::vector<Configuration> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    Configuration c;
    std::istringstream fields(line);
    for (std::string f; std::getline(fields, f, ',');) {
      auto b = f.find_first_not_of(" \t");
      if (b == std::string::npos) continue;
      f = f.substr(b, f.find_last_not_of(" \t") - b + 1);
      validate_feature_name(f);
      c.insert(f);
    }
    out.push_back(std::move(c));
  }
  return out;
}

void write_problems(const fs::path& path, const std::vector<Configuration>& problems) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  for (const auto& c : problems) out << join(c) << '\n';
  if (!out) throw RepositoryError("cannot write " + path.string());
}

void run_bench(const RepositoryIndex& index, const std::vector<Configuration>& problems,
               const std::vector<std::string>& modes, std::ostream& out, std::size_t jobs,
               std::uint64_t seed) {
  for (const auto& mode : modes) {
    if (mode != "lazy" && mode != "lazy-min" && mode != "eager") {
      throw PreconditionError("unknown mode '" + mode + "'");
    }
  }
  out << kCsvHeader << '\n';
  const std::size_t tasks = problems.size() * modes.size();
  std::vector<std::optional<std::string>> rows(tasks);
  std::size_t flushed = 0;
  std::mutex mu;
  std::exception_ptr failure;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    while (true) {
      const std::size_t task = next.fetch_add(1);
      if (task >= tasks) return;
      const std::size_t p = task / modes.size();
      const std::string& mode = modes[task % modes.size()];
      std::string row;
      try {
        row = to_csv_row(std::to_string(p + 1), mode, run_mode(index, problems[p], mode, seed));
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = tasks;
        return;
      }
      std::lock_guard lock(mu);
      rows[task] = std::move(row);
      while (flushed < tasks && rows[flushed]) {
        out << *rows[flushed] << '\n';
        rows[flushed].reset();
        ++flushed;
      }
    }
  };

  jobs = std::max<std::size_t>(1, std::min(jobs, tasks));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  out.flush();
}

}  // namespace lazydep
