#pragma once

// Incremental CDCL engine: two watched literals, first-UIP learning, VSIDS
// branching with a fixed negative polarity, Luby restarts and MiniSat-style
// solving under assumptions. Clauses can be added between solve calls and are
// never removed.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace lazydep::sat {

using Var = int;

class Lit {
 public:
  constexpr Lit() = default;
  constexpr Lit(Var v, bool negative) : code_(2 * v + (negative ? 1 : 0)) {}
  static constexpr Lit from_code(int code) {
    Lit l;
    l.code_ = code;
    return l;
  }
  static constexpr Lit from_dimacs(int d) { return d > 0 ? Lit(d - 1, false) : Lit(-d - 1, true); }

  constexpr Var var() const { return code_ >> 1; }
  constexpr bool negative() const { return code_ & 1; }
  constexpr int code() const { return code_; }
  constexpr int dimacs() const { return negative() ? -(var() + 1) : var() + 1; }
  constexpr Lit operator~() const { return from_code(code_ ^ 1); }
  constexpr bool undefined() const { return code_ < 0; }
  friend constexpr bool operator==(Lit a, Lit b) { return a.code_ == b.code_; }

 private:
  int code_ = -1;
};

enum class Result { kSat, kUnsat };

struct Stats {
  std::uint64_t solves = 0;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t conflicts = 0;
  std::uint64_t restarts = 0;
  std::uint64_t learnt_clauses = 0;
};

class Solver {
 public:
  explicit Solver(std::uint64_t seed = 0);

  Var new_var();
  int num_vars() const { return static_cast<int>(assigns_.size()); }

  // Returns false once the clause store is unsatisfiable without assumptions.
  bool add_clause(std::span<const Lit> lits);
  bool add_clause(std::initializer_list<Lit> lits) {
    return add_clause(std::span<const Lit>(lits.begin(), lits.size()));
  }

  // Assumptions hold for this call only; nothing is added to the store.
  Result solve(std::span<const Lit> assumptions = {});

  // Valid after a kSat result until the next solve.
  bool model_value(Var v) const { return model_[v]; }
  bool okay() const { return ok_; }
  const Stats& stats() const { return stats_; }

 private:
  static constexpr std::int8_t kFalse = 0;
  static constexpr std::int8_t kTrue = 1;
  static constexpr std::int8_t kUndef = 2;
  static constexpr int kNoReason = -1;

  struct Clause {
    std::vector<Lit> lits;
    bool learnt = false;
  };

  std::int8_t value(Lit p) const {
    std::int8_t a = assigns_[p.var()];
    return a == kUndef ? kUndef : static_cast<std::int8_t>(a ^ static_cast<int>(p.negative()));
  }
  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  void enqueue(Lit p, int reason);
  int propagate();
  void analyze(int conflict, std::vector<Lit>& learnt, int& backtrack_level);
  void cancel_until(int level);
  int attach(std::vector<Lit> lits, bool learnt);
  Lit pick_branch();

  void bump(Var v);
  void decay() { var_inc_ /= 0.95; }

  // Indexed max-heap over activity.
  void heap_insert(Var v);
  Var heap_pop();
  void heap_up(int pos);
  void heap_down(int pos);
  bool heap_less(Var a, Var b) const {
    return activity_[a] > activity_[b] || (activity_[a] == activity_[b] && a < b);
  }

  bool ok_ = true;
  std::vector<Clause> clauses_;
  std::vector<std::vector<int>> watches_;  // indexed by literal code
  std::vector<std::int8_t> assigns_;
  std::vector<int> level_;
  std::vector<int> reason_;
  std::vector<Lit> trail_;
  std::vector<int> trail_lim_;
  std::size_t qhead_ = 0;

  std::vector<double> activity_;
  double var_inc_ = 1.0;
  std::vector<Var> heap_;
  std::vector<int> heap_pos_;

  std::vector<char> seen_;
  std::vector<bool> model_;
  std::mt19937_64 rng_;
  Stats stats_;
};

}  // namespace lazydep::sat
