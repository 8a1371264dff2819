#include "lazydep/sat.hpp"

#include <algorithm>

namespace lazydep::sat {

namespace {

// Luby sequence 1 1 2 1 1 2 4 ...
double luby(double y, int x) {
  int size = 1;
  int seq = 0;
  while (size < x + 1) {
    seq++;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    seq--;
    x = x % size;
  }
  double r = 1;
  for (int i = 0; i < seq; ++i) r *= y;
  return r;
}

constexpr double kRestartBase = 100;

}  // namespace

Solver::Solver(std::uint64_t seed) : rng_(seed) {}

Var Solver::new_var() {
  Var v = num_vars();
  assigns_.push_back(kUndef);
  level_.push_back(0);
  reason_.push_back(kNoReason);
  // Tiny seeded jitter breaks activity ties reproducibly.
  activity_.push_back(std::uniform_real_distribution<double>(0.0, 1e-5)(rng_));
  heap_pos_.push_back(-1);
  seen_.push_back(0);
  watches_.emplace_back();
  watches_.emplace_back();
  heap_insert(v);
  return v;
}

bool Solver::add_clause(std::span<const Lit> input) {
  if (!ok_) return false;
  std::vector<Lit> lits(input.begin(), input.end());
  std::sort(lits.begin(), lits.end(), [](Lit a, Lit b) { return a.code() < b.code(); });
  std::vector<Lit> kept;
  Lit prev;
  for (Lit p : lits) {
    if (value(p) == kTrue || (!prev.undefined() && p == ~prev)) return true;
    if (value(p) == kFalse || p == prev) continue;
    kept.push_back(p);
    prev = p;
  }
  if (kept.empty()) {
    ok_ = false;
    return false;
  }
  if (kept.size() == 1) {
    enqueue(kept[0], kNoReason);
    ok_ = propagate() == kNoReason;
    return ok_;
  }
  attach(std::move(kept), false);
  return true;
}

int Solver::attach(std::vector<Lit> lits, bool learnt) {
  int idx = static_cast<int>(clauses_.size());
  watches_[lits[0].code()].push_back(idx);
  watches_[lits[1].code()].push_back(idx);
  clauses_.push_back(Clause{std::move(lits), learnt});
  return idx;
}

void Solver::enqueue(Lit p, int reason) {
  assigns_[p.var()] = p.negative() ? kFalse : kTrue;
  level_[p.var()] = decision_level();
  reason_[p.var()] = reason;
  trail_.push_back(p);
}

int Solver::propagate() {
  while (qhead_ < trail_.size()) {
    Lit p = trail_[qhead_++];
    Lit false_lit = ~p;
    std::vector<int>& ws = watches_[false_lit.code()];
    stats_.propagations++;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < ws.size()) {
      int ci = ws[i++];
      std::vector<Lit>& c = clauses_[ci].lits;
      if (c[0] == false_lit) std::swap(c[0], c[1]);
      if (value(c[0]) == kTrue) {
        ws[j++] = ci;
        continue;
      }
      bool moved = false;
      for (std::size_t k = 2; k < c.size(); ++k) {
        if (value(c[k]) != kFalse) {
          std::swap(c[1], c[k]);
          watches_[c[1].code()].push_back(ci);
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[j++] = ci;
      if (value(c[0]) == kFalse) {
        while (i < ws.size()) ws[j++] = ws[i++];
        ws.resize(j);
        qhead_ = trail_.size();
        return ci;
      }
      enqueue(c[0], ci);
    }
    ws.resize(j);
  }
  return kNoReason;
}

void Solver::analyze(int conflict, std::vector<Lit>& learnt, int& backtrack_level) {
  learnt.clear();
  learnt.emplace_back();  // slot for the asserting literal
  int pending = 0;
  Lit p;
  int index = static_cast<int>(trail_.size()) - 1;
  do {
    const std::vector<Lit>& c = clauses_[conflict].lits;
    for (std::size_t k = p.undefined() ? 0 : 1; k < c.size(); ++k) {
      Lit q = c[k];
      Var v = q.var();
      if (seen_[v] || level_[v] == 0) continue;
      seen_[v] = 1;
      bump(v);
      if (level_[v] >= decision_level()) {
        pending++;
      } else {
        learnt.push_back(q);
      }
    }
    while (!seen_[trail_[index].var()]) index--;
    p = trail_[index--];
    conflict = reason_[p.var()];
    seen_[p.var()] = 0;
    pending--;
  } while (pending > 0);
  learnt[0] = ~p;

  backtrack_level = 0;
  if (learnt.size() > 1) {
    std::size_t max_i = 1;
    for (std::size_t k = 2; k < learnt.size(); ++k) {
      if (level_[learnt[k].var()] > level_[learnt[max_i].var()]) max_i = k;
    }
    std::swap(learnt[1], learnt[max_i]);
    backtrack_level = level_[learnt[1].var()];
  }
  for (std::size_t k = 1; k < learnt.size(); ++k) seen_[learnt[k].var()] = 0;
}

void Solver::cancel_until(int level) {
  if (decision_level() <= level) return;
  for (int k = static_cast<int>(trail_.size()) - 1; k >= trail_lim_[level]; --k) {
    Var v = trail_[k].var();
    assigns_[v] = kUndef;
    reason_[v] = kNoReason;
    if (heap_pos_[v] < 0) heap_insert(v);
  }
  trail_.resize(trail_lim_[level]);
  trail_lim_.resize(level);
  qhead_ = trail_.size();
}

Lit Solver::pick_branch() {
  while (!heap_.empty()) {
    Var v = heap_pop();
    if (assigns_[v] == kUndef) return Lit(v, true);
  }
  return Lit();
}

Result Solver::solve(std::span<const Lit> assumptions) {
  stats_.solves++;
  model_.clear();
  if (!ok_) return Result::kUnsat;

  std::vector<Lit> learnt;
  int restart_index = 0;
  std::uint64_t budget = static_cast<std::uint64_t>(luby(2, restart_index) * kRestartBase);
  std::uint64_t conflicts_here = 0;

  while (true) {
    int conflict = propagate();
    if (conflict != kNoReason) {
      stats_.conflicts++;
      conflicts_here++;
      if (decision_level() == 0) {
        ok_ = false;
        return Result::kUnsat;
      }
      int backtrack_level = 0;
      analyze(conflict, learnt, backtrack_level);
      cancel_until(backtrack_level);
      if (learnt.size() == 1) {
        enqueue(learnt[0], kNoReason);
      } else {
        int ci = attach(learnt, true);
        stats_.learnt_clauses++;
        enqueue(learnt[0], ci);
      }
      decay();
      continue;
    }

    if (conflicts_here >= budget) {
      stats_.restarts++;
      cancel_until(0);
      conflicts_here = 0;
      budget = static_cast<std::uint64_t>(luby(2, ++restart_index) * kRestartBase);
      continue;
    }

    Lit next;
    while (decision_level() < static_cast<int>(assumptions.size())) {
      Lit a = assumptions[decision_level()];
      if (value(a) == kTrue) {
        trail_lim_.push_back(static_cast<int>(trail_.size()));
      } else if (value(a) == kFalse) {
        cancel_until(0);
        return Result::kUnsat;
      } else {
        next = a;
        break;
      }
    }
    if (next.undefined()) {
      next = pick_branch();
      if (next.undefined()) {
        model_.resize(assigns_.size());
        for (std::size_t v = 0; v < assigns_.size(); ++v) model_[v] = assigns_[v] == kTrue;
        cancel_until(0);
        return Result::kSat;
      }
      stats_.decisions++;
    }
    trail_lim_.push_back(static_cast<int>(trail_.size()));
    enqueue(next, kNoReason);
  }
}

void Solver::bump(Var v) {
  activity_[v] += var_inc_;
  if (activity_[v] > 1e100) {
    for (auto& a : activity_) a *= 1e-100;
    var_inc_ *= 1e-100;
  }
  if (heap_pos_[v] >= 0) heap_up(heap_pos_[v]);
}

void Solver::heap_insert(Var v) {
  heap_pos_[v] = static_cast<int>(heap_.size());
  heap_.push_back(v);
  heap_up(heap_pos_[v]);
}

Var Solver::heap_pop() {
  Var top = heap_[0];
  Var last = heap_.back();
  heap_.pop_back();
  heap_pos_[top] = -1;
  if (!heap_.empty()) {
    heap_[0] = last;
    heap_pos_[last] = 0;
    heap_down(0);
  }
  return top;
}

void Solver::heap_up(int pos) {
  Var v = heap_[pos];
  while (pos > 0) {
    int parent = (pos - 1) / 2;
    if (!heap_less(v, heap_[parent])) break;
    heap_[pos] = heap_[parent];
    heap_pos_[heap_[pos]] = pos;
    pos = parent;
  }
  heap_[pos] = v;
  heap_pos_[v] = pos;
}

void Solver::heap_down(int pos) {
  Var v = heap_[pos];
  int n = static_cast<int>(heap_.size());
  while (true) {
    int child = 2 * pos + 1;
    if (child >= n) break;
    if (child + 1 < n && heap_less(heap_[child + 1], heap_[child])) child++;
    if (!heap_less(heap_[child], v)) break;
    heap_[pos] = heap_[child];
    heap_pos_[heap_[pos]] = pos;
    pos = child;
  }
  heap_[pos] = v;
  heap_pos_[v] = pos;
}

}  // namespace lazydep::sat
