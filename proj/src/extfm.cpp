#include "lazydep/extfm.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <unordered_map>

#include "lazydep/error.hpp"

namespace lazydep {

FeatureSet intersect(const FeatureSet& a, const FeatureSet& b) {
  FeatureSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

FeatureSet unite(const FeatureSet& a, const FeatureSet& b) {
  FeatureSet out = a;
  out.insert(b.begin(), b.end());
  return out;
}

bool is_subset(const FeatureSet& a, const FeatureSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

namespace {

void check_cap(std::size_t size, std::size_t cap) {
  if (size > cap) throw CapExceededError(size, cap);
}

FeatureSet difference(const FeatureSet& a, const FeatureSet& b) {
  FeatureSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

bool intersects(const FeatureSet& a, const FeatureSet& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      return true;
    }
  }
  return false;
}

// Formula flattened to postfix over feature indices, evaluated against a bit
// mask. Enumerating 2^20 assignments through the tree evaluator is too slow.
class MaskProgram {
 public:
  MaskProgram(const Formula& f, const std::vector<Feature>& order) {
    for (std::size_t i = 0; i < order.size(); ++i) index_[order[i]] = static_cast<int>(i);
    emit(f);
  }

  bool eval(std::uint32_t mask) const {
    stack_.clear();
    for (const auto& op : ops_) {
      switch (op.code) {
        case Code::kConst: stack_.push_back(op.arg != 0); break;
        case Code::kVar: stack_.push_back(op.arg >= 0 && ((mask >> op.arg) & 1u)); break;
        case Code::kNot: stack_.back() = !stack_.back(); break;
        default: {
          bool b = stack_.back();
          stack_.pop_back();
          bool a = stack_.back();
          if (op.code == Code::kAnd) {
            stack_.back() = a && b;
          } else if (op.code == Code::kOr) {
            stack_.back() = a || b;
          } else {
            stack_.back() = !a || b;
          }
        }
      }
    }
    return stack_.back();
  }

 private:
  enum class Code { kConst, kVar, kNot, kAnd, kOr, kImplies };
  struct Op {
    Code code;
    int arg;
  };

  void emit(const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind()) {
      case K::kConst: ops_.push_back({Code::kConst, f.value() ? 1 : 0}); return;
      case K::kVar: {
        auto it = index_.find(f.name());
        // Closed world: names outside the enumerated set read as false.
        ops_.push_back({Code::kVar, it == index_.end() ? -1 : it->second});
        return;
      }
      case K::kNot:
        emit(f.operand());
        ops_.push_back({Code::kNot, 0});
        return;
      case K::kAnd: emit(f.lhs()); emit(f.rhs()); ops_.push_back({Code::kAnd, 0}); return;
      case K::kOr: emit(f.lhs()); emit(f.rhs()); ops_.push_back({Code::kOr, 0}); return;
      case K::kImplies:
        emit(f.lhs());
        emit(f.rhs());
        ops_.push_back({Code::kImplies, 0});
        return;
    }
  }

  std::unordered_map<Feature, int> index_;
  std::vector<Op> ops_;
  mutable std::vector<bool> stack_;
};

Product mask_to_product(std::uint32_t mask, const std::vector<Feature>& order) {
  Product p;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if ((mask >> i) & 1u) p.insert(p.end(), order[i]);
  }
  return p;
}

// Strict product-wise order on cuts of the same model (features ⊆, products ⊆).
bool pointwise_leq(const ExtFM& a, const ExtFM& b) {
  return is_subset(a.features, b.features) &&
         std::includes(b.products.begin(), b.products.end(), a.products.begin(),
                       a.products.end());
}

}  // namespace

ExtFM empty_fm() { return ExtFM{{}, {Product{}}}; }

ExtFM void_fm(FeatureSet features) { return ExtFM{std::move(features), {}}; }

ExtFM powerset_fm(const FeatureSet& features) {
  check_cap(features.size(), kEnumerationCap);
  std::vector<Feature> order(features.begin(), features.end());
  ExtFM out{features, {}};
  const std::uint32_t limit = 1u << order.size();
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    out.products.insert(mask_to_product(mask, order));
  }
  return out;
}

ExtFM enumerate_products(const PropFM& m) {
  check_cap(m.features.size(), kEnumerationCap);
  std::vector<Feature> order(m.features.begin(), m.features.end());
  MaskProgram program(m.constraint, order);
  ExtFM out{m.features, {}};
  const std::uint32_t limit = 1u << order.size();
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    if (program.eval(mask)) out.products.insert(mask_to_product(mask, order));
  }
  return out;
}

ExtFM slice(const ExtFM& m, const FeatureSet& y) {
  ExtFM out{intersect(m.features, y), {}};
  for (const auto& p : m.products) out.products.insert(intersect(p, y));
  return out;
}

bool is_interface(const ExtFM& sub, const ExtFM& m) {
  if (!is_subset(sub.features, m.features)) return false;
  return slice(m, sub.features).products == sub.products;
}

ExtFM compose_ext(const ExtFM& a, const ExtFM& b) {
  ExtFM out{unite(a.features, b.features), {}};
  // Join on the shared features: p ∩ F_b must equal q ∩ F_a.
  std::map<FeatureSet, std::vector<const Product*>> by_key;
  for (const auto& q : b.products) by_key[intersect(q, a.features)].push_back(&q);
  for (const auto& p : a.products) {
    auto it = by_key.find(intersect(p, b.features));
    if (it == by_key.end()) continue;
    for (const Product* q : it->second) out.products.insert(unite(p, *q));
  }
  return out;
}

ExtFM compose_ext(const std::vector<ExtFM>& ms) {
  ExtFM out = empty_fm();
  for (const auto& m : ms) out = compose_ext(out, m);
  return out;
}

bool is_pre_product(const ExtFM& m, const Configuration& c) {
  return std::any_of(m.products.begin(), m.products.end(),
                     [&](const Product& p) { return is_subset(c, p); });
}

bool is_conservative_interface(const ExtFM& sub, const ExtFM& m) {
  return is_interface(sub, m) && std::includes(m.products.begin(), m.products.end(),
                                                sub.products.begin(), sub.products.end());
}

bool is_extended_slice(const ExtFM& sub, const ExtFM& m, const FeatureSet& y) {
  return is_interface(slice(m, y), sub) && is_interface(sub, m);
}

bool is_cut(const ExtFM& sub, const ExtFM& m, const FeatureSet& y) {
  return is_extended_slice(sub, m, y) && is_conservative_interface(sub, m);
}

ExtFM minimum_cut_step(const ExtFM& m, const ExtFM& current) {
  ExtFM next = current;
  for (const auto& p : m.products) {
    bool qualifies = true;
    for (const auto& smaller : m.products) {
      if (smaller.size() >= p.size() || !is_subset(smaller, p)) continue;
      if (!intersects(difference(p, smaller), current.features)) {
        qualifies = false;
        break;
      }
    }
    if (qualifies) {
      next.products.insert(p);
      next.features.insert(p.begin(), p.end());
    }
  }
  return next;
}

ExtFM minimum_cut_fixpoint(const ExtFM& m, const FeatureSet& y) {
  check_cap(m.features.size(), kEnumerationCap);
  ExtFM current{intersect(m.features, y), {}};
  while (true) {
    ExtFM next = minimum_cut_step(m, current);
    if (next == current) return current;
    current = std::move(next);
  }
}

ExtFM minimum_cut_bruteforce(const ExtFM& m, const FeatureSet& y) {
  check_cap(m.features.size(), kBruteForceCutCap);
  const FeatureSet base = intersect(m.features, y);
  std::vector<Feature> optional_features;
  for (const auto& f : m.features) {
    if (!base.contains(f)) optional_features.push_back(f);
  }

  std::vector<ExtFM> cuts;
  const std::uint32_t limit = 1u << optional_features.size();
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    FeatureSet candidate_features = unite(base, mask_to_product(mask, optional_features));
    ExtFM candidate = slice(m, candidate_features);
    if (is_cut(candidate, m, y)) cuts.push_back(std::move(candidate));
  }

  // The least element must be below every other cut; pick by size first.
  std::sort(cuts.begin(), cuts.end(), [](const ExtFM& a, const ExtFM& b) {
    if (a.features.size() != b.features.size()) return a.features.size() < b.features.size();
    return a.products.size() < b.products.size();
  });
  for (const auto& cut : cuts) {
    bool least = std::all_of(cuts.begin(), cuts.end(),
                             [&](const ExtFM& other) { return pointwise_leq(cut, other); });
    if (least) return cut;
  }
  throw Error("minimum_cut_bruteforce: no least cut found");
}

std::optional<Product> discover_ext(const std::vector<ExtFM>& ms, const Configuration& c) {
  FeatureSet all;
  for (const auto& m : ms) all.insert(m.features.begin(), m.features.end());
  check_cap(all.size(), kEnumerationCap);
  ExtFM composed = compose_ext(ms);
  // std::set orders products lexicographically by their sorted names.
  for (const auto& p : composed.products) {
    if (is_subset(c, p)) return p;
  }
  return std::nullopt;
}

bool disjoint_compat_criterion(const std::vector<ExtFM>& ms, const Configuration& c) {
  for (std::size_t i = 0; i < ms.size(); ++i) {
    for (std::size_t j = i + 1; j < ms.size(); ++j) {
      if (intersects(ms[i].features, ms[j].features)) {
        throw PreconditionError("feature models " + std::to_string(i) + " and " +
                                std::to_string(j) + " share features");
      }
    }
  }
  FeatureSet all;
  for (const auto& m : ms) all.insert(m.features.begin(), m.features.end());
  if (!is_subset(c, all)) return false;
  for (const auto& m : ms) {
    if (!slice(m, c).products.contains(intersect(c, m.features))) return false;
  }
  return true;
}

std::string to_text(const ExtFM& m) {
  std::string out = "features:";
  for (const auto& f : m.features) out += " " + f;
  out += '\n';
  for (const auto& p : m.products) {
    out += "product:";
    for (const auto& f : p) out += " " + f;
    out += '\n';
  }
  return out;
}

ExtFM parse_ext_fm(std::string_view text) {
  ExtFM out;
  bool seen_features = false;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    std::size_t line_offset = offset;
    offset += line.size() + 1;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream words(line);
    std::string head;
    if (!(words >> head)) continue;
    FeatureSet names;
    for (std::string w; words >> w;) {
      if (!is_valid_feature_name(w)) throw ParseError("invalid feature name '" + w + "'", line_offset);
      names.insert(w);
    }
    if (head == "features:") {
      if (seen_features) throw ParseError("duplicate 'features:' line", line_offset);
      out.features = std::move(names);
      seen_features = true;
    } else if (head == "product:") {
      if (!seen_features) throw ParseError("'product:' before 'features:'", line_offset);
      if (!is_subset(names, out.features)) {
        throw ParseError("product mentions undeclared feature", line_offset);
      }
      out.products.insert(std::move(names));
    } else {
      throw ParseError("unknown line '" + head + "'", line_offset);
    }
  }
  if (!seen_features) throw ParseError("missing 'features:' line", offset);
  return out;
}

}  // namespace lazydep
