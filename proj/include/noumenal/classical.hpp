// Copyright 2026 The Noumenal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "noumenal/core.hpp"

namespace noumenal {

/// A site of a finite reversible classical theory: a label and the size of
/// its value set.
struct ClassicalSite {
  std::string label;
  std::size_t value_count = 2;
};

enum class ClassicalGroupMode { full_symmetric, generated };

/// Everything needed to instantiate a finite classical theory. Generators,
/// when given, are permutations of the global joint value space written as
/// one-line images in the canonical (lexicographic, first site most
/// significant) ordering.
struct ClassicalSpec {
  std::vector<ClassicalSite> sites;
  ClassicalGroupMode mode = ClassicalGroupMode::full_symmetric;
  std::vector<std::vector<std::uint32_t>> generators;
  std::size_t max_joint_size = 8;
  std::size_t max_group_order = 40320;
};

/// Phenomenal state of a classical system: one value per site, in ascending
/// site order.
class ValueTuple {
 public:
  ValueTuple(System sys, std::vector<std::uint32_t> values)
      : system_(sys), values_(std::move(values)) {}

  const System& system() const { return system_; }
  const std::vector<std::uint32_t>& values() const { return values_; }

  bool operator==(const ValueTuple& other) const {
    return system_ == other.system_ && values_ == other.values_;
  }

 private:
  System system_;
  std::vector<std::uint32_t> values_;
};

/// Operation of a classical system: a bijection of the system's joint value
/// space, stored as one-line images in the canonical ordering.
class BlockPermutation {
 public:
  BlockPermutation(System sys, std::vector<std::uint32_t> images)
      : system_(sys), images_(std::move(images)) {}

  const System& system() const { return system_; }
  const std::vector<std::uint32_t>& images() const { return images_; }

  bool operator==(const BlockPermutation& other) const {
    return system_ == other.system_ && images_ == other.images_;
  }

 private:
  System system_;
  std::vector<std::uint32_t> images_;
};

/// Finite reversible classical theory: deterministic value tuples as
/// phenomenal states, block permutations as operations, coordinate
/// restriction as the phenomenal projector. Fully enumerable, so every law
/// can be checked by brute force.
class ClassicalTheory {
 public:
  using Op = BlockPermutation;
  using State = ValueTuple;

  explicit ClassicalTheory(ClassicalSpec spec) {
    if (spec.sites.empty()) throw ValidationError("classical theory needs at least one site");
    std::vector<std::string> labels;
    for (const auto& s : spec.sites) {
      if (s.value_count < 2)
        throw ValidationError("site '" + s.label + "' needs at least two values");
      labels.push_back(s.label);
      value_counts_.push_back(s.value_count);
    }
    universe_ = std::make_shared<SiteUniverse>(std::move(labels));
    mode_ = spec.mode;
    max_group_order_ = spec.max_group_order;

    const std::size_t global_size = joint_size(universe_->global_system());
    if (global_size > spec.max_joint_size)
      throw BudgetExceededError("global joint value space has " + std::to_string(global_size) +
                                " elements, over the cap of " +
                                std::to_string(spec.max_joint_size));

    if (mode_ == ClassicalGroupMode::full_symmetric) {
      global_group_ = all_permutations(global_size);
    } else {
      if (spec.generators.empty())
        throw ValidationError("generated mode requires at least one generator");
      for (const auto& g : spec.generators) check_bijection(g, global_size);
      global_group_ = closure(spec.generators);
      derive_subgroups();
    }
  }

  const SiteUniverse& universe() const { return *universe_; }
  std::shared_ptr<const SiteUniverse> universe_ptr() const { return universe_; }
  ClassicalGroupMode mode() const { return mode_; }
  std::size_t site_value_count(std::size_t site) const { return value_counts_.at(site); }

  /// Size of the joint value space of a system; the empty system has exactly
  /// one state.
  std::size_t joint_size(const System& sys) const {
    check_ours(sys);
    std::size_t n = 1;
    for (std::size_t s : sys.sites()) n *= value_counts_[s];
    return n;
  }

  std::size_t state_index(const State& t) const {
    const auto sites = t.system().sites();
    std::size_t idx = 0;
    for (std::size_t j = 0; j < sites.size(); ++j)
      idx = idx * value_counts_[sites[j]] + t.values()[j];
    return idx;
  }

  State state_at(const System& sys, std::size_t index) const {
    const auto sites = sys.sites();
    std::vector<std::uint32_t> vals(sites.size(), 0);
    for (std::size_t j = sites.size(); j-- > 0;) {
      const std::size_t n = value_counts_[sites[j]];
      vals[j] = static_cast<std::uint32_t>(index % n);
      index /= n;
    }
    return State(sys, std::move(vals));
  }

  Op identity(const System& sys) const {
    check_ours(sys);
    std::vector<std::uint32_t> images(joint_size(sys));
    std::iota(images.begin(), images.end(), 0u);
    return Op(sys, std::move(images));
  }

  /// compose(u, v) applies v first, then u.
  Op compose(const Op& u, const Op& v) const {
    if (u.system() != v.system())
      throw SystemMismatchError("compose: operations act on different systems");
    std::vector<std::uint32_t> images(u.images().size());
    for (std::size_t i = 0; i < images.size(); ++i) images[i] = u.images()[v.images()[i]];
    return Op(u.system(), std::move(images));
  }

  Op inverse(const Op& u) const {
    std::vector<std::uint32_t> images(u.images().size());
    for (std::size_t i = 0; i < images.size(); ++i) images[u.images()[i]] = static_cast<std::uint32_t>(i);
    return Op(u.system(), std::move(images));
  }

  State act(const Op& u, const State& s) const {
    if (u.system() != s.system())
      throw SystemMismatchError("act: operation and state live on different systems");
    return state_at(s.system(), u.images()[state_index(s)]);
  }

  /// Phenomenal projector: coordinate restriction onto a subsystem.
  State project(const State& s, const System& a) const {
    if (!a.is_subsystem_of(s.system()))
      throw NotASubsystemError("project: target is not a subsystem of the state's system");
    const auto super_sites = s.system().sites();
    std::vector<std::uint32_t> vals;
    vals.reserve(a.site_count());
    for (std::size_t j = 0; j < super_sites.size(); ++j)
      if (a.contains_site(super_sites[j])) vals.push_back(s.values()[j]);
    return State(a, std::move(vals));
  }

  /// Product of operations over disjoint systems: acts blockwise, each
  /// factor on its own coordinates.
  Op product(const Op& p, const Op& q) const {
    const System a = p.system(), b = q.system();
    if (!a.is_disjoint_from(b))
      throw DisjointnessError("product: systems " + a.to_string() + " and " + b.to_string() +
                              " overlap");
    const System ab = a.union_with(b);
    const std::size_t n = joint_size(ab);
    std::vector<std::uint32_t> images(n);
    for (std::size_t i = 0; i < n; ++i) {
      const State t = state_at(ab, i);
      const State ta = project(t, a), tb = project(t, b);
      const State ra = act(p, ta), rb = act(q, tb);
      images[i] = static_cast<std::uint32_t>(state_index(merge(ra, rb, ab)));
    }
    return Op(ab, std::move(images));
  }

  /// Decides whether w acts as the identity on subsystem a and independently
  /// on the rest; returns that residual operation when it exists. This is
  /// the decision procedure behind the product's factorization requirement
  /// and the coset equivalence test.
  std::optional<Op> factor_through_complement(const Op& w, const System& a) const {
    const System x = w.system();
    if (!a.is_subsystem_of(x))
      throw NotASubsystemError("factor: system is not a subsystem of the operation's system");
    const System rest = x.difference_with(a);
    const std::size_t nr = joint_size(rest);
    std::vector<std::int64_t> images(nr, -1);
    for (std::size_t i = 0; i < w.images().size(); ++i) {
      const State t = state_at(x, i);
      const State img = state_at(x, w.images()[i]);
      if (!(project(t, a) == project(img, a))) return std::nullopt;
      const std::size_t ir = state_index(project(t, rest));
      const std::size_t out = state_index(project(img, rest));
      if (images[ir] < 0)
        images[ir] = static_cast<std::int64_t>(out);
      else if (images[ir] != static_cast<std::int64_t>(out))
        return std::nullopt;
    }
    std::vector<std::uint32_t> res(nr);
    for (std::size_t i = 0; i < nr; ++i) res[i] = static_cast<std::uint32_t>(images[i]);
    return Op(rest, std::move(res));
  }

  bool op_equal(const Op& u, const Op& v) const {
    return u.system() == v.system() && u.images() == v.images();
  }
  double op_distance(const Op& u, const Op& v) const { return op_equal(u, v) ? 0.0 : 1.0; }
  bool state_equal(const State& a, const State& b) const { return a == b; }
  double state_distance(const State& a, const State& b) const {
    return state_equal(a, b) ? 0.0 : 1.0;
  }

  /// A state of a supersystem projecting onto s: missing sites padded with
  /// their first value.
  State extend_state(const State& s, const System& b) const {
    if (!s.system().is_subsystem_of(b))
      throw NotASubsystemError("extend_state: target must be a supersystem");
    std::vector<std::uint32_t> vals;
    vals.reserve(b.site_count());
    std::size_t j = 0;
    for (std::size_t site : b.sites()) {
      if (s.system().contains_site(site))
        vals.push_back(s.values()[j++]);
      else
        vals.push_back(0);
    }
    return State(b, std::move(vals));
  }

  /// All operations of a system: every permutation in full-symmetric mode,
  /// the derived subgroup in generated mode. Deterministic sorted order.
  std::vector<Op> enumerate_operations(const System& sys) const {
    check_ours(sys);
    std::vector<Op> out;
    if (mode_ == ClassicalGroupMode::full_symmetric) {
      for (auto& images : all_permutations(joint_size(sys))) out.emplace_back(sys, std::move(images));
    } else {
      for (const auto& images : subgroup_.at(sys.mask())) out.emplace_back(sys, images);
    }
    return out;
  }

  std::vector<State> enumerate_states(const System& sys) const {
    check_ours(sys);
    std::vector<State> out;
    const std::size_t n = joint_size(sys);
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(state_at(sys, i));
    return out;
  }

  Op sample_operation(const System& sys, Rng& rng) const {
    if (mode_ == ClassicalGroupMode::full_symmetric) {
      // Fisher-Yates gives the uniform distribution over the symmetric group.
      std::vector<std::uint32_t> images(joint_size(sys));
      std::iota(images.begin(), images.end(), 0u);
      for (std::size_t i = images.size(); i > 1; --i)
        std::swap(images[i - 1], images[rng.below(i)]);
      return Op(sys, std::move(images));
    }
    const auto& group = subgroup_.at(sys.mask());
    return Op(sys, group[rng.below(group.size())]);
  }

  State sample_state(const System& sys, Rng& rng) const {
    return state_at(sys, rng.below(joint_size(sys)));
  }

  /// The classical action determines its operation, so the only operation
  /// pair guaranteed to act identically is a repeated element.
  std::pair<Op, Op> confusable_pair(const System& sys, Rng& rng) const {
    Op u = sample_operation(sys, rng);
    return {u, u};
  }

  Op make_operation(const System& sys, std::vector<std::uint32_t> images) const {
    check_ours(sys);
    check_bijection(images, joint_size(sys));
    return Op(sys, std::move(images));
  }

  State make_state(const System& sys, std::vector<std::uint32_t> values) const {
    check_ours(sys);
    const auto sites = sys.sites();
    if (values.size() != sites.size())
      throw ValidationError("state arity does not match the system's site count");
    for (std::size_t j = 0; j < sites.size(); ++j)
      if (values[j] >= value_counts_[sites[j]])
        throw ValidationError("value out of range for site " + universe_->label(sites[j]));
    return State(sys, std::move(values));
  }

  /// Reinterprets an operation on a different system with the same joint
  /// value space layout. Only meaningful between systems whose site value
  /// counts agree position by position.
  Op retag(const Op& u, const System& sys) const {
    check_ours(sys);
    const auto from = u.system().sites(), to = sys.sites();
    if (from.size() != to.size())
      throw ValidationError("retag: systems have different site counts");
    for (std::size_t j = 0; j < from.size(); ++j)
      if (value_counts_[from[j]] != value_counts_[to[j]])
        throw ValidationError("retag: site value spaces do not match");
    return Op(sys, u.images());
  }

  State retag_state(const State& s, const System& sys) const {
    check_ours(sys);
    const auto from = s.system().sites(), to = sys.sites();
    if (from.size() != to.size())
      throw ValidationError("retag: systems have different site counts");
    for (std::size_t j = 0; j < from.size(); ++j)
      if (value_counts_[from[j]] != value_counts_[to[j]])
        throw ValidationError("retag: site value spaces do not match");
    return State(sys, s.values());
  }

  /// One-line image serialization, e.g. "2 3 0 1".
  static std::string images_line(const Op& u) {
    std::ostringstream out;
    for (std::size_t i = 0; i < u.images().size(); ++i) {
      if (i) out << ' ';
      out << u.images()[i];
    }
    return out.str();
  }

  Json op_json(const Op& u) const {
    Json j;
    j["system"] = u.system().to_string();
    j["images"] = u.images();
    return j;
  }

  Json state_json(const State& s) const {
    Json j;
    j["system"] = s.system().to_string();
    j["values"] = s.values();
    return j;
  }

 private:
  void check_ours(const System& sys) const {
    if (!sys.universe().same_as(*universe_))
      throw UniverseMismatchError("system belongs to a different site universe");
  }

  static void check_bijection(const std::vector<std::uint32_t>& images, std::size_t n) {
    if (images.size() != n)
      throw ValidationError("permutation has " + std::to_string(images.size()) +
                            " entries, expected " + std::to_string(n));
    std::vector<bool> seen(n, false);
    for (std::uint32_t v : images) {
      if (v >= n || seen[v]) throw ValidationError("permutation table is not a bijection");
      seen[v] = true;
    }
  }

  State merge(const State& sa, const State& sb, const System& ab) const {
    std::vector<std::uint32_t> vals;
    vals.reserve(ab.site_count());
    std::size_t ia = 0, ib = 0;
    for (std::size_t site : ab.sites()) {
      if (sa.system().contains_site(site))
        vals.push_back(sa.values()[ia++]);
      else
        vals.push_back(sb.values()[ib++]);
    }
    return State(ab, std::move(vals));
  }

  std::vector<std::vector<std::uint32_t>> all_permutations(std::size_t n) const {
    std::size_t order = 1;
    for (std::size_t k = 2; k <= n; ++k) {
      order *= k;
      if (order > max_group_order_)
        throw BudgetExceededError("symmetric group order " + std::to_string(n) +
                                  "! exceeds the cap of " + std::to_string(max_group_order_));
    }
    std::vector<std::vector<std::uint32_t>> out;
    out.reserve(order);
    std::vector<std::uint32_t> p(n);
    std::iota(p.begin(), p.end(), 0u);
    do {
      out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
  }

  std::vector<std::vector<std::uint32_t>> closure(
      const std::vector<std::vector<std::uint32_t>>& generators) const {
    std::set<std::vector<std::uint32_t>> seen;
    std::vector<std::uint32_t> id(generators.front().size());
    std::iota(id.begin(), id.end(), 0u);
    seen.insert(id);
    std::vector<std::vector<std::uint32_t>> frontier{id};
    while (!frontier.empty()) {
      std::vector<std::vector<std::uint32_t>> next;
      for (const auto& w : frontier) {
        for (const auto& g : generators) {
          std::vector<std::uint32_t> gw(w.size());
          for (std::size_t i = 0; i < w.size(); ++i) gw[i] = g[w[i]];
          if (seen.insert(gw).second) {
            if (seen.size() > max_group_order_)
              throw BudgetExceededError("generated group closure exceeds the cap of " +
                                        std::to_string(max_group_order_) + " elements");
            next.push_back(std::move(gw));
          }
        }
      }
      frontier = std::move(next);
    }
    return {seen.begin(), seen.end()};
  }

  /// In generated mode the group of a subsystem A is derived from the global
  /// group: V acts on A exactly when I x V (identity on the complement of A)
  /// is a global group element.
  void derive_subgroups() {
    for (const System& sys : universe_->all_systems()) {
      std::set<std::vector<std::uint32_t>> ops;
      const System rest = sys.complement();
      for (const auto& images : global_group_) {
        Op w(universe_->global_system(), images);
        if (auto v = factor_through_complement(w, rest)) ops.insert(v->images());
      }
      subgroup_[sys.mask()] = {ops.begin(), ops.end()};
    }
  }

  std::shared_ptr<const SiteUniverse> universe_;
  std::vector<std::size_t> value_counts_;
  ClassicalGroupMode mode_ = ClassicalGroupMode::full_symmetric;
  std::size_t max_group_order_ = 40320;
  std::vector<std::vector<std::uint32_t>> global_group_;
  std::map<std::uint64_t, std::vector<std::vector<std::uint32_t>>> subgroup_;
};

}  // namespace noumenal
