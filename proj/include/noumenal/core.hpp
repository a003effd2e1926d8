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

#include <concepts>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "noumenal/errors.hpp"
#include "noumenal/rng.hpp"
#include "noumenal/systems.hpp"

namespace noumenal {

/// Insertion-ordered JSON everywhere, so serialized artifacts have a stable
/// key layout.
using Json = nlohmann::ordered_json;

enum class BudgetMode { exhaustive, sampled };

inline const char* to_string(BudgetMode m) {
  return m == BudgetMode::exhaustive ? "exhaustive" : "sampled";
}

/// How much work a verification run is allowed to do, and with which seed and
/// numeric tolerance. `exhaustive` demands full enumeration and skips what
/// cannot be enumerated; `sampled` enumerates small domains and samples the
/// rest.
struct SamplingBudget {
  BudgetMode mode = BudgetMode::sampled;
  std::size_t sample_count = 200;
  std::uint64_t seed = 0;
  double tolerance = 1e-9;

  void validate() const {
    if (mode == BudgetMode::sampled && sample_count < 1)
      throw ValidationError("sampled budget requires sample_count >= 1");
    if (tolerance < 0.0) throw ValidationError("tolerance must be nonnegative");
  }

  static SamplingBudget exhaustive(double tolerance = 1e-9) {
    return SamplingBudget{BudgetMode::exhaustive, 1, 0, tolerance};
  }
  static SamplingBudget sampled(std::size_t count, std::uint64_t seed,
                                double tolerance = 1e-9) {
    return SamplingBudget{BudgetMode::sampled, count, seed, tolerance};
  }
};

/// Contract every concrete theory implements: a site lattice plus, per
/// system, phenomenal states, a group of operations acting on them, a
/// phenomenal projector, a product of operations over disjoint systems, and
/// the factorization decision procedure behind the product's fifth
/// requirement. Operations and states carry their system.
template <typename T>
concept TheoryContract = requires(const T& th, const typename T::Op& u,
                                  const typename T::State& s, const System& a) {
  typename T::Op;
  typename T::State;
  { th.universe() } -> std::convertible_to<const SiteUniverse&>;
  { u.system() } -> std::convertible_to<System>;
  { s.system() } -> std::convertible_to<System>;
  { th.identity(a) } -> std::same_as<typename T::Op>;
  { th.compose(u, u) } -> std::same_as<typename T::Op>;
  { th.inverse(u) } -> std::same_as<typename T::Op>;
  { th.act(u, s) } -> std::same_as<typename T::State>;
  { th.project(s, a) } -> std::same_as<typename T::State>;
  { th.product(u, u) } -> std::same_as<typename T::Op>;
  { th.factor_through_complement(u, a) } -> std::same_as<std::optional<typename T::Op>>;
  { th.op_equal(u, u) } -> std::same_as<bool>;
  { th.op_distance(u, u) } -> std::same_as<double>;
  { th.state_equal(s, s) } -> std::same_as<bool>;
  { th.state_distance(s, s) } -> std::same_as<double>;
  { th.extend_state(s, a) } -> std::same_as<typename T::State>;
  { th.op_json(u) } -> std::convertible_to<Json>;
  { th.state_json(s) } -> std::convertible_to<Json>;
};

/// Theories whose state spaces and operation groups can be listed in full.
template <typename T>
concept EnumerableTheory = TheoryContract<T> && requires(const T& th, const System& a) {
  { th.enumerate_operations(a) } -> std::same_as<std::vector<typename T::Op>>;
  { th.enumerate_states(a) } -> std::same_as<std::vector<typename T::State>>;
};

/// Theories that can draw seeded random operations and states.
template <typename T>
concept SampleableTheory = TheoryContract<T> && requires(const T& th, const System& a, Rng& rng) {
  { th.sample_operation(a, rng) } -> std::same_as<typename T::Op>;
  { th.sample_state(a, rng) } -> std::same_as<typename T::State>;
};

/// Theories that can produce a pair of operations guaranteed to act
/// identically on every state. For a faithful theory the two elements must
/// compare equal; the faithfulness check uses this as its sharpest probe.
template <typename T>
concept ProvidesConfusablePair = requires(const T& th, const System& a, Rng& rng) {
  { th.confusable_pair(a, rng) } -> std::same_as<std::pair<typename T::Op, typename T::Op>>;
};

/// Theories that can attempt to split a global operation M into a product
/// (I^A x V1)(I^B x V2) without enumerating cosets. Used by the join product
/// over continuous groups; returns the two factors as global operations.
template <typename T>
concept ProvidesLocalSplit = requires(const T& th, const typename T::Op& m, const System& a) {
  { th.try_local_split(m, a, a) } -> std::same_as<std::optional<std::pair<typename T::Op, typename T::Op>>>;
};

/// Embeds an operation on A into the global group as U x I over the
/// complement. This is the embedding the construction and the verifier use
/// throughout.
template <TheoryContract T>
typename T::Op embed_global(const T& th, const typename T::Op& u) {
  const System sys = u.system();
  if (sys.is_global()) return u;
  return th.product(u, th.identity(sys.complement()));
}

/// Quotient of an enumerable theory by "acts identically on every phenomenal
/// state". Operations are replaced by canonical class representatives, so
/// the resulting action is faithful. Theories whose states cannot be
/// enumerated cannot be quotiented this way.
template <EnumerableTheory T>
class FaithfulizedTheory {
 public:
  using Op = typename T::Op;
  using State = typename T::State;

  explicit FaithfulizedTheory(T base) : base_(std::move(base)) {}

  const T& base() const { return base_; }
  const SiteUniverse& universe() const { return base_.universe(); }

  /// Canonical representative of u's action class: the class member with the
  /// smallest serialized form.
  Op canonicalize(const Op& u) const {
    const auto states = base_.enumerate_states(u.system());
    const auto sig_u = signature(u, states);
    Op best = u;
    std::string best_key = base_.op_json(u).dump();
    for (const Op& cand : base_.enumerate_operations(u.system())) {
      if (signature(cand, states) != sig_u) continue;
      std::string key = base_.op_json(cand).dump();
      if (key < best_key) {
        best_key = std::move(key);
        best = cand;
      }
    }
    return best;
  }

  Op identity(const System& a) const { return canonicalize(base_.identity(a)); }
  Op compose(const Op& u, const Op& v) const { return canonicalize(base_.compose(u, v)); }
  Op inverse(const Op& u) const { return canonicalize(base_.inverse(u)); }
  State act(const Op& u, const State& s) const { return base_.act(u, s); }
  State project(const State& s, const System& a) const { return base_.project(s, a); }
  Op product(const Op& u, const Op& v) const { return canonicalize(base_.product(u, v)); }

  std::optional<Op> factor_through_complement(const Op& w, const System& a) const {
    auto f = base_.factor_through_complement(w, a);
    if (!f) return std::nullopt;
    return canonicalize(*f);
  }

  /// Class equality: identical action on every state of the system.
  bool op_equal(const Op& u, const Op& v) const {
    if (u.system() != v.system()) return false;
    const auto states = base_.enumerate_states(u.system());
    return signature(u, states) == signature(v, states);
  }

  double op_distance(const Op& u, const Op& v) const { return op_equal(u, v) ? 0.0 : 1.0; }

  bool state_equal(const State& a, const State& b) const { return base_.state_equal(a, b); }
  double state_distance(const State& a, const State& b) const {
    return base_.state_distance(a, b);
  }
  State extend_state(const State& s, const System& b) const { return base_.extend_state(s, b); }

  std::vector<Op> enumerate_operations(const System& a) const {
    std::vector<Op> reps;
    std::vector<std::string> seen;
    const auto states = base_.enumerate_states(a);
    std::vector<std::vector<std::string>> sigs;
    for (const Op& u : base_.enumerate_operations(a)) {
      auto sig = signature(u, states);
      bool found = false;
      for (const auto& s : sigs)
        if (s == sig) {
          found = true;
          break;
        }
      if (!found) {
        sigs.push_back(std::move(sig));
        reps.push_back(canonicalize(u));
      }
    }
    return reps;
  }

  std::vector<State> enumerate_states(const System& a) const { return base_.enumerate_states(a); }

  State sample_state(const System& a, Rng& rng) const
    requires SampleableTheory<T>
  {
    return base_.sample_state(a, rng);
  }
  Op sample_operation(const System& a, Rng& rng) const
    requires SampleableTheory<T>
  {
    return canonicalize(base_.sample_operation(a, rng));
  }

  Json op_json(const Op& u) const { return base_.op_json(u); }
  Json state_json(const State& s) const { return base_.state_json(s); }

 private:
  std::vector<std::string> signature(const Op& u, const std::vector<State>& states) const {
    std::vector<std::string> sig;
    sig.reserve(states.size());
    for (const State& s : states) sig.push_back(base_.state_json(base_.act(u, s)).dump());
    return sig;
  }

  T base_;
};

/// Builds the faithful quotient of a theory. Without enumerable state
/// spaces the class structure cannot be computed exhaustively.
template <TheoryContract T>
auto faithfulize(const T& th) {
  if constexpr (EnumerableTheory<T>) {
    return FaithfulizedTheory<T>(th);
  } else {
    throw BudgetExceededError(
        "faithfulize requires enumerable state spaces; this theory only supports sampling");
  }
}

}  // namespace noumenal
