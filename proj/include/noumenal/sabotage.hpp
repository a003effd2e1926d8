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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "noumenal/classical.hpp"
#include "noumenal/construction.hpp"
#include "noumenal/core.hpp"
#include "noumenal/quantum.hpp"

namespace noumenal {

// Deliberately broken variants of theory and construction operations. Each
// one models a plausible implementation bug; the verifier's mutation
// sensitivity suite asserts that every one of them trips at least one named
// axiom check. They are loadable from spec files so the CLI's failure paths
// can be demonstrated on demand.

enum class TheoryMutation {
  none,
  swapped_product,            // product(u, v) becomes u x v^-1
  swapped_compose,            // compose(u, v) becomes v then u reversed
  inverse_returns_identity,   // inverse(u) = I
  misaligned_projector,       // projects onto the trailing sites instead of A's
  raw_phase_classes,          // quantum only: no phase quotient, exact equality
  product_skips_reindex,      // payload placed by argument order, not site order
  factor_always_absent,       // factorization oracle always gives up
  factor_skips_check,         // factorization oracle returns unverified guesses
};

enum class ConstructionMutation {
  none,
  action_misplaced_padding,         // embeds U on the leading sites, not on A
  action_skips_quotient,            // result tagged with the global system
  join_ignores_compatibility,       // keeps the first representative blindly
  phi_skips_action,                 // projects the reference state unacted
  class_equality_by_representative, // compares representatives, not cosets
};

inline const std::vector<std::pair<std::string, TheoryMutation>>& theory_mutation_names() {
  static const std::vector<std::pair<std::string, TheoryMutation>> names = {
      {"swapped-product", TheoryMutation::swapped_product},
      {"swapped-compose", TheoryMutation::swapped_compose},
      {"inverse-identity", TheoryMutation::inverse_returns_identity},
      {"misaligned-projector", TheoryMutation::misaligned_projector},
      {"raw-phase-classes", TheoryMutation::raw_phase_classes},
      {"product-skips-reindex", TheoryMutation::product_skips_reindex},
      {"factor-always-absent", TheoryMutation::factor_always_absent},
      {"factor-skips-check", TheoryMutation::factor_skips_check},
  };
  return names;
}

inline const std::vector<std::pair<std::string, ConstructionMutation>>&
construction_mutation_names() {
  static const std::vector<std::pair<std::string, ConstructionMutation>> names = {
      {"action-misplaced-padding", ConstructionMutation::action_misplaced_padding},
      {"action-skips-quotient", ConstructionMutation::action_skips_quotient},
      {"join-ignores-compatibility", ConstructionMutation::join_ignores_compatibility},
      {"phi-skips-action", ConstructionMutation::phi_skips_action},
      {"class-equality-by-representative", ConstructionMutation::class_equality_by_representative},
  };
  return names;
}

/// Wraps a theory and reroutes one operation through a named bug. Everything
/// not touched by the mutation delegates to the base theory.
template <TheoryContract T>
class MutatedTheory {
 public:
  using Op = typename T::Op;
  using State = typename T::State;

  MutatedTheory(T base, TheoryMutation mutation)
      : base_(std::move(base)), mutation_(mutation) {}

  const T& base() const { return base_; }
  TheoryMutation mutation() const { return mutation_; }
  const SiteUniverse& universe() const { return base_.universe(); }

  Op identity(const System& a) const { return base_.identity(a); }

  Op compose(const Op& u, const Op& v) const {
    if (mutation_ == TheoryMutation::swapped_compose) return base_.compose(v, u);
    if constexpr (std::same_as<T, QuantumTheory>) {
      if (mutation_ == TheoryMutation::raw_phase_classes)
        return UnitaryClass::raw(u.system(), u.representative() * v.representative());
    }
    return base_.compose(u, v);
  }

  Op inverse(const Op& u) const {
    if (mutation_ == TheoryMutation::inverse_returns_identity) return base_.identity(u.system());
    return base_.inverse(u);
  }

  State act(const Op& u, const State& s) const { return base_.act(u, s); }

  State project(const State& s, const System& a) const {
    if (mutation_ == TheoryMutation::misaligned_projector && a != s.system()) {
      // Keep the trailing |A| sites of the source instead of A itself.
      const auto super_sites = s.system().sites();
      const std::size_t k = a.site_count();
      std::vector<std::size_t> wrong(super_sites.end() - static_cast<std::ptrdiff_t>(k),
                                     super_sites.end());
      const System wrong_sys = s.system().universe().system_of(wrong);
      return base_.retag_state(base_.project(s, wrong_sys), a);
    }
    return base_.project(s, a);
  }

  Op product(const Op& u, const Op& v) const {
    switch (mutation_) {
      case TheoryMutation::swapped_product:
        return base_.product(u, base_.inverse(v));
      case TheoryMutation::product_skips_reindex: {
        // Place the first argument on the leading sites of the union and the
        // second on the rest, ignoring where the payloads actually live.
        const System ab = u.system().union_with(v.system());
        const auto sites = ab.sites();
        const std::size_t ka = u.system().site_count();
        const System first = ab.universe().system_of(
            std::vector<std::size_t>(sites.begin(), sites.begin() + static_cast<std::ptrdiff_t>(ka)));
        const System second = ab.difference_with(first);
        return base_.product(base_.retag(u, first), base_.retag(v, second));
      }
      default:
        break;
    }
    if constexpr (std::same_as<T, QuantumTheory>) {
      if (mutation_ == TheoryMutation::raw_phase_classes) {
        Op honest = base_.product(u, v);
        return UnitaryClass::raw(honest.system(), honest.representative());
      }
    }
    return base_.product(u, v);
  }

  std::optional<Op> factor_through_complement(const Op& w, const System& a) const {
    if (mutation_ == TheoryMutation::factor_always_absent) return std::nullopt;
    if (mutation_ == TheoryMutation::factor_skips_check) return unverified_factor(w, a);
    return base_.factor_through_complement(w, a);
  }

  bool op_equal(const Op& u, const Op& v) const {
    if constexpr (std::same_as<T, QuantumTheory>) {
      if (mutation_ == TheoryMutation::raw_phase_classes) {
        if (u.system() != v.system()) return false;
        return (u.representative() - v.representative()).norm() <=
               base_.config().class_tolerance;
      }
    }
    return base_.op_equal(u, v);
  }

  double op_distance(const Op& u, const Op& v) const {
    if constexpr (std::same_as<T, QuantumTheory>) {
      if (mutation_ == TheoryMutation::raw_phase_classes) {
        if (u.system() != v.system()) return 1.0;
        return (u.representative() - v.representative()).norm() /
               std::sqrt(static_cast<double>(u.representative().rows()));
      }
    }
    return base_.op_distance(u, v);
  }

  bool state_equal(const State& a, const State& b) const { return base_.state_equal(a, b); }
  double state_distance(const State& a, const State& b) const {
    return base_.state_distance(a, b);
  }
  State extend_state(const State& s, const System& b) const { return base_.extend_state(s, b); }

  std::vector<Op> enumerate_operations(const System& a) const
    requires EnumerableTheory<T>
  {
    return base_.enumerate_operations(a);
  }
  std::vector<State> enumerate_states(const System& a) const
    requires EnumerableTheory<T>
  {
    return base_.enumerate_states(a);
  }
  Op sample_operation(const System& a, Rng& rng) const
    requires SampleableTheory<T>
  {
    return base_.sample_operation(a, rng);
  }
  State sample_state(const System& a, Rng& rng) const
    requires SampleableTheory<T>
  {
    return base_.sample_state(a, rng);
  }

  std::pair<Op, Op> confusable_pair(const System& a, Rng& rng) const
    requires ProvidesConfusablePair<T>
  {
    if constexpr (std::same_as<T, QuantumTheory>) {
      if (mutation_ == TheoryMutation::raw_phase_classes) {
        Op u = base_.sample_operation(a, rng);
        const double theta = 2.0 * 3.141592653589793 * rng.uniform01();
        return {UnitaryClass::raw(a, u.representative()),
                UnitaryClass::raw(a, std::polar(1.0, theta) * u.representative())};
      }
    }
    return base_.confusable_pair(a, rng);
  }

  std::optional<std::pair<Op, Op>> try_local_split(const Op& m, const System& a,
                                                   const System& b) const
    requires ProvidesLocalSplit<T>
  {
    return base_.try_local_split(m, a, b);
  }

  Op retag(const Op& u, const System& sys) const { return base_.retag(u, sys); }
  State retag_state(const State& s, const System& sys) const {
    return base_.retag_state(s, sys);
  }

  Op gate_operation(const std::string& name, const std::vector<std::size_t>& args) const
    requires std::same_as<T, QuantumTheory>
  {
    return base_.gate_operation(name, args);
  }

  Json op_json(const Op& u) const { return base_.op_json(u); }
  Json state_json(const State& s) const { return base_.state_json(s); }

 private:
  /// A factorization guess assembled without the consistency or residual
  /// checks that make the honest oracle sound.
  std::optional<Op> unverified_factor(const Op& w, const System& a) const {
    const System x = w.system();
    if (!a.is_subsystem_of(x)) throw NotASubsystemError("factor: not a subsystem");
    const System rest = x.difference_with(a);
    if constexpr (std::same_as<T, QuantumTheory>) {
      const double da = static_cast<double>(std::size_t{1} << a.site_count());
      const Matrix traced = base_.project(State(x, w.representative()), rest).matrix();
      return UnitaryClass::raw(rest, traced / da);
    } else if constexpr (std::same_as<T, ClassicalTheory>) {
      // Read the residual map off the slice where the A part sits at its
      // first value, with no consistency scan across the other slices.
      std::vector<std::uint32_t> images;
      const auto full_states = base_.enumerate_states(x);
      const auto rest_states = base_.enumerate_states(rest);
      const auto a_states = base_.enumerate_states(a);
      for (const auto& xr : rest_states) {
        for (const auto& full : full_states) {
          if (!base_.state_equal(base_.project(full, rest), xr)) continue;
          if (!a.is_empty() &&
              !base_.state_equal(base_.project(full, a), a_states.front()))
            continue;
          const auto img = base_.project(base_.act(w, full), rest);
          images.push_back(static_cast<std::uint32_t>(base_.state_index(img)));
          break;
        }
      }
      return Op(rest, std::move(images));
    } else {
      return base_.factor_through_complement(w, a);
    }
  }

  T base_;
  TheoryMutation mutation_;
};

/// Wraps a local-realistic model and reroutes one construction-level
/// operation through a named bug. Shares the surface of
/// LocalRealisticModel, so the same verification catalogue runs against it.
template <TheoryContract T>
class MutatedModel {
 public:
  using Theory = T;
  using Op = typename T::Op;
  using State = typename T::State;
  using Class = NoumenalClass<T>;
  using Augmented = typename LocalRealisticModel<T>::Augmented;

  MutatedModel(T theory, ConstructionMutation mutation)
      : base_(std::move(theory)), mutation_(mutation) {}

  const T& theory() const { return base_.theory(); }
  ConstructionMutation mutation() const { return mutation_; }

  Class class_of(const Op& rep, const System& sys) const { return base_.class_of(rep, sys); }
  Class identity_class(const System& sys) const { return base_.identity_class(sys); }
  Class project(const Class& n, const System& a) const { return base_.project(n, a); }

  Class act(const Op& u, const Class& n) const {
    const T& th = theory();
    if (mutation_ == ConstructionMutation::action_misplaced_padding) {
      // Pad the payload onto the leading |A| sites of the universe.
      const auto all = th.universe().global_system().sites();
      const std::size_t k = u.system().site_count();
      const System leading = th.universe().system_of(
          std::vector<std::size_t>(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k)));
      Op placed = th.retag(u, leading);
      Op global = leading.is_global() ? placed : th.product(placed, th.identity(leading.complement()));
      return Class{n.system, th.compose(global, n.representative)};
    }
    if (mutation_ == ConstructionMutation::action_skips_quotient) {
      Class honest = base_.act(u, n);
      return Class{th.universe().global_system(), honest.representative};
    }
    return base_.act(u, n);
  }

  Class join(const Class& n1, const Class& n2) const {
    if (mutation_ == ConstructionMutation::join_ignores_compatibility) {
      if (!n1.system.is_disjoint_from(n2.system))
        throw DisjointnessError("join: systems overlap");
      return Class{n1.system.union_with(n2.system), n1.representative};
    }
    return base_.join(n1, n2);
  }

  Class join_many(std::span<const Class> parts) const {
    if (mutation_ == ConstructionMutation::join_ignores_compatibility) {
      Class acc = parts[0];
      for (std::size_t i = 1; i < parts.size(); ++i) acc = join(acc, parts[i]);
      return acc;
    }
    return base_.join_many(parts);
  }

  State phi(const State& rho, const Class& n) const {
    if (mutation_ == ConstructionMutation::phi_skips_action)
      return theory().project(rho, n.system);
    return base_.phi(rho, n);
  }

  bool equal(const Class& n1, const Class& n2) const {
    if (mutation_ == ConstructionMutation::class_equality_by_representative)
      return n1.system == n2.system && theory().op_equal(n1.representative, n2.representative);
    return base_.equal(n1, n2);
  }

  Augmented augment(Class cls, State reference) const {
    return base_.augment(std::move(cls), std::move(reference));
  }
  Augmented project_aug(const Augmented& n, const System& a) const {
    return Augmented{project(n.cls, a), n.reference};
  }
  Augmented act_aug(const Op& u, const Augmented& n) const {
    return Augmented{act(u, n.cls), n.reference};
  }
  Augmented join_aug(const Augmented& n1, const Augmented& n2) const {
    if (!theory().state_equal(n1.reference, n2.reference))
      throw IncompatibleClassesError("augmented join: reference states differ");
    return Augmented{join(n1.cls, n2.cls), n1.reference};
  }
  State phi_aug(const Augmented& n) const { return phi(n.reference, n.cls); }
  bool equal_aug(const Augmented& n1, const Augmented& n2) const {
    return theory().state_equal(n1.reference, n2.reference) && equal(n1.cls, n2.cls);
  }

 private:
  LocalRealisticModel<T> base_;
  ConstructionMutation mutation_;
};

}  // namespace noumenal
