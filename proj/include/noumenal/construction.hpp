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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "noumenal/core.hpp"

namespace noumenal {

/// A noumenal state of system A: the class of a global operation W under
/// the relation "W ~_A W' iff W = (I^A x V) W' for some V on the complement
/// of A". Lazy representation: a representative plus the system tag; the
/// equality oracle decides membership, so the class is never materialized
/// unless the theory is enumerable.
template <TheoryContract T>
struct NoumenalClass {
  System system;
  typename T::Op representative;  // an element of the global operation group
};

/// The fundamental relation: W ~_A W2 iff W W2^-1 acts as the identity on A,
/// i.e. factors through A's complement.
template <TheoryContract T>
bool equivalent(const T& th, const typename T::Op& w, const typename T::Op& w2,
                const System& a) {
  return th.factor_through_complement(th.compose(w, th.inverse(w2)), a).has_value();
}

template <TheoryContract T>
NoumenalClass<T> class_of(const T& th, typename T::Op global_rep, const System& sys) {
  if (!global_rep.system().is_global())
    throw SystemMismatchError("noumenal classes are classes of global operations");
  if (!sys.is_subsystem_of(global_rep.system()))
    throw UniverseMismatchError("class system belongs to a different universe");
  return NoumenalClass<T>{sys, std::move(global_rep)};
}

template <TheoryContract T>
NoumenalClass<T> identity_class(const T& th, const System& sys) {
  return NoumenalClass<T>{sys, th.identity(sys.universe().global_system())};
}

template <TheoryContract T>
bool class_equal(const T& th, const NoumenalClass<T>& n1, const NoumenalClass<T>& n2) {
  if (n1.system != n2.system) return false;
  return equivalent(th, n1.representative, n2.representative, n1.system);
}

/// Noumenal projector: same representative, smaller system. Well defined
/// because ~_B refines ~_A whenever A is a subsystem of B.
template <TheoryContract T>
NoumenalClass<T> class_project(const T& th, const NoumenalClass<T>& n, const System& a) {
  if (!a.is_subsystem_of(n.system))
    throw NotASubsystemError("noumenal projector target is not a subsystem");
  return NoumenalClass<T>{a, n.representative};
}

/// Noumenal action of U on A: left-multiply the representative by U padded
/// with the identity on A's complement.
template <TheoryContract T>
NoumenalClass<T> class_act(const T& th, const typename T::Op& u, const NoumenalClass<T>& n) {
  if (u.system() != n.system)
    throw SystemMismatchError("noumenal action: operation and class systems differ");
  return NoumenalClass<T>{n.system, th.compose(embed_global(th, u), n.representative)};
}

/// The subgroup H_A = { I^A x V : V on A's complement } as global
/// operations. Finite theories only.
template <EnumerableTheory T>
std::vector<typename T::Op> subgroup_fixing(const T& th, const System& a) {
  const System rest = a.complement();
  std::vector<typename T::Op> out;
  if (a.is_global()) {
    out.push_back(th.identity(a));
    return out;
  }
  for (const auto& v : th.enumerate_operations(rest)) {
    if (a.is_empty())
      out.push_back(v);
    else
      out.push_back(th.product(th.identity(a), v));
  }
  return out;
}

/// Join product of compatible noumenal states on disjoint systems: the
/// class, on the union, of a common representative. Compatibility means
/// W1 W2^-1 lies in the set product H_A H_B; enumerable theories decide it
/// by scanning H_A, continuous theories by direct factorizations plus the
/// theory's local-split detector. Every accepted join is re-verified
/// against both inputs, so the procedure never joins incompatible classes.
template <TheoryContract T>
NoumenalClass<T> class_join(const T& th, const NoumenalClass<T>& n1, const NoumenalClass<T>& n2) {
  const System a = n1.system, b = n2.system;
  if (!a.is_disjoint_from(b))
    throw DisjointnessError("join: systems " + a.to_string() + " and " + b.to_string() +
                            " overlap");
  const System ab = a.union_with(b);
  const typename T::Op m = th.compose(n1.representative, th.inverse(n2.representative));

  std::optional<typename T::Op> common;
  if constexpr (EnumerableTheory<T>) {
    for (const auto& h : subgroup_fixing(th, a)) {
      const auto residual = th.compose(th.inverse(h), m);
      if (th.factor_through_complement(residual, b)) {
        common = th.compose(th.inverse(h), n1.representative);
        break;
      }
    }
  } else {
    if (th.factor_through_complement(m, a)) {
      common = n2.representative;
    } else if (th.factor_through_complement(m, b)) {
      common = n1.representative;
    } else if constexpr (ProvidesLocalSplit<T>) {
      if (auto split = th.try_local_split(m, a, b))
        common = th.compose(th.inverse(split->first), n1.representative);
    }
  }

  if (!common)
    throw IncompatibleClassesError(
        "join: no common representative found; W1 W2^-1 does not factor as "
        "(I^" + a.to_string() + " x V1)(I^" + b.to_string() + " x V2)");
  if (!equivalent(th, *common, n1.representative, a) ||
      !equivalent(th, *common, n2.representative, b))
    throw IncompatibleClassesError("join: candidate representative failed verification");
  return NoumenalClass<T>{ab, std::move(*common)};
}

/// Generalized join over mutually disjoint systems, as a left fold of the
/// binary join (sound by associativity).
template <TheoryContract T>
NoumenalClass<T> class_join_many(const T& th, std::span<const NoumenalClass<T>> parts) {
  if (parts.empty()) throw ValidationError("generalized join needs at least one part");
  for (std::size_t i = 0; i < parts.size(); ++i)
    for (std::size_t j = i + 1; j < parts.size(); ++j)
      if (!parts[i].system.is_disjoint_from(parts[j].system))
        throw DisjointnessError("generalized join: parts overlap");
  NoumenalClass<T> acc = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) acc = class_join(th, acc, parts[i]);
  return acc;
}

/// The universal homomorphism family indexed by global phenomenal states:
/// phi_rho([W]^A) = project(W(rho), A). Representative independence is the
/// no-signalling principle at work.
template <TheoryContract T>
typename T::State phi_rho(const T& th, const typename T::State& rho, const NoumenalClass<T>& n) {
  if (!rho.system().is_global())
    throw SystemMismatchError("phi_rho takes a global phenomenal state");
  return th.project(th.act(n.representative, rho), n.system);
}

/// Materialized coset table of one system of an enumerable theory: every
/// noumenal class with its canonical (lexicographically minimal serialized)
/// representative and member count.
template <EnumerableTheory T>
struct CosetTable {
  System system;
  struct Entry {
    typename T::Op canonical;
    std::size_t size;
  };
  std::vector<Entry> classes;
};

template <EnumerableTheory T>
CosetTable<T> enumerate_cosets(const T& th, const System& sys) {
  const System global = th.universe().global_system();
  const auto group = th.enumerate_operations(global);
  const auto h = subgroup_fixing(th, sys);
  std::map<std::string, typename CosetTable<T>::Entry> classes;
  for (const auto& w : group) {
    std::string best_key;
    const typename T::Op* best = nullptr;
    std::vector<typename T::Op> members;
    members.reserve(h.size());
    for (const auto& e : h) members.push_back(th.compose(e, w));
    for (const auto& mem : members) {
      std::string key = th.op_json(mem).dump();
      if (!best || key < best_key) {
        best_key = std::move(key);
        best = &mem;
      }
    }
    auto it = classes.find(best_key);
    if (it == classes.end())
      classes.emplace(best_key, typename CosetTable<T>::Entry{*best, h.size()});
  }
  CosetTable<T> out;
  out.system = sys;
  for (auto& [key, entry] : classes) out.classes.push_back(std::move(entry));
  return out;
}

/// Canonical representative of a class in an enumerable theory: the
/// lexicographically minimal element of H_A W.
template <EnumerableTheory T>
typename T::Op canonical_representative(const T& th, const NoumenalClass<T>& n) {
  std::optional<typename T::Op> best;
  std::string best_key;
  for (const auto& e : subgroup_fixing(th, n.system)) {
    auto mem = th.compose(e, n.representative);
    std::string key = th.op_json(mem).dump();
    if (!best || key < best_key) {
      best_key = std::move(key);
      best = std::move(mem);
    }
  }
  return *best;
}

/// Full coset export across every system of the lattice.
template <EnumerableTheory T>
Json coset_table_json(const T& th) {
  Json out;
  out["format"] = "noumenal-cosets/1";
  out["sites"] = th.universe().labels();
  Json systems = Json::array();
  for (const System& sys : th.universe().all_systems()) {
    const auto table = enumerate_cosets(th, sys);
    Json entry;
    entry["system"] = sys.to_string();
    entry["class_count"] = table.classes.size();
    Json classes = Json::array();
    for (const auto& c : table.classes) {
      Json cj;
      cj["representative"] = th.op_json(c.canonical);
      cj["size"] = c.size;
      classes.push_back(std::move(cj));
    }
    entry["classes"] = std::move(classes);
    systems.push_back(std::move(entry));
  }
  out["systems"] = std::move(systems);
  return out;
}

/// The assembled local-realistic model over a verified theory: noumenal
/// classes with projectors, action, join, and the universal epimorphism
/// over augmented (class, reference state) pairs.
template <TheoryContract T>
class LocalRealisticModel {
 public:
  using Theory = T;
  using Op = typename T::Op;
  using State = typename T::State;
  using Class = NoumenalClass<T>;

  explicit LocalRealisticModel(T theory) : theory_(std::move(theory)) {}

  const T& theory() const { return theory_; }

  Class class_of(const Op& rep, const System& sys) const {
    return noumenal::class_of(theory_, rep, sys);
  }
  Class identity_class(const System& sys) const { return noumenal::identity_class(theory_, sys); }
  Class project(const Class& n, const System& a) const {
    return class_project(theory_, n, a);
  }
  Class act(const Op& u, const Class& n) const { return class_act(theory_, u, n); }
  Class join(const Class& n1, const Class& n2) const { return class_join(theory_, n1, n2); }
  Class join_many(std::span<const Class> parts) const {
    return class_join_many(theory_, parts);
  }
  State phi(const State& rho, const Class& n) const { return phi_rho(theory_, rho, n); }
  bool equal(const Class& n1, const Class& n2) const { return class_equal(theory_, n1, n2); }

  /// Augmented noumenal state: a class paired with the reference state
  /// indexing its homomorphism. Restores surjectivity of the family.
  struct Augmented {
    Class cls;
    State reference;
  };

  Augmented augment(Class cls, State reference) const {
    if (!reference.system().is_global())
      throw SystemMismatchError("augmented reference states are global phenomenal states");
    return Augmented{std::move(cls), std::move(reference)};
  }
  Augmented project_aug(const Augmented& n, const System& a) const {
    return Augmented{project(n.cls, a), n.reference};
  }
  Augmented act_aug(const Op& u, const Augmented& n) const {
    return Augmented{act(u, n.cls), n.reference};
  }
  /// Defined only when both carry the same reference state.
  Augmented join_aug(const Augmented& n1, const Augmented& n2) const {
    if (!theory_.state_equal(n1.reference, n2.reference))
      throw IncompatibleClassesError("augmented join: reference states differ");
    return Augmented{join(n1.cls, n2.cls), n1.reference};
  }
  State phi_aug(const Augmented& n) const { return phi(n.reference, n.cls); }
  bool equal_aug(const Augmented& n1, const Augmented& n2) const {
    return theory_.state_equal(n1.reference, n2.reference) && equal(n1.cls, n2.cls);
  }

 private:
  T theory_;
};

}  // namespace noumenal
