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

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "noumenal/errors.hpp"

namespace noumenal {

class System;

/// Ordered universe of sites. Systems are subsets of these sites, so the
/// lattice of systems is the powerset lattice over the universe.
class SiteUniverse {
 public:
  static constexpr std::size_t kDefaultMaxSites = 16;
  static constexpr std::size_t kHardMaxSites = 64;  // mask width

  explicit SiteUniverse(std::vector<std::string> labels,
                        std::size_t max_sites = kDefaultMaxSites)
      : labels_(std::move(labels)) {
    if (max_sites > kHardMaxSites) max_sites = kHardMaxSites;
    if (labels_.empty()) throw ValidationError("site universe needs at least one site");
    if (labels_.size() > max_sites)
      throw ValidationError("site universe exceeds the configured cap of " +
                            std::to_string(max_sites) + " sites");
    for (std::size_t i = 0; i < labels_.size(); ++i)
      for (std::size_t j = i + 1; j < labels_.size(); ++j)
        if (labels_[i] == labels_[j])
          throw ValidationError("duplicate site label '" + labels_[i] + "'");
  }

  /// Universe with labels s0, s1, ...
  static SiteUniverse numbered(std::size_t count) {
    std::vector<std::string> labels;
    labels.reserve(count);
    for (std::size_t i = 0; i < count; ++i) labels.push_back("s" + std::to_string(i));
    return SiteUniverse(std::move(labels));
  }

  std::size_t site_count() const { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const { return labels_; }

  std::optional<std::size_t> index_of(std::string_view label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i] == label) return i;
    return std::nullopt;
  }

  /// Universes compare by label sequence, not by object identity.
  bool same_as(const SiteUniverse& other) const {
    return this == &other || labels_ == other.labels_;
  }

  std::uint64_t full_mask() const {
    return site_count() == 64 ? ~std::uint64_t{0}
                              : ((std::uint64_t{1} << site_count()) - 1);
  }

  // Defined below System.
  System empty_system() const;
  System global_system() const;
  System singleton(std::size_t site) const;
  System system_of(std::span<const std::size_t> sites) const;
  System system_of(std::initializer_list<std::size_t> sites) const;
  System system_of_mask(std::uint64_t mask) const;
  /// All 2^n systems in ascending mask order.
  std::vector<System> all_systems() const;

 private:
  std::vector<std::string> labels_;
};

/// An element of the boolean lattice of systems: a subset of the universe's
/// sites, held as a bitmask. Immutable value; the algebraic operations throw
/// UniverseMismatchError when operands come from different universes.
class System {
 public:
  System() : universe_(nullptr), mask_(0) {}
  System(const SiteUniverse* universe, std::uint64_t mask)
      : universe_(universe), mask_(mask) {}

  const SiteUniverse& universe() const { return *universe_; }
  std::uint64_t mask() const { return mask_; }

  bool is_empty() const { return mask_ == 0; }
  bool is_global() const { return mask_ == universe_->full_mask(); }
  std::size_t site_count() const { return static_cast<std::size_t>(std::popcount(mask_)); }
  bool contains_site(std::size_t site) const { return (mask_ >> site) & 1u; }

  /// Ascending site indices of this system.
  std::vector<std::size_t> sites() const {
    std::vector<std::size_t> out;
    out.reserve(site_count());
    for (std::size_t i = 0; i < universe_->site_count(); ++i)
      if (contains_site(i)) out.push_back(i);
    return out;
  }

  System union_with(const System& other) const {
    check_universe(other);
    return System(universe_, mask_ | other.mask_);
  }

  System intersection_with(const System& other) const {
    check_universe(other);
    return System(universe_, mask_ & other.mask_);
  }

  System complement() const {
    return System(universe_, ~mask_ & universe_->full_mask());
  }

  System difference_with(const System& other) const {
    check_universe(other);
    return System(universe_, mask_ & ~other.mask_);
  }

  /// A is a subsystem of B when their intersection is A itself.
  bool is_subsystem_of(const System& other) const {
    check_universe(other);
    return (mask_ & other.mask_) == mask_;
  }

  /// Disjoint systems share no sites; the empty system is disjoint from
  /// everything, itself included.
  bool is_disjoint_from(const System& other) const {
    check_universe(other);
    return (mask_ & other.mask_) == 0;
  }

  // Total order usable for containers; equality requires the same universe
  // content and the same member set.
  bool operator==(const System& other) const {
    if (universe_ == other.universe_) return mask_ == other.mask_;
    if (!universe_ || !other.universe_) return false;
    return universe_->same_as(*other.universe_) && mask_ == other.mask_;
  }
  bool operator!=(const System& other) const { return !(*this == other); }
  bool operator<(const System& other) const { return mask_ < other.mask_; }

  /// Labels joined with '+'; the empty system prints as "{}".
  std::string to_string() const {
    if (is_empty()) return "{}";
    std::string out;
    for (std::size_t i = 0; i < universe_->site_count(); ++i) {
      if (!contains_site(i)) continue;
      if (!out.empty()) out += '+';
      out += universe_->label(i);
    }
    return out;
  }

 private:
  void check_universe(const System& other) const {
    if (universe_ == other.universe_) return;
    if (!universe_ || !other.universe_ || !universe_->same_as(*other.universe_))
      throw UniverseMismatchError("systems belong to different site universes");
  }

  const SiteUniverse* universe_;
  std::uint64_t mask_;
};

inline System SiteUniverse::empty_system() const { return System(this, 0); }
inline System SiteUniverse::global_system() const { return System(this, full_mask()); }

inline System SiteUniverse::singleton(std::size_t site) const {
  if (site >= site_count()) throw ValidationError("site index out of range");
  return System(this, std::uint64_t{1} << site);
}

inline System SiteUniverse::system_of(std::span<const std::size_t> sites) const {
  std::uint64_t mask = 0;
  for (std::size_t s : sites) {
    if (s >= site_count()) throw ValidationError("site index out of range");
    mask |= std::uint64_t{1} << s;
  }
  return System(this, mask);
}

inline System SiteUniverse::system_of(std::initializer_list<std::size_t> sites) const {
  return system_of(std::span<const std::size_t>(sites.begin(), sites.size()));
}

inline System SiteUniverse::system_of_mask(std::uint64_t mask) const {
  if ((mask & ~full_mask()) != 0) throw ValidationError("mask has sites outside the universe");
  return System(this, mask);
}

inline std::vector<System> SiteUniverse::all_systems() const {
  std::vector<System> out;
  const std::uint64_t full = full_mask();
  out.reserve(static_cast<std::size_t>(full) + 1);
  for (std::uint64_t m = 0;; ++m) {
    out.push_back(System(this, m));
    if (m == full) break;
  }
  return out;
}

/// Least upper bound of a finite set of systems; the empty join is the
/// empty system.
inline System generalized_union(const SiteUniverse& universe,
                                std::span<const System> parts) {
  System acc = universe.empty_system();
  for (const System& p : parts) acc = acc.union_with(p);
  return acc;
}

}  // namespace noumenal
