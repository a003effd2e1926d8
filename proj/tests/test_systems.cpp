#include <catch2/catch_amalgamated.hpp>

#include "noumenal/systems.hpp"

using namespace noumenal;

TEST_CASE("union, intersection, complement on small systems", "[systems]") {
  SiteUniverse u = SiteUniverse::numbered(3);
  const System s0 = u.singleton(0), s1 = u.singleton(1);
  const System s01 = u.system_of({0, 1}), s12 = u.system_of({1, 2});

  CHECK(s0.union_with(s1) == s01);
  CHECK(s0.union_with(u.empty_system()) == s0);
  CHECK(s01.union_with(s12) == u.system_of({0, 1, 2}));

  CHECK(s01.intersection_with(s12) == s1);
  CHECK(s0.intersection_with(s0.complement()) == u.empty_system());
  CHECK(s0.intersection_with(s0) == s0);

  CHECK(u.empty_system().complement() == u.global_system());
  CHECK(u.global_system().complement() == u.empty_system());
  CHECK(s1.complement() == u.system_of({0, 2}));
  CHECK(s1.complement().complement() == s1);
}

TEST_CASE("subsystem and disjointness predicates", "[systems]") {
  SiteUniverse u = SiteUniverse::numbered(3);
  CHECK(u.singleton(1).is_subsystem_of(u.system_of({0, 1})));
  CHECK_FALSE(u.system_of({0, 2}).is_subsystem_of(u.system_of({0, 1})));
  for (const System& a : u.all_systems()) CHECK(u.empty_system().is_subsystem_of(a));

  CHECK(u.singleton(0).is_disjoint_from(u.singleton(1)));
  CHECK(u.empty_system().is_disjoint_from(u.empty_system()));
  CHECK_FALSE(u.system_of({0, 1}).is_disjoint_from(u.singleton(1)));
}

TEST_CASE("boolean lattice identities hold exhaustively on four sites", "[systems]") {
  SiteUniverse u = SiteUniverse::numbered(4);
  const auto systems = u.all_systems();
  REQUIRE(systems.size() == 16);
  const System empty = u.empty_system(), global = u.global_system();
  for (const System& a : systems)
    for (const System& b : systems)
      for (const System& c : systems) {
        REQUIRE(a.union_with(b) == b.union_with(a));
        REQUIRE(a.intersection_with(b) == b.intersection_with(a));
        REQUIRE(a.union_with(b.union_with(c)) == a.union_with(b).union_with(c));
        REQUIRE(a.intersection_with(b.intersection_with(c)) ==
                a.intersection_with(b).intersection_with(c));
        REQUIRE(a.intersection_with(b.union_with(c)) ==
                a.intersection_with(b).union_with(a.intersection_with(c)));
        REQUIRE(a.union_with(b.intersection_with(c)) ==
                a.union_with(b).intersection_with(a.union_with(c)));
        REQUIRE(a.union_with(a.intersection_with(b)) == a);
        REQUIRE(a.intersection_with(a.union_with(b)) == a);
        REQUIRE(a.union_with(b).complement() ==
                a.complement().intersection_with(b.complement()));
        REQUIRE(a.intersection_with(b).complement() ==
                a.complement().union_with(b.complement()));
      }
  for (const System& a : systems) {
    REQUIRE(a.complement().complement() == a);
    REQUIRE(a.intersection_with(a.complement()) == empty);
    REQUIRE(a.union_with(a.complement()) == global);
    REQUIRE(a.is_subsystem_of(global));
    REQUIRE(empty.is_subsystem_of(a));
  }
}

TEST_CASE("subsystem relation is a partial order", "[systems]") {
  SiteUniverse u = SiteUniverse::numbered(4);
  const auto systems = u.all_systems();
  for (const System& a : systems) {
    REQUIRE(a.is_subsystem_of(a));
    for (const System& b : systems) {
      if (a.is_subsystem_of(b) && b.is_subsystem_of(a)) REQUIRE(a == b);
      for (const System& c : systems)
        if (a.is_subsystem_of(b) && b.is_subsystem_of(c)) REQUIRE(a.is_subsystem_of(c));
    }
  }
}

TEST_CASE("generalized union equals any fold of binary unions", "[systems]") {
  SiteUniverse u = SiteUniverse::numbered(4);
  const std::vector<System> parts{u.singleton(0), u.singleton(1), u.singleton(2)};
  CHECK(generalized_union(u, parts) == u.system_of({0, 1, 2}));

  std::vector<System> shuffled{parts[2], parts[0], parts[1]};
  CHECK(generalized_union(u, shuffled) == generalized_union(u, parts));

  const std::vector<System> overlapping{u.system_of({0, 1}), u.singleton(1)};
  CHECK(generalized_union(u, overlapping) == u.system_of({0, 1}));

  const std::vector<System> none;
  CHECK(generalized_union(u, none) == u.empty_system());
}

TEST_CASE("systems from different universes refuse to combine", "[systems]") {
  SiteUniverse u1({"a", "b"});
  SiteUniverse u2({"x", "y"});
  CHECK_THROWS_AS(u1.singleton(0).union_with(u2.singleton(0)), UniverseMismatchError);
  CHECK_THROWS_AS(u1.singleton(0).intersection_with(u2.singleton(1)), UniverseMismatchError);
  CHECK_THROWS_AS(u1.singleton(0).is_subsystem_of(u2.singleton(0)), UniverseMismatchError);

  // Same labels means the same universe, even for separate objects.
  SiteUniverse u1_copy({"a", "b"});
  CHECK(u1.singleton(0) == u1_copy.singleton(0));
  CHECK_NOTHROW(u1.singleton(0).union_with(u1_copy.singleton(1)));
}

TEST_CASE("universe validation", "[systems]") {
  CHECK_THROWS_AS(SiteUniverse({}), ValidationError);
  CHECK_THROWS_AS(SiteUniverse({"a", "a"}), ValidationError);
  CHECK_THROWS_AS(SiteUniverse::numbered(17), ValidationError);  // default cap
  CHECK_NOTHROW(SiteUniverse::numbered(16));
}

TEST_CASE("system rendering", "[systems]") {
  SiteUniverse u({"a", "b", "c"});
  CHECK(u.system_of({0, 2}).to_string() == "a+c");
  CHECK(u.empty_system().to_string() == "{}");
  CHECK(u.global_system().to_string() == "a+b+c");
}
