#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "noumenal/classical.hpp"
#include "noumenal/quantum.hpp"
#include "noumenal/sabotage.hpp"
#include "noumenal/verifier.hpp"

using namespace noumenal;

namespace {

ClassicalTheory cl2() {
  ClassicalSpec s;
  s.sites = {{"a", 2}, {"b", 2}};
  return ClassicalTheory(std::move(s));
}

ClassicalTheory cl3_product_only() {
  ClassicalSpec s;
  s.sites = {{"x", 2}, {"y", 2}, {"z", 2}};
  s.mode = ClassicalGroupMode::generated;
  s.generators = {{4, 5, 6, 7, 0, 1, 2, 3}, {2, 3, 0, 1, 6, 7, 4, 5}, {1, 0, 3, 2, 5, 4, 7, 6}};
  return ClassicalTheory(std::move(s));
}

std::set<std::string> failing_ids(const VerificationReport& rep) {
  std::set<std::string> out;
  for (const auto& c : rep.checks)
    if (c.status == CheckStatus::fail) out.insert(c.id);
  return out;
}

}  // namespace

TEST_CASE("the exhaustive catalogue passes on the finite theory with zero counterexamples",
          "[verifier]") {
  ClassicalTheory th = cl2();
  const auto budget = SamplingBudget::exhaustive();
  const auto rep = verify_theory(th, budget, "cl2");
  CHECK(rep.all_passed());
  CHECK(rep.count(CheckStatus::skipped) == 0);
  for (const auto& c : rep.checks) {
    CHECK(c.max_residual == 0.0);
    CHECK_FALSE(c.sampled);
  }

  const auto model = build_local_model(th, budget);
  const auto rep2 = verify_construction(model, budget, "cl2");
  CHECK(rep2.all_passed());
  CHECK(rep2.count(CheckStatus::skipped) == 0);
  for (const auto& c : rep2.checks) CHECK(c.max_residual == 0.0);
}

TEST_CASE("the sampled catalogue passes on two qubits within tolerance", "[verifier]") {
  QuantumTheory th = QuantumTheory::qubits(2);
  const auto budget = SamplingBudget::sampled(200, 42);
  const auto rep = verify_theory(th, budget, "q2");
  CHECK(rep.all_passed());
  for (const auto& c : rep.checks)
    if (c.status == CheckStatus::pass) CHECK(c.max_residual < 1e-9);

  const auto rep2 = verify_construction(LocalRealisticModel<QuantumTheory>(th), budget, "q2");
  CHECK(rep2.all_passed());
  for (const auto& c : rep2.checks)
    if (c.status == CheckStatus::pass) CHECK(c.max_residual < 1e-9);
}

TEST_CASE("catalogue coverage matches the law inventory", "[verifier]") {
  const std::vector<std::string> expected_theory = {
      "S3.def1.action.compose", "S3.def1.action.identity", "S3.def2.faithful",
      "S3.group.assoc",         "S3.group.closure",        "S3.group.identity",
      "S3.group.inverse",       "S4.2.lattice.laws",       "S4.2.lattice.order",
      "S4.3.projector.compose", "S4.3.projector.identity", "S4.3.projector.surjective",
      "S4.4.product.generalized", "S4.4.product.inverse",  "S4.5.nsp.generalized",
      "S5.quotient.faithful",   "S5.req1.no_signalling",   "S5.req2.assoc",
      "S5.req3.interchange",    "S5.req4.identity",        "S5.req5.factor"};
  const std::vector<std::string> expected_construction = {
      "S3.thm1.noumenal_faithful", "S4.3.6.compat.corollary",  "S4.3.6.compat.mixed",
      "S4.3.6.compat.noumenal",    "S4.3.6.compat.phenomenal", "S4.3.7.join.generalized",
      "S4.6.augmented",            "S6.action.compose",        "S6.action.identity",
      "S6.action.local",           "S6.action.well_defined",   "S6.equiv.reflexive",
      "S6.equiv.symmetric",        "S6.equiv.transitive",      "S6.join.assoc",
      "S6.join.split_merge",       "S6.join.unique_decomposition", "S6.join.well_defined",
      "S6.main",                   "S6.nsp.noumenal",          "S6.phi.action_hom",
      "S6.phi.coverage",           "S6.phi.projector_hom",
      "S6.phi.representative_independent", "S6.projector.compose", "S6.projector.monotone"};

  std::set<std::string> theory_ids, construction_ids;
  for (const auto& c : theory_checks<ClassicalTheory>()) {
    CHECK(theory_ids.insert(c.id).second);  // ids unique
    CHECK_FALSE(c.law.empty());             // every check states its law
  }
  for (const auto& c : construction_checks<LocalRealisticModel<ClassicalTheory>>()) {
    CHECK(construction_ids.insert(c.id).second);
    CHECK_FALSE(c.law.empty());
  }
  CHECK(theory_ids == std::set<std::string>(expected_theory.begin(), expected_theory.end()));
  CHECK(construction_ids ==
        std::set<std::string>(expected_construction.begin(), expected_construction.end()));

  // The two catalogues jointly cover every section of the law inventory.
  const std::vector<std::string> required_prefixes = {
      "S3.def1", "S3.def2", "S3.group", "S3.thm1",  "S4.2",       "S4.3.projector",
      "S4.3.6",  "S4.3.7",  "S4.4",     "S4.5",     "S4.6",       "S5.req1",
      "S5.req2", "S5.req3", "S5.req4",  "S5.req5",  "S5.quotient", "S6.equiv",
      "S6.projector", "S6.action", "S6.join", "S6.main", "S6.phi", "S6.nsp"};
  std::set<std::string> all_ids = theory_ids;
  all_ids.insert(construction_ids.begin(), construction_ids.end());
  for (const auto& prefix : required_prefixes) {
    const bool covered = std::any_of(all_ids.begin(), all_ids.end(), [&](const std::string& id) {
      return id.rfind(prefix, 0) == 0;
    });
    INFO("prefix " << prefix);
    CHECK(covered);
  }
}

TEST_CASE("every documented sabotage trips a named check with a replayable witness",
          "[verifier]") {
  struct TheoryCase {
    TheoryMutation mutation;
    bool quantum;
    bool three_sites;
    std::string expected;
  };
  const std::vector<TheoryCase> theory_cases = {
      {TheoryMutation::swapped_product, true, false, "S5.req3.interchange"},
      {TheoryMutation::swapped_compose, false, false, "S3.def1.action.compose"},
      {TheoryMutation::inverse_returns_identity, false, false, "S3.group.inverse"},
      {TheoryMutation::misaligned_projector, false, false, "S4.3.projector.surjective"},
      {TheoryMutation::raw_phase_classes, true, false, "S3.def2.faithful"},
      {TheoryMutation::product_skips_reindex, false, true, "S5.req1.no_signalling"},
      {TheoryMutation::factor_always_absent, false, false, "S5.req5.factor"},
      {TheoryMutation::factor_skips_check, false, false, "S5.req5.factor"},
  };
  for (const auto& tc : theory_cases) {
    VerificationReport rep;
    if (tc.quantum) {
      MutatedTheory<QuantumTheory> th(QuantumTheory::qubits(2), tc.mutation);
      rep = verify_theory(th, SamplingBudget::sampled(120, 5), "mutated");
    } else {
      MutatedTheory<ClassicalTheory> th(tc.three_sites ? cl3_product_only() : cl2(), tc.mutation);
      rep = verify_theory(th, SamplingBudget::exhaustive(), "mutated");
    }
    const auto fails = failing_ids(rep);
    INFO("expected " << tc.expected);
    CHECK(fails.count(tc.expected) == 1);
    const auto* outcome = rep.find(tc.expected);
    REQUIRE(outcome != nullptr);
    CHECK_FALSE(outcome->witness.is_null());
  }

  struct ModelCase {
    ConstructionMutation mutation;
    bool quantum3;
    std::string expected;
  };
  const std::vector<ModelCase> model_cases = {
      {ConstructionMutation::action_misplaced_padding, true, "S6.action.well_defined"},
      {ConstructionMutation::action_skips_quotient, false, "S6.action.well_defined"},
      {ConstructionMutation::join_ignores_compatibility, false, "S6.join.well_defined"},
      {ConstructionMutation::phi_skips_action, false, "S6.phi.action_hom"},
      {ConstructionMutation::class_equality_by_representative, false,
       "S6.action.well_defined"},
  };
  for (const auto& mc : model_cases) {
    VerificationReport rep;
    if (mc.quantum3) {
      MutatedModel<QuantumTheory> model(QuantumTheory::qubits(3), mc.mutation);
      rep = verify_construction(model, SamplingBudget::sampled(120, 5), "mutated");
    } else {
      MutatedModel<ClassicalTheory> model(cl2(), mc.mutation);
      rep = verify_construction(model, SamplingBudget::exhaustive(), "mutated");
    }
    const auto fails = failing_ids(rep);
    INFO("expected " << mc.expected);
    CHECK(fails.count(mc.expected) == 1);
    const auto* outcome = rep.find(mc.expected);
    REQUIRE(outcome != nullptr);
    CHECK_FALSE(outcome->witness.is_null());
  }
}

TEST_CASE("witnesses shrink toward identity elements", "[verifier]") {
  MutatedTheory<ClassicalTheory> th(cl2(), TheoryMutation::swapped_compose);
  const auto rep = verify_theory(th, SamplingBudget::exhaustive(), "mutated");
  const auto* outcome = rep.find("S3.def1.action.compose");
  REQUIRE(outcome != nullptr);
  REQUIRE(outcome->status == CheckStatus::fail);
  // The witness carries serialized inputs for replay.
  REQUIRE(outcome->witness.contains("U"));
  REQUIRE(outcome->witness.contains("V"));
  REQUIRE(outcome->witness.contains("s"));
  REQUIRE(outcome->witness.contains("residual"));
  // Replay the witness through the mutated theory: it must still fail.
  const System sys = th.universe().system_of_mask(0b11);
  auto op_of = [&](const Json& j) {
    std::vector<std::uint32_t> images = j["images"].get<std::vector<std::uint32_t>>();
    return BlockPermutation(sys, std::move(images));
  };
  const auto u = op_of(outcome->witness["U"]);
  const auto v = op_of(outcome->witness["V"]);
  const auto vals = outcome->witness["s"]["values"].get<std::vector<std::uint32_t>>();
  const ValueTuple s(sys, vals);
  CHECK(th.state_distance(th.act(th.compose(u, v), s), th.act(u, th.act(v, s))) > 0.0);
}

TEST_CASE("exhaustive budgets skip what cannot be enumerated, never silently pass",
          "[verifier]") {
  QuantumTheory th = QuantumTheory::qubits(2);
  const auto rep = verify_theory(th, SamplingBudget::exhaustive(), "q2");
  std::size_t skipped = 0;
  for (const auto& c : rep.checks)
    if (c.status == CheckStatus::skipped) {
      ++skipped;
      CHECK_FALSE(c.skip_reason.empty());
    }
  CHECK(skipped > 0);
  CHECK(rep.count(CheckStatus::fail) == 0);
}

TEST_CASE("reports are reproducible byte for byte", "[verifier]") {
  QuantumTheory th = QuantumTheory::qubits(2);
  const auto budget = SamplingBudget::sampled(100, 42);
  const auto r1 = verify_theory(th, budget, "q2");
  const auto r2 = verify_theory(th, budget, "q2");
  CHECK(r1.to_json().dump() == r2.to_json().dump());

  const auto r3 = verify_theory(th, SamplingBudget::sampled(100, 43), "q2");
  CHECK(r1.to_json().dump() != r3.to_json().dump());  // the seed matters
}

TEST_CASE("report JSON carries the documented fields and no timings", "[verifier]") {
  const auto rep = verify_theory(cl2(), SamplingBudget::exhaustive(), "cl2");
  const Json j = rep.to_json();
  CHECK(j["format"] == "noumenal-report/1");
  REQUIRE(j.contains("budget"));
  REQUIRE(j.contains("summary"));
  REQUIRE(j.contains("checks"));
  for (const auto& c : j["checks"]) {
    for (const char* key : {"id", "law", "applicability", "strategy", "status", "cases",
                            "seed", "max_residual"})
      REQUIRE(c.contains(key));
    CHECK_FALSE(c.contains("wall_ms"));
    CHECK_FALSE(c.dump().find("wall") != std::string::npos);
  }
  // Checks are sorted by id.
  std::vector<std::string> ids;
  for (const auto& c : j["checks"]) ids.push_back(c["id"].get<std::string>());
  CHECK(std::is_sorted(ids.begin(), ids.end()));
}

TEST_CASE("generalized no-signalling over chosen parts", "[verifier]") {
  ClassicalTheory th3 = cl3_product_only();
  std::vector<System> parts;
  for (std::size_t i = 0; i < 3; ++i) parts.push_back(th3.universe().singleton(i));
  const auto rep = verify_no_signalling_generalized(th3, parts, SamplingBudget::exhaustive());
  REQUIRE(rep.checks.size() == 1);
  CHECK(rep.all_passed());
  CHECK_FALSE(rep.checks[0].sampled);

  QuantumTheory q3 = QuantumTheory::qubits(3);
  std::vector<System> qparts;
  for (std::size_t i = 0; i < 3; ++i) qparts.push_back(q3.universe().singleton(i));
  const auto qrep = verify_no_signalling_generalized(q3, qparts, SamplingBudget::sampled(200, 9));
  CHECK(qrep.all_passed());
  CHECK(qrep.checks[0].max_residual < 1e-9);

  std::vector<System> overlapping{q3.universe().system_of({0, 1}), q3.universe().singleton(1)};
  CHECK_THROWS_AS(verify_no_signalling_generalized(q3, overlapping, SamplingBudget::sampled(10, 1)),
                  DisjointnessError);
}

TEST_CASE("a mixed partition also satisfies generalized no-signalling", "[verifier]") {
  QuantumTheory q3 = QuantumTheory::qubits(3);
  std::vector<System> parts{q3.universe().singleton(0), q3.universe().system_of({1, 2})};
  const auto rep = verify_no_signalling_generalized(q3, parts, SamplingBudget::sampled(150, 21));
  CHECK(rep.all_passed());
  CHECK(rep.checks[0].max_residual < 1e-9);
}
