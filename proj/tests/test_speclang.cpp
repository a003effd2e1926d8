#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "noumenal/speclang.hpp"

using namespace noumenal;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

const char* kMinimalClassical = R"(theory classical version 1
sites
  a 2
  b 2
group
  mode full-symmetric
)";

}  // namespace

TEST_CASE("a minimal classical spec parses and builds the full group", "[speclang]") {
  const auto doc = parse_spec(kMinimalClassical);
  CHECK(doc.kind == TheoryKind::classical);
  CHECK(doc.sites.size() == 2);
  CHECK(doc.group_mode == ClassicalGroupMode::full_symmetric);
  // Classical specs default to an exhaustive budget.
  CHECK(doc.budget.mode == BudgetMode::exhaustive);

  const ClassicalTheory th = build_classical(doc);
  CHECK(th.enumerate_operations(th.universe().global_system()).size() == 24);
}

TEST_CASE("a misspelled gate is an unresolved reference at its line", "[speclang]") {
  const std::string text =
      "theory quantum version 1\n"
      "sites\n"
      "  q0 qubit\n"
      "  q1 qubit\n"
      "group\n"
      "  mode gates\n"
      "demo d\n"
      "  variant v\n"
      "    apply CNOTT q0 q1\n";
  try {
    (void)parse_spec(text);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.code == SpecErrorCode::unresolved_reference);
    CHECK(e.line == 9);
    CHECK(e.message.find("CNOTT") != std::string::npos);
    CHECK(e.excerpt.find("apply CNOTT") != std::string::npos);
  }
}

TEST_CASE("empty input reports a missing theory header", "[speclang]") {
  try {
    (void)parse_spec("");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.code == SpecErrorCode::syntax);
    CHECK(e.message == "missing theory header");
  }
  CHECK_THROWS_AS(parse_spec("# only a comment\n"), ParseError);
}

TEST_CASE("unknown versions and options are rejected with stable codes", "[speclang]") {
  try {
    (void)parse_spec("theory classical version 7\nsites\n  a 2\ngroup\n  mode full-symmetric\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.code == SpecErrorCode::unknown_version);
    CHECK(e.line == 1);
  }

  try {
    (void)parse_spec(std::string(kMinimalClassical) + "options\n  samples 0\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.code == SpecErrorCode::budget_invalid);
  }

  try {
    (void)parse_spec(std::string(kMinimalClassical) + "options\n  verbosity 3\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.code == SpecErrorCode::syntax);
    CHECK(e.message.find("verbosity") != std::string::npos);
  }

  try {
    (void)parse_spec(std::string(kMinimalClassical) + "options\n  sabotage nonsense\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.code == SpecErrorCode::unresolved_reference);
  }
}

TEST_CASE("structural mistakes are syntax errors with line info", "[speclang]") {
  // Duplicate site label.
  CHECK_THROWS_AS(parse_spec("theory classical version 1\nsites\n  a 2\n  a 2\n"), ParseError);
  // Qubit site in a classical theory.
  CHECK_THROWS_AS(parse_spec("theory classical version 1\nsites\n  a qubit\n"), ParseError);
  // Value-count site in a quantum theory.
  CHECK_THROWS_AS(parse_spec("theory quantum version 1\nsites\n  q0 3\n"), ParseError);
  // Generators mode without generators.
  CHECK_THROWS_AS(
      parse_spec("theory classical version 1\nsites\n  a 2\ngroup\n  mode generators\n"),
      ParseError);
  // Steps before any variant line.
  CHECK_THROWS_AS(parse_spec(std::string(kMinimalClassical) +
                             "demo d\n  apply perm a b : 0 1 2 3\n"),
                  ParseError);
  // Unknown site in a claim system.
  CHECK_THROWS_AS(parse_spec(std::string(kMinimalClassical) +
                             "demo d\n  variant v\n  expect v class q identity\n"),
                  ParseError);
  // Unknown variant in a claim.
  CHECK_THROWS_AS(parse_spec(std::string(kMinimalClassical) +
                             "demo d\n  variant v\n  expect w class a identity\n"),
                  ParseError);
}

TEST_CASE("inline matrix blocks parse and validate", "[speclang]") {
  const std::string text =
      "theory quantum version 1\n"
      "sites\n"
      "  q0 qubit\n"
      "group\n"
      "  mode gates\n"
      "  matrix FLIP 1\n"
      "    0,0 1,0\n"
      "    1,0 0,0\n"
      "demo d\n"
      "  variant v\n"
      "    apply FLIP q0\n";
  const auto doc = parse_spec(text);
  REQUIRE(doc.matrices.size() == 1);
  CHECK(doc.matrices[0].name == "FLIP");
  CHECK(doc.matrices[0].entries.size() == 4);
  CHECK(doc.matrices[0].entries[1].first == 1.0);

  // Matrix rows must be complete.
  CHECK_THROWS_AS(parse_spec("theory quantum version 1\nsites\n  q0 qubit\ngroup\n"
                             "  mode gates\n  matrix M 1\n    0,0 1,0\n"),
                  ParseError);
  // Names may not shadow built-in gates.
  CHECK_THROWS_AS(parse_spec("theory quantum version 1\nsites\n  q0 qubit\ngroup\n"
                             "  mode gates\n  matrix X 1\n    0,0 1,0\n    1,0 0,0\n"),
                  ParseError);
}

TEST_CASE("parse, serialize, parse is the identity on every bundled spec", "[speclang]") {
  const std::filesystem::path dir(NOUMENAL_SPECS_DIR);
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".theory") continue;
    ++seen;
    INFO(entry.path().filename().string());
    const auto doc = parse_spec(read_file(entry.path()));
    const std::string once = doc.serialize();
    const auto reparsed = parse_spec(once);
    CHECK(reparsed.serialize() == once);
    // Structural equality of the load-bearing fields.
    CHECK(reparsed.kind == doc.kind);
    CHECK(reparsed.sites.size() == doc.sites.size());
    CHECK(reparsed.generators == doc.generators);
    CHECK(reparsed.demos.size() == doc.demos.size());
    CHECK(reparsed.budget.seed == doc.budget.seed);
    CHECK(reparsed.budget.sample_count == doc.budget.sample_count);
    CHECK(reparsed.sabotage == doc.sabotage);
  }
  CHECK(seen >= 6);
}

TEST_CASE("comments and blank lines are ignored", "[speclang]") {
  const std::string text =
      "# header comment\n"
      "theory classical version 1   # trailing\n"
      "\n"
      "sites\n"
      "  a 2  # two values\n"
      "group\n"
      "  mode full-symmetric\n";
  const auto doc = parse_spec(text);
  CHECK(doc.sites.size() == 1);
}

TEST_CASE("options override defaults and sabotage names resolve", "[speclang]") {
  const std::string text = std::string(kMinimalClassical) +
                           "options\n"
                           "  seed 77\n"
                           "  samples 314\n"
                           "  tolerance 1e-7\n"
                           "  mode sampled\n"
                           "  sabotage swapped-compose\n";
  const auto doc = parse_spec(text);
  CHECK(doc.budget.seed == 77);
  CHECK(doc.budget.sample_count == 314);
  CHECK(doc.budget.tolerance == 1e-7);
  CHECK(doc.budget.mode == BudgetMode::sampled);
  CHECK(doc.sabotage == "swapped-compose");
}
