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

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "noumenal/classical.hpp"
#include "noumenal/core.hpp"
#include "noumenal/quantum.hpp"
#include "noumenal/sabotage.hpp"

namespace noumenal {

// Line-oriented theory specification language. Sections begin with a keyword
// in the first token of a line (`theory`, `sites`, `group`, `options`,
// `demo`); everything after a '#' is a comment. The grammar is documented in
// the README; this parser is strict and rejects unknown keys with precise
// line:column diagnostics.

enum class SpecErrorCode { syntax, unknown_version, unresolved_reference, budget_invalid };

struct TheorySpecDocument;
inline void validate_references(const TheorySpecDocument& doc, const std::string& text);

inline const char* to_string(SpecErrorCode c) {
  switch (c) {
    case SpecErrorCode::syntax: return "syntax-error";
    case SpecErrorCode::unknown_version: return "unknown-version";
    case SpecErrorCode::unresolved_reference: return "unresolved-reference";
    default: return "budget-invalid";
  }
}

struct ParseError : Error {
  ParseError(SpecErrorCode code_, int line_, int column_, std::string message_,
             std::string excerpt_)
      : Error(std::to_string(line_) + ":" + std::to_string(column_) + ": " +
              to_string(code_) + ": " + message_ + "\n  | " + excerpt_),
        code(code_),
        line(line_),
        column(column_),
        message(std::move(message_)),
        excerpt(std::move(excerpt_)) {}
  SpecErrorCode code;
  int line;
  int column;
  std::string message;
  std::string excerpt;
};

enum class TheoryKind { classical, quantum };

inline const char* to_string(TheoryKind k) {
  return k == TheoryKind::classical ? "classical" : "quantum";
}

struct SpecSite {
  std::string label;
  std::size_t value_count = 2;  // 2 for qubits
  bool qubit = false;
};

struct SpecMatrix {
  std::string name;
  std::size_t qubit_count = 1;
  std::vector<std::pair<double, double>> entries;  // row-major (re, im)
};

struct DemoStep {
  enum class Kind { gate, haar, perm, generator, named_matrix };
  Kind kind = Kind::gate;
  bool unapply = false;
  std::string name;                      // gate or matrix name
  std::vector<std::string> site_labels;  // argument order
  std::vector<std::uint32_t> images;     // inline permutation
  std::size_t generator_index = 0;
  int line = 0;
};

struct DemoClaim {
  enum class Kind {
    marginal_maximally_mixed,
    class_identity,
    state_equals,
    equal_marginal,
    equal_class,
    distinct_state,
    distinct_class,
  };
  Kind kind = Kind::class_identity;
  std::string variant;                 // single-variant claims
  std::string system_spec;             // "global" or label[+label...]
  std::vector<std::string> variants;   // multi-variant claims
  std::vector<std::uint32_t> values;   // state_equals
  int line = 0;
};

struct DemoScenario {
  std::string name;
  std::vector<std::uint32_t> init_values;  // per site; empty means all zero
  std::vector<std::pair<std::string, std::vector<DemoStep>>> variants;
  std::vector<DemoClaim> claims;
  int line = 0;
};

struct TheorySpecDocument {
  TheoryKind kind = TheoryKind::classical;
  int version = 1;
  std::vector<SpecSite> sites;
  ClassicalGroupMode group_mode = ClassicalGroupMode::full_symmetric;
  std::vector<std::vector<std::uint32_t>> generators;
  std::vector<SpecMatrix> matrices;
  SamplingBudget budget{};
  bool budget_mode_explicit = false;
  std::string sabotage;  // empty = none
  std::vector<DemoScenario> demos;

  const DemoScenario* find_demo(const std::string& name) const {
    for (const auto& d : demos)
      if (d.name == name) return &d;
    return nullptr;
  }

  /// Canonical re-serialization; parsing the output reproduces the document.
  std::string serialize() const {
    std::ostringstream os;
    os << "theory " << to_string(kind) << " version " << version << "\n";
    os << "sites\n";
    for (const auto& s : sites) {
      if (s.qubit)
        os << "  " << s.label << " qubit\n";
      else
        os << "  " << s.label << " " << s.value_count << "\n";
    }
    os << "group\n";
    if (kind == TheoryKind::classical) {
      os << "  mode "
         << (group_mode == ClassicalGroupMode::full_symmetric ? "full-symmetric" : "generators")
         << "\n";
      for (const auto& g : generators) {
        os << "  gen";
        for (auto v : g) os << ' ' << v;
        os << "\n";
      }
    } else {
      os << "  mode gates\n";
      for (const auto& mx : matrices) {
        os << "  matrix " << mx.name << ' ' << mx.qubit_count << "\n";
        const std::size_t dim = std::size_t{1} << mx.qubit_count;
        for (std::size_t r = 0; r < dim; ++r) {
          os << "   ";
          for (std::size_t c = 0; c < dim; ++c) {
            const auto& e = mx.entries[r * dim + c];
            os << ' ' << format_double(e.first) << ',' << format_double(e.second);
          }
          os << "\n";
        }
      }
    }
    os << "options\n";
    os << "  mode " << to_string(budget.mode) << "\n";
    os << "  samples " << budget.sample_count << "\n";
    os << "  seed " << budget.seed << "\n";
    os << "  tolerance " << format_double(budget.tolerance) << "\n";
    if (!sabotage.empty()) os << "  sabotage " << sabotage << "\n";
    for (const auto& d : demos) {
      os << "demo " << d.name << "\n";
      if (!d.init_values.empty()) {
        os << "  init";
        for (auto v : d.init_values) os << ' ' << v;
        os << "\n";
      }
      for (const auto& [vname, steps] : d.variants) {
        os << "  variant " << vname << "\n";
        for (const auto& st : steps) {
          os << "    " << (st.unapply ? "unapply" : "apply") << ' ';
          switch (st.kind) {
            case DemoStep::Kind::gate:
            case DemoStep::Kind::named_matrix:
              os << st.name;
              for (const auto& l : st.site_labels) os << ' ' << l;
              break;
            case DemoStep::Kind::haar:
              os << "haar";
              for (const auto& l : st.site_labels) os << ' ' << l;
              break;
            case DemoStep::Kind::generator:
              os << "gen " << st.generator_index;
              break;
            case DemoStep::Kind::perm:
              os << "perm";
              for (const auto& l : st.site_labels) os << ' ' << l;
              os << " :";
              for (auto v : st.images) os << ' ' << v;
              break;
          }
          os << "\n";
        }
      }
      for (const auto& c : d.claims) {
        os << "  expect ";
        switch (c.kind) {
          case DemoClaim::Kind::marginal_maximally_mixed:
            os << c.variant << " marginal " << c.system_spec << " maximally-mixed";
            break;
          case DemoClaim::Kind::class_identity:
            os << c.variant << " class " << c.system_spec << " identity";
            break;
          case DemoClaim::Kind::state_equals:
            os << c.variant << " state";
            for (auto v : c.values) os << ' ' << v;
            break;
          case DemoClaim::Kind::equal_marginal:
            os << "equal-marginal " << c.system_spec;
            for (const auto& v : c.variants) os << ' ' << v;
            break;
          case DemoClaim::Kind::equal_class:
            os << "equal-class " << c.system_spec;
            for (const auto& v : c.variants) os << ' ' << v;
            break;
          case DemoClaim::Kind::distinct_state:
            os << "distinct-state " << c.system_spec;
            for (const auto& v : c.variants) os << ' ' << v;
            break;
          case DemoClaim::Kind::distinct_class:
            os << "distinct-class " << c.system_spec;
            for (const auto& v : c.variants) os << ' ' << v;
            break;
        }
        os << "\n";
      }
    }
    return os.str();
  }

 private:
  static std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
  }
};

namespace speclang_detail {

struct Token {
  std::string text;
  int column;  // 1-based
};

struct Line {
  int number;  // 1-based
  std::string raw;
  std::vector<Token> tokens;
};

inline std::vector<Line> scan(const std::string& text) {
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string body = raw;
    if (auto pos = body.find('#'); pos != std::string::npos) body.resize(pos);
    Line line{number, raw, {}};
    std::size_t i = 0;
    while (i < body.size()) {
      while (i < body.size() && (body[i] == ' ' || body[i] == '\t')) ++i;
      if (i >= body.size()) break;
      std::size_t start = i;
      while (i < body.size() && body[i] != ' ' && body[i] != '\t') ++i;
      line.tokens.push_back(Token{body.substr(start, i - start), static_cast<int>(start) + 1});
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

[[noreturn]] inline void fail(SpecErrorCode code, const Line& line, int column,
                              const std::string& message) {
  throw ParseError(code, line.number, column, message, line.raw);
}

inline std::optional<std::uint64_t> parse_u64(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::uint64_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

inline std::optional<double> parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

}  // namespace speclang_detail

/// Parses and resolves a theory specification. Raises ParseError with a
/// stable diagnostic code, a 1-based line:column and the offending source
/// line on any problem.
inline TheorySpecDocument parse_spec(const std::string& text) {
  using namespace speclang_detail;
  const auto lines = scan(text);
  if (lines.empty())
    throw ParseError(SpecErrorCode::syntax, 1, 1, "missing theory header", "");

  TheorySpecDocument doc;
  bool theory_seen = false;
  bool group_mode_seen = false;
  std::size_t i = 0;

  enum class Section { none, sites, group, options, demo };
  Section section = Section::none;
  DemoScenario* demo = nullptr;
  std::vector<DemoStep>* steps = nullptr;
  SpecMatrix* pending_matrix = nullptr;
  std::size_t pending_rows = 0;

  auto require_theory = [&](const Line& line) {
    if (!theory_seen)
      fail(SpecErrorCode::syntax, line, line.tokens[0].column,
           "the 'theory' header must come first");
  };

  for (; i < lines.size(); ++i) {
    const Line& line = lines[i];
    const std::string& head = line.tokens[0].text;

    if (pending_matrix && head != "theory" && head != "sites" && head != "group" &&
        head != "options" && head != "demo" && head != "mode" && head != "gen" &&
        head != "matrix") {
      // Matrix continuation rows: dim entries of re,im per row.
      const std::size_t dim = std::size_t{1} << pending_matrix->qubit_count;
      if (line.tokens.size() != dim)
        fail(SpecErrorCode::syntax, line, line.tokens[0].column,
             "matrix row needs " + std::to_string(dim) + " re,im entries");
      for (const auto& tok : line.tokens) {
        const auto comma = tok.text.find(',');
        if (comma == std::string::npos)
          fail(SpecErrorCode::syntax, line, tok.column, "matrix entries are re,im pairs");
        const auto re = parse_double(tok.text.substr(0, comma));
        const auto im = parse_double(tok.text.substr(comma + 1));
        if (!re || !im)
          fail(SpecErrorCode::syntax, line, tok.column, "matrix entries are re,im pairs");
        pending_matrix->entries.emplace_back(*re, *im);
      }
      if (--pending_rows == 0) pending_matrix = nullptr;
      continue;
    }

    if (head == "theory") {
      if (theory_seen)
        fail(SpecErrorCode::syntax, line, line.tokens[0].column, "duplicate theory header");
      if (line.tokens.size() != 4 || line.tokens[2].text != "version")
        fail(SpecErrorCode::syntax, line, line.tokens[0].column,
             "expected: theory <classical|quantum> version <n>");
      if (line.tokens[1].text == "classical")
        doc.kind = TheoryKind::classical;
      else if (line.tokens[1].text == "quantum")
        doc.kind = TheoryKind::quantum;
      else
        fail(SpecErrorCode::syntax, line, line.tokens[1].column,
             "theory kind must be 'classical' or 'quantum'");
      const auto v = parse_u64(line.tokens[3].text);
      if (!v)
        fail(SpecErrorCode::syntax, line, line.tokens[3].column, "version must be an integer");
      if (*v != 1)
        fail(SpecErrorCode::unknown_version, line, line.tokens[3].column,
             "unsupported format version " + line.tokens[3].text + " (supported: 1)");
      doc.version = static_cast<int>(*v);
      theory_seen = true;
      section = Section::none;
      continue;
    }

    if (head == "sites") {
      require_theory(line);
      section = Section::sites;
      continue;
    }
    if (head == "group") {
      require_theory(line);
      section = Section::group;
      continue;
    }
    if (head == "options") {
      require_theory(line);
      section = Section::options;
      continue;
    }
    if (head == "demo") {
      require_theory(line);
      if (line.tokens.size() != 2)
        fail(SpecErrorCode::syntax, line, line.tokens[0].column, "expected: demo <name>");
      doc.demos.push_back(DemoScenario{});
      demo = &doc.demos.back();
      demo->name = line.tokens[1].text;
      demo->line = line.number;
      steps = nullptr;
      section = Section::demo;
      continue;
    }

    switch (section) {
      case Section::sites: {
        if (line.tokens.size() != 2)
          fail(SpecErrorCode::syntax, line, line.tokens[0].column,
               "expected: <label> <value-count|qubit>");
        SpecSite site;
        site.label = line.tokens[0].text;
        if (line.tokens[1].text == "qubit") {
          site.qubit = true;
          site.value_count = 2;
          if (doc.kind != TheoryKind::quantum)
            fail(SpecErrorCode::syntax, line, line.tokens[1].column,
                 "qubit sites belong to quantum theories");
        } else {
          const auto n = parse_u64(line.tokens[1].text);
          if (!n || *n < 2)
            fail(SpecErrorCode::syntax, line, line.tokens[1].column,
                 "value count must be an integer >= 2");
          if (doc.kind == TheoryKind::quantum)
            fail(SpecErrorCode::syntax, line, line.tokens[1].column,
                 "quantum sites are declared as qubits");
          site.value_count = static_cast<std::size_t>(*n);
        }
        for (const auto& s : doc.sites)
          if (s.label == site.label)
            fail(SpecErrorCode::syntax, line, line.tokens[0].column,
                 "duplicate site label '" + site.label + "'");
        doc.sites.push_back(std::move(site));
        break;
      }
      case Section::group: {
        if (head == "mode") {
          if (line.tokens.size() != 2)
            fail(SpecErrorCode::syntax, line, line.tokens[0].column, "expected: mode <name>");
          const std::string& mode = line.tokens[1].text;
          if (doc.kind == TheoryKind::classical) {
            if (mode == "full-symmetric")
              doc.group_mode = ClassicalGroupMode::full_symmetric;
            else if (mode == "generators")
              doc.group_mode = ClassicalGroupMode::generated;
            else
              fail(SpecErrorCode::syntax, line, line.tokens[1].column,
                   "classical group mode is 'full-symmetric' or 'generators'");
          } else {
            if (mode != "gates")
              fail(SpecErrorCode::syntax, line, line.tokens[1].column,
                   "quantum group mode is 'gates'");
          }
          group_mode_seen = true;
        } else if (head == "gen") {
          if (doc.kind != TheoryKind::classical)
            fail(SpecErrorCode::syntax, line, line.tokens[0].column,
                 "generators belong to classical theories");
          std::vector<std::uint32_t> images;
          for (std::size_t t = 1; t < line.tokens.size(); ++t) {
            const auto v = parse_u64(line.tokens[t].text);
            if (!v)
              fail(SpecErrorCode::syntax, line, line.tokens[t].column,
                   "generator images are nonnegative integers");
            images.push_back(static_cast<std::uint32_t>(*v));
          }
          if (images.empty())
            fail(SpecErrorCode::syntax, line, line.tokens[0].column,
                 "generator needs at least one image");
          doc.generators.push_back(std::move(images));
        } else if (head == "matrix") {
          if (doc.kind != TheoryKind::quantum)
            fail(SpecErrorCode::syntax, line, line.tokens[0].column,
                 "matrix blocks belong to quantum theories");
          if (line.tokens.size() != 3)
            fail(SpecErrorCode::syntax, line, line.tokens[0].column,
                 "expected: matrix <name> <qubit-count>");
          SpecMatrix mx;
          mx.name = line.tokens[1].text;
          const auto q = parse_u64(line.tokens[2].text);
          if (!q || *q < 1 || *q > 4)
            fail(SpecErrorCode::syntax, line, line.tokens[2].column,
                 "matrix qubit count must be between 1 and 4");
          mx.qubit_count = static_cast<std::size_t>(*q);
          if (QuantumTheory::named_gates().count(mx.name))
            fail(SpecErrorCode::syntax, line, line.tokens[1].column,
                 "matrix name collides with the built-in gate '" + mx.name + "'");
          doc.matrices.push_back(std::move(mx));
          pending_matrix = &doc.matrices.back();
          pending_rows = std::size_t{1} << doc.matrices.back().qubit_count;
        } else {
          fail(SpecErrorCode::syntax, line, line.tokens[0].column,
               "unknown group key '" + head + "'");
        }
        break;
      }
      case Section::options: {
        if (line.tokens.size() != 2)
          fail(SpecErrorCode::syntax, line, line.tokens[0].column, "expected: <key> <value>");
        const std::string& key = head;
        const std::string& value = line.tokens[1].text;
        if (key == "seed") {
          const auto v = parse_u64(value);
          if (!v)
            fail(SpecErrorCode::budget_invalid, line, line.tokens[1].column,
                 "seed must be a nonnegative integer");
          doc.budget.seed = *v;
        } else if (key == "samples") {
          const auto v = parse_u64(value);
          if (!v || *v < 1)
            fail(SpecErrorCode::budget_invalid, line, line.tokens[1].column,
                 "samples must be a positive integer");
          doc.budget.sample_count = static_cast<std::size_t>(*v);
        } else if (key == "tolerance") {
          const auto v = parse_double(value);
          if (!v || *v < 0.0)
            fail(SpecErrorCode::budget_invalid, line, line.tokens[1].column,
                 "tolerance must be a nonnegative real");
          doc.budget.tolerance = *v;
        } else if (key == "mode") {
          if (value == "exhaustive")
            doc.budget.mode = BudgetMode::exhaustive;
          else if (value == "sampled")
            doc.budget.mode = BudgetMode::sampled;
          else
            fail(SpecErrorCode::budget_invalid, line, line.tokens[1].column,
                 "mode is 'exhaustive' or 'sampled'");
          doc.budget_mode_explicit = true;
        } else if (key == "sabotage") {
          bool known = false;
          for (const auto& [name, m] : theory_mutation_names()) known = known || name == value;
          for (const auto& [name, m] : construction_mutation_names())
            known = known || name == value;
          if (!known)
            fail(SpecErrorCode::unresolved_reference, line, line.tokens[1].column,
                 "unknown sabotage '" + value + "'");
          doc.sabotage = value;
        } else {
          fail(SpecErrorCode::syntax, line, line.tokens[0].column,
               "unknown option '" + key + "'");
        }
        break;
      }
      case Section::demo: {
        if (head == "variant") {
          if (line.tokens.size() != 2)
            fail(SpecErrorCode::syntax, line, line.tokens[0].column, "expected: variant <name>");
          demo->variants.emplace_back(line.tokens[1].text, std::vector<DemoStep>{});
          steps = &demo->variants.back().second;
        } else if (head == "init") {
          for (std::size_t t = 1; t < line.tokens.size(); ++t) {
            const auto v = parse_u64(line.tokens[t].text);
            if (!v)
              fail(SpecErrorCode::syntax, line, line.tokens[t].column,
                   "init values are nonnegative integers");
            demo->init_values.push_back(static_cast<std::uint32_t>(*v));
          }
        } else if (head == "apply" || head == "unapply") {
          if (!steps)
            fail(SpecErrorCode::syntax, line, line.tokens[0].column,
                 "steps must follow a 'variant' line");
          if (line.tokens.size() < 2)
            fail(SpecErrorCode::syntax, line, line.tokens[0].column,
                 "expected: apply <operation> ...");
          DemoStep st;
          st.unapply = head == "unapply";
          st.line = line.number;
          const std::string& what = line.tokens[1].text;
          if (what == "haar") {
            st.kind = DemoStep::Kind::haar;
            for (std::size_t t = 2; t < line.tokens.size(); ++t)
              st.site_labels.push_back(line.tokens[t].text);
            if (st.site_labels.empty())
              fail(SpecErrorCode::syntax, line, line.tokens[1].column,
                   "haar needs at least one site");
          } else if (what == "gen") {
            st.kind = DemoStep::Kind::generator;
            if (line.tokens.size() != 3 || !parse_u64(line.tokens[2].text))
              fail(SpecErrorCode::syntax, line, line.tokens[1].column,
                   "expected: apply gen <index>");
            st.generator_index = static_cast<std::size_t>(*parse_u64(line.tokens[2].text));
          } else if (what == "perm") {
            st.kind = DemoStep::Kind::perm;
            std::size_t t = 2;
            for (; t < line.tokens.size() && line.tokens[t].text != ":"; ++t)
              st.site_labels.push_back(line.tokens[t].text);
            if (t >= line.tokens.size())
              fail(SpecErrorCode::syntax, line, line.tokens[1].column,
                   "expected: apply perm <sites...> : <images...>");
            for (++t; t < line.tokens.size(); ++t) {
              const auto v = parse_u64(line.tokens[t].text);
              if (!v)
                fail(SpecErrorCode::syntax, line, line.tokens[t].column,
                     "permutation images are nonnegative integers");
              st.images.push_back(static_cast<std::uint32_t>(*v));
            }
            if (st.site_labels.empty() || st.images.empty())
              fail(SpecErrorCode::syntax, line, line.tokens[1].column,
                   "expected: apply perm <sites...> : <images...>");
          } else {
            st.kind = DemoStep::Kind::gate;  // resolved against gates+matrices below
            st.name = what;
            for (std::size_t t = 2; t < line.tokens.size(); ++t)
              st.site_labels.push_back(line.tokens[t].text);
          }
          steps->push_back(std::move(st));
        } else if (head == "expect") {
          DemoClaim claim;
          claim.line = line.number;
          if (line.tokens.size() < 3)
            fail(SpecErrorCode::syntax, line, line.tokens[0].column, "incomplete expect line");
          const std::string& second = line.tokens[1].text;
          auto rest_variants = [&](std::size_t from) {
            std::vector<std::string> out;
            for (std::size_t t = from; t < line.tokens.size(); ++t)
              out.push_back(line.tokens[t].text);
            return out;
          };
          if (second == "equal-marginal" || second == "equal-class" ||
              second == "distinct-state" || second == "distinct-class") {
            claim.system_spec = line.tokens[2].text;
            claim.variants = rest_variants(3);
            if (claim.variants.size() < 2)
              fail(SpecErrorCode::syntax, line, line.tokens[0].column,
                   "comparison claims need at least two variants");
            claim.kind = second == "equal-marginal" ? DemoClaim::Kind::equal_marginal
                         : second == "equal-class"  ? DemoClaim::Kind::equal_class
                         : second == "distinct-state"
                             ? DemoClaim::Kind::distinct_state
                             : DemoClaim::Kind::distinct_class;
          } else {
            claim.variant = second;
            const std::string& what = line.tokens[2].text;
            if (what == "marginal") {
              if (line.tokens.size() != 5 || line.tokens[4].text != "maximally-mixed")
                fail(SpecErrorCode::syntax, line, line.tokens[2].column,
                     "expected: expect <variant> marginal <system> maximally-mixed");
              claim.kind = DemoClaim::Kind::marginal_maximally_mixed;
              claim.system_spec = line.tokens[3].text;
            } else if (what == "class") {
              if (line.tokens.size() != 5 || line.tokens[4].text != "identity")
                fail(SpecErrorCode::syntax, line, line.tokens[2].column,
                     "expected: expect <variant> class <system> identity");
              claim.kind = DemoClaim::Kind::class_identity;
              claim.system_spec = line.tokens[3].text;
            } else if (what == "state") {
              claim.kind = DemoClaim::Kind::state_equals;
              for (std::size_t t = 3; t < line.tokens.size(); ++t) {
                const auto v = parse_u64(line.tokens[t].text);
                if (!v)
                  fail(SpecErrorCode::syntax, line, line.tokens[t].column,
                       "state values are nonnegative integers");
                claim.values.push_back(static_cast<std::uint32_t>(*v));
              }
            } else {
              fail(SpecErrorCode::syntax, line, line.tokens[2].column,
                   "unknown claim '" + what + "'");
            }
          }
          demo->claims.push_back(std::move(claim));
        } else {
          fail(SpecErrorCode::syntax, line, line.tokens[0].column,
               "unknown demo key '" + head + "'");
        }
        break;
      }
      case Section::none:
        fail(SpecErrorCode::syntax, line, line.tokens[0].column,
             theory_seen ? ("unknown section '" + head + "'") : "missing theory header");
    }
  }

  if (!theory_seen) {
    const Line& first = lines.front();
    throw ParseError(SpecErrorCode::syntax, first.number, first.tokens[0].column,
                     "missing theory header", first.raw);
  }
  if (pending_matrix)
    throw ParseError(SpecErrorCode::syntax, lines.back().number, 1,
                     "matrix block ended before all rows were given", lines.back().raw);
  if (doc.sites.empty())
    throw ParseError(SpecErrorCode::syntax, lines.back().number, 1,
                     "a theory needs a sites section with at least one site",
                     lines.back().raw);
  if (doc.kind == TheoryKind::classical && !group_mode_seen)
    throw ParseError(SpecErrorCode::syntax, lines.back().number, 1,
                     "a classical theory needs a group section with a mode line",
                     lines.back().raw);
  if (doc.kind == TheoryKind::classical && doc.group_mode == ClassicalGroupMode::generated &&
      doc.generators.empty())
    throw ParseError(SpecErrorCode::syntax, lines.back().number, 1,
                     "generators mode needs at least one gen line", lines.back().raw);
  if (!doc.budget_mode_explicit)
    doc.budget.mode =
        doc.kind == TheoryKind::classical ? BudgetMode::exhaustive : BudgetMode::sampled;

  validate_references(doc, text);
  return doc;
}

/// Second pass: every reference in demos resolves against the declared
/// theory (sites, gate names, named matrices, generators).
inline void validate_references(const TheorySpecDocument& doc, const std::string& text) {
  using namespace speclang_detail;
  const auto lines = scan(text);
  auto line_of = [&](int number) -> const Line& {
    for (const auto& l : lines)
      if (l.number == number) return l;
    return lines.front();
  };
  auto has_site = [&](const std::string& label) {
    for (const auto& s : doc.sites)
      if (s.label == label) return true;
    return false;
  };
  auto check_sites = [&](const std::vector<std::string>& labels, int lineno) {
    for (const auto& l : labels)
      if (!has_site(l)) {
        const Line& ln = line_of(lineno);
        fail(SpecErrorCode::unresolved_reference, ln, 1, "unknown site '" + l + "'");
      }
  };
  auto check_system_spec = [&](const std::string& spec, int lineno) {
    if (spec == "global") return;
    std::string part;
    std::istringstream ss(spec);
    while (std::getline(ss, part, '+'))
      if (!has_site(part)) {
        const Line& ln = line_of(lineno);
        fail(SpecErrorCode::unresolved_reference, ln, 1,
             "unknown system '" + spec + "' (site '" + part + "')");
      }
  };

  for (const auto& d : doc.demos) {
    std::vector<std::string> variant_names;
    for (const auto& [vname, steps] : d.variants) {
      variant_names.push_back(vname);
      for (const auto& st : steps) {
        switch (st.kind) {
          case DemoStep::Kind::gate: {
            bool known = QuantumTheory::named_gates().count(st.name) > 0;
            for (const auto& mx : doc.matrices) known = known || mx.name == st.name;
            if (!known || doc.kind != TheoryKind::quantum) {
              const Line& ln = line_of(st.line);
              fail(SpecErrorCode::unresolved_reference, ln, 1,
                   "unknown operation '" + st.name + "'");
            }
            check_sites(st.site_labels, st.line);
            break;
          }
          case DemoStep::Kind::haar:
            if (doc.kind != TheoryKind::quantum) {
              const Line& ln = line_of(st.line);
              fail(SpecErrorCode::unresolved_reference, ln, 1,
                   "haar steps belong to quantum theories");
            }
            check_sites(st.site_labels, st.line);
            break;
          case DemoStep::Kind::perm:
            if (doc.kind != TheoryKind::classical) {
              const Line& ln = line_of(st.line);
              fail(SpecErrorCode::unresolved_reference, ln, 1,
                   "perm steps belong to classical theories");
            }
            check_sites(st.site_labels, st.line);
            break;
          case DemoStep::Kind::generator:
            if (doc.kind != TheoryKind::classical || st.generator_index >= doc.generators.size()) {
              const Line& ln = line_of(st.line);
              fail(SpecErrorCode::unresolved_reference, ln, 1,
                   "unknown generator index " + std::to_string(st.generator_index));
            }
            break;
          case DemoStep::Kind::named_matrix:
            break;
        }
      }
    }
    auto check_variant = [&](const std::string& v, int lineno) {
      for (const auto& name : variant_names)
        if (name == v) return;
      const Line& ln = line_of(lineno);
      fail(SpecErrorCode::unresolved_reference, ln, 1, "unknown variant '" + v + "'");
    };
    for (const auto& c : d.claims) {
      if (!c.variant.empty()) check_variant(c.variant, c.line);
      for (const auto& v : c.variants) check_variant(v, c.line);
      if (!c.system_spec.empty()) check_system_spec(c.system_spec, c.line);
      if (c.kind == DemoClaim::Kind::marginal_maximally_mixed &&
          doc.kind != TheoryKind::quantum) {
        const Line& ln = line_of(c.line);
        fail(SpecErrorCode::unresolved_reference, ln, 1,
             "maximally-mixed claims belong to quantum theories");
      }
      if (c.kind == DemoClaim::Kind::state_equals && doc.kind != TheoryKind::classical) {
        const Line& ln = line_of(c.line);
        fail(SpecErrorCode::unresolved_reference, ln, 1,
             "state claims belong to classical theories");
      }
    }
  }
}

/// Builds the concrete theory a document describes (before any sabotage
/// wrapping).
inline ClassicalTheory build_classical(const TheorySpecDocument& doc) {
  ClassicalSpec spec;
  for (const auto& s : doc.sites) spec.sites.push_back({s.label, s.value_count});
  spec.mode = doc.group_mode;
  spec.generators = doc.generators;
  return ClassicalTheory(std::move(spec));
}

inline QuantumTheory build_quantum(const TheorySpecDocument& doc) {
  std::vector<std::string> labels;
  for (const auto& s : doc.sites) labels.push_back(s.label);
  QuantumConfig cfg;
  cfg.class_tolerance = std::max(doc.budget.tolerance, 1e-12);
  cfg.factor_tolerance = std::max(doc.budget.tolerance, 1e-12);
  return QuantumTheory(std::make_shared<SiteUniverse>(std::move(labels)), cfg);
}

}  // namespace noumenal
