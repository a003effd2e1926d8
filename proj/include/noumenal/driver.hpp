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
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "noumenal/sabotage.hpp"
#include "noumenal/speclang.hpp"
#include "noumenal/verifier.hpp"

namespace noumenal {

// The functional core of the command line: load a spec, run the catalogue,
// export a model, execute a demo scenario. The CLI binary is a thin shell
// over these; tests drive them directly.

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<double> tolerance;

  SamplingBudget apply(SamplingBudget budget) const {
    if (seed) budget.seed = *seed;
    if (samples) budget.sample_count = *samples;
    if (tolerance) budget.tolerance = *tolerance;
    return budget;
  }
};

struct RunResult {
  int exit_code = 0;  // 0 ok, 2 verification/assertion failure (3 = load, raised as exceptions)
  Json output;
  std::string console;
};

using TheoryVariant = std::variant<ClassicalTheory, QuantumTheory, MutatedTheory<ClassicalTheory>,
                                   MutatedTheory<QuantumTheory>>;

struct LoadedSpec {
  TheorySpecDocument doc;
  TheoryVariant theory;
  std::optional<ConstructionMutation> construction_mutation;
  SamplingBudget budget;
};

inline LoadedSpec load_spec(const TheorySpecDocument& doc) {
  std::optional<TheoryMutation> tm;
  std::optional<ConstructionMutation> cm;
  if (!doc.sabotage.empty()) {
    for (const auto& [name, m] : theory_mutation_names())
      if (name == doc.sabotage) tm = m;
    for (const auto& [name, m] : construction_mutation_names())
      if (name == doc.sabotage) cm = m;
  }
  auto make = [&]() -> TheoryVariant {
    if (doc.kind == TheoryKind::classical) {
      ClassicalTheory base = build_classical(doc);
      if (tm) return MutatedTheory<ClassicalTheory>(std::move(base), *tm);
      return base;
    }
    QuantumTheory base = build_quantum(doc);
    if (tm) return MutatedTheory<QuantumTheory>(std::move(base), *tm);
    return base;
  };
  return LoadedSpec{doc, make(), cm, doc.budget};
}

/// Runs the full catalogue: theory checks always, construction checks once
/// the theory checks pass (on the sabotaged model when the spec asks for a
/// construction-level sabotage). Exit 0 only when every check passes.
inline RunResult run_check(const TheorySpecDocument& doc, const RunOverrides& overrides,
                           const std::string& subject) {
  LoadedSpec loaded = load_spec(doc);
  const SamplingBudget budget = overrides.apply(loaded.budget);
  budget.validate();

  VerificationReport merged = std::visit(
      [&](const auto& th) {
        using T = std::decay_t<decltype(th)>;
        VerificationReport rep = verify_theory(th, budget, subject);
        if (rep.all_passed()) {
          VerificationReport rep2 =
              loaded.construction_mutation
                  ? verify_construction(MutatedModel<T>(th, *loaded.construction_mutation),
                                        budget, subject)
                  : verify_construction(LocalRealisticModel<T>(th), budget, subject);
          for (auto& c : rep2.checks) rep.checks.push_back(std::move(c));
          std::sort(rep.checks.begin(), rep.checks.end(),
                    [](const CheckOutcome& a, const CheckOutcome& b) { return a.id < b.id; });
        }
        return rep;
      },
      loaded.theory);

  RunResult result;
  result.exit_code = merged.all_passed() ? 0 : 2;
  result.output = merged.to_json();
  result.console = merged.to_table();
  return result;
}

/// Verifies, then exports the constructed model: full coset tables for
/// enumerable theories, an oracle manifest with recorded spot checks for
/// quantum ones. Refuses unverified theories unless forced, and watermarks
/// forced outputs.
inline RunResult run_build(const TheorySpecDocument& doc, const RunOverrides& overrides,
                           bool force, const std::string& subject) {
  RunResult check = run_check(doc, overrides, subject);
  if (check.exit_code != 0 && !force) {
    std::string failing = "unknown";
    for (const auto& c : check.output["checks"])
      if (c["status"] == "fail") {
        failing = c["id"].get<std::string>();
        break;
      }
    RunResult result;
    result.exit_code = 2;
    result.output = Json{{"format", "noumenal-build-refusal/1"},
                         {"subject", subject},
                         {"failing_check", failing},
                         {"report", check.output}};
    result.console = "build refused: axiom check '" + failing +
                     "' failed; rerun with --force to export anyway (the output will be "
                     "watermarked)\n";
    return result;
  }

  LoadedSpec loaded = load_spec(doc);
  Json out = std::visit(
      [&](const auto& th) -> Json {
        using T = std::decay_t<decltype(th)>;
        if constexpr (EnumerableTheory<T>) {
          return coset_table_json(th);
        } else {
          Json manifest;
          manifest["format"] = "noumenal-manifest/1";
          manifest["kind"] = "quantum";
          manifest["sites"] = th.universe().labels();
          Json oracles;
          oracles["class_equality"] = "phase-aligned relative Frobenius distance";
          oracles["equivalence"] =
              "residual of W W2^-1 against I x V, V recovered by partial trace";
          oracles["join"] =
              "factor through either complement, then tensor-split detection across the cut";
          manifest["oracles"] = std::move(oracles);
          Json spots = Json::array();
          if (th.universe().site_count() >= 2) {
            const System q0 = th.universe().singleton(0);
            const System q1 = th.universe().singleton(1);
            const auto id = th.identity(th.universe().global_system());
            const auto z0 = embed_global(th, th.gate_operation("Z", {0}));
            spots.push_back(Json{{"claim", "Z on " + th.universe().label(0) +
                                               " (embedded globally) is equivalent to the "
                                               "identity over " +
                                               q1.to_string()},
                                 {"result", equivalent(th, z0, id, q1)}});
            auto cnot = th.gate_operation("CNOT", {0, 1});
            if (!cnot.system().is_global()) cnot = embed_global(th, cnot);
            spots.push_back(Json{{"claim", "CNOT with control " + th.universe().label(0) +
                                               " is equivalent to the identity over its control"},
                                 {"result", equivalent(th, cnot, id, q0)}});
          }
          manifest["spot_checks"] = std::move(spots);
          return manifest;
        }
      },
      loaded.theory);

  const bool forced = check.exit_code != 0;
  out["verified"] = !forced;
  out["forced"] = forced;
  if (forced) out["warning"] = "built from a theory that failed verification";

  RunResult result;
  result.exit_code = 0;
  result.output = std::move(out);
  result.console = forced ? "built (FORCED: theory failed verification; output watermarked)\n"
                          : "built from a verified theory\n";
  return result;
}

namespace demo_detail {

inline System resolve_system_spec(const SiteUniverse& u, const std::string& spec) {
  if (spec == "global") return u.global_system();
  std::vector<std::size_t> sites;
  std::string part;
  std::istringstream ss(spec);
  while (std::getline(ss, part, '+')) {
    const auto idx = u.index_of(part);
    if (!idx) throw ValidationError("unknown site '" + part + "' in system spec");
    sites.push_back(*idx);
  }
  return u.system_of(sites);
}

inline std::string claim_text(const DemoClaim& c) {
  std::ostringstream os;
  switch (c.kind) {
    case DemoClaim::Kind::marginal_maximally_mixed:
      os << c.variant << ": marginal " << c.system_spec << " maximally-mixed";
      break;
    case DemoClaim::Kind::class_identity:
      os << c.variant << ": class " << c.system_spec << " identity";
      break;
    case DemoClaim::Kind::state_equals: {
      os << c.variant << ": state";
      for (auto v : c.values) os << ' ' << v;
      break;
    }
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
  return os.str();
}

inline std::string step_text(const DemoStep& st) {
  std::ostringstream os;
  os << (st.unapply ? "unapply " : "apply ");
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
  return os.str();
}

/// Compact console rendering of a site's phenomenal projection: the value
/// for classical tuples, the populations for density matrices.
template <TheoryContract T>
std::string marginal_text(const T& th, const typename T::State& s) {
  std::ostringstream os;
  if constexpr (std::same_as<T, ClassicalTheory>) {
    os << "value (";
    for (std::size_t i = 0; i < s.values().size(); ++i) {
      if (i) os << ' ';
      os << s.values()[i];
    }
    os << ")";
  } else {
    os << "marginal diag(";
    for (Eigen::Index i = 0; i < s.matrix().rows(); ++i) {
      if (i) os << ' ';
      os << std::fixed << std::setprecision(4) << s.matrix()(i, i).real();
    }
    os << ")";
  }
  (void)th;
  return os.str();
}

/// Deterministic short fingerprint of a noumenal class. Finite theories use
/// the canonical coset representative. Quantum classes hash the complete
/// class invariant W^dagger (X tensor I) W over a basis of operators X on
/// the class's system: it is unchanged by any representative change
/// W -> (I x V) W, so equal classes print equal fingerprints.
template <TheoryContract T>
std::string class_fingerprint(const T& th, const NoumenalClass<T>& n) {
  if constexpr (EnumerableTheory<T>) {
    return ClassicalTheory::images_line(canonical_representative(th, n));
  } else {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
      h ^= v;
      h *= 1099511628211ull;
    };
    const Matrix& w = n.representative.representative();
    const std::size_t da = th.dim(n.system);
    for (std::size_t i = 0; i < da; ++i)
      for (std::size_t j = 0; j < da; ++j) {
        Matrix unit = Matrix::Zero(da, da);
        unit(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
        const Matrix inv = w.adjoint() * th.embed_matrix(unit, n.system) * w;
        for (Eigen::Index r = 0; r < inv.rows(); ++r)
          for (Eigen::Index c = 0; c < inv.cols(); ++c) {
            mix(static_cast<std::uint64_t>(
                static_cast<std::int64_t>(std::llround(inv(r, c).real() * 1e9))));
            mix(static_cast<std::uint64_t>(
                static_cast<std::int64_t>(std::llround(inv(r, c).imag() * 1e9))));
          }
      }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
  }
}

}  // namespace demo_detail

/// Executes a demo scenario at both levels: the phenomenal state evolves
/// under the global operations while the noumenal class of the whole system
/// is tracked as a representative. The transcript reports, per step, each
/// site's noumenal class fingerprint and phenomenal projection; claims are
/// evaluated per iteration (scenarios with haar steps repeat with fresh
/// seeded draws).
template <TheoryContract T>
RunResult run_demo_engine(const T& th, const TheorySpecDocument& doc, const DemoScenario& demo,
                          const SamplingBudget& budget, const std::string& subject) {
  using Op = typename T::Op;
  using State = typename T::State;
  const SiteUniverse& u = th.universe();
  const System global = u.global_system();

  bool has_random = false;
  for (const auto& [vn, steps] : demo.variants)
    for (const auto& st : steps) has_random = has_random || st.kind == DemoStep::Kind::haar;
  const std::size_t iterations = has_random ? budget.sample_count : 1;

  // Initial state.
  std::vector<std::uint32_t> init = demo.init_values;
  if (init.empty()) init.assign(u.site_count(), 0);
  if (init.size() != u.site_count())
    throw ValidationError("init needs one value per site (" + std::to_string(u.site_count()) +
                          ")");
  auto initial_state = [&]() -> State {
    if constexpr (std::same_as<T, ClassicalTheory>) {
      return th.make_state(global, init);
    } else {
      std::size_t idx = 0;
      for (std::size_t i = 0; i < init.size(); ++i) {
        if (init[i] > 1) throw ValidationError("quantum init values are bits");
        idx = (idx << 1) | init[i];
      }
      return th.basis_state(global, idx);
    }
  };

  auto resolve_step = [&](const DemoStep& st, Rng& rng) -> Op {
    auto site_indices = [&]() {
      std::vector<std::size_t> out;
      for (const auto& l : st.site_labels) {
        const auto idx = u.index_of(l);
        if (!idx) throw ValidationError("unknown site '" + l + "'");
        out.push_back(*idx);
      }
      return out;
    };
    Op op = [&]() -> Op {
      if constexpr (std::same_as<T, QuantumTheory>) {
        switch (st.kind) {
          case DemoStep::Kind::haar:
            return th.sample_operation(u.system_of(site_indices()), rng);
          case DemoStep::Kind::gate: {
            const auto args = site_indices();
            if (QuantumTheory::named_gates().count(st.name))
              return th.gate_operation(st.name, args);
            for (const auto& mx : doc.matrices)
              if (mx.name == st.name) {
                const std::size_t dim = std::size_t{1} << mx.qubit_count;
                Matrix m(dim, dim);
                for (std::size_t r = 0; r < dim; ++r)
                  for (std::size_t c = 0; c < dim; ++c)
                    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                        Complex(mx.entries[r * dim + c].first, mx.entries[r * dim + c].second);
                return th.matrix_operation(m, args);
              }
            throw ValidationError("unknown operation '" + st.name + "'");
          }
          default:
            throw ValidationError("step kind not available in a quantum theory");
        }
      } else {
        switch (st.kind) {
          case DemoStep::Kind::perm: {
            const System sys = u.system_of(site_indices());
            return th.make_operation(sys, st.images);
          }
          case DemoStep::Kind::generator:
            return th.make_operation(global, doc.generators.at(st.generator_index));
          default:
            throw ValidationError("step kind not available in a classical theory");
        }
      }
    }();
    if (st.unapply) op = th.inverse(op);
    return op;
  };

  Json transcript;
  transcript["format"] = "noumenal-transcript/1";
  transcript["scenario"] = demo.name;
  transcript["subject"] = subject;
  transcript["kind"] = to_string(doc.kind);
  transcript["iterations"] = iterations;
  Json variants_json = Json::array();
  Json claims_json = Json::array();
  std::ostringstream console;
  console << "scenario: " << demo.name << " (" << iterations << " iteration"
          << (iterations == 1 ? "" : "s") << ")\n";

  int exit_code = 0;
  std::vector<int> claim_status(demo.claims.size(), -1);  // -1 unevaluated, 0 fail, 1 pass
  std::size_t failing_iteration = 0;

  for (std::size_t it = 0; it < iterations && exit_code == 0; ++it) {
    Rng rng(derive_seed(budget.seed, demo.name + "#" + std::to_string(it)));
    std::vector<std::pair<std::string, std::pair<State, Op>>> finals;

    for (const auto& [vname, steps] : demo.variants) {
      State rho = initial_state();
      Op w = th.identity(global);
      Json steps_json = Json::array();
      if (it == 0) console << "  variant " << vname << "\n";
      for (const auto& st : steps) {
        const Op local = resolve_step(st, rng);
        const Op g = embed_global(th, local);
        rho = th.act(g, rho);
        w = th.compose(g, w);
        if (it == 0) {
          Json entry;
          entry["step"] = demo_detail::step_text(st);
          Json sites = Json::array();
          console << "    " << demo_detail::step_text(st) << "\n";
          for (std::size_t s = 0; s < u.site_count(); ++s) {
            const System site = u.singleton(s);
            const NoumenalClass<T> cls{site, w};
            const State marginal = th.project(rho, site);
            Json sj;
            sj["site"] = u.label(s);
            sj["class"] = demo_detail::class_fingerprint(th, cls);
            sj["marginal"] = th.state_json(marginal);
            console << "      " << u.label(s) << ": class " << sj["class"].get<std::string>()
                    << "  " << demo_detail::marginal_text(th, marginal) << "\n";
            sites.push_back(std::move(sj));
          }
          entry["sites"] = std::move(sites);
          steps_json.push_back(std::move(entry));
        }
      }
      if (it == 0) {
        Json vj;
        vj["name"] = vname;
        vj["steps"] = std::move(steps_json);
        variants_json.push_back(std::move(vj));
      }
      finals.emplace_back(vname, std::make_pair(std::move(rho), std::move(w)));
    }

    auto final_of = [&](const std::string& vname) -> const std::pair<State, Op>& {
      for (const auto& [n, f] : finals)
        if (n == vname) return f;
      throw ValidationError("unknown variant '" + vname + "'");
    };

    for (std::size_t ci = 0; ci < demo.claims.size(); ++ci) {
      const DemoClaim& c = demo.claims[ci];
      bool ok = true;
      const System sys = c.system_spec.empty() ? global
                                               : demo_detail::resolve_system_spec(u, c.system_spec);
      switch (c.kind) {
        case DemoClaim::Kind::marginal_maximally_mixed: {
          if constexpr (std::same_as<T, QuantumTheory>) {
            const auto& [rho, w] = final_of(c.variant);
            const std::size_t d = th.dim(sys);
            const State mixed(sys, Matrix::Identity(d, d) / static_cast<double>(d));
            ok = th.state_distance(th.project(rho, sys), mixed) <= budget.tolerance;
          }
          break;
        }
        case DemoClaim::Kind::class_identity: {
          const auto& [rho, w] = final_of(c.variant);
          ok = equivalent(th, w, th.identity(global), sys);
          break;
        }
        case DemoClaim::Kind::state_equals: {
          if constexpr (std::same_as<T, ClassicalTheory>) {
            const auto& [rho, w] = final_of(c.variant);
            ok = th.state_equal(rho, th.make_state(global, c.values));
          }
          break;
        }
        case DemoClaim::Kind::equal_marginal: {
          const auto& base = final_of(c.variants[0]);
          for (std::size_t v = 1; v < c.variants.size() && ok; ++v)
            ok = th.state_equal(th.project(base.first, sys),
                                th.project(final_of(c.variants[v]).first, sys));
          break;
        }
        case DemoClaim::Kind::equal_class: {
          const auto& base = final_of(c.variants[0]);
          for (std::size_t v = 1; v < c.variants.size() && ok; ++v)
            ok = equivalent(th, base.second, final_of(c.variants[v]).second, sys);
          break;
        }
        case DemoClaim::Kind::distinct_state: {
          for (std::size_t x = 0; x < c.variants.size() && ok; ++x)
            for (std::size_t y = x + 1; y < c.variants.size() && ok; ++y)
              ok = th.state_distance(final_of(c.variants[x]).first,
                                     final_of(c.variants[y]).first) > 1e-6;
          break;
        }
        case DemoClaim::Kind::distinct_class: {
          for (std::size_t x = 0; x < c.variants.size() && ok; ++x)
            for (std::size_t y = x + 1; y < c.variants.size() && ok; ++y)
              ok = !equivalent(th, final_of(c.variants[x]).second,
                               final_of(c.variants[y]).second, sys);
          break;
        }
      }
      claim_status[ci] = ok ? 1 : 0;
      if (!ok) {
        exit_code = 2;
        failing_iteration = it;
      }
    }
  }

  for (std::size_t ci = 0; ci < demo.claims.size(); ++ci) {
    Json cj;
    cj["text"] = demo_detail::claim_text(demo.claims[ci]);
    cj["line"] = demo.claims[ci].line;
    cj["status"] = claim_status[ci] == 1 ? "pass" : (claim_status[ci] == 0 ? "fail" : "skipped");
    claims_json.push_back(std::move(cj));
    console << "  claim: " << demo_detail::claim_text(demo.claims[ci]) << " -> "
            << (claim_status[ci] == 1 ? "pass" : (claim_status[ci] == 0 ? "FAIL" : "skipped"))
            << "\n";
  }
  if (exit_code != 0)
    console << "scenario failed at iteration " << failing_iteration << "\n";

  transcript["variants"] = std::move(variants_json);
  transcript["claims"] = std::move(claims_json);
  transcript["status"] = exit_code == 0 ? "pass" : "fail";

  RunResult result;
  result.exit_code = exit_code;
  result.output = std::move(transcript);
  result.console = console.str();
  return result;
}

/// Loads and runs a named scenario. Demos always execute on the honest
/// theory; sabotage options affect check and build only.
inline RunResult run_demo(const TheorySpecDocument& doc, const std::string& scenario,
                          const RunOverrides& overrides, const std::string& subject) {
  const DemoScenario* demo = doc.find_demo(scenario);
  if (!demo) throw ValidationError("no demo scenario named '" + scenario + "'");
  const SamplingBudget budget = overrides.apply(doc.budget);
  budget.validate();
  if (doc.kind == TheoryKind::classical)
    return run_demo_engine(build_classical(doc), doc, *demo, budget, subject);
  return run_demo_engine(build_quantum(doc), doc, *demo, budget, subject);
}

}  // namespace noumenal
