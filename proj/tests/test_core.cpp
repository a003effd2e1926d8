#include <catch2/catch_amalgamated.hpp>

#include <utility>
#include <vector>

#include "noumenal/classical.hpp"
#include "noumenal/core.hpp"
#include "noumenal/quantum.hpp"

using namespace noumenal;

namespace {

ClassicalTheory two_by_two() {
  ClassicalSpec spec;
  spec.sites = {{"a", 2}, {"b", 2}};
  return ClassicalTheory(std::move(spec));
}

/// Test fixture: a classical theory whose operations carry an extra tag that
/// the action ignores. Distinct tags make algebraically distinct operations
/// that act identically on every state, so the raw theory is not faithful
/// and the quotient must merge each tag pair.
class TaggedClassicalTheory {
 public:
  struct Op {
    BlockPermutation perm;
    int tag;
    const System& system() const { return perm.system(); }
  };
  using State = ValueTuple;

  TaggedClassicalTheory() : inner_(two_by_two()) {}

  const SiteUniverse& universe() const { return inner_.universe(); }
  Op identity(const System& a) const { return {inner_.identity(a), 0}; }
  Op compose(const Op& u, const Op& v) const {
    return {inner_.compose(u.perm, v.perm), u.tag ^ v.tag};
  }
  Op inverse(const Op& u) const { return {inner_.inverse(u.perm), u.tag}; }
  State act(const Op& u, const State& s) const { return inner_.act(u.perm, s); }
  State project(const State& s, const System& a) const { return inner_.project(s, a); }
  Op product(const Op& u, const Op& v) const {
    return {inner_.product(u.perm, v.perm), u.tag ^ v.tag};
  }
  std::optional<Op> factor_through_complement(const Op& w, const System& a) const {
    auto f = inner_.factor_through_complement(w.perm, a);
    if (!f) return std::nullopt;
    return Op{std::move(*f), w.tag};
  }
  bool op_equal(const Op& u, const Op& v) const {
    return u.tag == v.tag && inner_.op_equal(u.perm, v.perm);
  }
  double op_distance(const Op& u, const Op& v) const { return op_equal(u, v) ? 0.0 : 1.0; }
  bool state_equal(const State& a, const State& b) const { return inner_.state_equal(a, b); }
  double state_distance(const State& a, const State& b) const {
    return inner_.state_distance(a, b);
  }
  State extend_state(const State& s, const System& b) const { return inner_.extend_state(s, b); }

  std::vector<Op> enumerate_operations(const System& a) const {
    std::vector<Op> out;
    for (const auto& p : inner_.enumerate_operations(a)) {
      out.push_back({p, 0});
      out.push_back({p, 1});
    }
    return out;
  }
  std::vector<State> enumerate_states(const System& a) const {
    return inner_.enumerate_states(a);
  }

  Json op_json(const Op& u) const {
    Json j = inner_.op_json(u.perm);
    j["tag"] = u.tag;
    return j;
  }
  Json state_json(const State& s) const { return inner_.state_json(s); }

 private:
  ClassicalTheory inner_;
};

static_assert(TheoryContract<TaggedClassicalTheory>);
static_assert(EnumerableTheory<TaggedClassicalTheory>);
static_assert(TheoryContract<ClassicalTheory>);
static_assert(EnumerableTheory<ClassicalTheory>);
static_assert(SampleableTheory<ClassicalTheory>);
static_assert(TheoryContract<QuantumTheory>);
static_assert(!EnumerableTheory<QuantumTheory>);
static_assert(SampleableTheory<QuantumTheory>);
static_assert(ProvidesConfusablePair<QuantumTheory>);
static_assert(ProvidesLocalSplit<QuantumTheory>);

}  // namespace

TEST_CASE("sampling budget validation", "[core]") {
  SamplingBudget bad = SamplingBudget::sampled(0, 1);
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  SamplingBudget neg;
  neg.tolerance = -1.0;
  CHECK_THROWS_AS(neg.validate(), ValidationError);
  CHECK_NOTHROW(SamplingBudget::exhaustive().validate());
}

TEST_CASE("global embedding pads with the identity on the complement", "[core]") {
  ClassicalTheory th = two_by_two();
  const System a = th.universe().singleton(0);
  const System global = th.universe().global_system();
  const auto flip = th.make_operation(a, {1, 0});
  const auto g = embed_global(th, flip);
  REQUIRE(g.system() == global);
  for (const auto& t : th.enumerate_states(global)) {
    const auto moved = th.act(g, t);
    CHECK(th.project(moved, a) == th.act(flip, th.project(t, a)));
    CHECK(th.project(moved, a.complement()) == th.project(t, a.complement()));
  }
  // Already-global operations embed to themselves.
  CHECK(th.op_equal(embed_global(th, g), g));
}

TEST_CASE("faithful quotient of an already-faithful theory is the identity", "[core]") {
  ClassicalTheory th = two_by_two();
  auto quotient = faithfulize(th);
  for (const System& sys : th.universe().all_systems()) {
    const auto original = th.enumerate_operations(sys);
    const auto reduced = quotient.enumerate_operations(sys);
    REQUIRE(reduced.size() == original.size());
    for (const auto& op : original) CHECK(th.op_equal(quotient.canonicalize(op), op));
  }
}

TEST_CASE("faithful quotient merges operations that act identically", "[core]") {
  TaggedClassicalTheory tagged;
  const System global = tagged.universe().global_system();

  // The raw theory is not faithful: tags are invisible to the action.
  const auto ops = tagged.enumerate_operations(global);
  REQUIRE(ops.size() == 48);  // 24 permutations x 2 tags
  bool found_confusable = false;
  for (std::size_t i = 0; i < ops.size() && !found_confusable; ++i)
    for (std::size_t j = i + 1; j < ops.size() && !found_confusable; ++j) {
      if (tagged.op_equal(ops[i], ops[j])) continue;
      bool same_action = true;
      for (const auto& s : tagged.enumerate_states(global))
        same_action = same_action &&
                      tagged.state_equal(tagged.act(ops[i], s), tagged.act(ops[j], s));
      found_confusable = same_action;
    }
  CHECK(found_confusable);

  auto quotient = faithfulize(tagged);
  const auto reduced = quotient.enumerate_operations(global);
  CHECK(reduced.size() == 24);  // tag pairs merged

  // Distinct permutations stay distinct classes.
  for (std::size_t i = 0; i < reduced.size(); ++i)
    for (std::size_t j = i + 1; j < reduced.size(); ++j)
      CHECK_FALSE(quotient.op_equal(reduced[i], reduced[j]));

  // Quotient group laws go through canonical representatives.
  const auto u = reduced[1];
  CHECK(quotient.op_equal(quotient.compose(u, quotient.inverse(u)), quotient.identity(global)));
  // Both tags canonicalize to the same representative.
  const auto tagged_op = TaggedClassicalTheory::Op{u.perm, 1};
  CHECK(quotient.op_equal(quotient.canonicalize(tagged_op), u));
}

TEST_CASE("faithfulize refuses non-enumerable theories", "[core]") {
  QuantumTheory th = QuantumTheory::qubits(1);
  CHECK_THROWS_AS(faithfulize(th), BudgetExceededError);
}

TEST_CASE("state extension projects back to the original", "[core]") {
  ClassicalTheory cth = two_by_two();
  for (const auto& [a, b] :
       std::vector<std::pair<System, System>>{{cth.universe().singleton(0),
                                               cth.universe().global_system()},
                                              {cth.universe().empty_system(),
                                               cth.universe().singleton(1)}})
    for (const auto& s : cth.enumerate_states(a))
      CHECK(cth.project(cth.extend_state(s, b), a) == s);

  QuantumTheory qth = QuantumTheory::qubits(2);
  Rng rng(3);
  const System q1 = qth.universe().singleton(1);
  const System global = qth.universe().global_system();
  for (int i = 0; i < 20; ++i) {
    const auto sigma = qth.sample_state(q1, rng);
    const auto extended = qth.extend_state(sigma, global);
    CHECK(qth.state_distance(qth.project(extended, q1), sigma) < 1e-12);
    CHECK_NOTHROW(qth.make_state(global, extended.matrix()));
  }
}
