#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <vector>

#include "noumenal/quantum.hpp"

using namespace noumenal;

namespace {

// Independent dense helpers, deliberately written with plain loops rather
// than Eigen expressions, so the oracle path differs from the library path.
Matrix mul(const Matrix& a, const Matrix& b) {
  Matrix c = Matrix::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      Complex s = 0.0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

Matrix dagger(const Matrix& a) {
  Matrix c(a.cols(), a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) c(j, i) = std::conj(a(i, j));
  return c;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index k = 0; k < b.rows(); ++k)
        for (Eigen::Index l = 0; l < b.cols(); ++l)
          c(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return c;
}

// Trace over the trailing (least significant) qubit of a two-qubit matrix.
Matrix trace_out_second(const Matrix& m) {
  Matrix out = Matrix::Zero(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Complex s = 0.0;
      for (int e = 0; e < 2; ++e) s += m(2 * i + e, 2 * j + e);
      out(i, j) = s;
    }
  return out;
}

Matrix trace_out_first(const Matrix& m) {
  Matrix out = Matrix::Zero(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Complex s = 0.0;
      for (int e = 0; e < 2; ++e) s += m(2 * e + i, 2 * e + j);
      out(i, j) = s;
    }
  return out;
}

Matrix bell_state(int which) {
  // 0: |00>+|11>, 1: |00>-|11>, 2: |01>+|10>, 3: |01>-|10| (normalized).
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  const double s = 1.0 / std::sqrt(2.0);
  switch (which) {
    case 0: v(0) = s; v(3) = s; break;
    case 1: v(0) = s; v(3) = -s; break;
    case 2: v(1) = s; v(2) = s; break;
    default: v(1) = s; v(2) = -s; break;
  }
  return v * v.adjoint();
}

}  // namespace

TEST_CASE("gate composition and inverse against a dense oracle", "[quantum]") {
  QuantumTheory th = QuantumTheory::qubits(1);
  const System q = th.universe().global_system();
  const auto x = th.gate_operation("X", {0});
  const auto h = th.gate_operation("H", {0});

  // [X][X] = [I]
  const Matrix xx = mul(QuantumTheory::named_gates().at("X"), QuantumTheory::named_gates().at("X"));
  CHECK((xx - Matrix::Identity(2, 2)).norm() < 1e-14);
  CHECK(th.op_equal(th.compose(x, x), th.identity(q)));

  // H is its own inverse: H H = I
  const Matrix hh = mul(QuantumTheory::named_gates().at("H"), QuantumTheory::named_gates().at("H"));
  CHECK((hh - Matrix::Identity(2, 2)).norm() < 1e-14);
  CHECK(th.op_equal(th.inverse(h), h));

  CHECK(th.op_equal(th.inverse(th.identity(q)), th.identity(q)));
}

TEST_CASE("quantum action is conjugation and ignores the phase", "[quantum]") {
  QuantumTheory th = QuantumTheory::qubits(1);
  const System q = th.universe().global_system();
  const auto x = th.gate_operation("X", {0});

  const auto rho0 = th.basis_state(q, 0);
  const auto rho1 = th.basis_state(q, 1);
  CHECK(th.state_equal(th.act(th.identity(q), rho0), rho0));
  CHECK(th.state_equal(th.act(x, rho0), rho1));

  // U rho U^dagger computed by the independent multiply.
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const Matrix u = haar_unitary(2, rng);
    const auto rho = th.sample_state(q, rng);
    const Matrix expected = mul(mul(u, rho.matrix()), dagger(u));
    const auto via_class = th.act(th.make_operation(q, u), rho);
    CHECK((via_class.matrix() - expected).norm() < 1e-12);

    // The same class with a shifted phase acts identically.
    const Matrix shifted = std::polar(1.0, 2.0 * rng.uniform01()) * u;
    const auto via_shifted = th.act(UnitaryClass::raw(q, shifted), rho);
    CHECK((via_shifted.matrix() - expected).norm() < 1e-12);
  }
}

TEST_CASE("partial trace against direct 4x4 computation", "[quantum]") {
  QuantumTheory th = QuantumTheory::qubits(2);
  const System q0 = th.universe().singleton(0), q1 = th.universe().singleton(1);
  const System global = th.universe().global_system();

  const auto rho_a = th.basis_state(q0, 1);
  CHECK(th.state_equal(th.project(rho_a, q0), rho_a));

  // Bell state marginals are maximally mixed.
  const auto bell = th.make_state(global, bell_state(0));
  const Matrix half = Matrix::Identity(2, 2) / 2.0;
  CHECK((th.project(bell, q0).matrix() - trace_out_second(bell.matrix())).norm() < 1e-14);
  CHECK((th.project(bell, q0).matrix() - half).norm() < 1e-14);
  CHECK((th.project(bell, q1).matrix() - trace_out_first(bell.matrix())).norm() < 1e-14);
  CHECK((th.project(bell, q1).matrix() - half).norm() < 1e-14);

  // tr over the second factor of rho (x) sigma is rho.
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    QuantumTheory th1 = QuantumTheory::qubits(1);
    const auto rho = th1.sample_state(th1.universe().global_system(), rng);
    const auto sigma = th1.sample_state(th1.universe().global_system(), rng);
    const Matrix joint = kron(rho.matrix(), sigma.matrix());
    CHECK((th.project(th.make_state(global, joint), q0).matrix() - rho.matrix()).norm() < 1e-12);
    CHECK((th.project(th.make_state(global, joint), q1).matrix() - sigma.matrix()).norm() < 1e-12);
  }

  CHECK_THROWS_AS(th.project(rho_a, global), NotASubsystemError);
}

TEST_CASE("all four Bell states share both marginals", "[quantum]") {
  QuantumTheory th = QuantumTheory::qubits(2);
  const System global = th.universe().global_system();
  const Matrix half = Matrix::Identity(2, 2) / 2.0;
  for (int which = 0; which < 4; ++which) {
    const auto rho = th.make_state(global, bell_state(which));
    for (std::size_t s = 0; s < 2; ++s)
      CHECK((th.project(rho, th.universe().singleton(s)).matrix() - half).norm() < 1e-12);
  }
}

TEST_CASE("class product places payloads by site order", "[quantum]") {
  QuantumTheory th = QuantumTheory::qubits(2);
  const auto x0 = th.gate_operation("X", {0});
  const auto z1 = th.gate_operation("Z", {1});
  const Matrix expected = kron(QuantumTheory::named_gates().at("X"),
                               QuantumTheory::named_gates().at("Z"));
  CHECK((th.product(x0, z1).representative() - expected).norm() < 1e-14);
  // Argument order does not matter; placement is by site index.
  CHECK(th.op_equal(th.product(z1, x0), th.product(x0, z1)));

  // Identity product and phase quotient.
  const System q0 = th.universe().singleton(0), q1 = th.universe().singleton(1);
  CHECK(th.op_equal(th.product(th.identity(q0), th.identity(q1)),
                    th.identity(th.universe().global_system())));
  Rng rng(3);
  const Matrix u = haar_unitary(2, rng), v = haar_unitary(2, rng);
  const auto cls = th.product(th.make_operation(q0, u), th.make_operation(q1, v));
  const auto shifted =
      th.product(UnitaryClass::raw(q0, std::polar(1.0, 1.234) * u), th.make_operation(q1, v));
  CHECK(th.op_equal(cls, shifted));
}

TEST_CASE("interleaved systems compose unambiguously on three qubits", "[quantum]") {
  QuantumTheory th = QuantumTheory::qubits(3);
  const System outer = th.universe().system_of({0, 2});
  const System middle = th.universe().singleton(1);

  Rng rng(11);
  const Matrix u = haar_unitary(4, rng);  // payload on sites {q0, q2}
  const Matrix v = haar_unitary(2, rng);  // payload on {q1}
  const auto w = th.product(th.make_operation(outer, u), th.make_operation(middle, v));

  // Independent placement: route bit 0 of the payload to q0, bit 1 to q2.
  const auto bit = [](std::size_t i, int pos, int width) {
    return (i >> (width - 1 - pos)) & 1u;
  };
  Matrix expected = Matrix::Zero(8, 8);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      const std::size_t iu = 2 * bit(i, 0, 3) + bit(i, 2, 3);
      const std::size_t ju = 2 * bit(j, 0, 3) + bit(j, 2, 3);
      const std::size_t iv = bit(i, 1, 3), jv = bit(j, 1, 3);
      expected(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          u(static_cast<Eigen::Index>(iu), static_cast<Eigen::Index>(ju)) *
          v(static_cast<Eigen::Index>(iv), static_cast<Eigen::Index>(jv));
    }
  const Matrix canonical = UnitaryClass::canonical_phase(expected, 1e-6);
  CHECK((w.representative() - canonical).norm() < 1e-12);
}

TEST_CASE("interchange of class products on random unitaries", "[quantum]") {
  QuantumTheory th = QuantumTheory::qubits(2);
  const System q0 = th.universe().singleton(0), q1 = th.universe().singleton(1);
  Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    const auto u1 = th.make_operation(q0, haar_unitary(2, rng));
    const auto u2 = th.make_operation(q0, haar_unitary(2, rng));
    const auto v1 = th.make_operation(q1, haar_unitary(2, rng));
    const auto v2 = th.make_operation(q1, haar_unitary(2, rng));
    const auto lhs = th.compose(th.product(u2, v2), th.product(u1, v1));
    const auto rhs = th.product(th.compose(u2, u1), th.compose(v2, v1));
    CHECK(th.class_distance(lhs, rhs) < 1e-9);
  }
}

TEST_CASE("factor detection on two qubits", "[quantum]") {
  QuantumTheory th = QuantumTheory::qubits(2);
  const System q0 = th.universe().singleton(0), q1 = th.universe().singleton(1);

  Rng rng(17);
  const Matrix v = haar_unitary(2, rng);
  const auto composite = th.product(th.identity(q0), th.make_operation(q1, v));
  const auto f = th.factor_through_complement(composite, q0);
  REQUIRE(f.has_value());
  CHECK(th.op_equal(*f, th.make_operation(q1, v)));

  // The controlled gate does not factor through its control; the partial
  // trace candidate tr_A(CNOT)/2 = (I+X)/2 is visibly not unitary.
  const auto cnot = th.gate_operation("CNOT", {0, 1});
  CHECK_FALSE(th.factor_through_complement(cnot, q0).has_value());
  const Matrix cand = trace_out_first(cnot.representative()) / 2.0;
  const Matrix expected_cand =
      (Matrix::Identity(2, 2) + QuantumTheory::named_gates().at("X")) / 2.0;
  CHECK((cand - expected_cand).norm() < 1e-12);
  CHECK((mul(dagger(cand), cand) - Matrix::Identity(2, 2)).norm() > 0.4);

  const auto zi = th.product(th.gate_operation("Z", {0}), th.identity(q1));
  const auto fz = th.factor_through_complement(zi, q1);
  REQUIRE(fz.has_value());
  CHECK(th.op_equal(*fz, th.gate_operation("Z", {0})));
}

TEST_CASE("seeded Haar sampling: unitary, deterministic, normalized columns", "[quantum]") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed);
    const Matrix u = haar_unitary(4, rng);
    CHECK((dagger(u) * u - Matrix::Identity(4, 4)).norm() < 1e-10);
    for (int c = 0; c < 4; ++c) {
      double norm2 = 0.0;
      for (int r = 0; r < 4; ++r) norm2 += std::norm(u(r, c));
      CHECK(std::abs(norm2 - 1.0) < 1e-12);
    }
  }
  Rng a(42), b(42);
  CHECK((haar_unitary(4, a) - haar_unitary(4, b)).norm() == 0.0);
  CHECK_THROWS_AS(haar_unitary(3, a), ValidationError);
}

TEST_CASE("distinct classes are phenomenally distinguishable", "[quantum]") {
  QuantumTheory th = QuantumTheory::qubits(2);
  const System global = th.universe().global_system();
  Rng rng(23);
  for (int i = 0; i < 30; ++i) {
    const auto u = th.sample_operation(global, rng);
    const auto v = th.sample_operation(global, rng);
    if (th.op_equal(u, v)) continue;
    bool found = false;
    for (int k = 0; k < 16 && !found; ++k) {
      const auto rho = th.sample_state(global, rng);
      found = th.state_distance(th.act(u, rho), th.act(v, rho)) > 1e-6;
    }
    CHECK(found);
  }
}

TEST_CASE("class equality uses the phase-optimal distance", "[quantum]") {
  QuantumTheory th = QuantumTheory::qubits(1);
  const System q = th.universe().global_system();
  Rng rng(29);
  const Matrix u = haar_unitary(2, rng);
  const auto cls = th.make_operation(q, u);
  CHECK(th.op_equal(cls, th.make_operation(q, std::polar(1.0, 2.5) * u)));
  CHECK(th.op_equal(cls, cls));
  CHECK(th.class_distance(cls, cls) == 0.0);
  CHECK_FALSE(th.op_equal(cls, th.compose(cls, th.gate_operation("X", {0}))));

  // Canonical phase: the first significant entry of the representative is
  // real and positive.
  const Matrix rep = cls.representative();
  bool anchored = false;
  for (Eigen::Index r = 0; r < rep.rows() && !anchored; ++r)
    for (Eigen::Index c = 0; c < rep.cols() && !anchored; ++c)
      if (std::abs(rep(r, c)) > 1e-6) {
        CHECK(rep(r, c).real() > 0.0);
        CHECK(std::abs(rep(r, c).imag()) < 1e-12);
        anchored = true;
      }
  CHECK(anchored);
}

TEST_CASE("density matrix validation", "[quantum]") {
  QuantumTheory th = QuantumTheory::qubits(1);
  const System q = th.universe().global_system();
  Matrix not_hermitian(2, 2);
  not_hermitian << 1.0, Complex(0, 1), Complex(0, 1), 0.0;
  CHECK_THROWS_AS(th.make_state(q, not_hermitian), ValidationError);

  Matrix wrong_trace = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(th.make_state(q, wrong_trace), ValidationError);

  Matrix negative(2, 2);
  negative << 1.5, 0.0, 0.0, -0.5;
  CHECK_THROWS_AS(th.make_state(q, negative), ValidationError);

  CHECK_NOTHROW(th.make_state(q, Matrix::Identity(2, 2) / 2.0));
  CHECK_THROWS_AS(th.make_operation(q, Matrix::Zero(2, 2)), ValidationError);
  CHECK_THROWS_AS(QuantumTheory::qubits(5), ValidationError);  // default qubit cap
}

TEST_CASE("sampled density matrices are valid states", "[quantum]") {
  QuantumTheory th = QuantumTheory::qubits(2);
  const System global = th.universe().global_system();
  Rng rng(31);
  for (int i = 0; i < 50; ++i) {
    const auto rho = th.sample_state(global, rng);
    CHECK_NOTHROW(th.make_state(global, rho.matrix()));
  }
}
