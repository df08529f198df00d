#include <cmath>
#include <sstream>
#include <stdexcept>

#include <doctest.h>

#include "opshadow/coefficients.hpp"
#include "opshadow/rng.hpp"
#include "opshadow/state.hpp"

using namespace opshadow;

namespace {

Eigen::MatrixXcd random_hermitian(int n, RngStream& rng) {
  const Eigen::Index dim = Eigen::Index(1) << n;
  Eigen::MatrixXcd a(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) a(r, c) = {rng.normal(), rng.normal()};
  return 0.5 * (a + a.adjoint());
}

}  // namespace

TEST_CASE("single-operator decompositions match hand values") {
  const auto z = decompose(PauliString::from_string("Z").to_dense(), 1);
  REQUIRE(z.entries.size() == 1);
  CHECK(z.entries[0].index == 3);
  CHECK(z.entries[0].value == 1.0);
  CHECK(z.l1 == 1.0);

  Eigen::Matrix2cd ket0 = Eigen::Matrix2cd::Zero();
  ket0(0, 0) = 1.0;
  const auto cv = decompose(ket0, 1);
  REQUIRE(cv.entries.size() == 2);
  CHECK(cv.entries[0].index == 0);
  CHECK(cv.entries[0].value == 0.5);
  CHECK(cv.entries[1].index == 3);
  CHECK(cv.entries[1].value == 0.5);

  // Y eigenstate projector (I + Y) / 2 pins the sign convention for odd-Y terms.
  Eigen::Matrix2cd yplus;
  yplus << std::complex<double>(0.5, 0), std::complex<double>(0, -0.5),
      std::complex<double>(0, 0.5), std::complex<double>(0.5, 0);
  const auto ycv = decompose(yplus, 1);
  REQUIRE(ycv.entries.size() == 2);
  CHECK(ycv.entries[0].index == 0);
  CHECK(ycv.entries[0].value == 0.5);
  CHECK(ycv.entries[1].index == 2);
  CHECK(ycv.entries[1].value == 0.5);

  // exact zeros are pruned
  const auto xonly = decompose(2.0 * PauliString::from_string("X").to_dense(), 1);
  REQUIRE(xonly.entries.size() == 1);
  CHECK(xonly.entries[0].index == 1);
  CHECK(xonly.entries[0].value == 2.0);
}

TEST_CASE("GHZ density matrices decompose into 2^n equal-magnitude terms") {
  for (int n = 2; n <= 4; ++n) {
    const PureState ghz = ghz_state(n);
    const Eigen::Index dim = Eigen::Index(1) << n;
    Eigen::Map<const Eigen::VectorXcd> v(ghz.amp.data(), dim);
    const auto cv = decompose(v * v.adjoint(), n);
    CHECK(cv.entries.size() == (1ull << n));
    const double expected = std::ldexp(1.0, -n);
    for (const auto& e : cv.entries)
      CHECK(std::abs(std::abs(e.value) - expected) < 1e-14);
    CHECK(std::abs(cv.l2 * cv.l2 - expected) < 1e-12);  // purity
  }
}

TEST_CASE("decomposition is an exact inverse of reconstruction") {
  RngStream rng(101);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 1 + trial % 3;
    const Eigen::MatrixXcd op = random_hermitian(n, rng);
    const auto cv = decompose(op, n);
    const Eigen::MatrixXcd back = sum_to_dense(to_weighted_sum(cv));
    CHECK((back - op).cwiseAbs().maxCoeff() < 1e-10);

    // Parseval and the norm chain
    const double trace_sq = (op * op).trace().real();
    const double dim = std::ldexp(1.0, n);
    CHECK(cv.l2 * cv.l2 == doctest::Approx(trace_sq / dim).epsilon(1e-12));
    CHECK(cv.l2 <= cv.l1 + 1e-12);
    CHECK(cv.l1 <= std::sqrt(static_cast<double>(cv.entries.size())) * cv.l2 + 1e-12);

    // Frobenius norm against the spectral norm
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op);
    const double op_norm = es.eigenvalues().cwiseAbs().maxCoeff();
    CHECK(op.norm() <= std::sqrt(dim) * op_norm + 1e-12);
    CHECK(cv.l2 * std::sqrt(dim) == doctest::Approx(op.norm()).epsilon(1e-12));
  }
}

TEST_CASE("decompose validates its input") {
  Eigen::Matrix2cd bad = Eigen::Matrix2cd::Zero();
  bad(0, 1) = 1.0;
  bad(1, 0) = 0.5;
  CHECK_THROWS_WITH_AS(decompose(bad, 1), doctest::Contains("not Hermitian"),
                       std::invalid_argument);
  CHECK_THROWS_AS(decompose(Eigen::MatrixXcd::Identity(4, 4), 1), std::invalid_argument);
  CHECK_THROWS_AS(decompose(Eigen::MatrixXcd::Identity(512, 512), 9), std::invalid_argument);
}

TEST_CASE("local decompositions embed into the full register") {
  const auto x3 = decompose_local(PauliString::from_string("X").to_dense(), {3}, 5);
  REQUIRE(x3.entries.size() == 1);
  CHECK(x3.entries[0].index == 1);
  CHECK(x3.global_index(x3.entries[0].index) == 64);  // digit 1 at qubit 3
  CHECK(x3.pauli_at(0).str() == "IXIII");

  const Eigen::MatrixXcd two = 0.5 * (PauliString::from_string("XX").to_dense() +
                                      PauliString::from_string("ZZ").to_dense());
  const auto cv = decompose_local(two, {0, 1}, 4);
  REQUIRE(cv.entries.size() == 2);
  CHECK(cv.pauli_at(0).str() == "IIXX");
  CHECK(cv.pauli_at(1).str() == "IIZZ");
  CHECK(cv.entries[0].value == 0.5);

  // support order maps local digit position to register qubit
  const auto zz = decompose_local(PauliString::from_string("ZZ").to_dense(), {1, 4}, 5);
  REQUIRE(zz.entries.size() == 1);
  CHECK(zz.global_index(zz.entries[0].index) == 780);  // 3*4 + 3*256
  CHECK(zz.pauli_at(0).str() == "ZIIZI");

  CHECK_THROWS_AS(decompose_local(two, {0, 0}, 4), std::invalid_argument);
  CHECK_THROWS_AS(decompose_local(two, {0, 4}, 4), std::invalid_argument);
  CHECK_THROWS_AS(decompose_local(two, {}, 4), std::invalid_argument);
  CHECK_THROWS_AS(decompose_local(two, {0}, 4), std::invalid_argument);
}

TEST_CASE("linear combination merges, cancels and validates") {
  const auto z = decompose(PauliString::from_string("Z").to_dense(), 1);
  const auto x = decompose(PauliString::from_string("X").to_dense(), 1);

  const auto zero = combine_linear({{1.0, z}, {-1.0, z}});
  CHECK(zero.entries.empty());
  CHECK(zero.l1 == 0.0);

  const auto merged = combine_linear({{2.0, x}, {3.0, z}});
  REQUIRE(merged.entries.size() == 2);
  CHECK(merged.entries[0].index == 1);
  CHECK(merged.entries[0].value == 2.0);
  CHECK(merged.entries[1].value == 3.0);
  CHECK(merged.l1 == 5.0);

  const auto doubled = combine_linear({{1.0, x}, {1.0, x}});
  REQUIRE(doubled.entries.size() == 1);
  CHECK(doubled.entries[0].value == 2.0);

  const auto z2 = decompose(PauliString::from_string("ZI").to_dense(), 2);
  CHECK_THROWS_AS(combine_linear({{1.0, z}, {1.0, z2}}), std::invalid_argument);
  CHECK_THROWS_AS(combine_linear({}), std::invalid_argument);
}

TEST_CASE("observable text files round-trip exactly") {
  RngStream rng(55);
  const auto cv = decompose(random_hermitian(2, rng), 2);
  std::ostringstream out;
  write_observable(out, cv);
  std::istringstream in(out.str());
  const auto back = read_observable(in);
  CHECK(back.n == cv.n);
  REQUIRE(back.entries.size() == cv.entries.size());
  for (std::size_t i = 0; i < cv.entries.size(); ++i) {
    CHECK(back.entries[i].index == cv.entries[i].index);
    CHECK(back.entries[i].value == cv.entries[i].value);  // bit-exact
  }
  CHECK(back.l1 == doctest::Approx(cv.l1).epsilon(1e-15));
}

TEST_CASE("observable parser reports line numbers and rejects bad input") {
  std::istringstream ok("# comment\n\n  0.25 XZ\n-1.5 IY\n");
  const auto cv = read_observable(ok);
  CHECK(cv.n == 2);
  REQUIRE(cv.entries.size() == 2);
  CHECK(cv.entries[0].value == -1.5);  // IY has the smaller canonical index (2)
  CHECK(cv.entries[1].value == 0.25);

  std::istringstream bad_letter("1.0 AB\n");
  CHECK_THROWS_WITH_AS(read_observable(bad_letter), doctest::Contains("line 1"),
                       std::invalid_argument);
  std::istringstream dup("1.0 X\n2.0 X\n");
  CHECK_THROWS_WITH_AS(read_observable(dup), doctest::Contains("line 2"), std::invalid_argument);
  std::istringstream mixed_len("1.0 X\n2.0 XX\n");
  CHECK_THROWS_WITH_AS(read_observable(mixed_len), doctest::Contains("line 2"),
                       std::invalid_argument);
  std::istringstream trailing("1.0 X extra\n");
  CHECK_THROWS_AS(read_observable(trailing), std::invalid_argument);
  std::istringstream empty("# nothing\n");
  CHECK_THROWS_AS(read_observable(empty), std::invalid_argument);
}

TEST_CASE("dense matrix files round-trip") {
  RngStream rng(77);
  const Eigen::MatrixXcd op = random_hermitian(2, rng);
  std::ostringstream out;
  write_dense_matrix(out, op, 2);
  std::istringstream in(out.str());
  const auto [back, n] = read_dense_matrix(in);
  CHECK(n == 2);
  CHECK((back - op).cwiseAbs().maxCoeff() == 0.0);

  std::istringstream truncated("1\n0 0 0 0\n");
  CHECK_THROWS_AS(read_dense_matrix(truncated), std::invalid_argument);
  std::istringstream bad_n("0\n");
  CHECK_THROWS_AS(read_dense_matrix(bad_n), std::invalid_argument);
}
