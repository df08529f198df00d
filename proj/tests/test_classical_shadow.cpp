#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>

#include <doctest.h>

#include "opshadow/classical_shadow.hpp"
#include "opshadow/rng.hpp"

using namespace opshadow;

namespace {

Eigen::MatrixXcd random_hermitian(int n, RngStream& rng) {
  const Eigen::Index dim = Eigen::Index(1) << n;
  Eigen::MatrixXcd a(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) a(r, c) = {rng.normal(), rng.normal()};
  return 0.5 * (a + a.adjoint());
}

// Rotation to the computational basis for basis code 0=X, 1=Y, 2=Z.
Eigen::Matrix2cd basis_rotation(int code) {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd u;
  if (code == 0)
    u << r, r, r, -r;
  else if (code == 1)
    u << std::complex<double>(r, 0), std::complex<double>(0, -r), std::complex<double>(r, 0),
        std::complex<double>(0, r);
  else
    u = Eigen::Matrix2cd::Identity();
  return u;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& high, const Eigen::MatrixXcd& low) {
  Eigen::MatrixXcd out(high.rows() * low.rows(), high.cols() * low.cols());
  for (Eigen::Index r = 0; r < high.rows(); ++r)
    for (Eigen::Index c = 0; c < high.cols(); ++c)
      out.block(r * low.rows(), c * low.cols(), low.rows(), low.cols()) = high(r, c) * low;
  return out;
}

// Inverted-channel snapshot matrix: product over qubits of 3 U^dag |b><b| U - I.
Eigen::MatrixXcd snapshot_dense(const Snapshot& snap, int n) {
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(1, 1);
  for (int q = n - 1; q >= 0; --q) {
    const Eigen::Matrix2cd u = basis_rotation(snap.basis(q));
    Eigen::Vector2cd ket = Eigen::Vector2cd::Zero();
    ket(snap.bit(q)) = 1.0;
    const Eigen::MatrixXcd local =
        3.0 * (u.adjoint() * ket * ket.adjoint() * u) - Eigen::MatrixXcd::Identity(2, 2);
    acc = kron(acc, local);
  }
  return acc;
}

CoefficientVector make_cv(int n, const std::vector<std::pair<std::string, double>>& terms) {
  CoefficientVector cv;
  cv.n = n;
  for (const auto& [text, value] : terms)
    cv.entries.push_back({PauliString::from_string(text).index(), value});
  std::sort(cv.entries.begin(), cv.entries.end(),
            [](const auto& a, const auto& b) { return a.index < b.index; });
  cv.refresh_norms();
  return cv;
}

}  // namespace

TEST_CASE("single-snapshot Pauli estimates match hand values and the dense form") {
  Snapshot z0{2u << 0, 0};  // Z basis, outcome 0
  CHECK(snapshot_pauli_expectation(PauliString::from_string("Z"), z0) == 3.0);
  z0.outcomes = 1;
  CHECK(snapshot_pauli_expectation(PauliString::from_string("Z"), z0) == -3.0);
  CHECK(snapshot_pauli_expectation(PauliString::from_string("X"), z0) == 0.0);
  CHECK(snapshot_pauli_expectation(PauliString::identity(1), z0) == 1.0);

  const Snapshot xy{(0u << 2) | 1u, 1u};  // bases X on qubit 1, Y on qubit 0; bits 0,1
  CHECK(snapshot_pauli_expectation(PauliString::from_string("XY"), xy) == -9.0);
  CHECK(snapshot_pauli_expectation(PauliString::from_string("XI"), xy) == 3.0);
  CHECK(snapshot_pauli_expectation(PauliString::from_string("ZY"), xy) == 0.0);

  // exhaustively against Tr[P (3 U^dag|b><b|U - I)^(x)2]
  for (std::uint32_t b1 = 0; b1 < 3; ++b1)
    for (std::uint32_t b0 = 0; b0 < 3; ++b0)
      for (std::uint32_t m = 0; m < 4; ++m) {
        const Snapshot snap{(b1 << 2) | b0, m};
        const Eigen::MatrixXcd dense = snapshot_dense(snap, 2);
        for (std::uint64_t idx = 0; idx < 16; ++idx) {
          const PauliString p = PauliString::from_index(2, idx);
          const double expected = (p.to_dense() * dense).trace().real();
          CHECK(snapshot_pauli_expectation(p, snap) == doctest::Approx(expected).epsilon(1e-12));
        }
      }
}

TEST_CASE("the exact snapshot average reproduces the state") {
  RngStream rng(19);
  std::vector<QuantumState> states;
  states.push_back(QuantumState::pure(PureState::basis(1, 1)));
  states.push_back(QuantumState::pure(ghz_state(2)));
  states.push_back(QuantumState::maximally_mixed(2));
  states.push_back(depolarize(haar_random_state(2, rng), 0.3));
  states.push_back(QuantumState::mixture(
      {{0.6, false, haar_random_state(2, rng)}, {0.4, false, haar_random_state(2, rng)}}));
  for (int i = 0; i < 5; ++i) states.push_back(QuantumState::pure(haar_random_state(1 + i % 2, rng)));
  for (const auto& rho : states) {
    const Eigen::MatrixXcd diff = brute_force_snapshot_mean(rho) - density_matrix(rho);
    CHECK(diff.cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK_THROWS_AS(brute_force_snapshot_mean(QuantumState::maximally_mixed(3)),
                  std::invalid_argument);
}

TEST_CASE("snapshot collection is seeded and validated") {
  const QuantumState rho = depolarize(ghz_state(2), 0.2);
  const auto a = collect_snapshots(rho, 100, 7);
  const auto b = collect_snapshots(rho, 100, 7);
  const auto c = collect_snapshots(rho, 100, 8);
  REQUIRE(a.size() == 100);
  bool same = true, differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same = same && a[i].bases == b[i].bases && a[i].outcomes == b[i].outcomes;
    differs = differs || a[i].bases != c[i].bases || a[i].outcomes != c[i].outcomes;
  }
  CHECK(same);
  CHECK(differs);
  CHECK_THROWS_AS(collect_snapshots(rho, 0, 1), std::invalid_argument);
}

TEST_CASE("snapshot outcomes follow the rotated Born rule") {
  const std::size_t count = 6000;

  // |0>: Z-basis snapshots always read 0, X-basis ones are a fair coin.
  auto snaps = collect_snapshots(QuantumState::pure(PureState::basis(1, 0)), count, 3);
  std::size_t x_total = 0, x_ones = 0;
  for (const auto& s : snaps) {
    if (s.basis(0) == 2) CHECK(s.bit(0) == 0);
    if (s.basis(0) == 0) {
      ++x_total;
      x_ones += s.bit(0);
    }
  }
  CHECK(x_total > count / 4);
  CHECK(std::abs(static_cast<double>(x_ones) / x_total - 0.5) <
        5.0 * std::sqrt(0.25 / static_cast<double>(x_total)));

  // |+> in the X basis and the +1 Y eigenstate in the Y basis read 0.
  snaps = collect_snapshots(QuantumState::pure(ghz_state(1)), count, 4);
  for (const auto& s : snaps)
    if (s.basis(0) == 0) CHECK(s.bit(0) == 0);
  const double r = 1.0 / std::sqrt(2.0);
  const PureState yplus(1, {{r, 0}, {0, r}});
  snaps = collect_snapshots(QuantumState::pure(yplus), count, 5);
  for (const auto& s : snaps)
    if (s.basis(0) == 1) CHECK(s.bit(0) == 0);

  // GHZ: ZZ-basis outcomes are perfectly correlated.
  snaps = collect_snapshots(QuantumState::pure(ghz_state(2)), count, 6);
  for (const auto& s : snaps)
    if (s.bases == ((2u << 2) | 2u)) CHECK(s.bit(0) == s.bit(1));

  // maximally mixed: outcomes are a fair coin regardless of basis
  snaps = collect_snapshots(QuantumState::maximally_mixed(1), count, 7);
  std::size_t ones = 0;
  for (const auto& s : snaps) ones += s.bit(0);
  CHECK(std::abs(static_cast<double>(ones) / count - 0.5) <
        5.0 * std::sqrt(0.25 / static_cast<double>(count)));

  // depolarized |0>, Z basis: P(1) = lambda / 2 = 0.25
  snaps = collect_snapshots(depolarize(PureState::basis(1, 0), 0.5), 20000, 8);
  std::size_t z_total = 0, z_ones = 0;
  for (const auto& s : snaps)
    if (s.basis(0) == 2) {
      ++z_total;
      z_ones += s.bit(0);
    }
  CHECK(std::abs(static_cast<double>(z_ones) / z_total - 0.25) <
        5.0 * std::sqrt(0.25 * 0.75 / static_cast<double>(z_total)));
}

TEST_CASE("shadow estimates average the per-snapshot values") {
  const auto id = make_cv(1, {{"I", 2.5}});
  const auto snaps = collect_snapshots(QuantumState::maximally_mixed(1), 50, 1);
  const auto id_report = shadow_estimate(id, snaps, 1);
  CHECK(id_report.method == "classical-shadow");
  CHECK(id_report.value == 2.5);
  CHECK(id_report.variance == 0.0);
  CHECK(id_report.samples == 50);
  CHECK(id_report.shots == 50);

  // Z on |0>: per-snapshot value is 3 with probability 1/3, else 0.
  const auto z = make_cv(1, {{"Z", 1.0}});
  const auto zero_snaps = collect_snapshots(QuantumState::pure(PureState::basis(1, 0)), 30000, 2);
  const auto z_report = shadow_estimate(z, zero_snaps, 1);
  CHECK(std::abs(z_report.value - 1.0) < 5.0 * std::sqrt(2.0 / 30000.0));
  CHECK(std::abs(z_report.variance - 2.0) < 0.2);

  const auto grouped = shadow_estimate(z, zero_snaps, 5);
  REQUIRE(grouped.groups.size() == 5);
  std::vector<double> sorted = grouped.groups;
  std::sort(sorted.begin(), sorted.end());
  CHECK(grouped.value == sorted[2]);

  CHECK_THROWS_AS(shadow_estimate(z, {}, 1), std::invalid_argument);
  CHECK_THROWS_AS(shadow_estimate(z, zero_snaps, 2), std::invalid_argument);
  CHECK_THROWS_AS(shadow_estimate(z, {zero_snaps[0]}, 3), std::invalid_argument);
  const auto wide = make_cv(10, {{"XXXXXXXXXX", 1.0}});
  CHECK_THROWS_AS(shadow_estimate(wide, {zero_snaps[0]}, 1), std::invalid_argument);
}

TEST_CASE("shadow estimation is unbiased under exhaustive enumeration") {
  RngStream rng(47);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 1 + trial % 2;
    const Eigen::MatrixXcd op = random_hermitian(n, rng);
    const auto cv = decompose(op, n);
    const QuantumState rho = depolarize(haar_random_state(n, rng), 0.3);
    const double truth = (op * density_matrix(rho)).trace().real();

    const int combos = n == 1 ? 3 : 9;
    const Eigen::Index dim = Eigen::Index(1) << n;
    const Eigen::MatrixXcd rho_dense = density_matrix(rho);
    double mean = 0;
    for (int combo = 0; combo < combos; ++combo) {
      std::uint32_t bases = 0;
      int rest = combo;
      for (int q = 0; q < n; ++q) {
        bases |= static_cast<std::uint32_t>(rest % 3) << (2 * q);
        rest /= 3;
      }
      Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(1, 1);
      for (int q = n - 1; q >= 0; --q) u = kron(u, basis_rotation((bases >> (2 * q)) & 3));
      const Eigen::MatrixXcd rotated = u * rho_dense * u.adjoint();
      for (Eigen::Index m = 0; m < dim; ++m) {
        const Snapshot snap{bases, static_cast<std::uint32_t>(m)};
        const double value = shadow_estimate(cv, {snap}, 1).value;
        // compiled fast path == reference per-Pauli sum
        double byhand = 0;
        for (std::size_t i = 0; i < cv.entries.size(); ++i)
          byhand += cv.entries[i].value * snapshot_pauli_expectation(cv.pauli_at(i), snap);
        CHECK(value == doctest::Approx(byhand).epsilon(1e-12));
        mean += rotated(m, m).real() / combos * value;
      }
    }
    CHECK(mean == doctest::Approx(truth).epsilon(1e-10));
  }
}

TEST_CASE("the shadow variance bound follows the weighted 3^w sum") {
  CHECK(shadow_variance_bound(make_cv(2, {{"XY", 1.0}})) == doctest::Approx(9.0));
  CHECK(shadow_variance_bound(make_cv(1, {{"X", 2.0}, {"Z", 3.0}})) == doctest::Approx(75.0));
  CHECK(shadow_variance_bound(make_cv(1, {{"I", 4.0}})) == doctest::Approx(16.0));
}

TEST_CASE("snapshot files use the fixed text layout") {
  const Snapshot golden{9u, 2u};  // qubit codes Y,Z,X low to high; bits 0,1,0
  std::ostringstream out;
  write_snapshots(out, {golden}, 3);
  CHECK(out.str() == "XZY 010\n");

  const auto snaps = collect_snapshots(depolarize(ghz_state(3), 0.1), 64, 12);
  std::ostringstream stream;
  write_snapshots(stream, snaps, 3);
  std::istringstream in(stream.str());
  const auto back = read_snapshots(in, 3);
  REQUIRE(back.size() == snaps.size());
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    CHECK(back[i].bases == snaps[i].bases);
    CHECK(back[i].outcomes == snaps[i].outcomes);
  }

  std::istringstream commented("# header\n\nXZY 010\n");
  CHECK(read_snapshots(commented, 3).size() == 1);
  std::istringstream short_line("XZ 01\n");
  CHECK_THROWS_WITH_AS(read_snapshots(short_line, 3), doctest::Contains("line 1"),
                       std::invalid_argument);
  std::istringstream bad_letter("XZY 010\nXQY 000\n");
  CHECK_THROWS_WITH_AS(read_snapshots(bad_letter, 3), doctest::Contains("line 2"),
                       std::invalid_argument);
  std::istringstream bad_bit("XZY 012\n");
  CHECK_THROWS_AS(read_snapshots(bad_bit, 3), std::invalid_argument);
}
