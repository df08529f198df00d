#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace opshadow {

// An n-qubit Pauli string in symplectic form: bit q of `x` / `z` records an X
// / Z factor on qubit q, and both bits set means Y. The canonical index packs
// the per-qubit digits (I=0, X=1, Y=2, Z=3) base-4 with qubit 0 as the least
// significant digit. Text rendering puts qubit n-1 leftmost.
struct PauliString {
  int n = 0;
  std::uint32_t x = 0;
  std::uint32_t z = 0;

  static constexpr int kMaxQubits = 16;

  PauliString() = default;
  PauliString(int n_qubits, std::uint32_t x_mask, std::uint32_t z_mask);

  static PauliString identity(int n_qubits);
  static PauliString from_index(int n_qubits, std::uint64_t index);
  static PauliString from_string(std::string_view text);
  // Single non-identity letter ('X', 'Y' or 'Z') on one qubit.
  static PauliString single(int n_qubits, int qubit, char letter);

  std::uint64_t index() const;
  std::string str() const;

  // Per-qubit digit: 0=I, 1=X, 2=Y, 3=Z.
  int letter(int qubit) const;
  bool is_identity() const { return x == 0 && z == 0; }
  // Number of non-identity positions.
  int weight() const;

  // P|j> = phase * |j XOR x>, phase = i^{popcount(x&z)} * (-1)^{popcount(z&j)}.
  std::pair<std::uint64_t, std::complex<double>> apply(std::uint64_t basis_index) const;

  Eigen::MatrixXcd to_dense() const;

  bool operator==(const PauliString&) const = default;
};

// True iff popcount(p.x & q.z) + popcount(p.z & q.x) is even.
bool commutes(const PauliString& p, const PauliString& q);

// A sorted list of (coefficient, Pauli) terms with distinct Paulis. Helper
// container for building Hamiltonians and dense reconstruction oracles.
class WeightedPauliSum {
 public:
  using Term = std::pair<double, PauliString>;

  WeightedPauliSum(int n_qubits, std::vector<Term> terms);

  int qubits() const { return n_; }
  const std::vector<Term>& terms() const { return terms_; }
  double l1_norm() const;
  double l2_norm() const;

 private:
  int n_ = 0;
  std::vector<Term> terms_;
};

// Dense matrix Sum_i c_i P_i; requires n <= 10.
Eigen::MatrixXcd sum_to_dense(const WeightedPauliSum& sum);

}  // namespace opshadow
