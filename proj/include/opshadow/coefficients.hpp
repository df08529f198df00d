#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "opshadow/pauli.hpp"

namespace opshadow {

// Real Pauli coefficients h_i = Tr[P_i O] / 2^k of a Hermitian operator,
// stored sparsely and sorted by canonical index. When `support` is non-empty
// the entries index Paulis over those qubits only (in support order) and are
// implicitly padded with identities on the rest of an n-qubit register.
struct CoefficientVector {
  int n = 0;                   // qubits of the full register
  std::vector<int> support;    // empty means the full register
  struct Entry {
    std::uint64_t index;       // canonical index over the local qubit set
    double value;
  };
  std::vector<Entry> entries;  // sorted by index, values pruned of zeros
  double l1 = 0;               // sum of |value|
  double l2 = 0;               // sqrt of sum of value^2

  int local_qubits() const { return support.empty() ? n : static_cast<int>(support.size()); }
  std::uint64_t grid_size() const { return 1ull << (2 * local_qubits()); }

  // Canonical index over the full register for a local index.
  std::uint64_t global_index(std::uint64_t local) const;
  PauliString pauli_at(std::size_t entry) const;

  // Recomputes both norms from the stored entries (compensated summation).
  void refresh_norms();
};

// Full decomposition of a dense Hermitian O over n <= 8 qubits. Entries with
// |h_i| < 1e-12 * ||h||_1 are pruned.
CoefficientVector decompose(const Eigen::MatrixXcd& op, int n_qubits);

// Decomposition of an operator acting on `support` (distinct qubits of an
// n-qubit register); `op` is dense over the support qubits alone.
CoefficientVector decompose_local(const Eigen::MatrixXcd& op, const std::vector<int>& support,
                                  int n_qubits);

// Merges Sum_j w_j * parts[j] into a single full-register vector. Exact
// cancellations are dropped; the result may be empty.
CoefficientVector combine_linear(const std::vector<std::pair<double, CoefficientVector>>& parts);

WeightedPauliSum to_weighted_sum(const CoefficientVector& cv);

// Text format: one "<coefficient> <paulistring>" pair per line, '#' comments.
void write_observable(std::ostream& out, const CoefficientVector& cv);
CoefficientVector read_observable(std::istream& in);

// Dense Hermitian text format: qubit count, then 2^n x 2^n row-major
// "re im" pairs. '#' starts a comment line.
void write_dense_matrix(std::ostream& out, const Eigen::MatrixXcd& op, int n_qubits);
std::pair<Eigen::MatrixXcd, int> read_dense_matrix(std::istream& in);

}  // namespace opshadow
