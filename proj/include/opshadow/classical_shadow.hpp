#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "opshadow/coefficients.hpp"
#include "opshadow/estimators.hpp"
#include "opshadow/state.hpp"

namespace opshadow {

// One randomized single-qubit measurement record: a basis choice per qubit
// (0=X, 1=Y, 2=Z, two bits each) and the observed bit per qubit.
struct Snapshot {
  std::uint32_t bases = 0;
  std::uint32_t outcomes = 0;

  int basis(int qubit) const { return (bases >> (2 * qubit)) & 3; }
  int bit(int qubit) const { return (outcomes >> qubit) & 1; }
};

// Draws `count` snapshots, each from its own seed-derived stream: uniform
// basis per qubit, then a Born-rule outcome of the rotated state.
std::vector<Snapshot> collect_snapshots(const QuantumState& rho, std::size_t count,
                                        std::uint64_t seed);

// Single-snapshot estimate of Tr[P rho_hat]: product over the qubits of P of
// 3 * (+-1) when the measured basis matches P's letter there, else 0. The
// result is 0 or +-3^weight(P).
double snapshot_pauli_expectation(const PauliString& p, const Snapshot& snap);

// Median-of-means over per-snapshot values Sum_i h_i Tr[P_i rho_hat].
// The observable must touch at most 9 qubits.
EstimateReport shadow_estimate(const CoefficientVector& observable,
                               const std::vector<Snapshot>& snapshots, int median_groups);

// Cauchy-Schwarz bound (Sum_i |h_i| 3^{w_i/2})^2 on the per-snapshot
// variance; for a single Pauli of weight w this is exactly 3^w.
double shadow_variance_bound(const CoefficientVector& observable);

// Averages the inverted-channel snapshot density matrix over every basis
// combination and outcome exactly; n <= 2. Equals density_matrix(rho).
Eigen::MatrixXcd brute_force_snapshot_mean(const QuantumState& rho);

// Text format: one "XZY 010" line per snapshot, qubit n-1 leftmost in both
// fields.
void write_snapshots(std::ostream& out, const std::vector<Snapshot>& snapshots, int n_qubits);
std::vector<Snapshot> read_snapshots(std::istream& in, int n_qubits);

}  // namespace opshadow
