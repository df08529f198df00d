#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "opshadow/pauli.hpp"
#include "opshadow/rng.hpp"

namespace opshadow {

// Normalized n-qubit state vector, n <= 10. Amplitude k corresponds to the
// computational basis state whose bit q is bit q of k.
struct PureState {
  int n = 0;
  std::vector<std::complex<double>> amp;

  static constexpr int kMaxQubits = 10;

  PureState() = default;
  PureState(int n_qubits, std::vector<std::complex<double>> amplitudes);

  static PureState basis(int n_qubits, std::uint64_t index);
  double norm() const;
};

PureState haar_random_state(int n_qubits, RngStream& rng);
// (|0...0> + |1...1>) / sqrt(2); n = 1 gives |+>.
PureState ghz_state(int n_qubits);

// Convex mixture of pure components plus an optional maximally-mixed
// component. Weights are positive and sum to 1 within 1e-12.
class QuantumState {
 public:
  struct Component {
    double weight = 0;
    bool maximally_mixed = false;
    PureState state;  // unused when maximally_mixed
  };

  static QuantumState pure(PureState s);
  static QuantumState maximally_mixed(int n_qubits);
  static QuantumState mixture(std::vector<Component> components);

  int qubits() const { return n_; }
  const std::vector<Component>& components() const { return components_; }

 private:
  int n_ = 0;
  std::vector<Component> components_;
};

// (1 - lambda) |psi><psi| + lambda I / 2^n.
QuantumState depolarize(const PureState& psi, double lambda);

double expectation(const PauliString& p, const PureState& psi);
double expectation(const PauliString& p, const QuantumState& rho);

// One +-1 eigenvalue measurement of P: draws a component by weight, then an
// outcome from that component's Born distribution.
int measure_pauli_shot(const PauliString& p, const QuantumState& rho, RngStream& rng);

// Dense density matrix, for test oracles.
Eigen::MatrixXcd density_matrix(const QuantumState& rho);

// Lowest eigenpair of the dense Hamiltonian. The returned state has its
// largest-magnitude amplitude rotated to the positive real axis. Throws if
// the eigensolver residual exceeds 1e-8.
std::pair<PureState, double> ground_state(const WeightedPauliSum& hamiltonian);

// Distance-3 rotated surface code on 9 qubits: 4 X-type and 4 Z-type
// stabilizer generators.
struct SurfaceCode {
  static constexpr int kQubits = 9;
  static constexpr int kGenerators = 8;
  // X generators first, Z generators after, each in a fixed layout order.
  static std::vector<PauliString> generators();
  // H = -Sum_g w_g g for weights aligned with generators().
  static WeightedPauliSum hamiltonian(const std::vector<double>& weights);
  static WeightedPauliSum hamiltonian();  // all weights 1
};

// Text container, "opshadow-state v1" header. Round-trips bit-exactly.
void write_state(std::ostream& out, const QuantumState& rho);
QuantumState read_state(std::istream& in);

}  // namespace opshadow
