#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "opshadow/classical_shadow.hpp"
#include "opshadow/coefficients.hpp"
#include "opshadow/estimators.hpp"
#include "opshadow/state.hpp"

namespace opshadow {

struct ExperimentConfig {
  int n = 8;
  double epsilon = 0.03;
  std::vector<std::size_t> budgets = {1000, 3162, 10000, 31623, 100000};
  int repetitions = 100;
  std::vector<std::string> methods;  // empty selects the experiment's default set
  std::uint64_t seed = 1;
  int shots_per_pauli = 4;
  double delta = 0.01;
  double depolarizing = 0.1;  // fidelity experiment noise strength
  bool resample_haar = false;  // surface-code: fresh Haar component per repetition
  int shadow_groups = 0;       // 0 = 2 ceil(ln(2 / delta)) + 1
};

struct SweepCell {
  std::string method;
  std::size_t budget = 0;
  double abs_error_mean = 0;
  double failure_prob = 0;
  int repetitions = 0;
  double reference = 0;
};

struct SweepResult {
  std::string experiment;
  ExperimentConfig config;
  double reference = 0;
  std::vector<SweepCell> cells;
};

// Fidelity of a depolarized Haar state against its pure version, estimated
// from the state's own Pauli coefficients. Methods: l1, l2.
SweepResult run_fidelity_experiment(const ExperimentConfig& cfg);

// Ground-state energy of the 9-qubit surface-code Hamiltonian with standard
// normal generator weights, on 0.9 rho_0 + 0.1 Haar. Methods: l1, shadow.
SweepResult run_surface_code_experiment(const ExperimentConfig& cfg);

// Generic sweep of any of l1, l2, shadow against the exact dense value.
SweepResult run_compare_experiment(const CoefficientVector& observable, const QuantumState& state,
                                   const ExperimentConfig& cfg);

// CSV columns: method,budget,abs_error_mean,failure_prob,reps,reference.
void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_sweep_json(std::ostream& out, const SweepResult& result);

// Builtin state grammar: basis:<k> | ghz | haar | surface-ground | mm |
// mixture:<w>*<spec>+<w>*<spec>... | file:<path>. Haar draws are seeded
// from `seed`.
QuantumState parse_state_spec(const std::string& spec, int n_qubits, std::uint64_t seed);

struct SingleEstimateOptions {
  std::string method = "l1";  // l1 | l2 | perfect-l1 | shadow
  EstimatorConfig est;
  std::size_t shadow_budget = 0;  // snapshots; 0 derives one from epsilon
  int shadow_groups = 0;          // 0 = 2 ceil(ln(2 / delta)) + 1
};

EstimateReport run_single_estimate(const CoefficientVector& observable, const QuantumState& state,
                                   const SingleEstimateOptions& options);

}  // namespace opshadow
