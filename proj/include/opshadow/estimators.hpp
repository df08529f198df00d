#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "opshadow/coefficients.hpp"
#include "opshadow/sampling_tree.hpp"
#include "opshadow/state.hpp"

namespace opshadow {

struct EstimatorConfig {
  std::size_t trials = 0;    // explicit trial count; 0 derives one from epsilon
  int shots_per_pauli = 4;   // M, shots spent per sampled Pauli
  double epsilon = 0;        // accuracy target used when trials == 0
  double delta = 0.01;       // failure budget used when trials == 0
  int median_groups = 1;     // K, odd; 1 means plain mean
  std::uint64_t seed = 0;
};

struct EstimateReport {
  std::string method;
  double value = 0;
  std::size_t samples = 0;  // trials executed
  std::size_t shots = 0;    // single-Pauli measurements consumed
  double variance = 0;      // unbiased sample variance of the trial values
  std::uint64_t seed = 0;
  double epsilon = 0;
  std::vector<double> groups;  // group means when median_groups > 1

  nlohmann::ordered_json to_json() const;
};

// Mean of `values` when groups == 1, otherwise the median of the means of
// `groups` equal contiguous blocks (a trailing remainder is dropped).
double median_of_means(const std::vector<double>& values, int groups);

// Reusable sampler for one (observable tree, state) pair. Construction
// precomputes every leaf's outcome probability per state component, so a
// trial costs one tree descent plus M Bernoulli draws. Trials use streams
// derived from the config seed by trial index, making results independent of
// execution order. The engine keeps a pointer to the state; it must outlive
// the engine.
class OperatorShadowEngine {
 public:
  OperatorShadowEngine(SamplingTree tree, const QuantumState& state);

  EstimateReport run(const EstimatorConfig& cfg, const std::string& method) const;

  // L1 mode: ||h||_1^2 (4/M + 5). L2 mode: ||h||_2^2 (4/M + 4 + L).
  double variance_bound(int shots_per_pauli) const;
  // ceil(variance_bound / (delta_share * epsilon^2)).
  std::size_t derived_trials(int shots_per_pauli, double epsilon, double delta_share) const;

  const SamplingTree& tree() const { return tree_; }

 private:
  SamplingTree tree_;
  const QuantumState* state_;
  std::vector<double> comp_weights_;
  std::vector<double> plus_prob_;   // [leaf * components + component]
  std::vector<double> multiplier_;  // per leaf: estimate = multiplier * (2Z - 1)
};

// Importance sampling over |h_i| / ||h||_1 with M shots per draw.
EstimateReport l1_operator_shadow(const SamplingTree& tree, const QuantumState& state,
                                  const EstimatorConfig& cfg);

// Importance sampling over h_i^2 / ||h||_2^2; trial value (2Z - 1) ||h||_2^2 / h_i.
EstimateReport l2_operator_shadow(const SamplingTree& tree, const QuantumState& state,
                                  const EstimatorConfig& cfg);

// Noise-free variant: each trial reads the exact expectation through the
// supplied oracle instead of spending shots.
EstimateReport perfect_l1_estimate(const SamplingTree& tree,
                                   const std::function<double(std::uint64_t)>& expectation_oracle,
                                   std::size_t trials, std::uint64_t seed);

// Fidelity Tr[rho sigma] with rho given by its Pauli coefficients; rho must
// be pure (sum h_i^2 = 2^-n within 1e-8).
EstimateReport fidelity_l1(const CoefficientVector& rho, const QuantumState& sigma,
                           const EstimatorConfig& cfg);
EstimateReport fidelity_l2(const CoefficientVector& rho, const QuantumState& sigma,
                           const EstimatorConfig& cfg);

// Median-of-means estimates for several observables on one state, all within
// epsilon with probability 1 - delta overall. Uses K = 2 ceil(ln(count /
// delta)) + 1 groups of ceil(4 * bound / epsilon^2) trials each.
std::vector<EstimateReport> estimate_multi(const std::vector<CoefficientVector>& observables,
                                           const QuantumState& state, double epsilon, double delta,
                                           std::uint64_t seed, int shots_per_pauli = 4);

// Estimate of Sum_j w_j Tr[O_j rho] through the merged coefficient vector.
// Exact cancellation to the zero observable returns 0 without spending shots.
EstimateReport estimate_linear_combination(const std::vector<double>& weights,
                                           const std::vector<CoefficientVector>& observables,
                                           const QuantumState& state, const EstimatorConfig& cfg);

}  // namespace opshadow
