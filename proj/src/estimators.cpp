#include "opshadow/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "opshadow/rng.hpp"

namespace opshadow {

namespace {

void validate_config(const EstimatorConfig& cfg) {
  if (cfg.shots_per_pauli < 1) throw std::invalid_argument("shots per Pauli must be at least 1");
  if (cfg.median_groups < 1) throw std::invalid_argument("median group count must be at least 1");
  if (cfg.median_groups > 1 && cfg.median_groups % 2 == 0)
    throw std::invalid_argument("median group count must be odd");
  if (cfg.trials == 0) {
    if (!(cfg.epsilon > 0))
      throw std::invalid_argument("either trials or a positive epsilon must be given");
    if (!(cfg.delta > 0 && cfg.delta < 1))
      throw std::invalid_argument("delta must lie in (0, 1)");
  }
}

std::size_t ceil_div_positive(double numerator, double denominator) {
  const double t = std::ceil(numerator / denominator);
  if (!(t >= 1)) return 1;
  if (t > 9e15) throw std::invalid_argument("derived trial count overflows");
  return static_cast<std::size_t>(t);
}

}  // namespace

nlohmann::ordered_json EstimateReport::to_json() const {
  nlohmann::ordered_json j;
  j["method"] = method;
  j["value"] = value;
  j["samples"] = samples;
  j["shots"] = shots;
  j["variance"] = variance;
  j["seed"] = seed;
  j["epsilon"] = epsilon;
  if (!groups.empty()) j["groups"] = groups;
  return j;
}

double median_of_means(const std::vector<double>& values, int groups) {
  if (values.empty()) throw std::invalid_argument("median_of_means needs at least one value");
  if (groups < 1) throw std::invalid_argument("group count must be at least 1");
  if (groups > 1 && groups % 2 == 0) throw std::invalid_argument("group count must be odd");
  if (static_cast<std::size_t>(groups) > values.size())
    throw std::invalid_argument("more groups than values");
  const std::size_t per_group = values.size() / groups;
  if (groups == 1) {
    double s = 0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
  }
  std::vector<double> means(groups);
  for (int g = 0; g < groups; ++g) {
    double s = 0;
    for (std::size_t i = 0; i < per_group; ++i) s += values[g * per_group + i];
    means[g] = s / static_cast<double>(per_group);
  }
  std::nth_element(means.begin(), means.begin() + groups / 2, means.end());
  return means[groups / 2];
}

OperatorShadowEngine::OperatorShadowEngine(SamplingTree tree, const QuantumState& state)
    : tree_(std::move(tree)), state_(&state) {
  if (tree_.qubits() != state.qubits())
    throw std::invalid_argument("tree and state qubit counts differ");
  const auto& comps = state.components();
  comp_weights_.reserve(comps.size());
  for (const auto& c : comps) comp_weights_.push_back(c.weight);
  const std::size_t leaves = tree_.leaf_count();
  plus_prob_.resize(leaves * comps.size());
  multiplier_.resize(leaves);
  for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
    const PauliString p = PauliString::from_index(tree_.qubits(), tree_.pauli_index(leaf));
    for (std::size_t c = 0; c < comps.size(); ++c) {
      double t;
      if (comps[c].maximally_mixed)
        t = p.is_identity() ? 1.0 : 0.0;
      else
        t = expectation(p, comps[c].state);
      plus_prob_[leaf * comps.size() + c] = std::clamp(0.5 * (1.0 + t), 0.0, 1.0);
    }
    multiplier_[leaf] = (tree_.mode() == SamplingTree::Mode::L1)
                            ? tree_.sign(leaf) * tree_.root_total()
                            : tree_.root_total() / tree_.coefficient(leaf);
  }
}

double OperatorShadowEngine::variance_bound(int shots_per_pauli) const {
  const double m = static_cast<double>(shots_per_pauli);
  const double total = tree_.root_total();
  if (tree_.mode() == SamplingTree::Mode::L1) return total * total * (4.0 / m + 5.0);
  return total * (4.0 / m + 4.0 + static_cast<double>(tree_.leaf_count()));
}

std::size_t OperatorShadowEngine::derived_trials(int shots_per_pauli, double epsilon,
                                                 double delta_share) const {
  return ceil_div_positive(variance_bound(shots_per_pauli), delta_share * epsilon * epsilon);
}

EstimateReport OperatorShadowEngine::run(const EstimatorConfig& cfg,
                                         const std::string& method) const {
  validate_config(cfg);
  EstimateReport report;
  report.method = method;
  report.seed = cfg.seed;
  report.epsilon = cfg.epsilon;

  // An identity-only observable has a known expectation; no shots needed.
  if (tree_.leaf_count() == 1 && tree_.pauli_index(0) == 0) {
    report.value = tree_.coefficient(0);
    return report;
  }

  const int k = cfg.median_groups;
  std::size_t trials, per_group;
  if (cfg.trials > 0) {
    if (cfg.trials < static_cast<std::size_t>(k))
      throw std::invalid_argument("trial count smaller than median group count");
    per_group = cfg.trials / k;
    trials = per_group * k;
  } else if (k == 1) {
    per_group = trials = derived_trials(cfg.shots_per_pauli, cfg.epsilon, cfg.delta);
  } else {
    // Chebyshev gives each group a 1/4 failure share; the median then boosts
    // the confidence exponentially in k.
    per_group = derived_trials(cfg.shots_per_pauli, cfg.epsilon, 0.25);
    trials = per_group * k;
  }

  const std::size_t comp_count = comp_weights_.size();
  const int shots = cfg.shots_per_pauli;
  const double inv_shots = 1.0 / static_cast<double>(shots);
  double total_sum = 0, total_comp = 0;
  double sq_sum = 0, sq_comp = 0;
  double group_sum = 0;
  std::vector<double> group_means;
  if (k > 1) group_means.reserve(k);

  for (std::size_t t = 0; t < trials; ++t) {
    RngStream rng(derive_seed(cfg.seed, t));
    const std::size_t leaf = tree_.sample(rng.uniform());
    const double* probs = &plus_prob_[leaf * comp_count];
    int plus = 0;
    for (int m = 0; m < shots; ++m) {
      std::size_t c = comp_count - 1;
      if (comp_count > 1) {
        double u = rng.uniform();
        for (std::size_t i = 0; i < comp_count; ++i) {
          if (u < comp_weights_[i]) {
            c = i;
            break;
          }
          u -= comp_weights_[i];
        }
      }
      plus += rng.uniform() < probs[c];
    }
    const double value = multiplier_[leaf] * (2.0 * plus * inv_shots - 1.0);

    double y = value - total_comp;
    double s = total_sum + y;
    total_comp = (s - total_sum) - y;
    total_sum = s;
    y = value * value - sq_comp;
    s = sq_sum + y;
    sq_comp = (s - sq_sum) - y;
    sq_sum = s;
    if (k > 1) {
      group_sum += value;
      if ((t + 1) % per_group == 0) {
        group_means.push_back(group_sum / static_cast<double>(per_group));
        group_sum = 0;
      }
    }
  }

  const double mean = total_sum / static_cast<double>(trials);
  if (k == 1) {
    report.value = mean;
  } else {
    std::vector<double> sorted = group_means;
    std::nth_element(sorted.begin(), sorted.begin() + k / 2, sorted.end());
    report.value = sorted[k / 2];
    report.groups = std::move(group_means);
  }
  report.samples = trials;
  report.shots = trials * static_cast<std::size_t>(shots);
  if (trials > 1)
    report.variance = std::max(0.0, (sq_sum - trials * mean * mean) /
                                        static_cast<double>(trials - 1));
  return report;
}

EstimateReport l1_operator_shadow(const SamplingTree& tree, const QuantumState& state,
                                  const EstimatorConfig& cfg) {
  if (tree.mode() != SamplingTree::Mode::L1)
    throw std::invalid_argument("l1 estimator needs an L1-mode tree");
  return OperatorShadowEngine(tree, state).run(cfg, "l1");
}

EstimateReport l2_operator_shadow(const SamplingTree& tree, const QuantumState& state,
                                  const EstimatorConfig& cfg) {
  if (tree.mode() != SamplingTree::Mode::L2)
    throw std::invalid_argument("l2 estimator needs an L2-mode tree");
  return OperatorShadowEngine(tree, state).run(cfg, "l2");
}

EstimateReport perfect_l1_estimate(const SamplingTree& tree,
                                   const std::function<double(std::uint64_t)>& expectation_oracle,
                                   std::size_t trials, std::uint64_t seed) {
  if (tree.mode() != SamplingTree::Mode::L1)
    throw std::invalid_argument("perfect estimator needs an L1-mode tree");
  if (trials == 0) throw std::invalid_argument("trial count must be positive");
  if (!expectation_oracle) throw std::invalid_argument("missing expectation oracle");
  EstimateReport report;
  report.method = "perfect-l1";
  report.seed = seed;
  const double norm = tree.root_total();
  double sum = 0, comp = 0, sq = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    RngStream rng(derive_seed(seed, t));
    const std::size_t leaf = tree.sample(rng.uniform());
    const double value = tree.sign(leaf) * expectation_oracle(tree.pauli_index(leaf)) * norm;
    const double y = value - comp;
    const double s = sum + y;
    comp = (s - sum) - y;
    sum = s;
    sq += value * value;
  }
  const double mean = sum / static_cast<double>(trials);
  report.value = mean;
  report.samples = trials;
  if (trials > 1)
    report.variance = std::max(0.0, (sq - trials * mean * mean) / static_cast<double>(trials - 1));
  return report;
}

namespace {

void check_purity(const CoefficientVector& rho) {
  const double purity = rho.l2 * rho.l2;
  const double target = std::ldexp(1.0, -rho.n);
  if (std::abs(purity - target) > 1e-8)
    throw std::invalid_argument("fidelity estimation needs a pure target: sum h_i^2 = " +
                                std::to_string(purity) + ", expected 2^-n = " +
                                std::to_string(target));
}

}  // namespace

EstimateReport fidelity_l1(const CoefficientVector& rho, const QuantumState& sigma,
                           const EstimatorConfig& cfg) {
  check_purity(rho);
  return OperatorShadowEngine(SamplingTree::build(rho, SamplingTree::Mode::L1), sigma)
      .run(cfg, "fidelity-l1");
}

EstimateReport fidelity_l2(const CoefficientVector& rho, const QuantumState& sigma,
                           const EstimatorConfig& cfg) {
  check_purity(rho);
  return OperatorShadowEngine(SamplingTree::build(rho, SamplingTree::Mode::L2), sigma)
      .run(cfg, "fidelity-l2");
}

std::vector<EstimateReport> estimate_multi(const std::vector<CoefficientVector>& observables,
                                           const QuantumState& state, double epsilon, double delta,
                                           std::uint64_t seed, int shots_per_pauli) {
  if (observables.empty()) throw std::invalid_argument("estimate_multi needs observables");
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (!(delta > 0 && delta < 1)) throw std::invalid_argument("delta must lie in (0, 1)");
  const double count = static_cast<double>(observables.size());
  const int k = 2 * static_cast<int>(std::ceil(std::log(count / delta))) + 1;
  std::vector<EstimateReport> reports;
  reports.reserve(observables.size());
  for (std::size_t i = 0; i < observables.size(); ++i) {
    EstimatorConfig cfg;
    cfg.shots_per_pauli = shots_per_pauli;
    cfg.epsilon = epsilon;
    cfg.delta = delta;
    cfg.median_groups = std::max(1, k);
    cfg.seed = derive_seed(seed, "multi/" + std::to_string(i));
    reports.push_back(
        OperatorShadowEngine(SamplingTree::build(observables[i], SamplingTree::Mode::L1), state)
            .run(cfg, "l1"));
  }
  return reports;
}

EstimateReport estimate_linear_combination(const std::vector<double>& weights,
                                           const std::vector<CoefficientVector>& observables,
                                           const QuantumState& state, const EstimatorConfig& cfg) {
  if (weights.size() != observables.size())
    throw std::invalid_argument("weight and observable counts differ");
  if (observables.empty()) throw std::invalid_argument("needs at least one observable");
  std::vector<std::pair<double, CoefficientVector>> parts;
  parts.reserve(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i)
    parts.emplace_back(weights[i], observables[i]);
  const CoefficientVector merged = combine_linear(parts);
  if (merged.entries.empty()) {
    validate_config(cfg);
    EstimateReport report;
    report.method = "l1";
    report.seed = cfg.seed;
    report.epsilon = cfg.epsilon;
    return report;  // exact zero observable
  }
  return OperatorShadowEngine(SamplingTree::build(merged, SamplingTree::Mode::L1), state)
      .run(cfg, "l1");
}

}  // namespace opshadow
