#include "opshadow/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "opshadow/rng.hpp"

namespace opshadow {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int auto_shadow_groups(double delta) {
  return 2 * static_cast<int>(std::ceil(std::log(2.0 / delta))) + 1;
}

void validate_common(const ExperimentConfig& cfg, const std::vector<std::string>& allowed) {
  if (cfg.budgets.empty()) throw std::invalid_argument("at least one budget is required");
  for (std::size_t i = 1; i < cfg.budgets.size(); ++i)
    if (cfg.budgets[i] <= cfg.budgets[i - 1])
      throw std::invalid_argument("budgets must be strictly increasing");
  if (cfg.repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  if (!(cfg.epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (cfg.shots_per_pauli < 1) throw std::invalid_argument("shots per Pauli must be at least 1");
  for (const auto& m : cfg.methods)
    if (std::find(allowed.begin(), allowed.end(), m) == allowed.end()) {
      std::string valid;
      for (const auto& a : allowed) valid += (valid.empty() ? "" : ", ") + a;
      throw std::invalid_argument("unknown method '" + m + "', valid here: " + valid);
    }
}

std::vector<std::string> pick_methods(const ExperimentConfig& cfg,
                                      const std::vector<std::string>& defaults) {
  return cfg.methods.empty() ? defaults : cfg.methods;
}

std::size_t trials_for_budget(std::size_t budget, int shots_per_pauli) {
  const std::size_t trials = budget / static_cast<std::size_t>(shots_per_pauli);
  if (trials == 0)
    throw std::invalid_argument("budget " + std::to_string(budget) +
                                " is smaller than one trial of " +
                                std::to_string(shots_per_pauli) + " shots");
  return trials;
}

SweepCell sweep_operator_method(const OperatorShadowEngine& engine, const std::string& method,
                                const std::string& method_tag, std::size_t budget,
                                const ExperimentConfig& cfg, const std::string& seed_scope,
                                double reference) {
  SweepCell cell{method, budget, 0, 0, cfg.repetitions, reference};
  EstimatorConfig est;
  est.trials = trials_for_budget(budget, cfg.shots_per_pauli);
  est.shots_per_pauli = cfg.shots_per_pauli;
  est.epsilon = cfg.epsilon;
  double err_sum = 0;
  int failures = 0;
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    est.seed = derive_seed(cfg.seed, seed_scope + "/" + method + "/b=" + std::to_string(budget) +
                                         "/rep=" + std::to_string(rep));
    const EstimateReport report = engine.run(est, method_tag);
    const double err = std::abs(report.value - reference);
    err_sum += err;
    failures += err > cfg.epsilon;
  }
  cell.abs_error_mean = err_sum / cfg.repetitions;
  cell.failure_prob = static_cast<double>(failures) / cfg.repetitions;
  return cell;
}

SweepCell sweep_shadow_method(const CoefficientVector& observable, const QuantumState& state,
                              std::size_t budget, const ExperimentConfig& cfg,
                              const std::string& seed_scope, double reference) {
  SweepCell cell{"shadow", budget, 0, 0, cfg.repetitions, reference};
  const int groups = cfg.shadow_groups > 0 ? cfg.shadow_groups : auto_shadow_groups(cfg.delta);
  double err_sum = 0;
  int failures = 0;
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    const std::uint64_t snap_seed =
        derive_seed(cfg.seed, seed_scope + "/shadow/b=" + std::to_string(budget) +
                                  "/rep=" + std::to_string(rep));
    const auto snaps = collect_snapshots(state, budget, snap_seed);
    const EstimateReport report = shadow_estimate(observable, snaps, groups);
    const double err = std::abs(report.value - reference);
    err_sum += err;
    failures += err > cfg.epsilon;
  }
  cell.abs_error_mean = err_sum / cfg.repetitions;
  cell.failure_prob = static_cast<double>(failures) / cfg.repetitions;
  return cell;
}

}  // namespace

SweepResult run_fidelity_experiment(const ExperimentConfig& cfg) {
  validate_common(cfg, {"l1", "l2"});
  if (cfg.n < 1 || cfg.n > 8)
    throw std::invalid_argument("fidelity experiment supports 1 to 8 qubits");
  if (!(cfg.depolarizing >= 0 && cfg.depolarizing <= 1))
    throw std::invalid_argument("depolarizing strength must lie in [0, 1]");
  const auto methods = pick_methods(cfg, {"l1", "l2"});

  RngStream target_rng(derive_seed(cfg.seed, "fidelity/target"));
  const PureState psi = haar_random_state(cfg.n, target_rng);
  const Eigen::Index dim = Eigen::Index(1) << cfg.n;
  Eigen::Map<const Eigen::VectorXcd> v(psi.amp.data(), dim);
  const Eigen::MatrixXcd rho_dense = v * v.adjoint();
  const CoefficientVector rho_cv = decompose(rho_dense, cfg.n);
  const double purity = rho_cv.l2 * rho_cv.l2;
  if (std::abs(purity - std::ldexp(1.0, -cfg.n)) > 1e-8)
    throw std::runtime_error("decomposed target is not pure: sum h^2 = " + format_double(purity));

  const QuantumState sigma = depolarize(psi, cfg.depolarizing);
  const double reference = (rho_dense * density_matrix(sigma)).trace().real();

  SweepResult result{"fidelity", cfg, reference, {}};
  for (const auto& method : methods) {
    const auto mode = method == "l1" ? SamplingTree::Mode::L1 : SamplingTree::Mode::L2;
    const OperatorShadowEngine engine(SamplingTree::build(rho_cv, mode), sigma);
    for (const std::size_t budget : cfg.budgets)
      result.cells.push_back(sweep_operator_method(engine, method, "fidelity-" + method, budget,
                                                   cfg, "fidelity", reference));
  }
  return result;
}

SweepResult run_surface_code_experiment(const ExperimentConfig& cfg) {
  validate_common(cfg, {"l1", "shadow"});
  if (cfg.n != SurfaceCode::kQubits)
    throw std::invalid_argument("surface-code experiment runs on 9 qubits");
  const auto methods = pick_methods(cfg, {"l1", "shadow"});

  RngStream weight_rng(derive_seed(cfg.seed, "surface-code/weights"));
  std::vector<double> weights(SurfaceCode::kGenerators);
  for (auto& w : weights) w = weight_rng.normal();
  const WeightedPauliSum hamiltonian = SurfaceCode::hamiltonian(weights);
  const auto [ground, energy] = ground_state(hamiltonian);
  const Eigen::MatrixXcd h_dense = sum_to_dense(hamiltonian);

  CoefficientVector h_cv;
  h_cv.n = SurfaceCode::kQubits;
  for (const auto& [c, p] : hamiltonian.terms()) h_cv.entries.push_back({p.index(), c});
  h_cv.refresh_norms();

  const auto state_for_rep = [&](int rep) {
    const std::uint64_t haar_seed =
        cfg.resample_haar ? derive_seed(cfg.seed, "surface-code/haar/rep=" + std::to_string(rep))
                          : derive_seed(cfg.seed, "surface-code/haar");
    RngStream haar_rng(haar_seed);
    PureState noise = haar_random_state(SurfaceCode::kQubits, haar_rng);
    return QuantumState::mixture({{0.9, false, ground}, {0.1, false, std::move(noise)}});
  };

  SweepResult result{"surface-code", cfg, 0, {}};
  if (!cfg.resample_haar) {
    const QuantumState rho = state_for_rep(0);
    const double reference = (h_dense * density_matrix(rho)).trace().real();
    result.reference = reference;
    for (const auto& method : methods) {
      if (method == "l1") {
        const OperatorShadowEngine engine(SamplingTree::build(h_cv, SamplingTree::Mode::L1), rho);
        for (const std::size_t budget : cfg.budgets)
          result.cells.push_back(sweep_operator_method(engine, "l1", "l1", budget, cfg,
                                                       "surface-code", reference));
      } else {
        for (const std::size_t budget : cfg.budgets)
          result.cells.push_back(
              sweep_shadow_method(h_cv, rho, budget, cfg, "surface-code", reference));
      }
    }
    return result;
  }

  // Fresh Haar component per repetition: the reference moves with it, so each
  // repetition is judged against its own exact value. Cells report the mean
  // reference across repetitions.
  std::vector<QuantumState> states;
  std::vector<double> references;
  states.reserve(cfg.repetitions);
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    states.push_back(state_for_rep(rep));
    references.push_back((h_dense * density_matrix(states.back())).trace().real());
  }
  double ref_mean = 0;
  for (double r : references) ref_mean += r;
  ref_mean /= cfg.repetitions;
  result.reference = ref_mean;

  for (const auto& method : methods) {
    for (const std::size_t budget : cfg.budgets) {
      SweepCell cell{method, budget, 0, 0, cfg.repetitions, ref_mean};
      double err_sum = 0;
      int failures = 0;
      for (int rep = 0; rep < cfg.repetitions; ++rep) {
        const std::string scope = "surface-code/" + method + "/b=" + std::to_string(budget) +
                                  "/rep=" + std::to_string(rep);
        double value;
        if (method == "l1") {
          EstimatorConfig est;
          est.trials = trials_for_budget(budget, cfg.shots_per_pauli);
          est.shots_per_pauli = cfg.shots_per_pauli;
          est.epsilon = cfg.epsilon;
          est.seed = derive_seed(cfg.seed, scope);
          const OperatorShadowEngine engine(SamplingTree::build(h_cv, SamplingTree::Mode::L1),
                                            states[rep]);
          value = engine.run(est, "l1").value;
        } else {
          const auto snaps = collect_snapshots(states[rep], budget, derive_seed(cfg.seed, scope));
          const int groups =
              cfg.shadow_groups > 0 ? cfg.shadow_groups : auto_shadow_groups(cfg.delta);
          value = shadow_estimate(h_cv, snaps, groups).value;
        }
        const double err = std::abs(value - references[rep]);
        err_sum += err;
        failures += err > cfg.epsilon;
      }
      cell.abs_error_mean = err_sum / cfg.repetitions;
      cell.failure_prob = static_cast<double>(failures) / cfg.repetitions;
      result.cells.push_back(cell);
    }
  }
  return result;
}

SweepResult run_compare_experiment(const CoefficientVector& observable, const QuantumState& state,
                                   const ExperimentConfig& cfg) {
  validate_common(cfg, {"l1", "l2", "shadow"});
  if (observable.n != state.qubits())
    throw std::invalid_argument("observable and state qubit counts differ");
  const auto methods = pick_methods(cfg, {"l1", "l2", "shadow"});
  const double reference =
      (sum_to_dense(to_weighted_sum(observable)) * density_matrix(state)).trace().real();

  SweepResult result{"compare", cfg, reference, {}};
  for (const auto& method : methods) {
    if (method == "shadow") {
      for (const std::size_t budget : cfg.budgets)
        result.cells.push_back(
            sweep_shadow_method(observable, state, budget, cfg, "compare", reference));
    } else {
      const auto mode = method == "l1" ? SamplingTree::Mode::L1 : SamplingTree::Mode::L2;
      const OperatorShadowEngine engine(SamplingTree::build(observable, mode), state);
      for (const std::size_t budget : cfg.budgets)
        result.cells.push_back(
            sweep_operator_method(engine, method, method, budget, cfg, "compare", reference));
    }
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "method,budget,abs_error_mean,failure_prob,reps,reference\n";
  for (const auto& c : result.cells)
    out << c.method << ',' << c.budget << ',' << format_double(c.abs_error_mean) << ','
        << format_double(c.failure_prob) << ',' << c.repetitions << ','
        << format_double(c.reference) << '\n';
}

void write_sweep_json(std::ostream& out, const SweepResult& result) {
  nlohmann::ordered_json j;
  j["experiment"] = result.experiment;
  nlohmann::ordered_json cj;
  cj["n"] = result.config.n;
  cj["epsilon"] = result.config.epsilon;
  cj["budgets"] = result.config.budgets;
  cj["repetitions"] = result.config.repetitions;
  cj["methods"] = result.config.methods;
  cj["seed"] = result.config.seed;
  cj["shots_per_pauli"] = result.config.shots_per_pauli;
  cj["delta"] = result.config.delta;
  cj["depolarizing"] = result.config.depolarizing;
  cj["resample_haar"] = result.config.resample_haar;
  cj["shadow_groups"] = result.config.shadow_groups;
  j["config"] = std::move(cj);
  j["reference"] = result.reference;
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& c : result.cells) {
    nlohmann::ordered_json cell;
    cell["method"] = c.method;
    cell["budget"] = c.budget;
    cell["abs_error_mean"] = c.abs_error_mean;
    cell["failure_prob"] = c.failure_prob;
    cell["reps"] = c.repetitions;
    cell["reference"] = c.reference;
    cells.push_back(std::move(cell));
  }
  j["results"] = std::move(cells);
  out << j.dump(2) << '\n';
}

QuantumState parse_state_spec(const std::string& spec, int n_qubits, std::uint64_t seed) {
  const auto fail = [&](const std::string& why) {
    throw std::invalid_argument(
        "bad state spec '" + spec + "': " + why +
        " (valid: basis:<k>, ghz, haar, surface-ground, mm, mixture:<w>*<spec>+..., file:<path>)");
  };
  if (spec == "ghz") return QuantumState::pure(ghz_state(n_qubits));
  if (spec == "mm") return QuantumState::maximally_mixed(n_qubits);
  if (spec == "haar") {
    RngStream rng(derive_seed(seed, "state/haar"));
    return QuantumState::pure(haar_random_state(n_qubits, rng));
  }
  if (spec == "surface-ground") {
    if (n_qubits != SurfaceCode::kQubits) fail("surface-ground needs a 9-qubit observable");
    return QuantumState::pure(ground_state(SurfaceCode::hamiltonian()).first);
  }
  if (spec.starts_with("basis:")) {
    std::size_t pos = 0;
    const std::string arg = spec.substr(6);
    std::uint64_t index = 0;
    try {
      index = std::stoull(arg, &pos);
    } catch (const std::exception&) {
      fail("basis index is not a number");
    }
    if (pos != arg.size()) fail("basis index is not a number");
    return QuantumState::pure(PureState::basis(n_qubits, index));
  }
  if (spec.starts_with("file:")) {
    const std::string path = spec.substr(5);
    std::ifstream in(path);
    if (!in) fail("cannot open '" + path + "'");
    QuantumState st = read_state(in);
    if (st.qubits() != n_qubits)
      fail("file state has " + std::to_string(st.qubits()) + " qubits, expected " +
           std::to_string(n_qubits));
    return st;
  }
  if (spec.starts_with("mixture:")) {
    std::vector<QuantumState::Component> comps;
    std::stringstream parts(spec.substr(8));
    std::string part;
    while (std::getline(parts, part, '+')) {
      const auto star = part.find('*');
      if (star == std::string::npos) fail("mixture part '" + part + "' is missing '<w>*'");
      double w = 0;
      try {
        std::size_t pos = 0;
        w = std::stod(part.substr(0, star), &pos);
        if (pos != star) throw std::invalid_argument("");
      } catch (const std::exception&) {
        fail("bad mixture weight in '" + part + "'");
      }
      const std::string sub = part.substr(star + 1);
      if (sub.starts_with("mixture:")) fail("mixtures cannot nest");
      const QuantumState nested = parse_state_spec(sub, n_qubits, seed);
      for (const auto& c : nested.components())
        comps.push_back({w * c.weight, c.maximally_mixed, c.state});
    }
    if (comps.empty()) fail("mixture has no parts");
    return QuantumState::mixture(std::move(comps));
  }
  fail("unknown form");
  return QuantumState::maximally_mixed(1);  // unreachable
}

EstimateReport run_single_estimate(const CoefficientVector& observable, const QuantumState& state,
                                   const SingleEstimateOptions& options) {
  if (observable.n != state.qubits())
    throw std::invalid_argument("observable and state qubit counts differ");
  const auto& m = options.method;
  if (m == "l1" || m == "l2") {
    const auto mode = m == "l1" ? SamplingTree::Mode::L1 : SamplingTree::Mode::L2;
    return OperatorShadowEngine(SamplingTree::build(observable, mode), state)
        .run(options.est, m);
  }
  if (m == "perfect-l1") {
    const SamplingTree tree = SamplingTree::build(observable, SamplingTree::Mode::L1);
    std::size_t trials = options.est.trials;
    if (trials == 0) {
      if (!(options.est.epsilon > 0))
        throw std::invalid_argument("perfect-l1 needs a trial count or a positive epsilon");
      // Noise-free trials are bounded by ||h||_1, so Chebyshev needs
      // ||h||_1^2 / (delta epsilon^2) of them.
      const double l1 = tree.root_total();
      trials = static_cast<std::size_t>(
          std::ceil(l1 * l1 / (options.est.delta * options.est.epsilon * options.est.epsilon)));
      if (trials == 0) trials = 1;
    }
    const int n = observable.n;
    return perfect_l1_estimate(
        tree,
        [&](std::uint64_t index) { return expectation(PauliString::from_index(n, index), state); },
        trials, options.est.seed);
  }
  if (m == "shadow") {
    const int groups =
        options.shadow_groups > 0 ? options.shadow_groups : auto_shadow_groups(options.est.delta);
    std::size_t budget = options.shadow_budget;
    if (budget == 0) {
      if (!(options.est.epsilon > 0))
        throw std::invalid_argument("shadow estimation needs a budget or a positive epsilon");
      const double bound = shadow_variance_bound(observable);
      const double per_group = std::ceil(4.0 * bound / (options.est.epsilon * options.est.epsilon));
      budget = static_cast<std::size_t>(per_group) * static_cast<std::size_t>(groups);
      if (budget == 0) budget = static_cast<std::size_t>(groups);
    }
    const auto snaps =
        collect_snapshots(state, budget, derive_seed(options.est.seed, "single/shadow"));
    EstimateReport report = shadow_estimate(observable, snaps, groups);
    report.seed = options.est.seed;
    report.epsilon = options.est.epsilon;
    return report;
  }
  throw std::invalid_argument("unknown method '" + m +
                              "', valid: l1, l2, perfect-l1, shadow");
}

}  // namespace opshadow
