#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "opshadow/classical_shadow.hpp"
#include "opshadow/coefficients.hpp"
#include "opshadow/estimators.hpp"
#include "opshadow/experiments.hpp"
#include "opshadow/state.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ','))
    if (!part.empty()) parts.push_back(part);
  return parts;
}

std::vector<std::size_t> parse_budgets(const std::string& text) {
  std::vector<std::size_t> budgets;
  for (const auto& part : split_csv(text)) {
    try {
      std::size_t pos = 0;
      budgets.push_back(std::stoull(part, &pos));
      if (pos != part.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw CLI::ValidationError("--budgets", "'" + part + "' is not a budget");
    }
  }
  return budgets;
}

opshadow::CoefficientVector load_observable(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open observable file '" + path + "'");
  return opshadow::read_observable(in);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

void emit_sweep(const opshadow::SweepResult& result, const std::string& out_prefix) {
  std::ostringstream csv, json;
  opshadow::write_sweep_csv(csv, result);
  opshadow::write_sweep_json(json, result);
  write_text_file(out_prefix + ".csv", csv.str());
  write_text_file(out_prefix + ".json", json.str());
  std::cout << result.experiment << ": reference " << result.reference << '\n';
  std::cout << csv.str();
  std::cout << "wrote " << out_prefix << ".csv and " << out_prefix << ".json\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Importance-sampled Pauli estimation of Tr[O rho]"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a key=value file (flags win)");

  // decompose
  std::string dense_path, decompose_out;
  auto* decompose_cmd =
      app.add_subcommand("decompose", "Pauli coefficients of a dense Hermitian operator");
  decompose_cmd->add_option("--dense", dense_path, "Dense matrix input file")->required();
  decompose_cmd->add_option("--out", decompose_out, "Observable output file")->required();

  // estimate
  std::string obs_path, state_spec, method = "l1", estimate_out;
  opshadow::SingleEstimateOptions est_opt;
  std::uint64_t est_seed = 1;
  auto* estimate_cmd = app.add_subcommand("estimate", "Single estimate of Tr[O rho]");
  estimate_cmd->add_option("--obs", obs_path, "Observable file")->required();
  estimate_cmd->add_option("--state", state_spec, "State spec, e.g. basis:0 or mixture:0.9*ghz+0.1*mm")
      ->required();
  estimate_cmd->add_option("--method", method, "l1 | l2 | perfect-l1 | shadow");
  estimate_cmd->add_option("--trials", est_opt.est.trials, "Trial count (0 derives from epsilon)");
  estimate_cmd->add_option("--epsilon", est_opt.est.epsilon, "Accuracy target");
  estimate_cmd->add_option("--delta", est_opt.est.delta, "Failure budget for derived counts");
  estimate_cmd->add_option("--shots", est_opt.est.shots_per_pauli, "Shots per sampled Pauli");
  estimate_cmd->add_option("--groups", est_opt.est.median_groups, "Median-of-means groups");
  estimate_cmd->add_option("--budget", est_opt.shadow_budget, "Snapshot count for --method shadow");
  estimate_cmd->add_option("--shadow-groups", est_opt.shadow_groups,
                           "Median groups for shadow (0 = auto)");
  estimate_cmd->add_option("--seed", est_seed, "Master seed");
  estimate_cmd->add_option("--out", estimate_out, "JSON report output path");

  // fidelity
  opshadow::ExperimentConfig fid_cfg;
  std::string fid_budgets, fid_methods, fid_out = "fidelity";
  auto* fidelity_cmd =
      app.add_subcommand("fidelity", "Depolarized-Haar fidelity sweep (l1 vs l2)");
  fidelity_cmd->add_option("--n", fid_cfg.n, "Qubit count (<= 8)");
  fidelity_cmd->add_option("--epsilon", fid_cfg.epsilon, "Failure threshold");
  fidelity_cmd->add_option("--budgets", fid_budgets, "Comma-separated shot budgets");
  fidelity_cmd->add_option("--reps", fid_cfg.repetitions, "Repetitions per budget");
  fidelity_cmd->add_option("--methods", fid_methods, "Comma-separated subset of l1,l2");
  fidelity_cmd->add_option("--seed", fid_cfg.seed, "Master seed");
  fidelity_cmd->add_option("--shots", fid_cfg.shots_per_pauli, "Shots per sampled Pauli");
  fidelity_cmd->add_option("--depolarizing", fid_cfg.depolarizing, "Depolarizing strength");
  fidelity_cmd->add_option("--out", fid_out, "Output prefix for .csv/.json");

  // surface-code
  opshadow::ExperimentConfig surf_cfg;
  surf_cfg.n = opshadow::SurfaceCode::kQubits;
  surf_cfg.epsilon = 0.04;
  std::string surf_budgets, surf_methods, surf_out = "surface-code";
  auto* surface_cmd =
      app.add_subcommand("surface-code", "Surface-code energy sweep (l1 vs classical shadow)");
  surface_cmd->add_option("--epsilon", surf_cfg.epsilon, "Failure threshold");
  surface_cmd->add_option("--budgets", surf_budgets, "Comma-separated shot budgets");
  surface_cmd->add_option("--reps", surf_cfg.repetitions, "Repetitions per budget");
  surface_cmd->add_option("--methods", surf_methods, "Comma-separated subset of l1,shadow");
  surface_cmd->add_option("--seed", surf_cfg.seed, "Master seed");
  surface_cmd->add_option("--shots", surf_cfg.shots_per_pauli, "Shots per sampled Pauli");
  surface_cmd->add_option("--shadow-groups", surf_cfg.shadow_groups,
                          "Median groups for shadow (0 = auto)");
  surface_cmd->add_flag("--resample-haar", surf_cfg.resample_haar,
                        "Fresh Haar component per repetition");
  surface_cmd->add_option("--out", surf_out, "Output prefix for .csv/.json");

  // compare
  opshadow::ExperimentConfig cmp_cfg;
  cmp_cfg.epsilon = 0.05;
  std::string cmp_obs, cmp_state, cmp_budgets, cmp_methods, cmp_out = "compare";
  auto* compare_cmd =
      app.add_subcommand("compare", "Sweep any methods over budgets for one observable and state");
  compare_cmd->add_option("--obs", cmp_obs, "Observable file")->required();
  compare_cmd->add_option("--state", cmp_state, "State spec")->required();
  compare_cmd->add_option("--epsilon", cmp_cfg.epsilon, "Failure threshold");
  compare_cmd->add_option("--budgets", cmp_budgets, "Comma-separated shot budgets");
  compare_cmd->add_option("--reps", cmp_cfg.repetitions, "Repetitions per budget");
  compare_cmd->add_option("--methods", cmp_methods, "Comma-separated subset of l1,l2,shadow");
  compare_cmd->add_option("--seed", cmp_cfg.seed, "Master seed");
  compare_cmd->add_option("--shots", cmp_cfg.shots_per_pauli, "Shots per sampled Pauli");
  compare_cmd->add_option("--shadow-groups", cmp_cfg.shadow_groups,
                          "Median groups for shadow (0 = auto)");
  compare_cmd->add_option("--out", cmp_out, "Output prefix for .csv/.json");

  CLI11_PARSE(app, argc, argv);

  try {
    if (decompose_cmd->parsed()) {
      std::ifstream in(dense_path);
      if (!in) throw std::runtime_error("cannot open dense matrix file '" + dense_path + "'");
      const auto [op, n] = opshadow::read_dense_matrix(in);
      const auto cv = opshadow::decompose(op, n);
      std::ostringstream obs;
      opshadow::write_observable(obs, cv);
      write_text_file(decompose_out, obs.str());
      std::cout << "n=" << n << " terms=" << cv.entries.size() << " l1=" << cv.l1
                << " l2=" << cv.l2 << " -> " << decompose_out << '\n';
    } else if (estimate_cmd->parsed()) {
      const auto cv = load_observable(obs_path);
      const auto state = opshadow::parse_state_spec(state_spec, cv.n, est_seed);
      est_opt.method = method;
      est_opt.est.seed = est_seed;
      const auto report = opshadow::run_single_estimate(cv, state, est_opt);
      const auto j = report.to_json();
      if (!estimate_out.empty()) write_text_file(estimate_out, j.dump(2) + "\n");
      std::cout << j.dump(2) << '\n';
    } else if (fidelity_cmd->parsed()) {
      if (!fid_budgets.empty()) fid_cfg.budgets = parse_budgets(fid_budgets);
      fid_cfg.methods = split_csv(fid_methods);
      emit_sweep(opshadow::run_fidelity_experiment(fid_cfg), fid_out);
    } else if (surface_cmd->parsed()) {
      if (!surf_budgets.empty()) surf_cfg.budgets = parse_budgets(surf_budgets);
      surf_cfg.methods = split_csv(surf_methods);
      emit_sweep(opshadow::run_surface_code_experiment(surf_cfg), surf_out);
    } else if (compare_cmd->parsed()) {
      const auto cv = load_observable(cmp_obs);
      const auto state = opshadow::parse_state_spec(cmp_state, cv.n, cmp_cfg.seed);
      if (!cmp_budgets.empty()) cmp_cfg.budgets = parse_budgets(cmp_budgets);
      cmp_cfg.methods = split_csv(cmp_methods);
      cmp_cfg.n = cv.n;
      emit_sweep(opshadow::run_compare_experiment(cv, state, cmp_cfg), cmp_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
