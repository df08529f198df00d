#include "opshadow/state.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace opshadow {

namespace {

void check_state_qubits(int n) {
  if (n < 1 || n > PureState::kMaxQubits)
    throw std::invalid_argument("state qubit count must be in [1, 10], got " + std::to_string(n));
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

PureState::PureState(int n_qubits, std::vector<std::complex<double>> amplitudes)
    : n(n_qubits), amp(std::move(amplitudes)) {
  check_state_qubits(n_qubits);
  if (amp.size() != (1ull << n_qubits))
    throw std::invalid_argument("amplitude count does not match qubit count");
  const double nrm = norm();
  if (std::abs(nrm - 1.0) > 1e-10)
    throw std::invalid_argument("state is not normalized: |psi| = " + format_double(nrm));
}

PureState PureState::basis(int n_qubits, std::uint64_t index) {
  check_state_qubits(n_qubits);
  if (index >= (1ull << n_qubits)) throw std::out_of_range("basis index out of range");
  std::vector<std::complex<double>> amp(1ull << n_qubits, 0.0);
  amp[index] = 1.0;
  return PureState(n_qubits, std::move(amp));
}

double PureState::norm() const {
  double s = 0;
  for (const auto& a : amp) s += std::norm(a);
  return std::sqrt(s);
}

PureState haar_random_state(int n_qubits, RngStream& rng) {
  check_state_qubits(n_qubits);
  const std::uint64_t dim = 1ull << n_qubits;
  std::vector<std::complex<double>> amp(dim);
  double nrm2 = 0;
  for (auto& a : amp) {
    a = {rng.normal(), rng.normal()};
    nrm2 += std::norm(a);
  }
  const double inv = 1.0 / std::sqrt(nrm2);
  for (auto& a : amp) a *= inv;
  return PureState(n_qubits, std::move(amp));
}

PureState ghz_state(int n_qubits) {
  check_state_qubits(n_qubits);
  const std::uint64_t dim = 1ull << n_qubits;
  std::vector<std::complex<double>> amp(dim, 0.0);
  const double r = 1.0 / std::sqrt(2.0);
  amp[0] = r;
  amp[dim - 1] = r;
  return PureState(n_qubits, std::move(amp));
}

QuantumState QuantumState::pure(PureState s) {
  QuantumState rho;
  rho.n_ = s.n;
  rho.components_.push_back({1.0, false, std::move(s)});
  return rho;
}

QuantumState QuantumState::maximally_mixed(int n_qubits) {
  check_state_qubits(n_qubits);
  QuantumState rho;
  rho.n_ = n_qubits;
  rho.components_.push_back({1.0, true, {}});
  return rho;
}

QuantumState QuantumState::mixture(std::vector<Component> components) {
  if (components.empty()) throw std::invalid_argument("mixture needs at least one component");
  QuantumState rho;
  double total = 0;
  for (auto& c : components) {
    if (!(c.weight > 0)) throw std::invalid_argument("component weights must be positive");
    total += c.weight;
    const int cn = c.maximally_mixed ? 0 : c.state.n;
    if (!c.maximally_mixed) {
      if (rho.n_ == 0)
        rho.n_ = cn;
      else if (cn != rho.n_)
        throw std::invalid_argument("mixture components have mismatched qubit counts");
    }
  }
  if (rho.n_ == 0)
    throw std::invalid_argument("mixture of only maximally-mixed parts: use maximally_mixed(n)");
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("mixture weights sum to " + format_double(total) + ", expected 1");
  rho.components_ = std::move(components);
  return rho;
}

QuantumState depolarize(const PureState& psi, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("depolarizing strength must lie in [0, 1]");
  if (lambda == 0.0) return QuantumState::pure(psi);
  if (lambda == 1.0) return QuantumState::maximally_mixed(psi.n);
  return QuantumState::mixture({{1.0 - lambda, false, psi}, {lambda, true, {}}});
}

double expectation(const PauliString& p, const PureState& psi) {
  if (p.n != psi.n) throw std::invalid_argument("Pauli and state qubit counts differ");
  // <psi|P|psi> = Sum_j conj(psi[j^x]) phase(j) psi[j]; real for Hermitian P.
  static constexpr std::complex<double> kPhases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const std::complex<double> base = kPhases[std::popcount(p.x & p.z) & 3];
  const std::uint64_t dim = 1ull << p.n;
  std::complex<double> acc = 0;
  for (std::uint64_t j = 0; j < dim; ++j) {
    const std::complex<double> term = std::conj(psi.amp[j ^ p.x]) * psi.amp[j];
    if (std::popcount(p.z & static_cast<std::uint32_t>(j)) & 1)
      acc -= term;
    else
      acc += term;
  }
  return (base * acc).real();
}

double expectation(const PauliString& p, const QuantumState& rho) {
  if (p.n != rho.qubits()) throw std::invalid_argument("Pauli and state qubit counts differ");
  double acc = 0;
  for (const auto& c : rho.components()) {
    if (c.maximally_mixed)
      acc += c.weight * (p.is_identity() ? 1.0 : 0.0);
    else
      acc += c.weight * expectation(p, c.state);
  }
  return acc;
}

int measure_pauli_shot(const PauliString& p, const QuantumState& rho, RngStream& rng) {
  if (p.n != rho.qubits()) throw std::invalid_argument("Pauli and state qubit counts differ");
  const auto& comps = rho.components();
  std::size_t pick = comps.size() - 1;
  if (comps.size() > 1) {
    double u = rng.uniform();
    for (std::size_t i = 0; i < comps.size(); ++i) {
      if (u < comps[i].weight) {
        pick = i;
        break;
      }
      u -= comps[i].weight;
    }
  }
  double plus_prob;
  if (comps[pick].maximally_mixed)
    plus_prob = p.is_identity() ? 1.0 : 0.5;
  else
    plus_prob = 0.5 * (1.0 + expectation(p, comps[pick].state));
  return rng.uniform() < plus_prob ? 1 : -1;
}

Eigen::MatrixXcd density_matrix(const QuantumState& rho) {
  const Eigen::Index dim = Eigen::Index(1) << rho.qubits();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& c : rho.components()) {
    if (c.maximally_mixed) {
      m += (c.weight / static_cast<double>(dim)) * Eigen::MatrixXcd::Identity(dim, dim);
    } else {
      Eigen::Map<const Eigen::VectorXcd> v(c.state.amp.data(), dim);
      m += c.weight * (v * v.adjoint());
    }
  }
  return m;
}

std::pair<PureState, double> ground_state(const WeightedPauliSum& hamiltonian) {
  const int n = hamiltonian.qubits();
  check_state_qubits(n);
  const Eigen::MatrixXcd h = sum_to_dense(hamiltonian);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigensolver failed on the Hamiltonian");
  const double energy = solver.eigenvalues()(0);
  Eigen::VectorXcd v = solver.eigenvectors().col(0);
  const double residual = (h * v - energy * v).norm();
  if (residual > 1e-8)
    throw std::runtime_error("ground state residual " + format_double(residual) + " exceeds 1e-8");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  const std::complex<double> a = v(best);
  v *= std::conj(a) / std::abs(a);
  v /= v.norm();
  std::vector<std::complex<double>> amp(v.data(), v.data() + v.size());
  return {PureState(n, std::move(amp)), energy};
}

std::vector<PauliString> SurfaceCode::generators() {
  // Distance-3 rotated layout, qubits numbered 0..8 row-major.
  static const std::vector<std::vector<int>> x_sets = {{1, 2}, {0, 1, 3, 4}, {4, 5, 7, 8}, {6, 7}};
  static const std::vector<std::vector<int>> z_sets = {{0, 3}, {1, 2, 4, 5}, {3, 4, 6, 7}, {5, 8}};
  std::vector<PauliString> gens;
  for (const auto& qs : x_sets) {
    std::uint32_t x = 0;
    for (int q : qs) x |= 1u << q;
    gens.emplace_back(kQubits, x, 0u);
  }
  for (const auto& qs : z_sets) {
    std::uint32_t z = 0;
    for (int q : qs) z |= 1u << q;
    gens.emplace_back(kQubits, 0u, z);
  }
  return gens;
}

WeightedPauliSum SurfaceCode::hamiltonian(const std::vector<double>& weights) {
  if (weights.size() != kGenerators)
    throw std::invalid_argument("surface code takes exactly 8 generator weights");
  const auto gens = generators();
  std::vector<WeightedPauliSum::Term> terms;
  for (int g = 0; g < kGenerators; ++g) terms.emplace_back(-weights[g], gens[g]);
  return WeightedPauliSum(kQubits, std::move(terms));
}

WeightedPauliSum SurfaceCode::hamiltonian() {
  return hamiltonian(std::vector<double>(kGenerators, 1.0));
}

void write_state(std::ostream& out, const QuantumState& rho) {
  out << "opshadow-state v1\n";
  out << "n " << rho.qubits() << '\n';
  out << "components " << rho.components().size() << '\n';
  for (const auto& c : rho.components()) {
    if (c.maximally_mixed) {
      out << "component maximally-mixed " << format_double(c.weight) << '\n';
    } else {
      out << "component pure " << format_double(c.weight) << '\n';
      for (const auto& a : c.state.amp)
        out << format_double(a.real()) << ' ' << format_double(a.imag()) << '\n';
    }
  }
}

QuantumState read_state(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "opshadow-state v1")
    throw std::invalid_argument("missing or unsupported state header, expected 'opshadow-state v1'");
  int n = 0;
  std::size_t count = 0;
  std::string key;
  if (!(in >> key >> n) || key != "n") throw std::invalid_argument("expected 'n <qubits>' line");
  check_state_qubits(n);
  if (!(in >> key >> count) || key != "components" || count == 0)
    throw std::invalid_argument("expected 'components <count>' line");
  std::vector<QuantumState::Component> comps;
  for (std::size_t i = 0; i < count; ++i) {
    std::string kind;
    double weight;
    if (!(in >> key >> kind >> weight) || key != "component")
      throw std::invalid_argument("expected 'component <kind> <weight>' line");
    if (kind == "maximally-mixed") {
      comps.push_back({weight, true, {}});
    } else if (kind == "pure") {
      std::vector<std::complex<double>> amp(1ull << n);
      for (auto& a : amp) {
        double re, im;
        if (!(in >> re >> im)) throw std::invalid_argument("truncated amplitude list");
        a = {re, im};
      }
      comps.push_back({weight, false, PureState(n, std::move(amp))});
    } else {
      throw std::invalid_argument("unknown component kind '" + kind + "'");
    }
  }
  if (comps.size() == 1 && comps[0].maximally_mixed) return QuantumState::maximally_mixed(n);
  if (comps.size() == 1) return QuantumState::pure(std::move(comps[0].state));
  return QuantumState::mixture(std::move(comps));
}

}  // namespace opshadow
