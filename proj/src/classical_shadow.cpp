#include "opshadow/classical_shadow.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "opshadow/rng.hpp"

namespace opshadow {

namespace {

// Rotations taking each measurement basis to the computational one:
// X -> H, Y -> H S^dag, Z -> identity. Row-major 2x2.
constexpr double kInvSqrt2 = 0.70710678118654752440;
const std::complex<double> kBasisRotation[3][4] = {
    {{kInvSqrt2, 0}, {kInvSqrt2, 0}, {kInvSqrt2, 0}, {-kInvSqrt2, 0}},
    {{kInvSqrt2, 0}, {0, -kInvSqrt2}, {kInvSqrt2, 0}, {0, kInvSqrt2}},
    {{1, 0}, {0, 0}, {0, 0}, {1, 0}},
};

// Samples a computational-basis outcome of the basis-rotated state by fixing
// qubits from n-1 downward: each step rotates the top remaining qubit, draws
// its bit from the conditional Born distribution, and keeps the matching half
// of the amplitude vector.
std::uint32_t sample_rotated_outcome(const PureState& psi, const std::uint32_t bases,
                                     RngStream& rng, std::vector<std::complex<double>>& scratch) {
  scratch.assign(psi.amp.begin(), psi.amp.end());
  std::uint32_t outcome = 0;
  for (int q = psi.n - 1; q >= 0; --q) {
    const std::size_t half = std::size_t{1} << q;
    const std::uint32_t basis = (bases >> (2 * q)) & 3;
    double n0 = 0, n1 = 0;
    if (basis == 2) {  // Z basis, no rotation needed
      for (std::size_t i = 0; i < half; ++i) {
        n0 += std::norm(scratch[i]);
        n1 += std::norm(scratch[i + half]);
      }
    } else {
      const auto* u = kBasisRotation[basis];
      for (std::size_t i = 0; i < half; ++i) {
        const std::complex<double> lo = scratch[i];
        const std::complex<double> hi = scratch[i + half];
        const std::complex<double> a0 = u[0] * lo + u[1] * hi;
        const std::complex<double> a1 = u[2] * lo + u[3] * hi;
        scratch[i] = a0;
        scratch[i + half] = a1;
        n0 += std::norm(a0);
        n1 += std::norm(a1);
      }
    }
    const int bit = rng.uniform() < n0 / (n0 + n1) ? 0 : 1;
    if (bit) {
      outcome |= std::uint32_t{1} << q;
      std::copy(scratch.begin() + half, scratch.begin() + 2 * half, scratch.begin());
    }
  }
  return outcome;
}

struct CompiledTerm {
  std::uint32_t care = 0;      // 2-bit mask of qubits the term constrains
  std::uint32_t required = 0;  // basis codes expected on those qubits
  std::uint32_t qubit_mask = 0;
  double scaled = 0;           // h_i * 3^weight
};

std::vector<CompiledTerm> compile_terms(const CoefficientVector& observable) {
  std::vector<CompiledTerm> terms;
  std::uint32_t union_mask = 0;
  terms.reserve(observable.entries.size());
  for (std::size_t i = 0; i < observable.entries.size(); ++i) {
    const PauliString p = observable.pauli_at(i);
    CompiledTerm t;
    for (int q = 0; q < p.n; ++q) {
      const int letter = p.letter(q);
      if (letter == 0) continue;
      t.care |= std::uint32_t{3} << (2 * q);
      t.required |= static_cast<std::uint32_t>(letter - 1) << (2 * q);
      t.qubit_mask |= std::uint32_t{1} << q;
    }
    t.scaled = observable.entries[i].value * std::pow(3.0, p.weight());
    union_mask |= t.qubit_mask;
    terms.push_back(t);
  }
  if (std::popcount(union_mask) > 9)
    throw std::invalid_argument("shadow estimation is limited to observables on at most 9 qubits");
  return terms;
}

}  // namespace

std::vector<Snapshot> collect_snapshots(const QuantumState& rho, std::size_t count,
                                        std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("snapshot count must be positive");
  const int n = rho.qubits();
  const auto& comps = rho.components();
  std::vector<Snapshot> snaps(count);
  std::vector<std::complex<double>> scratch;
  scratch.reserve(std::size_t{1} << n);
  for (std::size_t s = 0; s < count; ++s) {
    RngStream rng(derive_seed(seed, s));
    std::uint32_t bases = 0;
    for (int q = 0; q < n; ++q) bases |= rng.below(3) << (2 * q);
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
    std::uint32_t outcome = 0;
    if (comps[pick].maximally_mixed) {
      for (int q = 0; q < n; ++q) outcome |= (rng.uniform() < 0.5 ? 0u : 1u) << q;
    } else {
      outcome = sample_rotated_outcome(comps[pick].state, bases, rng, scratch);
    }
    snaps[s] = {bases, outcome};
  }
  return snaps;
}

double snapshot_pauli_expectation(const PauliString& p, const Snapshot& snap) {
  double factor = 1.0;
  for (int q = 0; q < p.n; ++q) {
    const int letter = p.letter(q);
    if (letter == 0) continue;
    if (snap.basis(q) != letter - 1) return 0.0;
    factor *= snap.bit(q) ? -3.0 : 3.0;
  }
  return factor;
}

EstimateReport shadow_estimate(const CoefficientVector& observable,
                               const std::vector<Snapshot>& snapshots, int median_groups) {
  if (snapshots.empty()) throw std::invalid_argument("shadow estimation needs snapshots");
  if (median_groups < 1) throw std::invalid_argument("median group count must be at least 1");
  if (median_groups > 1 && median_groups % 2 == 0)
    throw std::invalid_argument("median group count must be odd");
  if (static_cast<std::size_t>(median_groups) > snapshots.size())
    throw std::invalid_argument("more median groups than snapshots");
  const auto terms = compile_terms(observable);
  std::vector<double> values(snapshots.size());
  for (std::size_t s = 0; s < snapshots.size(); ++s) {
    double v = 0;
    for (const auto& t : terms) {
      if ((snapshots[s].bases & t.care) != t.required) continue;
      v += (std::popcount(snapshots[s].outcomes & t.qubit_mask) & 1) ? -t.scaled : t.scaled;
    }
    values[s] = v;
  }
  EstimateReport report;
  report.method = "classical-shadow";
  report.value = median_of_means(values, median_groups);
  report.samples = snapshots.size();
  report.shots = snapshots.size();
  double sum = 0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0;
    for (double v : values) sq += (v - mean) * (v - mean);
    report.variance = sq / static_cast<double>(values.size() - 1);
  }
  if (median_groups > 1) {
    const std::size_t per_group = snapshots.size() / median_groups;
    report.groups.resize(median_groups);
    for (int g = 0; g < median_groups; ++g) {
      double s = 0;
      for (std::size_t i = 0; i < per_group; ++i) s += values[g * per_group + i];
      report.groups[g] = s / static_cast<double>(per_group);
    }
  }
  return report;
}

double shadow_variance_bound(const CoefficientVector& observable) {
  double s = 0;
  for (std::size_t i = 0; i < observable.entries.size(); ++i)
    s += std::abs(observable.entries[i].value) *
         std::pow(3.0, 0.5 * observable.pauli_at(i).weight());
  return s * s;
}

Eigen::MatrixXcd brute_force_snapshot_mean(const QuantumState& rho) {
  const int n = rho.qubits();
  if (n > 2) throw std::invalid_argument("brute-force snapshot average is limited to n <= 2");
  const Eigen::Index dim = Eigen::Index(1) << n;
  const Eigen::MatrixXcd rho_dense = density_matrix(rho);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
  int combos = 1;
  for (int q = 0; q < n; ++q) combos *= 3;
  for (int combo = 0; combo < combos; ++combo) {
    std::vector<int> basis(n);
    int rest = combo;
    for (int q = 0; q < n; ++q) {
      basis[q] = rest % 3;
      rest /= 3;
    }
    // U = U_{n-1} (x) ... (x) U_0 rotates every qubit to its basis; wrapping
    // ascending keeps qubit q on bit q.
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(1, 1);
    for (int q = 0; q < n; ++q) {
      const auto* m = kBasisRotation[basis[q]];
      Eigen::MatrixXcd uq(2, 2);
      uq << m[0], m[1], m[2], m[3];
      Eigen::MatrixXcd next(u.rows() * 2, u.cols() * 2);
      next.topLeftCorner(u.rows(), u.cols()) = uq(0, 0) * u;
      next.topRightCorner(u.rows(), u.cols()) = uq(0, 1) * u;
      next.bottomLeftCorner(u.rows(), u.cols()) = uq(1, 0) * u;
      next.bottomRightCorner(u.rows(), u.cols()) = uq(1, 1) * u;
      u = std::move(next);
    }
    const Eigen::MatrixXcd rotated = u * rho_dense * u.adjoint();
    for (Eigen::Index m = 0; m < dim; ++m) {
      const double prob = rotated(m, m).real();
      // Inverted-channel snapshot: product over qubits of
      // 3 U^dag |b><b| U - I.
      Eigen::MatrixXcd snap = Eigen::MatrixXcd::Identity(1, 1);
      for (int q = 0; q < n; ++q) {
        const auto* mm = kBasisRotation[basis[q]];
        Eigen::MatrixXcd uq(2, 2);
        uq << mm[0], mm[1], mm[2], mm[3];
        const int b = (m >> q) & 1;
        Eigen::Vector2cd ket = Eigen::Vector2cd::Zero();
        ket(b) = 1.0;
        const Eigen::MatrixXcd local =
            3.0 * (uq.adjoint() * ket * ket.adjoint() * uq) - Eigen::MatrixXcd::Identity(2, 2);
        Eigen::MatrixXcd next(snap.rows() * 2, snap.cols() * 2);
        next.topLeftCorner(snap.rows(), snap.cols()) = local(0, 0) * snap;
        next.topRightCorner(snap.rows(), snap.cols()) = local(0, 1) * snap;
        next.bottomLeftCorner(snap.rows(), snap.cols()) = local(1, 0) * snap;
        next.bottomRightCorner(snap.rows(), snap.cols()) = local(1, 1) * snap;
        snap = std::move(next);
      }
      acc += (prob / static_cast<double>(combos)) * snap;
    }
  }
  return acc;
}

void write_snapshots(std::ostream& out, const std::vector<Snapshot>& snapshots, int n_qubits) {
  static constexpr char kBasisChars[3] = {'X', 'Y', 'Z'};
  for (const auto& snap : snapshots) {
    std::string bases(n_qubits, '?'), bits(n_qubits, '?');
    for (int q = 0; q < n_qubits; ++q) {
      bases[n_qubits - 1 - q] = kBasisChars[snap.basis(q)];
      bits[n_qubits - 1 - q] = snap.bit(q) ? '1' : '0';
    }
    out << bases << ' ' << bits << '\n';
  }
}

std::vector<Snapshot> read_snapshots(std::istream& in, int n_qubits) {
  std::vector<Snapshot> snaps;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ls(line);
    std::string bases, bits;
    if (!(ls >> bases >> bits) || bases.size() != static_cast<std::size_t>(n_qubits) ||
        bits.size() != static_cast<std::size_t>(n_qubits))
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": expected '<bases> <bits>' of length " +
                                  std::to_string(n_qubits));
    Snapshot snap;
    for (int pos = 0; pos < n_qubits; ++pos) {
      const int q = n_qubits - 1 - pos;
      std::uint32_t code;
      switch (bases[pos]) {
        case 'X': code = 0; break;
        case 'Y': code = 1; break;
        case 'Z': code = 2; break;
        default:
          throw std::invalid_argument("line " + std::to_string(line_no) + ": bad basis letter '" +
                                      bases[pos] + "'");
      }
      snap.bases |= code << (2 * q);
      if (bits[pos] == '1')
        snap.outcomes |= std::uint32_t{1} << q;
      else if (bits[pos] != '0')
        throw std::invalid_argument("line " + std::to_string(line_no) + ": bad outcome bit '" +
                                    bits[pos] + "'");
    }
    snaps.push_back(snap);
  }
  return snaps;
}

}  // namespace opshadow
