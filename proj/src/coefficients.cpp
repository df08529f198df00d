#include "opshadow/coefficients.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace opshadow {

namespace {

constexpr double kPruneRel = 1e-12;
constexpr double kHermitianRel = 1e-10;

struct Kahan {
  double sum = 0, comp = 0;
  void add(double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_hermitian(const Eigen::MatrixXcd& op) {
  double max_abs = 0, max_asym = 0;
  for (Eigen::Index c = 0; c < op.cols(); ++c)
    for (Eigen::Index r = 0; r < op.rows(); ++r) {
      max_abs = std::max(max_abs, std::abs(op(r, c)));
      max_asym = std::max(max_asym, std::abs(op(r, c) - std::conj(op(c, r))));
    }
  if (max_abs == 0) return;
  if (max_asym > kHermitianRel * max_abs)
    throw std::invalid_argument("operator is not Hermitian: max |O - O^dag| = " +
                                format_double(max_asym) + " against max |O| = " +
                                format_double(max_abs));
}

// All 4^k traces Tr[P_i O] / 2^k for a dense 2^k x 2^k Hermitian.
std::vector<double> sweep_coefficients(const Eigen::MatrixXcd& op, int k) {
  const std::uint64_t dim = 1ull << k;
  const std::uint64_t grid = 1ull << (2 * k);
  std::vector<double> h(grid);
  for (std::uint64_t idx = 0; idx < grid; ++idx) {
    const PauliString p = PauliString::from_index(k, idx);
    // Tr[P O] = Sum_c <c|P O|c> = Sum_c conj(phase(c)) <c^x| O |c> with
    // phase(c) = base * (-1)^{parity(z&c)}, base = i^{popcount(x&z)}. The
    // base is constant over c, so accumulate the signed sum first and apply
    // its conjugate once.
    Kahan re, im;
    for (std::uint64_t c = 0; c < dim; ++c) {
      const std::complex<double> v = op(static_cast<Eigen::Index>(c ^ p.x),
                                        static_cast<Eigen::Index>(c));
      if (std::popcount(p.z & static_cast<std::uint32_t>(c)) & 1) {
        re.add(-v.real());
        im.add(-v.imag());
      } else {
        re.add(v.real());
        im.add(v.imag());
      }
    }
    std::complex<double> trace(re.sum, im.sum);
    static constexpr std::complex<double> kPhases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    trace *= std::conj(kPhases[std::popcount(p.x & p.z) & 3]);
    if (std::abs(trace.imag()) > 1e-10 * (1.0 + std::abs(trace.real())))
      throw std::runtime_error("hermitian decomposition produced imaginary coefficient " +
                               format_double(trace.imag()) + " at index " + std::to_string(idx));
    h[idx] = trace.real() / static_cast<double>(dim);
  }
  return h;
}

std::vector<CoefficientVector::Entry> prune(const std::vector<double>& h) {
  Kahan l1;
  for (double v : h) l1.add(std::abs(v));
  const double cut = kPruneRel * l1.sum;
  std::vector<CoefficientVector::Entry> entries;
  for (std::uint64_t idx = 0; idx < h.size(); ++idx)
    if (std::abs(h[idx]) > cut) entries.push_back({idx, h[idx]});
  return entries;
}

}  // namespace

std::uint64_t CoefficientVector::global_index(std::uint64_t local) const {
  if (support.empty()) return local;
  std::uint64_t global = 0;
  for (std::size_t pos = 0; pos < support.size(); ++pos) {
    const std::uint64_t digit = (local >> (2 * pos)) & 3;
    global |= digit << (2 * support[pos]);
  }
  return global;
}

PauliString CoefficientVector::pauli_at(std::size_t entry) const {
  if (entry >= entries.size()) throw std::out_of_range("entry index out of range");
  return PauliString::from_index(n, global_index(entries[entry].index));
}

void CoefficientVector::refresh_norms() {
  Kahan s1, s2;
  for (const auto& e : entries) {
    s1.add(std::abs(e.value));
    s2.add(e.value * e.value);
  }
  l1 = s1.sum;
  l2 = std::sqrt(s2.sum);
}

CoefficientVector decompose(const Eigen::MatrixXcd& op, int n_qubits) {
  if (n_qubits < 1 || n_qubits > 8)
    throw std::invalid_argument("full decomposition supports 1 to 8 qubits, got " +
                                std::to_string(n_qubits));
  const Eigen::Index dim = Eigen::Index(1) << n_qubits;
  if (op.rows() != dim || op.cols() != dim)
    throw std::invalid_argument("operator dimension " + std::to_string(op.rows()) + "x" +
                                std::to_string(op.cols()) + " does not match n=" +
                                std::to_string(n_qubits));
  check_hermitian(op);
  CoefficientVector cv;
  cv.n = n_qubits;
  cv.entries = prune(sweep_coefficients(op, n_qubits));
  cv.refresh_norms();
  return cv;
}

CoefficientVector decompose_local(const Eigen::MatrixXcd& op, const std::vector<int>& support,
                                  int n_qubits) {
  if (support.empty()) throw std::invalid_argument("support must be non-empty");
  if (support.size() > 8) throw std::invalid_argument("local decomposition supports at most 8 qubits");
  std::vector<int> seen;
  for (int q : support) {
    if (q < 0 || q >= n_qubits)
      throw std::invalid_argument("support qubit " + std::to_string(q) + " out of range for n=" +
                                  std::to_string(n_qubits));
    if (std::find(seen.begin(), seen.end(), q) != seen.end())
      throw std::invalid_argument("duplicate support qubit " + std::to_string(q));
    seen.push_back(q);
  }
  const int k = static_cast<int>(support.size());
  const Eigen::Index dim = Eigen::Index(1) << k;
  if (op.rows() != dim || op.cols() != dim)
    throw std::invalid_argument("operator dimension does not match support size");
  check_hermitian(op);
  CoefficientVector cv;
  cv.n = n_qubits;
  cv.support = support;
  cv.entries = prune(sweep_coefficients(op, k));
  cv.refresh_norms();
  return cv;
}

CoefficientVector combine_linear(const std::vector<std::pair<double, CoefficientVector>>& parts) {
  if (parts.empty()) throw std::invalid_argument("combine_linear needs at least one part");
  const int n = parts.front().second.n;
  double scale = 0;
  std::map<std::uint64_t, double> acc;
  for (const auto& [w, cv] : parts) {
    if (cv.n != n) throw std::invalid_argument("combine_linear qubit count mismatch");
    if (!std::isfinite(w)) throw std::invalid_argument("non-finite combination weight");
    scale += std::abs(w) * cv.l1;
    for (const auto& e : cv.entries) acc[cv.global_index(e.index)] += w * e.value;
  }
  CoefficientVector out;
  out.n = n;
  const double cut = kPruneRel * scale;
  for (const auto& [idx, v] : acc)
    if (std::abs(v) > cut) out.entries.push_back({idx, v});
  out.refresh_norms();
  return out;
}

WeightedPauliSum to_weighted_sum(const CoefficientVector& cv) {
  std::vector<WeightedPauliSum::Term> terms;
  terms.reserve(cv.entries.size());
  for (std::size_t i = 0; i < cv.entries.size(); ++i)
    terms.emplace_back(cv.entries[i].value, cv.pauli_at(i));
  return WeightedPauliSum(cv.n, std::move(terms));
}

void write_observable(std::ostream& out, const CoefficientVector& cv) {
  for (std::size_t i = 0; i < cv.entries.size(); ++i)
    out << format_double(cv.entries[i].value) << ' ' << cv.pauli_at(i).str() << '\n';
}

CoefficientVector read_observable(std::istream& in) {
  CoefficientVector cv;
  std::map<std::uint64_t, double> seen;
  std::string line;
  int line_no = 0;
  int n = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ls(line);
    double coeff;
    std::string pauli;
    if (!(ls >> coeff >> pauli))
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": expected '<coefficient> <paulistring>'");
    std::string extra;
    if (ls >> extra)
      throw std::invalid_argument("line " + std::to_string(line_no) + ": trailing content '" +
                                  extra + "'");
    if (!std::isfinite(coeff))
      throw std::invalid_argument("line " + std::to_string(line_no) + ": non-finite coefficient");
    PauliString p;
    try {
      p = PauliString::from_string(pauli);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (n == 0)
      n = p.n;
    else if (p.n != n)
      throw std::invalid_argument("line " + std::to_string(line_no) + ": Pauli string length " +
                                  std::to_string(p.n) + " differs from earlier length " +
                                  std::to_string(n));
    if (!seen.emplace(p.index(), coeff).second)
      throw std::invalid_argument("line " + std::to_string(line_no) + ": duplicate Pauli " + pauli);
  }
  if (seen.empty()) throw std::invalid_argument("observable file has no terms");
  cv.n = n;
  for (const auto& [idx, v] : seen) cv.entries.push_back({idx, v});
  cv.refresh_norms();
  return cv;
}

void write_dense_matrix(std::ostream& out, const Eigen::MatrixXcd& op, int n_qubits) {
  const Eigen::Index dim = Eigen::Index(1) << n_qubits;
  if (op.rows() != dim || op.cols() != dim)
    throw std::invalid_argument("matrix dimension does not match qubit count");
  out << n_qubits << '\n';
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      if (c) out << ' ';
      out << format_double(op(r, c).real()) << ' ' << format_double(op(r, c).imag());
    }
    out << '\n';
  }
}

std::pair<Eigen::MatrixXcd, int> read_dense_matrix(std::istream& in) {
  std::string body;
  std::string line;
  while (std::getline(in, line)) {
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    body += line;
    body += ' ';
  }
  std::istringstream ts(body);
  int n = 0;
  if (!(ts >> n) || n < 1 || n > 10)
    throw std::invalid_argument("dense matrix file must start with a qubit count in [1, 10]");
  const Eigen::Index dim = Eigen::Index(1) << n;
  Eigen::MatrixXcd op(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) {
      double re, im;
      if (!(ts >> re >> im))
        throw std::invalid_argument("dense matrix file truncated at row " + std::to_string(r) +
                                    ", column " + std::to_string(c));
      op(r, c) = {re, im};
    }
  double extra;
  if (ts >> extra) throw std::invalid_argument("dense matrix file has trailing values");
  return {op, n};
}

}  // namespace opshadow
