#include "opshadow/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace opshadow {

namespace {

void check_qubits(int n) {
  if (n < 1 || n > PauliString::kMaxQubits)
    throw std::invalid_argument("qubit count must be in [1, 16], got " + std::to_string(n));
}

constexpr char kLetters[4] = {'I', 'X', 'Y', 'Z'};

// letter digit -> (x bit, z bit)
constexpr std::uint32_t kXBit[4] = {0, 1, 1, 0};
constexpr std::uint32_t kZBit[4] = {0, 0, 1, 1};

}  // namespace

PauliString::PauliString(int n_qubits, std::uint32_t x_mask, std::uint32_t z_mask)
    : n(n_qubits), x(x_mask), z(z_mask) {
  check_qubits(n_qubits);
  const std::uint32_t limit = (n_qubits == 32) ? ~0u : ((1u << n_qubits) - 1);
  if ((x_mask | z_mask) & ~limit)
    throw std::invalid_argument("mask has bits beyond qubit count");
}

PauliString PauliString::identity(int n_qubits) { return PauliString(n_qubits, 0, 0); }

PauliString PauliString::from_index(int n_qubits, std::uint64_t index) {
  check_qubits(n_qubits);
  if (index >= (1ull << (2 * n_qubits)))
    throw std::out_of_range("Pauli index " + std::to_string(index) + " out of range for n=" +
                            std::to_string(n_qubits));
  std::uint32_t x = 0, z = 0;
  for (int q = 0; q < n_qubits; ++q) {
    const auto digit = static_cast<std::uint32_t>((index >> (2 * q)) & 3);
    x |= kXBit[digit] << q;
    z |= kZBit[digit] << q;
  }
  return PauliString(n_qubits, x, z);
}

PauliString PauliString::from_string(std::string_view text) {
  const int n = static_cast<int>(text.size());
  check_qubits(n);
  std::uint32_t x = 0, z = 0;
  for (int pos = 0; pos < n; ++pos) {
    const int q = n - 1 - pos;  // leftmost character is qubit n-1
    switch (text[pos]) {
      case 'I': break;
      case 'X': x |= 1u << q; break;
      case 'Y': x |= 1u << q; z |= 1u << q; break;
      case 'Z': z |= 1u << q; break;
      default:
        throw std::invalid_argument(std::string("invalid Pauli letter '") + text[pos] +
                                    "' at position " + std::to_string(pos));
    }
  }
  return PauliString(n, x, z);
}

PauliString PauliString::single(int n_qubits, int qubit, char letter) {
  check_qubits(n_qubits);
  if (qubit < 0 || qubit >= n_qubits) throw std::out_of_range("qubit index out of range");
  std::uint32_t x = 0, z = 0;
  switch (letter) {
    case 'X': x = 1u << qubit; break;
    case 'Y': x = 1u << qubit; z = 1u << qubit; break;
    case 'Z': z = 1u << qubit; break;
    default: throw std::invalid_argument("letter must be one of X, Y, Z");
  }
  return PauliString(n_qubits, x, z);
}

std::uint64_t PauliString::index() const {
  std::uint64_t idx = 0;
  for (int q = 0; q < n; ++q) {
    const std::uint64_t digit = ((x >> q) & 1) ? (((z >> q) & 1) ? 2 : 1) : (((z >> q) & 1) ? 3 : 0);
    idx |= digit << (2 * q);
  }
  return idx;
}

std::string PauliString::str() const {
  std::string out(static_cast<std::size_t>(n), 'I');
  for (int q = 0; q < n; ++q) out[n - 1 - q] = kLetters[letter(q)];
  return out;
}

int PauliString::letter(int qubit) const {
  if (qubit < 0 || qubit >= n) throw std::out_of_range("qubit index out of range");
  const int xb = (x >> qubit) & 1;
  const int zb = (z >> qubit) & 1;
  return xb ? (zb ? 2 : 1) : (zb ? 3 : 0);
}

int PauliString::weight() const { return std::popcount(x | z); }

std::pair<std::uint64_t, std::complex<double>> PauliString::apply(std::uint64_t basis_index) const {
  if (basis_index >= (1ull << n)) throw std::out_of_range("basis index out of range");
  static constexpr std::complex<double> kPhases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  std::complex<double> phase = kPhases[std::popcount(x & z) & 3];
  if (std::popcount(z & static_cast<std::uint32_t>(basis_index)) & 1) phase = -phase;
  return {basis_index ^ x, phase};
}

Eigen::MatrixXcd PauliString::to_dense() const {
  if (n > 10) throw std::invalid_argument("dense Pauli limited to n <= 10");
  const std::uint64_t dim = 1ull << n;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
  for (std::uint64_t col = 0; col < dim; ++col) {
    const auto [row, phase] = apply(col);
    m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = phase;
  }
  return m;
}

bool commutes(const PauliString& p, const PauliString& q) {
  if (p.n != q.n) throw std::invalid_argument("commutation check needs equal qubit counts");
  return ((std::popcount(p.x & q.z) + std::popcount(p.z & q.x)) & 1) == 0;
}

WeightedPauliSum::WeightedPauliSum(int n_qubits, std::vector<Term> terms)
    : n_(n_qubits), terms_(std::move(terms)) {
  check_qubits(n_qubits);
  for (const auto& [c, p] : terms_) {
    if (!std::isfinite(c)) throw std::invalid_argument("non-finite coefficient");
    if (p.n != n_) throw std::invalid_argument("term qubit count mismatch");
  }
  std::sort(terms_.begin(), terms_.end(),
            [](const Term& a, const Term& b) { return a.second.index() < b.second.index(); });
  for (std::size_t i = 1; i < terms_.size(); ++i)
    if (terms_[i].second == terms_[i - 1].second)
      throw std::invalid_argument("duplicate Pauli term " + terms_[i].second.str());
}

double WeightedPauliSum::l1_norm() const {
  double s = 0, comp = 0;
  for (const auto& [c, p] : terms_) {
    const double y = std::abs(c) - comp;
    const double t = s + y;
    comp = (t - s) - y;
    s = t;
  }
  return s;
}

double WeightedPauliSum::l2_norm() const {
  double s = 0, comp = 0;
  for (const auto& [c, p] : terms_) {
    const double y = c * c - comp;
    const double t = s + y;
    comp = (t - s) - y;
    s = t;
  }
  return std::sqrt(s);
}

Eigen::MatrixXcd sum_to_dense(const WeightedPauliSum& sum) {
  if (sum.qubits() > 10) throw std::invalid_argument("dense reconstruction limited to n <= 10");
  const std::uint64_t dim = 1ull << sum.qubits();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
  for (const auto& [c, p] : sum.terms()) {
    for (std::uint64_t col = 0; col < dim; ++col) {
      const auto [row, phase] = p.apply(col);
      m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) += c * phase;
    }
  }
  return m;
}

}  // namespace opshadow
