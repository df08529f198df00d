#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opshadow/coefficients.hpp"

namespace opshadow {

// Complete binary tree over the non-zero coefficients of an observable, used
// to draw Pauli indices in O(log L). Leaf weights are |h_i| (L1 mode) or
// h_i^2 (L2 mode); each internal node stores the sum of its children. Leaves
// are padded to a power of two with zero-weight slots that are never drawn.
// Leaf slot i carries the sign of h_i and the canonical full-register index
// of P_i.
class SamplingTree {
 public:
  enum class Mode { L1, L2 };

  static SamplingTree build(const CoefficientVector& cv, Mode mode);

  // Maps u in [0, 1) to a leaf slot: descend with target u * total, going
  // left when target falls inside the left child's half-open weight interval
  // and subtracting that weight otherwise.
  std::size_t sample(double u) const;
  // Same, reporting how many tree nodes the descent inspected.
  std::size_t sample(double u, int* visited_nodes) const;

  // Replaces leaf i's coefficient (weight and sign) and repairs the sums on
  // the path to the root. The new value must be non-zero.
  void update(std::size_t leaf, double new_value);

  double probability(std::size_t leaf) const;
  double root_total() const { return nodes_[0]; }
  int sign(std::size_t leaf) const;
  // Signed coefficient at the leaf: sign * weight in L1 mode, or
  // sign * sqrt(weight) in L2 mode.
  double coefficient(std::size_t leaf) const;
  std::uint64_t pauli_index(std::size_t leaf) const;

  std::size_t leaf_count() const { return leaf_count_; }
  int qubits() const { return n_; }
  int depth() const { return depth_; }
  Mode mode() const { return mode_; }

  // Level-order node weights, one line per level. Debug aid.
  std::string dump() const;

 private:
  SamplingTree() = default;
  void check_leaf(std::size_t leaf) const;

  Mode mode_ = Mode::L1;
  int n_ = 0;
  int depth_ = 0;
  std::size_t leaf_count_ = 0;
  std::size_t padded_ = 0;
  std::vector<double> nodes_;          // 2 * padded - 1 entries, heap layout
  std::vector<std::int8_t> signs_;     // per leaf slot
  std::vector<std::uint64_t> paulis_;  // per leaf slot, canonical indices
};

}  // namespace opshadow
