#include "opshadow/sampling_tree.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace opshadow {

SamplingTree SamplingTree::build(const CoefficientVector& cv, Mode mode) {
  if (cv.entries.empty()) throw std::invalid_argument("cannot build a sampling tree without entries");
  SamplingTree t;
  t.mode_ = mode;
  t.n_ = cv.n;
  t.leaf_count_ = cv.entries.size();
  t.padded_ = std::bit_ceil(t.leaf_count_);
  t.depth_ = std::countr_zero(t.padded_);
  t.nodes_.assign(2 * t.padded_ - 1, 0.0);
  t.signs_.resize(t.leaf_count_);
  t.paulis_.resize(t.leaf_count_);
  for (std::size_t i = 0; i < t.leaf_count_; ++i) {
    const double v = cv.entries[i].value;
    if (v == 0.0 || !std::isfinite(v))
      throw std::invalid_argument("leaf weights must be non-zero and finite");
    t.nodes_[t.padded_ - 1 + i] = (mode == Mode::L1) ? std::abs(v) : v * v;
    t.signs_[i] = v > 0 ? 1 : -1;
    t.paulis_[i] = cv.global_index(cv.entries[i].index);
  }
  for (std::size_t node = t.padded_ - 1; node-- > 0;)
    t.nodes_[node] = t.nodes_[2 * node + 1] + t.nodes_[2 * node + 2];
  if (t.nodes_[0] <= 0.0) throw std::invalid_argument("total weight must be positive");
  return t;
}

std::size_t SamplingTree::sample(double u) const {
  int ignored;
  return sample(u, &ignored);
}

std::size_t SamplingTree::sample(double u, int* visited_nodes) const {
  if (u < 0.0) u = 0.0;
  double target = u * nodes_[0];
  if (target >= nodes_[0]) target = std::nextafter(nodes_[0], 0.0);
  std::size_t node = 0;
  int visits = 0;
  while (node < padded_ - 1) {
    ++visits;
    const double left = nodes_[2 * node + 1];
    if (target < left) {
      node = 2 * node + 1;
    } else {
      target -= left;
      node = 2 * node + 2;
    }
  }
  *visited_nodes = visits;
  std::size_t leaf = node - (padded_ - 1);
  // Rounding in the internal sums can push a boundary target into the padded
  // zero-weight suffix; clamp back onto the last real leaf.
  if (leaf >= leaf_count_) leaf = leaf_count_ - 1;
  return leaf;
}

void SamplingTree::update(std::size_t leaf, double new_value) {
  check_leaf(leaf);
  if (new_value == 0.0 || !std::isfinite(new_value))
    throw std::invalid_argument("updated coefficient must be non-zero and finite");
  std::size_t node = padded_ - 1 + leaf;
  nodes_[node] = (mode_ == Mode::L1) ? std::abs(new_value) : new_value * new_value;
  signs_[leaf] = new_value > 0 ? 1 : -1;
  while (node > 0) {
    node = (node - 1) / 2;
    nodes_[node] = nodes_[2 * node + 1] + nodes_[2 * node + 2];
  }
}

double SamplingTree::probability(std::size_t leaf) const {
  check_leaf(leaf);
  return nodes_[padded_ - 1 + leaf] / nodes_[0];
}

int SamplingTree::sign(std::size_t leaf) const {
  check_leaf(leaf);
  return signs_[leaf];
}

double SamplingTree::coefficient(std::size_t leaf) const {
  check_leaf(leaf);
  const double w = nodes_[padded_ - 1 + leaf];
  return signs_[leaf] * ((mode_ == Mode::L1) ? w : std::sqrt(w));
}

std::uint64_t SamplingTree::pauli_index(std::size_t leaf) const {
  check_leaf(leaf);
  return paulis_[leaf];
}

std::string SamplingTree::dump() const {
  std::string out;
  char buf[48];
  std::size_t level_start = 0, level_size = 1;
  while (level_start < nodes_.size()) {
    for (std::size_t i = 0; i < level_size; ++i) {
      std::snprintf(buf, sizeof(buf), "%.12g", nodes_[level_start + i]);
      if (i) out += ' ';
      out += buf;
    }
    out += '\n';
    level_start += level_size;
    level_size *= 2;
  }
  return out;
}

void SamplingTree::check_leaf(std::size_t leaf) const {
  if (leaf >= leaf_count_) throw std::out_of_range("leaf slot out of range");
}

}  // namespace opshadow
