#include "hyfsi/assembly.hpp"

#include <algorithm>
#include <string>

namespace hyfsi {

void DofMap::add_block(Field f, int n_nodes, int n_components, std::span<const char> active) {
  if (!active.empty() && static_cast<int>(active.size()) != n_nodes) {
    throw AssemblyError("active mask size does not match node count");
  }
  // Rebuild offsets so blocks stay in Field order whatever the call order.
  auto& b = blocks_[idx(f)];
  b.n_nodes = n_nodes;
  b.n_comp = n_components;
  b.offset = 0;
  b.node_base.assign(n_nodes, -1);
  int count = 0;
  for (int i = 0; i < n_nodes; ++i) {
    if (active.empty() || active[i]) b.node_base[i] = (count++) * n_components;
  }
  b.size = count * n_components;
  int offset = 0;
  for (auto& blk : blocks_) {
    if (blk.n_nodes == 0) continue;
    const int shift = offset - blk.offset;
    for (int& base : blk.node_base)
      if (base >= 0) base += shift;
    blk.offset = offset;
    offset += blk.size;
  }
  size_ = offset;
}

Field DofMap::field_of(int dof) const {
  for (int i = 0; i < kNumFields; ++i) {
    const auto& b = blocks_[i];
    if (b.n_nodes > 0 && dof >= b.offset && dof < b.offset + b.size) return static_cast<Field>(i);
  }
  throw AssemblyError("dof " + std::to_string(dof) + " out of range");
}

void DofMap::pack(Field f, std::span<const double> nodal, Vector& global) const {
  const auto& b = blocks_[idx(f)];
  for (int i = 0; i < b.n_nodes; ++i) {
    const int base = b.node_base[i];
    if (base < 0) continue;
    for (int c = 0; c < b.n_comp; ++c) global[base + c] = nodal[i * b.n_comp + c];
  }
}

void DofMap::unpack(Field f, const Vector& global, std::span<double> nodal) const {
  const auto& b = blocks_[idx(f)];
  for (int i = 0; i < b.n_nodes; ++i) {
    const int base = b.node_base[i];
    if (base < 0) continue;
    for (int c = 0; c < b.n_comp; ++c) nodal[i * b.n_comp + c] = global[base + c];
  }
}

bool DofMap::operator==(const DofMap& o) const {
  if (size_ != o.size_) return false;
  for (int i = 0; i < kNumFields; ++i) {
    const auto &a = blocks_[i], &b = o.blocks_[i];
    if (a.n_nodes != b.n_nodes || a.n_comp != b.n_comp || a.node_base != b.node_base) return false;
  }
  return true;
}

void Accumulator::add(std::span<const int> dofs, const Eigen::VectorXd& r, const Eigen::MatrixXd* K,
                      std::uint64_t tag) {
  add(dofs, dofs, r, K, tag);
}

void Accumulator::add(std::span<const int> rows, std::span<const int> cols, const Eigen::VectorXd& r,
                      const Eigen::MatrixXd* K, std::uint64_t tag) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= n_) throw AssemblyError("contribution to inactive dof");
    if (r.size() > 0 && r[i] != 0.0) vec_.push_back({rows[i], 0, tag, r[i]});
  }
  if (!with_matrix_ || K == nullptr) return;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] < 0 || cols[j] >= n_) throw AssemblyError("contribution from inactive dof");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double v = (*K)(i, j);
      if (v != 0.0) mat_.push_back({rows[i], cols[j], tag, v});
    }
  }
}

void Accumulator::add_residual(int row, double value, std::uint64_t tag) {
  if (row < 0 || row >= n_) throw AssemblyError("contribution to inactive dof");
  vec_.push_back({row, 0, tag, value});
}

void Accumulator::add_matrix(int row, int col, double value, std::uint64_t tag) {
  if (row < 0 || row >= n_ || col < 0 || col >= n_) throw AssemblyError("contribution to inactive dof");
  if (with_matrix_) mat_.push_back({row, col, tag, value});
}

void Accumulator::set_dirichlet(int row, double residual) {
  if (row < 0 || row >= n_) throw AssemblyError("Dirichlet condition on inactive dof");
  dirichlet_.emplace_back(row, residual);
}

namespace {
template <class E>
void sort_entries(std::vector<E>& v) {
  std::stable_sort(v.begin(), v.end(), [](const E& a, const E& b) {
    if (a.row != b.row) return a.row < b.row;
    if (a.col != b.col) return a.col < b.col;
    return a.tag < b.tag;
  });
}
}  // namespace

Vector Accumulator::residual() const {
  auto entries = vec_;
  sort_entries(entries);
  Vector r = Vector::Zero(n_);
  for (const auto& e : entries) r[e.row] += e.value;
  for (const auto& [row, value] : dirichlet_) r[row] = value;
  return r;
}

SparseMatrix Accumulator::matrix() const {
  std::vector<char> is_dirichlet(n_, 0);
  for (const auto& d : dirichlet_) is_dirichlet[d.first] = 1;
  auto entries = mat_;
  sort_entries(entries);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(entries.size() / 4 + dirichlet_.size());
  for (std::size_t i = 0; i < entries.size();) {
    const int row = entries[i].row, col = entries[i].col;
    double sum = 0.0;
    for (; i < entries.size() && entries[i].row == row && entries[i].col == col; ++i) sum += entries[i].value;
    if (!is_dirichlet[row]) trips.emplace_back(row, col, sum);
  }
  for (int r = 0; r < n_; ++r)
    if (is_dirichlet[r]) trips.emplace_back(r, r, 1.0);
  SparseMatrix A(n_, n_);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  return A;
}

}  // namespace hyfsi
