#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "hyfsi/types.hpp"

namespace hyfsi {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

// The three unknown blocks of the monolithic system.
enum class Field : int { Background = 0, Patch = 1, Solid = 2 };
inline constexpr int kNumFields = 3;

// Node/component to global dof numbering. Blocks are laid out in Field
// order; within a block dofs are node-major. Inactive nodes get no dofs.
class DofMap {
 public:
  DofMap() = default;

  void add_block(Field f, int n_nodes, int n_components, std::span<const char> active = {});

  bool has(Field f) const { return blocks_[idx(f)].n_nodes > 0; }
  int dof(Field f, int node, int component) const {
    const auto& b = blocks_[idx(f)];
    const int base = b.node_base.empty() ? -1 : b.node_base[node];
    return base < 0 ? -1 : base + component;
  }
  bool active(Field f, int node) const { return dof(f, node, 0) >= 0; }
  int size() const { return size_; }
  int offset(Field f) const { return blocks_[idx(f)].offset; }
  int block_size(Field f) const { return blocks_[idx(f)].size; }
  int components(Field f) const { return blocks_[idx(f)].n_comp; }
  int nodes(Field f) const { return blocks_[idx(f)].n_nodes; }
  // Field of a global dof.
  Field field_of(int dof) const;

  // Packs full-length nodal arrays (n_nodes * n_comp, interleaved) into a
  // global vector segment and back. Inactive entries are left untouched on
  // unpack.
  void pack(Field f, std::span<const double> nodal, Vector& global) const;
  void unpack(Field f, const Vector& global, std::span<double> nodal) const;

  bool operator==(const DofMap& o) const;

 private:
  struct Block {
    int n_nodes = 0;
    int n_comp = 0;
    int offset = 0;
    int size = 0;
    std::vector<int> node_base;
  };
  static int idx(Field f) { return static_cast<int>(f); }
  std::array<Block, kNumFields> blocks_{};
  int size_ = 0;
};

// Contribution sources. Every entry added carries a tag built from the
// source and the entity (element, facet, segment) index; the final sums
// are formed in (row, col, tag) order so the result does not depend on the
// order in which entities were visited.
enum class Source : std::uint64_t {
  FluidBackground = 1,
  FluidPatch = 2,
  GhostPenalty = 3,
  NitscheFluidFluid = 4,
  NitscheFluidSolid = 5,
  Solid = 6,
  Extra = 7,
};
inline std::uint64_t make_tag(Source s, std::uint64_t entity) {
  return (static_cast<std::uint64_t>(s) << 48) | entity;
}

class Accumulator {
 public:
  Accumulator(int n_dofs, bool with_matrix) : n_(n_dofs), with_matrix_(with_matrix) {}

  int size() const { return n_; }
  bool with_matrix() const { return with_matrix_; }

  // Adds a local residual/stiffness. Entries for dof -1 are rejected: every
  // contribution must reference an active dof.
  void add(std::span<const int> dofs, const Eigen::VectorXd& r, const Eigen::MatrixXd* K,
           std::uint64_t tag);
  void add(std::span<const int> rows, std::span<const int> cols, const Eigen::VectorXd& r,
           const Eigen::MatrixXd* K, std::uint64_t tag);
  void add_residual(int row, double value, std::uint64_t tag);
  void add_matrix(int row, int col, double value, std::uint64_t tag);

  // Rows replaced by x - g (identity in the matrix).
  void set_dirichlet(int row, double residual);

  Vector residual() const;
  SparseMatrix matrix() const;

 private:
  struct Entry {
    int row;
    int col;
    std::uint64_t tag;
    double value;
  };
  int n_;
  bool with_matrix_;
  std::vector<Entry> vec_;
  std::vector<Entry> mat_;
  std::vector<std::pair<int, double>> dirichlet_;
};

}  // namespace hyfsi
