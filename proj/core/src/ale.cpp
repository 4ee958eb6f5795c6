#include "hyfsi/ale.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "hyfsi/assembly.hpp"

namespace hyfsi {

struct MeshMotion::Factor {
  SparseMatrix K_ff;
  SparseMatrix K_fc;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
};

namespace {

SolidParams pseudo_material(const Lame& m) {
  // Back out (E, nu) so the solid kernel sees the requested Lame pair.
  SolidParams sp;
  sp.nu = m.lambda / (2.0 * (m.lambda + m.mu));
  sp.E = 2.0 * m.mu * (1.0 + sp.nu);
  return sp;
}

// Full stiffness/force at displacement d, split by free index.
void assemble_pseudo(const QuadMesh& mesh, const SolidParams& sp, std::span<const double> d,
                     const std::vector<int>& free_index, int n_free, SparseMatrix& K_ff,
                     SparseMatrix* K_fc, Vector* f_free) {
  std::vector<Eigen::Triplet<double>> tff, tfc;
  std::vector<int> con_index(free_index.size(), -1);
  int n_con = 0;
  for (std::size_t i = 0; i < free_index.size(); ++i)
    if (free_index[i] < 0) con_index[i] = n_con++;
  if (f_free) *f_free = Vector::Zero(n_free);
  Eigen::Matrix<double, 8, 1> f;
  Eigen::Matrix<double, 8, 8> K;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements[e];
    std::array<double, 8> de{};
    std::array<int, 8> g;
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 2; ++c) {
        g[2 * a + c] = 2 * el[a] + c;
        if (!d.empty()) de[2 * a + c] = d[2 * el[a] + c];
      }
    solid_element(mesh.corners(e), de, sp, e, f, &K);
    for (int i = 0; i < 8; ++i) {
      const int fi = free_index[g[i]];
      if (fi < 0) continue;
      if (f_free) (*f_free)[fi] += f[i];
      for (int j = 0; j < 8; ++j) {
        const int fj = free_index[g[j]];
        if (fj >= 0)
          tff.emplace_back(fi, fj, K(i, j));
        else
          tfc.emplace_back(fi, con_index[g[j]], K(i, j));
      }
    }
  }
  K_ff.resize(n_free, n_free);
  K_ff.setFromTriplets(tff.begin(), tff.end());
  if (K_fc) {
    K_fc->resize(n_free, n_con);
    K_fc->setFromTriplets(tfc.begin(), tfc.end());
  }
}

}  // namespace

MeshMotion::MeshMotion(const QuadMesh& patch, std::vector<int> constrained, const Lame& material,
                       bool nonlinear)
    : mesh_(&patch),
      constrained_(std::move(constrained)),
      material_(material),
      nonlinear_(nonlinear),
      factor_(std::make_unique<Factor>()) {
  if (constrained_.empty()) throw ConfigError("mesh motion needs at least one constrained node");
  const int n = 2 * patch.num_nodes();
  free_index_.assign(n, 0);
  for (int v : constrained_) {
    if (v < 0 || v >= patch.num_nodes()) throw ConfigError("constrained node out of range");
    if (free_index_[2 * v] < 0) throw ConfigError("constrained node listed twice");
    free_index_[2 * v] = free_index_[2 * v + 1] = -1;
  }
  int n_free = 0;
  for (int& fi : free_index_)
    if (fi == 0) fi = n_free++;
  assemble_pseudo(patch, pseudo_material(material_), {}, free_index_, n_free, factor_->K_ff,
                  &factor_->K_fc, nullptr);
  factor_->ldlt.compute(factor_->K_ff);
  if (factor_->ldlt.info() != Eigen::Success) throw SolverError("mesh motion operator is singular", -1);
}

MeshMotion::~MeshMotion() = default;
MeshMotion::MeshMotion(MeshMotion&&) noexcept = default;
MeshMotion& MeshMotion::operator=(MeshMotion&&) noexcept = default;

Vector MeshMotion::solve(std::span<const double> prescribed) const {
  if (prescribed.size() != 2 * constrained_.size()) throw AssemblyError("prescribed size mismatch");
  const int n = static_cast<int>(free_index_.size());
  Vector d = Vector::Zero(n);
  Vector g(prescribed.size());
  // Constrained values in constrained-dof order (ascending dof id).
  std::vector<std::pair<int, double>> cons;
  for (std::size_t i = 0; i < constrained_.size(); ++i) {
    cons.emplace_back(2 * constrained_[i], prescribed[2 * i]);
    cons.emplace_back(2 * constrained_[i] + 1, prescribed[2 * i + 1]);
  }
  std::sort(cons.begin(), cons.end());
  for (std::size_t i = 0; i < cons.size(); ++i) {
    g[i] = cons[i].second;
    d[cons[i].first] = cons[i].second;
  }
  const Vector rhs = -(factor_->K_fc * g);
  const Vector x = factor_->ldlt.solve(rhs);
  for (int i = 0; i < n; ++i)
    if (free_index_[i] >= 0) d[i] = x[free_index_[i]];

  if (nonlinear_) {
    const SolidParams sp = pseudo_material(material_);
    const int n_free = static_cast<int>(factor_->K_ff.rows());
    for (int it = 0; it < 20; ++it) {
      SparseMatrix K;
      Vector f;
      assemble_pseudo(*mesh_, sp, std::span<const double>(d.data(), d.size()), free_index_, n_free, K,
                      nullptr, &f);
      if (f.norm() <= 1e-12 * (1.0 + rhs.norm())) break;
      Eigen::SparseLU<SparseMatrix> lu;
      lu.compute(K);
      if (lu.info() != Eigen::Success) throw SolverError("nonlinear mesh motion tangent is singular", -1);
      const Vector dx = lu.solve(-f);
      for (int i = 0; i < n; ++i)
        if (free_index_[i] >= 0) d[i] += dx[free_index_[i]];
    }
  }
  const auto coords = displaced_coordinates(*mesh_, std::span<const double>(d.data(), d.size()));
  check_mesh_quality(*mesh_, coords);
  return d;
}

double check_mesh_quality(const QuadMesh& mesh, std::span<const Vec2> coords) {
  double worst = std::numeric_limits<double>::infinity();
  int worst_e = -1;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto q = mesh.corners(e, coords);
    for (int k = 0; k < 4; ++k) {
      const Vec2 a = q[(k + 1) % 4] - q[k];
      const Vec2 b = q[(k + 3) % 4] - q[k];
      const double j = a.x() * b.y() - a.y() * b.x();
      if (j < worst) {
        worst = j;
        worst_e = e;
      }
    }
  }
  if (!(worst > 0.0)) throw MeshDistortion(worst_e, worst);
  return worst;
}

std::vector<Vec2> displaced_coordinates(const QuadMesh& mesh, std::span<const double> disp) {
  std::vector<Vec2> x = mesh.nodes;
  if (disp.empty()) return x;
  for (int i = 0; i < mesh.num_nodes(); ++i) x[i] += Vec2(disp[2 * i], disp[2 * i + 1]);
  return x;
}

Vector grid_velocity(std::span<const double> d, std::span<const double> d_prev, double dt, double theta,
                     bool one_step_theta, std::span<const double> u_prev) {
  Vector u(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double dd = d[i] - (d_prev.empty() ? 0.0 : d_prev[i]);
    if (one_step_theta) {
      u[i] = dd / (theta * dt) - (u_prev.empty() ? 0.0 : (1.0 - theta) / theta * u_prev[i]);
    } else {
      u[i] = dd / dt;
    }
  }
  return u;
}

}  // namespace hyfsi
