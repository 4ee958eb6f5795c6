#pragma once

#include <memory>
#include <span>
#include <vector>

#include "hyfsi/mesh.hpp"
#include "hyfsi/solid.hpp"

namespace hyfsi {

// Pseudo-structure motion of the fluid patch. Nodes in `constrained` follow
// prescribed displacements, everything else (including the outer boundary)
// is traction free. The linear operator is factored once.
class MeshMotion {
 public:
  MeshMotion(const QuadMesh& patch, std::vector<int> constrained, const Lame& material,
             bool nonlinear = false);
  ~MeshMotion();
  MeshMotion(MeshMotion&&) noexcept;
  MeshMotion& operator=(MeshMotion&&) noexcept;

  // `prescribed` holds (x, y) per constrained node in the constructor order.
  // Returns full-length interleaved nodal displacements. Throws
  // MeshDistortion if the moved patch has a non-positive Jacobian.
  Vector solve(std::span<const double> prescribed) const;

  const std::vector<int>& constrained() const { return constrained_; }
  bool nonlinear() const { return nonlinear_; }

 private:
  struct Factor;
  const QuadMesh* mesh_;
  std::vector<int> constrained_;
  Lame material_;
  bool nonlinear_;
  std::vector<int> free_index_;  // per dof, -1 if constrained
  std::unique_ptr<Factor> factor_;
};

// Smallest corner Jacobian over the elements at current coordinates; throws
// MeshDistortion carrying the worst element when it is not positive.
double check_mesh_quality(const QuadMesh& mesh, std::span<const Vec2> coords);

std::vector<Vec2> displaced_coordinates(const QuadMesh& mesh, std::span<const double> disp);

// Backward difference (D - D_prev)/dt. With `one_step_theta` the
// theta-consistent form (D - D_prev)/(theta dt) - (1 - theta)/theta u_prev
// is used instead.
Vector grid_velocity(std::span<const double> d, std::span<const double> d_prev, double dt,
                     double theta = 1.0, bool one_step_theta = false,
                     std::span<const double> u_prev = {});

}  // namespace hyfsi
