#pragma once

#include <span>
#include <vector>

#include "hyfsi/mesh.hpp"

namespace hyfsi {

// Uniform bucket grid over element bounding boxes.
class ElementLocator {
 public:
  ElementLocator(const QuadMesh& mesh, std::span<const Vec2> coords);

  // Sorted ids of elements whose (slightly inflated) bounding box overlaps
  // the box [lo, hi].
  std::vector<int> candidates(const Vec2& lo, const Vec2& hi) const;

  // Lowest-id element containing x, or -1.
  int locate(const Vec2& x, double tol = 1e-12) const;

 private:
  const QuadMesh* mesh_;
  std::vector<Vec2> coords_;
  std::vector<Vec2> lo_, hi_;
  Vec2 origin_;
  Vec2 cell_;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;

  std::pair<int, int> bucket_of(const Vec2& p) const;
};

}  // namespace hyfsi
