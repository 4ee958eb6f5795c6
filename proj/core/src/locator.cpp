#include "hyfsi/locator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hyfsi/fem.hpp"

namespace hyfsi {

ElementLocator::ElementLocator(const QuadMesh& mesh, std::span<const Vec2> coords)
    : mesh_(&mesh), coords_(coords.begin(), coords.end()) {
  const int ne = mesh.num_elements();
  lo_.resize(ne);
  hi_.resize(ne);
  Vec2 glo = Vec2::Constant(std::numeric_limits<double>::max());
  Vec2 ghi = -glo;
  for (int e = 0; e < ne; ++e) {
    const auto q = mesh.corners(e, coords_);
    Vec2 lo = q[0], hi = q[0];
    for (const auto& p : q) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const double pad = 1e-10 * (hi - lo).norm();
    lo_[e] = lo.array() - pad;
    hi_[e] = hi.array() + pad;
    glo = glo.cwiseMin(lo_[e]);
    ghi = ghi.cwiseMax(hi_[e]);
  }
  if (ne == 0) return;
  const double side = std::sqrt(std::max(1, ne));
  const Vec2 ext = (ghi - glo).cwiseMax(Vec2::Constant(1e-300));
  const double aspect = ext.x() / ext.y();
  nx_ = std::clamp(static_cast<int>(std::ceil(side * std::sqrt(aspect))), 1, 4096);
  ny_ = std::clamp(static_cast<int>(std::ceil(side / std::sqrt(aspect))), 1, 4096);
  origin_ = glo;
  cell_ = Vec2(ext.x() / nx_, ext.y() / ny_);
  buckets_.assign(nx_ * ny_, {});
  for (int e = 0; e < ne; ++e) {
    const auto [i0, j0] = bucket_of(lo_[e]);
    const auto [i1, j1] = bucket_of(hi_[e]);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[j * nx_ + i].push_back(e);
  }
}

std::pair<int, int> ElementLocator::bucket_of(const Vec2& p) const {
  const int i = static_cast<int>(std::floor((p.x() - origin_.x()) / cell_.x()));
  const int j = static_cast<int>(std::floor((p.y() - origin_.y()) / cell_.y()));
  return {std::clamp(i, 0, nx_ - 1), std::clamp(j, 0, ny_ - 1)};
}

std::vector<int> ElementLocator::candidates(const Vec2& lo, const Vec2& hi) const {
  std::vector<int> out;
  if (buckets_.empty()) return out;
  const auto [i0, j0] = bucket_of(lo);
  const auto [i1, j1] = bucket_of(hi);
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      for (int e : buckets_[j * nx_ + i]) {
        if ((lo.array() <= hi_[e].array()).all() && (hi.array() >= lo_[e].array()).all()) {
          out.push_back(e);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int ElementLocator::locate(const Vec2& x, double tol) const {
  for (int e : candidates(x, x)) {
    if (point_in_element(mesh_->corners(e, coords_), x, tol)) return e;
  }
  return -1;
}

}  // namespace hyfsi
