#include "mrnav/geometry.hpp"

namespace mrnav {

bool boxes_overlap(const AxisAlignedBox& a, const AxisAlignedBox& b) {
  for (int i = 0; i < 3; ++i) {
    if (a.max[i] <= b.min[i] || b.max[i] <= a.min[i]) return false;
  }
  return true;
}

double box_distance(const AxisAlignedBox& a, const AxisAlignedBox& b,
                    Vec3* out_a, Vec3* out_b) {
  Vec3 pa, pb;
  for (int i = 0; i < 3; ++i) {
    if (a.max[i] < b.min[i]) {
      pa[i] = a.max[i];
      pb[i] = b.min[i];
    } else if (b.max[i] < a.min[i]) {
      pa[i] = a.min[i];
      pb[i] = b.max[i];
    } else {
      // intervals overlap along this axis; meet in the middle of the overlap
      const double lo = std::max(a.min[i], b.min[i]);
      const double hi = std::min(a.max[i], b.max[i]);
      pa[i] = pb[i] = 0.5 * (lo + hi);
    }
  }
  if (out_a) *out_a = pa;
  if (out_b) *out_b = pb;
  return (pb - pa).norm();
}

Hyperplane separating_hyperplane(const AxisAlignedBox& a,
                                 const AxisAlignedBox& b, double stamp) {
  Vec3 pa, pb;
  const double dist = box_distance(a, b, &pa, &pb);
  if (dist <= 0.0) {
    throw std::domain_error("separating_hyperplane: boxes are not disjoint");
  }
  Hyperplane h;
  h.normal = (pb - pa) / dist;
  h.offset = h.normal.dot(0.5 * (pa + pb));
  h.stamp = stamp;
  return h;
}

}  // namespace mrnav
