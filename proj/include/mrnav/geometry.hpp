#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>

namespace mrnav {

using Vec3 = Eigen::Vector3d;

struct AxisAlignedBox {
  Vec3 min{Vec3::Zero()};
  Vec3 max{Vec3::Zero()};

  AxisAlignedBox() = default;
  AxisAlignedBox(const Vec3& mn, const Vec3& mx) : min(mn), max(mx) {}

  static AxisAlignedBox from_center_half_extents(const Vec3& c, const Vec3& h) {
    return {c - h, c + h};
  }

  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 half_extents() const { return 0.5 * (max - min); }
  double diagonal() const { return (max - min).norm(); }

  AxisAlignedBox translated(const Vec3& d) const { return {min + d, max + d}; }
  AxisAlignedBox inflated(double r) const {
    return {min - Vec3::Constant(r), max + Vec3::Constant(r)};
  }

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }

  // Closest point of the box to p (p itself if inside).
  Vec3 closest_point(const Vec3& p) const {
    return p.cwiseMax(min).cwiseMin(max);
  }

  bool valid() const { return (min.array() <= max.array()).all(); }
};

struct Hyperplane {
  Vec3 normal{Vec3::UnitX()};   // unit length
  double offset{0.0};           // plane = {p : normal.dot(p) == offset}
  double stamp{0.0};            // sim time of creation, seconds
};

// True iff the intersection has positive volume along every axis.
// Face- or edge-touching boxes do not overlap.
bool boxes_overlap(const AxisAlignedBox& a, const AxisAlignedBox& b);

// Euclidean distance between two boxes (0 if they touch or overlap).
// If out_a/out_b are given, they receive the closest point pair.
double box_distance(const AxisAlignedBox& a, const AxisAlignedBox& b,
                    Vec3* out_a = nullptr, Vec3* out_b = nullptr);

// Maximum-margin plane separating two disjoint boxes. `a` lies strictly on
// the normal.dot(p) < offset side. Throws std::domain_error when the boxes
// touch or overlap (no positive gap).
Hyperplane separating_hyperplane(const AxisAlignedBox& a,
                                 const AxisAlignedBox& b, double stamp = 0.0);

inline double signed_plane_distance(const Hyperplane& h, const Vec3& p) {
  return h.normal.dot(p) - h.offset;
}

}  // namespace mrnav
