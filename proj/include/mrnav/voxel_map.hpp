#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "mrnav/geometry.hpp"

namespace mrnav {

struct VoxelIndex {
  int32_t x{0}, y{0}, z{0};
  bool operator==(const VoxelIndex&) const = default;
};

struct VoxelIndexHash {
  size_t operator()(const VoxelIndex& v) const {
    uint64_t h = 1469598103934665603ull;
    for (int64_t c : {int64_t(v.x), int64_t(v.y), int64_t(v.z)}) {
      h ^= static_cast<uint64_t>(c);
      h *= 1099511628211ull;
    }
    return static_cast<size_t>(h);
  }
};

// Sparse axis-aligned occupancy grid. Cell (i,j,k) covers
// [i*res,(i+1)*res] x ... in world coordinates. Single writer, multi reader.
class VoxelMap {
 public:
  VoxelMap() = default;
  VoxelMap(double resolution, const AxisAlignedBox& bounds)
      : resolution_(resolution), bounds_(bounds) {}

  double resolution() const { return resolution_; }
  const AxisAlignedBox& bounds() const { return bounds_; }
  size_t occupied_count() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }

  VoxelIndex index_of(const Vec3& p) const;
  AxisAlignedBox cell_box(const VoxelIndex& i) const;
  Vec3 cell_center(const VoxelIndex& i) const;

  bool occupied(const VoxelIndex& i) const { return cells_.count(i) > 0; }

  // Marks every cell whose volume intersects `box` (open overlap) and lies
  // inside bounds. Returns false (no-op) when the box is fully outside bounds.
  bool insert(const AxisAlignedBox& box);

  // Occupied cells intersecting `region`, as boxes, sorted by index.
  std::vector<AxisAlignedBox> query(const AxisAlignedBox& region) const;
  std::vector<VoxelIndex> query_indices(const AxisAlignedBox& region) const;

  // True iff any occupied cell open-overlaps `box`.
  bool any_occupied(const AxisAlignedBox& box) const;

  const std::unordered_set<VoxelIndex, VoxelIndexHash>& cells() const {
    return cells_;
  }

 private:
  double resolution_{1.0};
  AxisAlignedBox bounds_;
  std::unordered_set<VoxelIndex, VoxelIndexHash> cells_;
};

}  // namespace mrnav
