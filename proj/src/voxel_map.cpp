#include "mrnav/voxel_map.hpp"

#include <algorithm>
#include <cmath>

namespace mrnav {

namespace {

// Index range of cells whose volume open-overlaps [lo, hi] along one axis.
void axis_cell_range(double lo, double hi, double res, int32_t& i0,
                     int32_t& i1) {
  // cell i overlaps iff i*res < hi and (i+1)*res > lo
  i0 = static_cast<int32_t>(std::floor(lo / res));
  if ((i0 + 1) * res <= lo) ++i0;  // degenerate: lo exactly on a boundary
  i1 = static_cast<int32_t>(std::ceil(hi / res)) - 1;
  if (i1 * res >= hi) --i1;
}

}  // namespace

VoxelIndex VoxelMap::index_of(const Vec3& p) const {
  return {static_cast<int32_t>(std::floor(p.x() / resolution_)),
          static_cast<int32_t>(std::floor(p.y() / resolution_)),
          static_cast<int32_t>(std::floor(p.z() / resolution_))};
}

AxisAlignedBox VoxelMap::cell_box(const VoxelIndex& i) const {
  const Vec3 mn(i.x * resolution_, i.y * resolution_, i.z * resolution_);
  return {mn, mn + Vec3::Constant(resolution_)};
}

Vec3 VoxelMap::cell_center(const VoxelIndex& i) const {
  return cell_box(i).center();
}

bool VoxelMap::insert(const AxisAlignedBox& box) {
  if (!boxes_overlap(box, bounds_)) return false;
  const AxisAlignedBox clipped{box.min.cwiseMax(bounds_.min),
                               box.max.cwiseMin(bounds_.max)};
  int32_t lo[3], hi[3];
  for (int a = 0; a < 3; ++a) {
    axis_cell_range(clipped.min[a], clipped.max[a], resolution_, lo[a], hi[a]);
  }
  for (int32_t x = lo[0]; x <= hi[0]; ++x)
    for (int32_t y = lo[1]; y <= hi[1]; ++y)
      for (int32_t z = lo[2]; z <= hi[2]; ++z) {
        const VoxelIndex idx{x, y, z};
        if (boxes_overlap(cell_box(idx), bounds_)) cells_.insert(idx);
      }
  return true;
}

std::vector<VoxelIndex> VoxelMap::query_indices(
    const AxisAlignedBox& region) const {
  std::vector<VoxelIndex> out;
  int32_t lo[3], hi[3];
  for (int a = 0; a < 3; ++a) {
    axis_cell_range(region.min[a], region.max[a], resolution_, lo[a], hi[a]);
  }
  const int64_t span = int64_t(hi[0] - lo[0] + 1) * int64_t(hi[1] - lo[1] + 1) *
                       int64_t(hi[2] - lo[2] + 1);
  if (span > 0 && static_cast<size_t>(span) <= 8 * cells_.size() + 64) {
    for (int32_t x = lo[0]; x <= hi[0]; ++x)
      for (int32_t y = lo[1]; y <= hi[1]; ++y)
        for (int32_t z = lo[2]; z <= hi[2]; ++z) {
          const VoxelIndex idx{x, y, z};
          if (cells_.count(idx)) out.push_back(idx);
        }
  } else {
    for (const auto& c : cells_) {
      if (boxes_overlap(cell_box(c), region)) out.push_back(c);
    }
  }
  std::sort(out.begin(), out.end(), [](const VoxelIndex& a,
                                       const VoxelIndex& b) {
    return std::tie(a.x, a.y, a.z) < std::tie(b.x, b.y, b.z);
  });
  return out;
}

std::vector<AxisAlignedBox> VoxelMap::query(
    const AxisAlignedBox& region) const {
  std::vector<AxisAlignedBox> out;
  for (const auto& idx : query_indices(region)) out.push_back(cell_box(idx));
  return out;
}

bool VoxelMap::any_occupied(const AxisAlignedBox& box) const {
  int32_t lo[3], hi[3];
  for (int a = 0; a < 3; ++a) {
    axis_cell_range(box.min[a], box.max[a], resolution_, lo[a], hi[a]);
  }
  for (int32_t x = lo[0]; x <= hi[0]; ++x)
    for (int32_t y = lo[1]; y <= hi[1]; ++y)
      for (int32_t z = lo[2]; z <= hi[2]; ++z) {
        if (cells_.count({x, y, z})) return true;
      }
  return false;
}

}  // namespace mrnav
