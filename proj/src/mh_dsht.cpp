#include "mrnav/mh.hpp"

namespace mrnav {

void DshtStore::append(int teammate, const AxisAlignedBox& ego_box,
                       const AxisAlignedBox& teammate_box, double now) {
  auto& pair = pairs_[teammate];
  if (boxes_overlap(ego_box, teammate_box) ||
      box_distance(ego_box, teammate_box) <= 0.0) {
    pair.overlap_flag = true;
    return;
  }
  if (!pair.planes.empty() && now <= pair.planes.back().stamp) return;
  pair.planes.push_back(separating_hyperplane(ego_box, teammate_box, now));
}

void DshtStore::prune(int teammate, double plan_stamp) {
  auto it = pairs_.find(teammate);
  if (it == pairs_.end()) {
    // remember the ack even before any plane exists for the pair
    pairs_[teammate].last_ack = plan_stamp;
    return;
  }
  auto& pair = it->second;
  if (plan_stamp <= pair.last_ack) return;  // stale or duplicate
  pair.last_ack = plan_stamp;
  std::erase_if(pair.planes,
                [&](const Hyperplane& h) { return h.stamp <= plan_stamp; });
}

std::vector<Hyperplane> DshtStore::all_planes() const {
  std::vector<Hyperplane> out;
  for (const auto& [id, pair] : pairs_) {
    out.insert(out.end(), pair.planes.begin(), pair.planes.end());
  }
  return out;
}

}  // namespace mrnav
