#include "mrnav/mh.hpp"

#include <cmath>

namespace mrnav {

void update_behavior_belief(BehaviorBelief& belief,
                            std::span<const BehaviorModel> candidates,
                            const Vec3& obs_position,
                            const Vec3& measured_velocity, double dt,
                            double sigma_v) {
  (void)dt;
  const int k = static_cast<int>(belief.probabilities.size());
  Eigen::VectorXd post(k);
  double max_log = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd log_like(k);
  for (int i = 0; i < k; ++i) {
    const Vec3 predicted = candidates[i].predicted_velocity(obs_position);
    const double r2 = (measured_velocity - predicted).squaredNorm();
    log_like[i] = -0.5 * r2 / (sigma_v * sigma_v) +
                  std::log(std::max(belief.probabilities[i], 1e-300));
    max_log = std::max(max_log, log_like[i]);
  }
  for (int i = 0; i < k; ++i) post[i] = std::exp(log_like[i] - max_log);
  post /= post.sum();
  // floor and renormalize so no model is ever ruled out entirely
  post = post.cwiseMax(1e-6);
  post /= post.sum();
  belief.probabilities = post;
}

}  // namespace mrnav
