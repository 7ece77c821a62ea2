#pragma once

#include <iosfwd>
#include <vector>

#include "mrnav/geometry.hpp"

namespace mrnav {

// One Bezier curve of degree control_points.size()-1 over [0, duration].
struct BezierPiece {
  std::vector<Vec3> control_points;
  double duration{1.0};

  int degree() const { return static_cast<int>(control_points.size()) - 1; }

  Vec3 position(double t) const;      // t in [0, duration]
  Vec3 velocity(double t) const;
  Vec3 acceleration(double t) const;

  // Control points of the derivative curve (degree-1, scaled by 1/duration).
  BezierPiece derivative() const;
};

struct TrajectorySample {
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
  Vec3 acceleration{Vec3::Zero()};
};

class PiecewiseTrajectory {
 public:
  PiecewiseTrajectory() = default;
  PiecewiseTrajectory(std::vector<BezierPiece> pieces, double start_time);

  double start_time() const { return start_time_; }
  double total_duration() const { return total_duration_; }
  double end_time() const { return start_time_ + total_duration_; }
  bool empty() const { return pieces_.empty(); }
  const std::vector<BezierPiece>& pieces() const { return pieces_; }

  // Throws std::domain_error outside [start_time, end_time].
  // A boundary time between two pieces evaluates on the earlier piece.
  TrajectorySample evaluate(double t) const;

  // Clamped evaluation: before the start holds the first control point,
  // after the end holds the last one with zero velocity/acceleration.
  TrajectorySample evaluate_clamped(double t) const;

  Vec3 start_position() const;
  Vec3 end_position() const;

  // Log format: one line per piece, "duration cp0x cp0y cp0z cp1x ...".
  void serialize(std::ostream& os) const;
  static PiecewiseTrajectory deserialize(std::istream& is, double start_time);

 private:
  std::vector<BezierPiece> pieces_;
  double start_time_{0.0};
  double total_duration_{0.0};
};

// Single piece holding `pos` for `duration` seconds.
PiecewiseTrajectory hold_trajectory(const Vec3& pos, double start_time,
                                    double duration = 1.0);

}  // namespace mrnav
