#include "mrnav/bezier.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace mrnav {

namespace {

// De Casteljau evaluation at parameter u in [0, 1].
Vec3 de_casteljau(std::vector<Vec3> pts, double u) {
  const int n = static_cast<int>(pts.size());
  for (int level = n - 1; level > 0; --level) {
    for (int i = 0; i < level; ++i) {
      pts[i] = (1.0 - u) * pts[i] + u * pts[i + 1];
    }
  }
  return pts[0];
}

}  // namespace

Vec3 BezierPiece::position(double t) const {
  return de_casteljau(control_points, t / duration);
}

BezierPiece BezierPiece::derivative() const {
  BezierPiece d;
  d.duration = duration;
  const int deg = degree();
  if (deg < 1) {
    d.control_points.assign(1, Vec3::Zero());
    return d;
  }
  d.control_points.reserve(deg);
  for (int i = 0; i < deg; ++i) {
    d.control_points.push_back(
        (control_points[i + 1] - control_points[i]) * (deg / duration));
  }
  return d;
}

Vec3 BezierPiece::velocity(double t) const {
  if (degree() < 1) return Vec3::Zero();
  return derivative().position(t);
}

Vec3 BezierPiece::acceleration(double t) const {
  if (degree() < 2) return Vec3::Zero();
  return derivative().derivative().position(t);
}

PiecewiseTrajectory::PiecewiseTrajectory(std::vector<BezierPiece> pieces,
                                         double start_time)
    : pieces_(std::move(pieces)), start_time_(start_time) {
  total_duration_ = 0.0;
  for (const auto& p : pieces_) total_duration_ += p.duration;
}

TrajectorySample PiecewiseTrajectory::evaluate(double t) const {
  if (pieces_.empty()) throw std::domain_error("evaluate: empty trajectory");
  const double eps = 1e-12;
  if (t < start_time_ - eps || t > end_time() + eps) {
    throw std::domain_error("evaluate: time outside trajectory domain");
  }
  double local = std::clamp(t - start_time_, 0.0, total_duration_);
  for (size_t i = 0; i < pieces_.size(); ++i) {
    const BezierPiece& p = pieces_[i];
    // boundary times evaluate on the earlier piece
    if (local <= p.duration || i + 1 == pieces_.size()) {
      local = std::min(local, p.duration);
      return {p.position(local), p.velocity(local), p.acceleration(local)};
    }
    local -= p.duration;
  }
  const BezierPiece& last = pieces_.back();
  return {last.position(last.duration), last.velocity(last.duration),
          last.acceleration(last.duration)};
}

TrajectorySample PiecewiseTrajectory::evaluate_clamped(double t) const {
  if (pieces_.empty()) throw std::domain_error("evaluate: empty trajectory");
  if (t <= start_time_) {
    return {pieces_.front().control_points.front(), Vec3::Zero(), Vec3::Zero()};
  }
  if (t >= end_time()) {
    return {pieces_.back().control_points.back(), Vec3::Zero(), Vec3::Zero()};
  }
  return evaluate(t);
}

Vec3 PiecewiseTrajectory::start_position() const {
  return pieces_.front().control_points.front();
}

Vec3 PiecewiseTrajectory::end_position() const {
  return pieces_.back().control_points.back();
}

void PiecewiseTrajectory::serialize(std::ostream& os) const {
  for (const auto& p : pieces_) {
    os << p.duration;
    for (const auto& cp : p.control_points) {
      os << ' ' << cp.x() << ' ' << cp.y() << ' ' << cp.z();
    }
    os << '\n';
  }
}

PiecewiseTrajectory PiecewiseTrajectory::deserialize(std::istream& is,
                                                     double start_time) {
  std::vector<BezierPiece> pieces;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    BezierPiece p;
    ls >> p.duration;
    double x, y, z;
    while (ls >> x >> y >> z) p.control_points.emplace_back(x, y, z);
    if (!p.control_points.empty()) pieces.push_back(std::move(p));
  }
  return PiecewiseTrajectory(std::move(pieces), start_time);
}

PiecewiseTrajectory hold_trajectory(const Vec3& pos, double start_time,
                                    double duration) {
  BezierPiece p;
  p.duration = duration;
  p.control_points = {pos, pos};
  return PiecewiseTrajectory({p}, start_time);
}

}  // namespace mrnav
