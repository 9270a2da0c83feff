#include "bimodal/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bimodal {

namespace {

// sin(x + k pi/2) without accumulating the phase.
double sin_shift(double x, int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return std::sin(x);
    case 1: return std::cos(x);
    case 2: return -std::sin(x);
    default: return -std::cos(x);
  }
}

double cos_shift(double x, int k) { return sin_shift(x, k + 1); }

double heading_of(const Vec3& v, int direction) {
  const double s = direction >= 0 ? 1.0 : -1.0;
  return std::atan2(s * v.y(), s * v.x());
}

std::array<double, 6> quintic(double p0, double v0, double a0, double p1, double v1, double a1, double T) {
  const double T2 = T * T, T3 = T2 * T;
  const double dp = p1 - p0;
  return {p0,
          v0,
          0.5 * a0,
          (20.0 * dp - (8.0 * v1 + 12.0 * v0) * T - (3.0 * a0 - a1) * T2) / (2.0 * T3),
          (-30.0 * dp + (14.0 * v1 + 16.0 * v0) * T + (3.0 * a0 - 2.0 * a1) * T2) / (2.0 * T3 * T),
          (12.0 * dp - 6.0 * (v1 + v0) * T + (a1 - a0) * T2) / (2.0 * T3 * T2)};
}

// k-th derivative of sum c_j t^j.
double poly_derivative(const std::array<double, 6>& c, double t, int k) {
  double out = 0.0;
  for (int j = 5; j >= k; --j) {
    double coef = c[j];
    for (int i = 0; i < k; ++i) coef *= (j - i);
    out = out * t + coef;
  }
  return out;
}

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) throw ConfigError(std::string("trajectory: ") + what + " must be positive");
}

}  // namespace

std::string to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::Lemniscate: return "lemniscate";
    case SegmentKind::Circle: return "circle";
    case SegmentKind::Line: return "line";
    case SegmentKind::Rest: return "rest";
    case SegmentKind::Blend: return "blend";
  }
  return "unknown";
}

Segment Segment::lemniscate(double A, double B, double omega, const Vec3& center, double duration,
                            const Mode& mode, double phase) {
  require_positive(A, "lemniscate A");
  require_positive(B, "lemniscate B");
  require_positive(omega, "lemniscate angular rate");
  require_positive(duration, "segment duration");
  Segment s;
  s.kind_ = SegmentKind::Lemniscate;
  s.a_ = A;
  s.b_ = B;
  s.omega_ = omega;
  s.phase_ = phase;
  s.center_ = center;
  s.duration_ = duration;
  s.mode_ = mode;
  return s;
}

Segment Segment::circle(double radius, double omega, const Vec3& center, double duration, const Mode& mode,
                        double phase) {
  require_positive(radius, "circle radius");
  require_positive(omega, "circle angular rate");
  require_positive(duration, "segment duration");
  Segment s;
  s.kind_ = SegmentKind::Circle;
  s.a_ = s.b_ = radius;
  s.omega_ = omega;
  s.phase_ = phase;
  s.center_ = center;
  s.duration_ = duration;
  s.mode_ = mode;
  return s;
}

Segment Segment::line(const Vec3& start, const Vec3& velocity, double duration, const Mode& mode) {
  require_positive(duration, "segment duration");
  Segment s;
  s.kind_ = SegmentKind::Line;
  s.center_ = start;
  s.velocity_ = velocity;
  s.duration_ = duration;
  s.mode_ = mode;
  return s;
}

Segment Segment::rest(const Vec3& position, double duration, const Mode& mode) {
  require_positive(duration, "segment duration");
  Segment s;
  s.kind_ = SegmentKind::Rest;
  s.center_ = position;
  s.duration_ = duration;
  s.mode_ = mode;
  return s;
}

Segment Segment::blend(const std::array<Vec3, 3>& from, const std::array<Vec3, 3>& to, double duration,
                       const Mode& mode) {
  require_positive(duration, "segment duration");
  Segment s;
  s.kind_ = SegmentKind::Blend;
  s.duration_ = duration;
  s.mode_ = mode;
  for (int ax = 0; ax < 3; ++ax)
    s.poly_[ax] = quintic(from[0][ax], from[1][ax], from[2][ax], to[0][ax], to[1][ax], to[2][ax], duration);
  return s;
}

Vec3 Segment::derivative(double tau, int k) const {
  Vec3 out = Vec3::Zero();
  switch (kind_) {
    case SegmentKind::Lemniscate: {
      const double th = omega_ * tau + phase_;
      out.x() = a_ * std::pow(omega_, k) * sin_shift(th, k);
      out.y() = b_ * std::pow(2.0 * omega_, k) * sin_shift(2.0 * th, k);
      break;
    }
    case SegmentKind::Circle: {
      const double th = omega_ * tau + phase_;
      out.x() = a_ * std::pow(omega_, k) * cos_shift(th, k);
      out.y() = a_ * std::pow(omega_, k) * sin_shift(th, k);
      break;
    }
    case SegmentKind::Line:
      if (k == 0) return center_ + velocity_ * tau;
      return k == 1 ? velocity_ : Vec3::Zero();
    case SegmentKind::Rest:
      return k == 0 ? center_ : Vec3::Zero();
    case SegmentKind::Blend:
      if (k > 5) return Vec3::Zero();
      for (int ax = 0; ax < 3; ++ax) out[ax] = poly_derivative(poly_[ax], tau, k);
      return out;
  }
  if (k == 0) out += center_;
  return out;
}

std::array<Vec3, 5> Segment::flat(double tau) const {
  return {derivative(tau, 0), derivative(tau, 1), derivative(tau, 2), derivative(tau, 3), derivative(tau, 4)};
}

std::array<Vec3, 3> Segment::start_state() const { return {derivative(0, 0), derivative(0, 1), derivative(0, 2)}; }

std::array<Vec3, 3> Segment::end_state() const {
  return {derivative(duration_, 0), derivative(duration_, 1), derivative(duration_, 2)};
}

Segment Segment::time_scaled(double rate) const {
  if (!(rate > 0.0) || rate > 1.0) throw ConfigError("trajectory: time scaling rate must lie in (0, 1]");
  Segment s = *this;
  s.duration_ = duration_ / rate;
  s.omega_ = omega_ * rate;
  s.velocity_ = velocity_ * rate;
  for (auto& axis : s.poly_) {
    double r = 1.0;
    for (double& c : axis) {
      c *= r;
      r *= rate;
    }
  }
  return s;
}

Segment Segment::shifted(const Vec3& offset) const {
  Segment s = *this;
  s.center_ += offset;
  for (int ax = 0; ax < 3; ++ax) s.poly_[ax][0] += offset[ax];
  return s;
}

Peaks lemniscate_peaks(double A, double B, double omega) {
  const double w = B > 0.0 ? std::min(1.0, (A * A + 64.0 * B * B) / (128.0 * B * B)) : 1.0;
  const double g = A * A * w + 64.0 * B * B * w * (1.0 - w);
  return {omega * std::sqrt(A * A + 4.0 * B * B), omega * omega * std::sqrt(g)};
}

Peaks Segment::peaks() const {
  switch (kind_) {
    case SegmentKind::Lemniscate: return lemniscate_peaks(a_, b_, omega_);
    case SegmentKind::Circle: return {a_ * omega_, a_ * omega_ * omega_};
    case SegmentKind::Line: return {velocity_.norm(), 0.0};
    case SegmentKind::Rest: return {0.0, 0.0};
    case SegmentKind::Blend: {
      Peaks p;
      constexpr int n = 4000;
      for (int i = 0; i <= n; ++i) {
        const double tau = duration_ * i / n;
        p.speed = std::max(p.speed, derivative(tau, 1).norm());
        p.accel = std::max(p.accel, derivative(tau, 2).norm());
      }
      return p;
    }
  }
  return {};
}

Segment fit_lemniscate(double v_peak, double a_peak, double aspect, const Vec3& center, int laps, const Mode& mode) {
  require_positive(v_peak, "fit speed");
  require_positive(a_peak, "fit acceleration");
  require_positive(aspect, "lemniscate aspect");
  if (laps < 1) throw ConfigError("trajectory: laps must be at least 1");
  // Both peaks are homogeneous: speed = W A c_v, accel = W^2 A c_a.
  const Peaks unit = lemniscate_peaks(1.0, aspect, 1.0);
  const double omega = a_peak * unit.speed / (v_peak * unit.accel);
  const double A = v_peak / (omega * unit.speed);
  return Segment::lemniscate(A, aspect * A, omega, center, laps * 2.0 * kPi / omega, mode);
}

ScaledSegment scale_to_limits(const Segment& segment, double v_max, double a_max) {
  // +inf leaves that limit inactive
  if (!(v_max > 0.0)) throw ConfigError("trajectory: v_max must be positive");
  if (!(a_max > 0.0)) throw ConfigError("trajectory: a_max must be positive");
  const Peaks p = segment.peaks();
  double rate = 1.0;
  if (p.speed > v_max) rate = std::min(rate, v_max / p.speed);
  if (p.accel > a_max) rate = std::min(rate, std::sqrt(a_max / p.accel));
  ScaledSegment out{rate < 1.0 ? segment.time_scaled(rate) : segment, rate, {}};
  out.peaks = out.segment.peaks();
  return out;
}

BlendResult takeoff_landing_blend(const Segment& from, const Segment& to, double duration, double a_max) {
  require_positive(duration, "blend duration");
  const auto a = from.end_state();
  const auto b = to.start_state();
  BlendResult r{Segment::blend(a, b, duration, Mode::aerial()), duration, false};
  for (int i = 0; i < 100 && r.segment.peaks().accel > a_max; ++i) {
    r.duration *= 1.1;
    r.segment = Segment::blend(a, b, r.duration, Mode::aerial());
    r.extended = true;
  }
  return r;
}

HybridTrajectory::HybridTrajectory(std::vector<Segment> segments, double thrust_z, const VehicleParams& params,
                                   double initial_yaw)
    : segments_(std::move(segments)), thrust_z_(thrust_z) {
  if (segments_.empty()) throw ConfigError("trajectory: no segments");
  if (!(thrust_z > 0.0) || !(thrust_z < params.weight()))
    throw ConfigError("trajectory: ground body-z thrust must lie in (0, m g)");
  double t = 0.0;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    starts_.push_back(t);
    t += s.duration();
    if (s.mode().is_ground()) {
      for (const double tau : {0.0, 0.5 * s.duration(), s.duration()}) {
        if (std::abs(s.derivative(tau, 0).z() - params.contact_height) > 1e-6 ||
            std::abs(s.derivative(tau, 1).z()) > 1e-6) {
          std::ostringstream msg;
          msg << "trajectory: ground segment " << i << " leaves the contact plane z = " << params.contact_height;
          throw ConfigError(msg.str());
        }
      }
    }
    if (i > 0) {
      const auto e = segments_[i - 1].end_state();
      const auto b = s.start_state();
      if ((e[0] - b[0]).norm() > 1e-6 || (e[1] - b[1]).norm() > 1e-6) {
        std::ostringstream msg;
        msg << "trajectory: joint " << i << " is discontinuous (position gap " << (e[0] - b[0]).norm()
            << " m, velocity gap " << (e[1] - b[1]).norm() << " m/s)";
        throw ConfigError(msg.str());
      }
    }
  }
  total_ = t;

  auto moving = [&](const Vec3& v) { return std::hypot(v.x(), v.y()) >= params.speed_deadband; };
  auto exit_heading = [&](const Segment& s, double fallback) {
    if (!s.mode().is_ground() && !s.yaw_policy().follow_velocity) return s.yaw_policy().fixed;
    const Vec3 v = s.derivative(s.duration(), 1);
    return moving(v) ? heading_of(v, s.mode().direction()) : fallback;
  };
  hold_yaw_.resize(segments_.size());
  {
    const Segment& s0 = segments_.front();
    const Vec3 v0 = s0.derivative(0.0, 1);
    hold_yaw_[0] = moving(v0) && (s0.mode().is_ground() || s0.yaw_policy().follow_velocity)
                       ? heading_of(v0, s0.mode().direction())
                       : initial_yaw;
  }
  for (std::size_t i = 1; i < segments_.size(); ++i) hold_yaw_[i] = exit_heading(segments_[i - 1], hold_yaw_[i - 1]);
}

void HybridTrajectory::add_thrust_ramp(const ThrustRamp& ramp) {
  if (!(ramp.t_end > ramp.t_start)) throw ConfigError("trajectory: thrust ramp needs t_end > t_start");
  ramps_.push_back(ramp);
  std::stable_sort(ramps_.begin(), ramps_.end(),
                   [](const ThrustRamp& a, const ThrustRamp& b) { return a.t_start < b.t_start; });
}

void HybridTrajectory::add_switch_ramps(double switch_level, double ramp_duration) {
  require_positive(ramp_duration, "thrust ramp duration");
  require_positive(switch_level, "switch thrust level");
  for (std::size_t i = 1; i < segments_.size(); ++i) {
    const bool before = segments_[i - 1].mode().is_ground();
    const bool after = segments_[i].mode().is_ground();
    const double t = starts_[i];
    if (before && !after) {
      const double t0 = std::max(starts_[i - 1], t - ramp_duration);
      add_thrust_ramp({t0, t, thrust_z_, switch_level});
    } else if (!before && after) {
      const double t1 = std::min(starts_[i] + segments_[i].duration(), t + ramp_duration);
      add_thrust_ramp({t, t1, switch_level, thrust_z_});
    }
  }
}

std::size_t HybridTrajectory::segment_index(double t) const {
  const auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
  if (it == starts_.begin()) return 0;
  return static_cast<std::size_t>(std::distance(starts_.begin(), it) - 1);
}

Mode HybridTrajectory::mode_at(double t) const { return segments_[segment_index(t)].mode(); }

const YawPolicy& HybridTrajectory::yaw_policy(double t) const { return segments_[segment_index(t)].yaw_policy(); }

std::array<Vec3, 5> HybridTrajectory::flat(double t) const {
  if (t < 0.0) return {segments_.front().derivative(0.0, 0), Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  if (t > total_) {
    const Segment& s = segments_.back();
    return {s.derivative(s.duration(), 0), Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  }
  return flat_in(segment_index(t), t);
}

std::array<Vec3, 5> HybridTrajectory::flat_in(std::size_t i, double t) const {
  const Segment& s = segments_.at(i);
  return s.flat(std::clamp(t - starts_[i], 0.0, s.duration()));
}

std::array<double, 3> HybridTrajectory::thrust_z(double t) const {
  std::array<double, 3> out{thrust_z_, 0.0, 0.0};
  for (const ThrustRamp& r : ramps_) {
    if (t < r.t_start) break;
    if (t >= r.t_end) {
      out = {r.to, 0.0, 0.0};
      continue;
    }
    // Quintic smoothstep: zero slope and curvature at both ends.
    const double T = r.t_end - r.t_start;
    const double u = (t - r.t_start) / T;
    const double d = r.to - r.from;
    const double s = u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
    const double s1 = 30.0 * u * u * (1.0 - u) * (1.0 - u);
    const double s2 = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
    out = {r.from + d * s, d * s1 / T, d * s2 / (T * T)};
  }
  return out;
}

std::vector<std::pair<double, double>> HybridTrajectory::aerial_intervals() const {
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i].mode().is_ground()) continue;
    const double a = starts_[i], b = a + segments_[i].duration();
    if (!out.empty() && std::abs(out.back().second - a) < 1e-12) {
      out.back().second = b;
    } else {
      out.emplace_back(a, b);
    }
  }
  return out;
}

Peaks HybridTrajectory::peaks() const {
  Peaks p;
  for (const Segment& s : segments_) {
    const Peaks q = s.peaks();
    p.speed = std::max(p.speed, q.speed);
    p.accel = std::max(p.accel, q.accel);
  }
  return p;
}

ReferenceGenerator::ReferenceGenerator(HybridTrajectory trajectory, const VehicleParams& params,
                                       const FlatnessOptions& options, double cache_step)
    : trajectory_(std::move(trajectory)), params_(params), options_(options), cache_step_(cache_step) {
  require_positive(cache_step, "reference cache step");
  intervals_ = trajectory_.aerial_intervals();
  for (const auto& [a, b] : intervals_) {
    // Evaluate inside the aerial segments even at the right end, where the joint belongs to
    // the following ground segment.
    auto sampler = [this, a = a](double t) {
      FlatSampleAerial s = aerial_sample(t);
      std::size_t i = trajectory_.segment_index(t);
      if (trajectory_.segments()[i].mode().is_ground() && i > 0 && t > a) {
        --i;
        const auto f = trajectory_.flat_in(i, t);
        std::copy(f.begin(), f.end(), s.p.begin());
      }
      return s;
    };
    profiles_.push_back(solve_bank_profile(sampler, a, b, params_));
  }
}

FlatSampleGround ReferenceGenerator::ground_sample(double t) const {
  FlatSampleGround s;
  s.t = t;
  s.p = trajectory_.flat(t);
  s.thrust_z = trajectory_.thrust_z(t);
  const std::size_t i = trajectory_.segment_index(t);
  s.direction = trajectory_.segments()[i].mode().direction();
  s.previous_yaw = trajectory_.hold_yaw(i);
  return s;
}

FlatSampleAerial ReferenceGenerator::aerial_sample(double t) const {
  FlatSampleAerial s;
  s.t = t;
  s.p = trajectory_.flat(t);
  const std::size_t i = trajectory_.segment_index(t);
  const YawPolicy& yaw = trajectory_.segments()[i].yaw_policy();
  s.yaw_from_velocity = yaw.follow_velocity;
  s.yaw = {yaw.fixed, 0.0, 0.0};
  s.previous_yaw = trajectory_.hold_yaw(i);
  return s;
}

ReferencePoint ReferenceGenerator::compute(double t, long index) const {
  FlatnessOptions opts = options_;
  opts.sample_index = index;
  if (trajectory_.mode_at(t).is_ground()) return ground_flat_to_reference(ground_sample(t), params_, opts);
  FlatSampleAerial s = aerial_sample(t);
  for (std::size_t k = 0; k < intervals_.size(); ++k) {
    if (t >= intervals_[k].first && t <= intervals_[k].second) {
      s.bank = profiles_[k].at(t);
      break;
    }
  }
  return aerial_flat_to_reference(s, params_, opts);
}

ReferencePoint ReferenceGenerator::at(double t) {
  const double u = t / cache_step_;
  const long long key = std::llround(u);
  if (std::abs(u - static_cast<double>(key)) > 1e-6) return compute(t, -1);
  const auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  ReferencePoint r = compute(static_cast<double>(key) * cache_step_, static_cast<long>(key));
  cache_.emplace(key, r);
  return r;
}

std::vector<ReferencePoint> ReferenceGenerator::sample(double t0, int K, double dt) {
  if (K < 0 || !(dt > 0.0)) throw ConfigError("sample_references: need K >= 0 and dt > 0");
  std::vector<ReferencePoint> out;
  out.reserve(static_cast<std::size_t>(K) + 1);
  for (int k = 0; k <= K; ++k) out.push_back(at(t0 + k * dt));
  return out;
}

std::vector<ReferencePoint> sample_references(const HybridTrajectory& trajectory, double t0, int K, double dt,
                                              const VehicleParams& params, const FlatnessOptions& options) {
  ReferenceGenerator gen(trajectory, params, options);
  return gen.sample(t0, K, dt);
}

}  // namespace bimodal
