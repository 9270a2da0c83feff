#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bimodal/flatness.hpp"

namespace bimodal {

enum class SegmentKind { Lemniscate, Circle, Line, Rest, Blend };

std::string to_string(SegmentKind kind);

struct Peaks {
  double speed = 0.0;  ///< [m/s]
  double accel = 0.0;  ///< [m/s^2]
};

/// How an aerial segment chooses its heading. Ground segments always head along the path.
struct YawPolicy {
  bool follow_velocity = true;
  double fixed = 0.0;  ///< used when not following the velocity
};

/// One closed-form piece of a flat trajectory, evaluated in local time tau in [0, duration].
class Segment {
 public:
  /// center + (A sin(W tau + phase), B sin(2 (W tau + phase)), 0).
  static Segment lemniscate(double A, double B, double omega, const Vec3& center, double duration,
                            const Mode& mode, double phase = 0.0);
  /// center + R (cos(W tau + phase), sin(W tau + phase), 0).
  static Segment circle(double radius, double omega, const Vec3& center, double duration, const Mode& mode,
                        double phase = 0.0);
  /// Constant velocity.
  static Segment line(const Vec3& start, const Vec3& velocity, double duration, const Mode& mode);
  static Segment rest(const Vec3& position, double duration, const Mode& mode);
  /// Quintic per axis matching position, velocity and acceleration at both ends.
  static Segment blend(const std::array<Vec3, 3>& from, const std::array<Vec3, 3>& to, double duration,
                       const Mode& mode);

  SegmentKind kind() const { return kind_; }
  double duration() const { return duration_; }
  const Mode& mode() const { return mode_; }
  const YawPolicy& yaw_policy() const { return yaw_; }
  void set_yaw_policy(const YawPolicy& yaw) { yaw_ = yaw; }

  /// k-th derivative of position at local time tau (any k >= 0).
  Vec3 derivative(double tau, int order) const;
  /// p and its first four derivatives.
  std::array<Vec3, 5> flat(double tau) const;
  /// (p, p', p'') at the start or end.
  std::array<Vec3, 3> start_state() const;
  std::array<Vec3, 3> end_state() const;

  /// Slowed copy: positions p(rate * tau), duration / rate. rate must lie in (0, 1].
  Segment time_scaled(double rate) const;
  /// Translated copy.
  Segment shifted(const Vec3& offset) const;

  /// Peak speed and acceleration over the segment (closed form except for blends).
  Peaks peaks() const;

  double amplitude_x() const { return a_; }
  double amplitude_y() const { return b_; }
  double angular_rate() const { return omega_; }
  const Vec3& center() const { return center_; }

 private:
  SegmentKind kind_ = SegmentKind::Rest;
  double duration_ = 0.0;
  Mode mode_ = Mode::aerial();
  YawPolicy yaw_;
  double a_ = 0.0, b_ = 0.0, omega_ = 0.0, phase_ = 0.0;
  Vec3 center_ = Vec3::Zero();
  Vec3 velocity_ = Vec3::Zero();
  std::array<std::array<double, 6>, 3> poly_{};  ///< blend coefficients per axis, in tau
};

/// Peaks of the lemniscate (A sin Wt, B sin 2Wt): speed W sqrt(A^2 + 4B^2) at the crossing,
/// acceleration W^2 sqrt(max_w A^2 w + 64 B^2 w (1 - w)) with w = sin^2.
Peaks lemniscate_peaks(double A, double B, double omega);

/// Lemniscate with B = aspect * A whose peaks equal (v_peak, a_peak) exactly.
Segment fit_lemniscate(double v_peak, double a_peak, double aspect, const Vec3& center, int laps,
                       const Mode& mode);

struct ScaledSegment {
  Segment segment;
  double rate = 1.0;  ///< time dilation factor (<= 1)
  Peaks peaks;
};

/// Slows a segment uniformly until both peaks are within the limits; never speeds it up.
ScaledSegment scale_to_limits(const Segment& segment, double v_max, double a_max);

struct BlendResult {
  Segment segment;
  double duration = 0.0;
  bool extended = false;  ///< duration was stretched to respect a_max
};

/// Quintic transition from the end of `from` to the start of `to`, stretched (10% at a time)
/// while its peak acceleration exceeds a_max.
BlendResult takeoff_landing_blend(const Segment& from, const Segment& to, double duration,
                                  double a_max = std::numeric_limits<double>::infinity());

/// Smooth change of the ground body-z thrust between two levels.
struct ThrustRamp {
  double t_start = 0.0;
  double t_end = 0.0;
  double from = 0.0;
  double to = 0.0;
};

/// Time-ordered segments with C1 joints, the body-z thrust schedule and the ground headings.
class HybridTrajectory {
 public:
  /// Throws ConfigError on discontinuous joints (1e-6) or ground segments off the contact plane.
  HybridTrajectory(std::vector<Segment> segments, double thrust_z, const VehicleParams& params,
                   double initial_yaw = 0.0);

  void add_thrust_ramp(const ThrustRamp& ramp);
  /// Adds ramps to `switch_level` before every take-off and after every landing.
  void add_switch_ramps(double switch_level, double ramp_duration);

  double duration() const { return total_; }
  const std::vector<Segment>& segments() const { return segments_; }
  const std::vector<double>& segment_starts() const { return starts_; }

  /// Index of the active segment; joints belong to the later segment. Clamped at the ends.
  std::size_t segment_index(double t) const;
  Mode mode_at(double t) const;
  /// Flat outputs; beyond the ends the boundary position is held with zero derivatives.
  std::array<Vec3, 5> flat(double t) const;
  /// Flat outputs of one segment with its local time clamped to the segment span.
  std::array<Vec3, 5> flat_in(std::size_t segment, double t) const;
  std::array<double, 3> thrust_z(double t) const;
  /// Heading to hold when the segment is at rest: the heading at the end of the previous one.
  double hold_yaw(std::size_t segment) const { return hold_yaw_[segment]; }
  const YawPolicy& yaw_policy(double t) const;

  /// Maximal aerial time intervals.
  std::vector<std::pair<double, double>> aerial_intervals() const;
  Peaks peaks() const;

 private:
  std::vector<Segment> segments_;
  std::vector<double> starts_;
  std::vector<double> hold_yaw_;
  std::vector<ThrustRamp> ramps_;
  double thrust_z_ = 0.0;
  double total_ = 0.0;
};

/// Turns a trajectory into reference points. Owns the aerial bank profiles and a cache of
/// points on a fixed time grid, so overlapping horizons reuse work.
class ReferenceGenerator {
 public:
  ReferenceGenerator(HybridTrajectory trajectory, const VehicleParams& params, const FlatnessOptions& options = {},
                     double cache_step = 5e-3);

  ReferencePoint at(double t);
  /// K + 1 points at t0 + k dt.
  std::vector<ReferencePoint> sample(double t0, int K, double dt);

  const HybridTrajectory& trajectory() const { return trajectory_; }
  const VehicleParams& params() const { return params_; }
  const std::vector<BankProfile>& bank_profiles() const { return profiles_; }

  FlatSampleGround ground_sample(double t) const;
  FlatSampleAerial aerial_sample(double t) const;

 private:
  ReferencePoint compute(double t, long index) const;

  HybridTrajectory trajectory_;
  VehicleParams params_;
  FlatnessOptions options_;
  double cache_step_;
  std::vector<std::pair<double, double>> intervals_;
  std::vector<BankProfile> profiles_;
  std::map<long long, ReferencePoint> cache_;
};

/// Convenience wrapper building a one-off generator.
std::vector<ReferencePoint> sample_references(const HybridTrajectory& trajectory, double t0, int K, double dt,
                                              const VehicleParams& params, const FlatnessOptions& options = {});

}  // namespace bimodal
