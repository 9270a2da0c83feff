#pragma once

#include <string>
#include <vector>

#include "bimodal/nmpc.hpp"

namespace bimodal {

/// Momentum-theory power sqrt(T^3 / (2 S rho)) of one rotor [W].
double ideal_power(double thrust, double disk_area, double air_density);

/// Mass lifted per ideal hover power [kg/W] for k equal rotors of disk area S.
double hover_efficiency(double mass, int rotors, double disk_area, double air_density, double gravity = 9.81);

/// Rotor radius that yields hover efficiency eta for k rotors; inverse of hover_efficiency.
double rotor_radius(double eta, double mass, int rotors, double air_density, double gravity = 9.81);

enum class LayoutKind { SingleRotor, BicopterLongitudinal, BicopterHorizontal, QuadrotorX, Hexacopter };

std::string to_string(LayoutKind kind);

/// Rotor count and minimum traversing width as `radii` rotor radii plus `gaps` clearances.
struct LayoutSpec {
  LayoutKind kind = LayoutKind::SingleRotor;
  int rotors = 1;
  double radii = 2.0;
  int gaps = 0;

  static LayoutSpec of(LayoutKind kind);
};

/// Every implemented layout, single rotor first.
std::vector<LayoutSpec> all_layouts();

struct WidthResult {
  LayoutSpec layout;
  double rotor_radius = 0.0;  ///< [m]
  double width = 0.0;         ///< [m]
  double ratio = 0.0;         ///< width over the single-rotor diameter at the same (m, eta)
};

/// Minimum traversing width at fixed mass and hover efficiency; `clearance` separates adjacent disks.
WidthResult traversing_width(const LayoutSpec& layout, double mass, double eta, double air_density,
                             double clearance = 0.0, double gravity = 9.81);

enum class YawVehicle { QuadrotorBased, BicopterBased };

/// Largest yaw torque with a per-rotor thrust T_f below the weight: drag torque (c_q / c_t) T_f
/// for the quadrotor, tilted-thrust moment l T_f for the bi-copter.
double max_yaw_torque(double thrust, const VehicleParams& params, YawVehicle vehicle);

/// l c_t / c_q: the bi-copter over quadrotor yaw torque ratio, independent of thrust.
double steering_ratio(const VehicleParams& params);

/// sqrt(mean |p - p_ref|^2); planar drops the z component.
double rmse(const std::vector<Vec3>& actual, const std::vector<Vec3>& reference, bool planar = false);

/// xi = 1 - P_g / P_a.
double energy_saving(double aerial_power, double ground_power);
/// Same ratio after removing a standby power common to both modes.
double energy_saving(double aerial_power, double ground_power, double standby_power);

struct ExperimentMetrics {
  double rmse = 0.0;
  double aerial_power = 0.0;
  double ground_power = 0.0;
  double standby_power = 0.0;
  double xi = 0.0;
};

/// Figures recomputed from the rows of a run log.
struct RunSummary {
  std::size_t ticks = 0;
  double duration = 0.0;
  double rmse = 0.0;            ///< planar or 3D as requested
  double max_error = 0.0;       ///< [m]
  double max_lateral_error = 0.0;  ///< across the reference heading [m]
  double mean_power = 0.0;      ///< [W]
  double peak_speed = 0.0;      ///< realized [m/s]
  int slip_ticks = 0;
  int lift_off_ticks = 0;
  int relaxed_ticks = 0;
  int degraded_ticks = 0;
  int mode_switches = 0;        ///< reference mode changes
  /// Largest tick-to-tick input change within `switch_window` of a mode change, as a fraction
  /// of the input range (thrust over T_max, tilt over 2 delta_max).
  double switch_input_jump = 0.0;
  double min_predicted_normal = 0.0;
  bool completed = false;
};

RunSummary summarize(const RunLog& log, const VehicleParams& params, bool planar = false,
                     double switch_window = 0.5);

/// Heading of the body x axis encoded in a (w, x, y, z) quaternion.
double yaw_of(const Vec4& wxyz);

}  // namespace bimodal
