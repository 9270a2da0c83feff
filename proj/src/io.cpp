#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "bimodal/experiment.hpp"

namespace bimodal {

namespace {

using ordered = nlohmann::ordered_json;

// Shortest representation that parses back to the same double.
std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_num(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  const auto r = std::from_chars(first, s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ConfigError("csv: cannot parse number '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

SolveStatus parse_status(const std::string& s) {
  if (s == "optimal") return SolveStatus::Optimal;
  if (s == "relaxed") return SolveStatus::Relaxed;
  if (s == "degraded") return SolveStatus::Degraded;
  throw ConfigError("csv: unknown qp_status '" + s + "'");
}

// Numeric view of every column, shared by the wide and long formats.
std::vector<double> row_values(const TickRecord& r) {
  return {r.t,
          r.p_ref.x(), r.p_ref.y(), r.p_ref.z(),
          r.q_ref[0], r.q_ref[1], r.q_ref[2], r.q_ref[3],
          r.p.x(), r.p.y(), r.p.z(),
          r.q[0], r.q[1], r.q[2], r.q[3],
          r.v.x(), r.v.y(), r.v.z(),
          r.omega.x(), r.omega.y(), r.omega.z(),
          r.u.thrust1, r.u.thrust2, r.u.tilt1, r.u.tilt2,
          r.solve_time_us,
          static_cast<double>(static_cast<int>(r.status)),
          r.cost, r.slack_max,
          r.ground_ref ? 1.0 : 0.0, r.ground ? 1.0 : 0.0,
          r.slipping ? 1.0 : 0.0, r.lift_off ? 1.0 : 0.0,
          r.power, r.min_normal,
          r.F_n_left, r.F_n_right, r.f_l};
}

TickRecord from_values(const std::vector<double>& v) {
  TickRecord r;
  std::size_t i = 0;
  r.t = v[i++];
  for (int k = 0; k < 3; ++k) r.p_ref[k] = v[i++];
  for (int k = 0; k < 4; ++k) r.q_ref[k] = v[i++];
  for (int k = 0; k < 3; ++k) r.p[k] = v[i++];
  for (int k = 0; k < 4; ++k) r.q[k] = v[i++];
  for (int k = 0; k < 3; ++k) r.v[k] = v[i++];
  for (int k = 0; k < 3; ++k) r.omega[k] = v[i++];
  r.u.thrust1 = v[i++];
  r.u.thrust2 = v[i++];
  r.u.tilt1 = v[i++];
  r.u.tilt2 = v[i++];
  r.solve_time_us = v[i++];
  r.status = static_cast<SolveStatus>(static_cast<int>(v[i++]));
  r.cost = v[i++];
  r.slack_max = v[i++];
  r.ground_ref = v[i++] != 0.0;
  r.ground = v[i++] != 0.0;
  r.slipping = v[i++] != 0.0;
  r.lift_off = v[i++] != 0.0;
  r.power = v[i++];
  r.min_normal = v[i++];
  r.F_n_left = v[i++];
  r.F_n_right = v[i++];
  r.f_l = v[i++];
  return r;
}

void count_flags(RunLog& log) {
  for (const TickRecord& r : log.ticks) {
    log.relaxed_ticks += r.status == SolveStatus::Relaxed;
    log.degraded_ticks += r.status == SolveStatus::Degraded;
  }
}

ordered summary_object(const RunSummary& s) {
  ordered o;
  o["ticks"] = s.ticks;
  o["duration"] = s.duration;
  o["rmse"] = s.rmse;
  o["max_error"] = s.max_error;
  o["max_lateral_error"] = s.max_lateral_error;
  o["mean_power"] = s.mean_power;
  o["peak_speed"] = s.peak_speed;
  o["slip_ticks"] = s.slip_ticks;
  o["lift_off_ticks"] = s.lift_off_ticks;
  o["relaxed_ticks"] = s.relaxed_ticks;
  o["degraded_ticks"] = s.degraded_ticks;
  o["mode_switches"] = s.mode_switches;
  o["switch_input_jump"] = s.switch_input_jump;
  if (std::isfinite(s.min_predicted_normal)) o["min_predicted_normal"] = s.min_predicted_normal;
  return o;
}

ordered track_object(const TrackResult& r) {
  ordered o;
  o["outcome"] = to_string(r.log.outcome);
  if (!r.log.message.empty()) o["message"] = r.log.message;
  o["reference_peak_speed"] = r.reference_peaks.speed;
  o["reference_peak_accel"] = r.reference_peaks.accel;
  o["summary"] = summary_object(r.summary);
  return o;
}

}  // namespace

const std::vector<std::string>& runlog_columns() {
  static const std::vector<std::string> cols{
      "t",      "ref_x",     "ref_y",    "ref_z",  "ref_qw",  "ref_qx",     "ref_qy",    "ref_qz",
      "x",      "y",         "z",        "qw",     "qx",      "qy",         "qz",        "vx",
      "vy",     "vz",        "wx",     "wy",      "wz",         "T1",       "T2",     "delta1",  "delta2",     "solve_time_us", "qp_status",
      "cost",   "slack_max", "ref_mode", "mode",   "slipping", "lift_off",  "power",     "min_normal",
      "F_n_left", "F_n_right", "f_l"};
  return cols;
}

void write_runlog_csv(std::ostream& out, const RunLog& log, int decimation) {
  const auto& cols = runlog_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (std::size_t k = 0; k < log.ticks.size(); k += static_cast<std::size_t>(std::max(1, decimation))) {
    const TickRecord& r = log.ticks[k];
    const std::vector<double> v = row_values(r);
    for (std::size_t i = 0; i < v.size(); ++i) {
      out << (i ? "," : "");
      if (cols[i] == "qp_status") {
        out << to_string(r.status);
      } else if (cols[i] == "ref_mode" || cols[i] == "mode") {
        out << (v[i] != 0.0 ? "ground" : "aerial");
      } else {
        out << num(v[i]);
      }
    }
    out << '\n';
  }
}

RunLog read_runlog_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv: empty run log");
  const std::vector<std::string> header = split(line);
  if (header != runlog_columns()) throw ConfigError("csv: unexpected run log header");
  RunLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != header.size()) throw ConfigError("csv: wrong number of cells in run log row");
    std::vector<double> v(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (header[i] == "qp_status") {
        v[i] = static_cast<int>(parse_status(cells[i]));
      } else if (header[i] == "ref_mode" || header[i] == "mode") {
        v[i] = cells[i] == "ground" ? 1.0 : 0.0;
      } else {
        v[i] = parse_num(cells[i]);
      }
    }
    log.ticks.push_back(from_values(v));
  }
  count_flags(log);
  return log;
}

void write_long_csv(std::ostream& out, const RunLog& log) {
  out << "series,t,value\n";
  const auto& cols = runlog_columns();
  std::vector<std::vector<double>> rows;
  rows.reserve(log.ticks.size());
  for (const TickRecord& r : log.ticks) rows.push_back(row_values(r));
  for (std::size_t c = 1; c < cols.size(); ++c)
    for (const auto& v : rows) out << cols[c] << ',' << num(v[0]) << ',' << num(v[c]) << '\n';
}

RunLog read_long_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "series,t,value") throw ConfigError("csv: unexpected long-format header");
  const auto& cols = runlog_columns();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < cols.size(); ++i) index[cols[i]] = i;
  std::vector<double> times;
  std::map<std::string, std::vector<double>> series;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != 3 || !index.count(cells[0])) throw ConfigError("csv: bad long-format row '" + line + "'");
    auto& s = series[cells[0]];
    if (cells[0] == cols[1]) times.push_back(parse_num(cells[1]));
    s.push_back(parse_num(cells[2]));
  }
  RunLog log;
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<double> v(cols.size(), 0.0);
    v[0] = times[k];
    for (std::size_t c = 1; c < cols.size(); ++c) {
      const auto it = series.find(cols[c]);
      if (it == series.end() || it->second.size() != times.size())
        throw ConfigError("csv: series '" + cols[c] + "' is missing or has a different length");
      v[c] = it->second[k];
    }
    log.ticks.push_back(from_values(v));
  }
  count_flags(log);
  return log;
}

void write_reference_csv(std::ostream& out, ReferenceGenerator& gen, double t0, double t1, double dt) {
  if (!(dt > 0.0) || t1 < t0) throw ConfigError("reference export: need dt > 0 and t1 >= t0");
  out << "t,mode";
  for (int k = 0; k < 5; ++k)
    for (const char* a : {"x", "y", "z"}) out << ",p" << k << '_' << a;
  out << ",thrust_z,yaw,x,y,z,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz,T1,T2,delta1,delta2,yaw_held,wheel_lift\n";
  const long n = static_cast<long>(std::floor((t1 - t0) / dt + 1e-9));
  for (long i = 0; i <= n; ++i) {
    const double t = t0 + static_cast<double>(i) * dt;
    const ReferencePoint r = gen.at(t);
    const auto flat = gen.trajectory().flat(t);
    out << num(t) << ',' << (r.mode.is_ground() ? "ground" : "aerial");
    for (const Vec3& d : flat) out << ',' << num(d.x()) << ',' << num(d.y()) << ',' << num(d.z());
    out << ',' << num(gen.trajectory().thrust_z(t)[0]) << ',' << num(r.yaw);
    const StateVector x = r.state.pack();
    for (int k = 0; k < kStateDim; ++k) out << ',' << num(x[k]);
    const InputVector u = r.input.pack();
    for (int k = 0; k < kInputDim; ++k) out << ',' << num(u[k]);
    out << ',' << (r.flags.yaw_held ? 1 : 0) << ',' << (r.flags.wheel_lift ? 1 : 0) << '\n';
  }
}

std::string summary_json(const std::string& name, const TrackResult& r) {
  ordered o;
  o["scenario"] = name;
  o["kind"] = "track";
  o["run"] = track_object(r);
  return o.dump(2) + "\n";
}

std::string energy_json(const std::string& name, const EnergyResult& r) {
  ordered o;
  o["scenario"] = name;
  o["kind"] = "energy_compare";
  o["aerial_power"] = r.metrics.aerial_power;
  o["ground_power"] = r.metrics.ground_power;
  o["standby_power"] = r.metrics.standby_power;
  o["xi"] = r.metrics.xi;
  o["ground"] = track_object(r.ground);
  o["aerial"] = track_object(r.aerial);
  return o.dump(2) + "\n";
}

std::string benchmark_json(const std::string& name, const BenchmarkResult& r) {
  ordered o;
  o["scenario"] = name;
  o["kind"] = "benchmark_slippery";
  o["full_failure_speed"] = r.full_failure_speed ? ordered(*r.full_failure_speed) : ordered(nullptr);
  o["ablation_failure_speed"] = r.ablation_failure_speed ? ordered(*r.ablation_failure_speed) : ordered(nullptr);
  ordered runs = ordered::array();
  for (const BenchmarkEntry& e : r.entries) {
    ordered x = track_object(e.result);
    x["variant"] = e.variant;
    x["v_max"] = e.v_max;
    x["a_max"] = e.a_max;
    x["failed"] = e.failed;
    runs.push_back(x);
  }
  o["runs"] = runs;
  return o.dump(2) + "\n";
}

std::string width_report_csv(const VehicleParams& params) {
  std::ostringstream out;
  const double eta = hover_efficiency(params.mass, 2, params.disk_area, params.air_density, params.gravity);
  out << "layout,rotors,rotor_radius,width,ratio\n";
  for (const LayoutSpec& l : all_layouts()) {
    const WidthResult w = traversing_width(l, params.mass, eta, params.air_density, 0.0, params.gravity);
    out << to_string(l.kind) << ',' << l.rotors << ',' << num(w.rotor_radius) << ',' << num(w.width) << ','
        << num(w.ratio) << '\n';
  }
  return out.str();
}

}  // namespace bimodal
