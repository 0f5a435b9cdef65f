#pragma once

// Lumped-parameter thermal network (LPTN) of an induction machine used as a
// synthetic ground-truth plant. Four nodes: winding, drive-end bearing,
// non-drive-end bearing and shell. The shell node is what the drive reports
// as reference temperature; the other three are the estimation targets.
//
//   C_i dT_i/dt = sum_j G_ij (T_j - T_i) + P_i(n, I)
//                 - G_fan,i(n) (1 - b(t)) (T_i - T_amb) - G_amb,i (T_i - T_amb)
//
// Integrated with forward Euler at the 1 s sampling period.

#include "thermoguard/dataio.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace thermoguard {

struct MachineRating {
    double power_kw = 15.0;
    double voltage_v = 400.0;
    double current_a = 30.6;
    double torque_nm = 97.0;
    int pole_pairs = 2;
    double speed_rpm = 1478.0;

    void validate() const;
};

enum ThermalNode : std::size_t { kWinding = 0, kBearingDE = 1, kBearingNDE = 2, kShell = 3 };
inline constexpr std::size_t kNodeCount = 4;

using NodeArray = std::array<double, kNodeCount>;

struct PlantParams {
    MachineRating rating;
    NodeArray capacitance{};                              ///< J/degC
    std::array<NodeArray, kNodeCount> conductance{};      ///< symmetric node-to-node, W/degC, zero diagonal
    NodeArray fan_conductance{};                          ///< W/degC to ambient at rated speed, blocked by a fan fault
    double fan_speed_exponent = 0.8;                      ///< G_fan(n) = fan_conductance * (|n| / n_rated)^exponent
    NodeArray ambient_conductance{};                      ///< W/degC natural convection, unaffected by the fan
    double copper_loss_w = 0.0;                           ///< winding loss at rated current, scales with (I/I_rated)^2
    double iron_loss_w = 0.0;                             ///< shell loss at rated speed, scales with (n/n_rated)^1.5
    double bearing_loss_de_w = 0.0;                       ///< constant coefficient times n/n_rated
    double bearing_loss_nde_w = 0.0;
    double ambient_c = 25.0;

    void validate() const;

    /// Speed-dependent convective conductance of `node` before any blockage.
    [[nodiscard]] double fan(std::size_t node, double speed_rpm) const;
    /// Heat injected into each node at the given operating point.
    [[nodiscard]] NodeArray heat(double speed_rpm, double current_a) const;
    /// Smallest C_i / sum(G_i) over the nodes at the given speed, in seconds.
    [[nodiscard]] double min_time_constant(double speed_rpm) const;
};

/// Partial blockage of the cooling fan starting at `onset_s`.
struct FaultSpec {
    double blockage_fraction = 0.7;
    std::int64_t onset_s = 10800;

    void validate() const;
    [[nodiscard]] double blockage_at(std::int64_t t) const { return t >= onset_s ? blockage_fraction : 0.0; }
};

/// Speed/torque setpoint breakpoint; consecutive points are joined by straight lines.
struct DrivePoint {
    double t = 0.0;
    double speed = 0.0;
    double torque = 0.0;

    bool operator==(const DrivePoint&) const = default;
};

/// Dwell-time range in seconds for each dynamics class.
std::pair<int, int> dwell_range(DynamicsClass c);

/// Random piecewise-constant setpoints joined by linear ramps, ending at t = duration_s - 1.
/// The first breakpoint is standstill at t = 0 followed by a ramp to the first setpoint.
std::vector<DrivePoint> generate_profile(DynamicsClass dynamics, std::int64_t duration_s,
                                         const MachineRating& rating, std::uint64_t seed);

/// Samples the breakpoint polyline on the 1 Hz grid 0, 1, ..., last point.
std::vector<DrivePoint> resample_drive(const std::vector<DrivePoint>& drive);

/// Current drawn at a torque setpoint, with a magnetizing floor at no load.
double current_from_torque(double torque_nm, const MachineRating& rating);

/// Current of a drive point: zero when the machine is at standstill without torque
/// (the inverter is off), current_from_torque otherwise.
double drive_current(const DrivePoint& point, const MachineRating& rating);

/// Noise-free node temperatures per second plus the 1 Hz drive that produced them.
struct ThermalTrace {
    std::vector<DrivePoint> drive;
    std::vector<double> current;
    std::vector<NodeArray> temperature;
};

ThermalTrace simulate_states(const std::vector<DrivePoint>& drive, const PlantParams& plant,
                             const std::optional<FaultSpec>& fault);

/// Simulated telemetry with i.i.d. Gaussian measurement noise on the recorded temperatures.
Profile simulate_thermal(const std::vector<DrivePoint>& drive, const PlantParams& plant,
                         const std::optional<FaultSpec>& fault, double noise_std_c, std::uint64_t seed);

/// Default plant for a rating: rated operation settles roughly 60 K above ambient
/// on the winding, with time constants of tens of minutes.
PlantParams default_plant(const MachineRating& rating = {});

nlohmann::json to_json(const PlantParams& plant);
PlantParams plant_from_json(const nlohmann::json& j);

}  // namespace thermoguard
