#include "thermoguard/simulate.hpp"

#include "thermoguard/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace thermoguard {

void MachineRating::validate() const {
    if (!(power_kw > 0 && voltage_v > 0 && current_a > 0 && torque_nm > 0 && pole_pairs > 0 && speed_rpm > 0)) {
        throw ConfigError("machine rating values must all be positive");
    }
}

void PlantParams::validate() const {
    rating.validate();
    for (std::size_t i = 0; i < kNodeCount; ++i) {
        if (!(capacitance[i] > 0)) throw ConfigError("thermal capacitance must be positive");
        if (fan_conductance[i] < 0 || ambient_conductance[i] < 0) throw ConfigError("conductances must be >= 0");
        if (conductance[i][i] != 0) throw ConfigError("node conductance matrix must have a zero diagonal");
        for (std::size_t j = 0; j < kNodeCount; ++j) {
            if (conductance[i][j] < 0) throw ConfigError("conductances must be >= 0");
            if (conductance[i][j] != conductance[j][i]) throw ConfigError("node conductance matrix must be symmetric");
        }
    }
    if (fan_speed_exponent < 0) throw ConfigError("fan speed exponent must be >= 0");
    if (copper_loss_w < 0 || iron_loss_w < 0 || bearing_loss_de_w < 0 || bearing_loss_nde_w < 0) {
        throw ConfigError("loss coefficients must be >= 0");
    }
}

double PlantParams::fan(std::size_t node, double speed_rpm) const {
    const double ratio = std::abs(speed_rpm) / rating.speed_rpm;
    return fan_conductance[node] * std::pow(ratio, fan_speed_exponent);
}

NodeArray PlantParams::heat(double speed_rpm, double current_a) const {
    const double speed = std::abs(speed_rpm) / rating.speed_rpm;
    const double load = current_a / rating.current_a;
    NodeArray p{};
    p[kWinding] = copper_loss_w * load * load;
    p[kBearingDE] = bearing_loss_de_w * speed;
    p[kBearingNDE] = bearing_loss_nde_w * speed;
    p[kShell] = iron_loss_w * std::pow(speed, 1.5);
    return p;
}

double PlantParams::min_time_constant(double speed_rpm) const {
    double tau = INFINITY;
    for (std::size_t i = 0; i < kNodeCount; ++i) {
        double g = fan(i, speed_rpm) + ambient_conductance[i];
        for (std::size_t j = 0; j < kNodeCount; ++j) g += conductance[i][j];
        if (g > 0) tau = std::min(tau, capacitance[i] / g);
    }
    return tau;
}

void FaultSpec::validate() const {
    if (!(blockage_fraction >= 0.0 && blockage_fraction <= 1.0)) {
        throw ConfigError("blockage fraction must lie in [0, 1]");
    }
}

std::pair<int, int> dwell_range(DynamicsClass c) {
    switch (c) {
        case DynamicsClass::slow: return {900, 1800};
        case DynamicsClass::medium: return {180, 900};
        case DynamicsClass::fast: return {30, 180};
    }
    throw ConfigError("unknown dynamics class");
}

std::vector<DrivePoint> generate_profile(DynamicsClass dynamics, std::int64_t duration_s,
                                         const MachineRating& rating, std::uint64_t seed) {
    rating.validate();
    if (duration_s < 600) throw ConfigError("profile duration must be at least 600 s");
    const auto [dwell_lo, dwell_hi] = dwell_range(dynamics);

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dwell(dwell_lo, dwell_hi);
    std::uniform_int_distribution<int> ramp(5, 20);
    std::uniform_real_distribution<double> speed(0.1, 1.0);
    std::uniform_real_distribution<double> torque(0.0, 1.0);

    const double end = static_cast<double>(duration_s - 1);
    std::vector<DrivePoint> points;
    // the machine starts at rest, matching the ambient initial thermal state
    DrivePoint current{0.0, 0.0, 0.0};
    points.push_back(current);
    current = {static_cast<double>(ramp(rng)), speed(rng) * rating.speed_rpm, torque(rng) * rating.torque_nm};
    points.push_back(current);
    while (current.t < end) {
        // hold
        DrivePoint hold = current;
        hold.t = std::min(end, current.t + dwell(rng));
        points.push_back(hold);
        if (hold.t >= end) break;
        // ramp to the next setpoint
        DrivePoint next{hold.t + ramp(rng), speed(rng) * rating.speed_rpm, torque(rng) * rating.torque_nm};
        if (next.t > end) {
            const double w = (end - hold.t) / (next.t - hold.t);
            next = {end, hold.speed + w * (next.speed - hold.speed), hold.torque + w * (next.torque - hold.torque)};
        }
        points.push_back(next);
        current = next;
    }
    return points;
}

std::vector<DrivePoint> resample_drive(const std::vector<DrivePoint>& drive) {
    if (drive.empty()) throw ConfigError("empty drive cycle");
    if (drive.front().t != 0.0) throw ConfigError("drive cycle must start at t = 0");
    for (std::size_t k = 1; k < drive.size(); ++k) {
        if (drive[k].t < drive[k - 1].t) throw ConfigError("drive breakpoints must be time-ordered");
    }
    const auto last = static_cast<std::int64_t>(std::floor(drive.back().t));
    std::vector<DrivePoint> out;
    out.reserve(static_cast<std::size_t>(last + 1));
    std::size_t seg = 0;
    for (std::int64_t s = 0; s <= last; ++s) {
        const double t = static_cast<double>(s);
        while (seg + 1 < drive.size() && drive[seg + 1].t < t) ++seg;
        if (seg + 1 >= drive.size() || drive[seg + 1].t == drive[seg].t) {
            out.push_back({t, drive[seg].speed, drive[seg].torque});
            continue;
        }
        const auto& a = drive[seg];
        const auto& b = drive[seg + 1];
        const double w = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
        out.push_back({t, a.speed + w * (b.speed - a.speed), a.torque + w * (b.torque - a.torque)});
    }
    return out;
}

double current_from_torque(double torque_nm, const MachineRating& rating) {
    const double load = torque_nm / rating.torque_nm;
    return rating.current_a * std::sqrt(0.2 + 0.8 * load * load);
}

double drive_current(const DrivePoint& point, const MachineRating& rating) {
    if (point.speed == 0.0 && point.torque == 0.0) return 0.0;
    return current_from_torque(point.torque, rating);
}

ThermalTrace simulate_states(const std::vector<DrivePoint>& drive, const PlantParams& plant,
                             const std::optional<FaultSpec>& fault) {
    plant.validate();
    if (fault) fault->validate();

    ThermalTrace trace;
    trace.drive = resample_drive(drive);
    double max_speed = 0.0;
    for (const auto& p : trace.drive) {
        if (std::abs(p.speed) > 1.5 * plant.rating.speed_rpm || std::abs(p.torque) > 1.5 * plant.rating.torque_nm) {
            throw ConfigError("drive point exceeds 1.5x rated speed or torque at t = " + std::to_string(p.t));
        }
        max_speed = std::max(max_speed, std::abs(p.speed));
    }
    if (plant.min_time_constant(max_speed) < 2.0) {
        throw ConfigError("forward Euler at 1 s is unstable for this plant (C/sum(G) < 2 s)");
    }

    const std::size_t n = trace.drive.size();
    trace.current.resize(n);
    trace.temperature.resize(n);
    NodeArray temp;
    temp.fill(plant.ambient_c);
    for (std::size_t s = 0; s < n; ++s) {
        const auto& p = trace.drive[s];
        const double current = drive_current(p, plant.rating);
        trace.current[s] = current;
        trace.temperature[s] = temp;

        const double open = 1.0 - (fault ? fault->blockage_at(static_cast<std::int64_t>(s)) : 0.0);
        const NodeArray heat = plant.heat(p.speed, current);
        NodeArray next;
        for (std::size_t i = 0; i < kNodeCount; ++i) {
            double flow = heat[i];
            for (std::size_t j = 0; j < kNodeCount; ++j) flow += plant.conductance[i][j] * (temp[j] - temp[i]);
            const double to_ambient = plant.fan(i, p.speed) * open + plant.ambient_conductance[i];
            flow -= to_ambient * (temp[i] - plant.ambient_c);
            next[i] = temp[i] + flow / plant.capacitance[i];
        }
        temp = next;
    }
    return trace;
}

Profile simulate_thermal(const std::vector<DrivePoint>& drive, const PlantParams& plant,
                         const std::optional<FaultSpec>& fault, double noise_std_c, std::uint64_t seed) {
    if (noise_std_c < 0) throw ConfigError("noise standard deviation must be >= 0");
    const ThermalTrace trace = simulate_states(drive, plant, fault);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    auto noisy = [&](double v) { return noise_std_c > 0 ? v + noise_std_c * noise(rng) : v; };

    Profile profile;
    profile.frames.reserve(trace.drive.size());
    for (std::size_t s = 0; s < trace.drive.size(); ++s) {
        const auto& T = trace.temperature[s];
        TelemetryFrame f;
        f.t = static_cast<std::int64_t>(s);
        f.n_m = std::abs(trace.drive[s].speed);
        f.I_m = trace.current[s];
        f.T_ref = noisy(T[kShell]);
        f.T_W = noisy(T[kWinding]);
        f.T_DE = noisy(T[kBearingDE]);
        f.T_NDE = noisy(T[kBearingNDE]);
        profile.frames.push_back(f);
    }
    return profile;
}

PlantParams default_plant(const MachineRating& rating) {
    rating.validate();
    // Reference geometry is the 15 kW machine; losses scale with power,
    // conductances and capacitances with its square root.
    const double power = rating.power_kw / 15.0;
    const double size = std::sqrt(power);

    PlantParams p;
    p.rating = rating;
    p.capacitance = {18000.0 * size, 6000.0 * size, 6000.0 * size, 100000.0 * size};
    auto link = [&](std::size_t a, std::size_t b, double g) {
        p.conductance[a][b] = g * size;
        p.conductance[b][a] = g * size;
    };
    link(kWinding, kShell, 7.0);
    link(kWinding, kBearingDE, 1.0);
    link(kWinding, kBearingNDE, 1.0);
    link(kBearingDE, kShell, 1.5);
    link(kBearingNDE, kShell, 1.2);
    // internal air driven by the shaft fan reaches the end windings and both
    // bearing housings; the external fan blows over the shell fins
    p.fan_conductance = {6.0 * size, 1.5 * size, 2.0 * size, 28.0 * size};
    p.fan_speed_exponent = 0.8;
    p.ambient_conductance = {0.0, 0.0, 0.0, 4.0 * size};
    p.copper_loss_w = 750.0 * power;
    p.iron_loss_w = 250.0 * power;
    p.bearing_loss_de_w = 30.0 * power;
    p.bearing_loss_nde_w = 25.0 * power;
    p.ambient_c = 25.0;
    return p;
}

nlohmann::json to_json(const PlantParams& plant) {
    nlohmann::json j;
    j["rating"] = {{"power_kw", plant.rating.power_kw},   {"voltage_v", plant.rating.voltage_v},
                   {"current_a", plant.rating.current_a}, {"torque_nm", plant.rating.torque_nm},
                   {"pole_pairs", plant.rating.pole_pairs}, {"speed_rpm", plant.rating.speed_rpm}};
    j["capacitance"] = plant.capacitance;
    j["conductance"] = plant.conductance;
    j["fan_conductance"] = plant.fan_conductance;
    j["fan_speed_exponent"] = plant.fan_speed_exponent;
    j["ambient_conductance"] = plant.ambient_conductance;
    j["copper_loss_w"] = plant.copper_loss_w;
    j["iron_loss_w"] = plant.iron_loss_w;
    j["bearing_loss_de_w"] = plant.bearing_loss_de_w;
    j["bearing_loss_nde_w"] = plant.bearing_loss_nde_w;
    j["ambient_c"] = plant.ambient_c;
    j["nodes"] = {"winding", "bearing_de", "bearing_nde", "shell"};
    return j;
}

PlantParams plant_from_json(const nlohmann::json& j) {
    PlantParams p;
    const auto& r = j.at("rating");
    p.rating.power_kw = r.at("power_kw").get<double>();
    p.rating.voltage_v = r.at("voltage_v").get<double>();
    p.rating.current_a = r.at("current_a").get<double>();
    p.rating.torque_nm = r.at("torque_nm").get<double>();
    p.rating.pole_pairs = r.at("pole_pairs").get<int>();
    p.rating.speed_rpm = r.at("speed_rpm").get<double>();
    p.capacitance = j.at("capacitance").get<NodeArray>();
    p.conductance = j.at("conductance").get<std::array<NodeArray, kNodeCount>>();
    p.fan_conductance = j.at("fan_conductance").get<NodeArray>();
    p.fan_speed_exponent = j.at("fan_speed_exponent").get<double>();
    p.ambient_conductance = j.at("ambient_conductance").get<NodeArray>();
    p.copper_loss_w = j.at("copper_loss_w").get<double>();
    p.iron_loss_w = j.at("iron_loss_w").get<double>();
    p.bearing_loss_de_w = j.at("bearing_loss_de_w").get<double>();
    p.bearing_loss_nde_w = j.at("bearing_loss_nde_w").get<double>();
    p.ambient_c = j.at("ambient_c").get<double>();
    p.validate();
    return p;
}

}  // namespace thermoguard
