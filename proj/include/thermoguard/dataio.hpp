#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace thermoguard {

/// One 1 Hz telemetry sample: drive-side inputs and the three measured targets.
struct TelemetryFrame {
    std::int64_t t = 0;  ///< seconds since profile start
    double n_m = 0.0;    ///< motor speed, rpm
    double I_m = 0.0;    ///< motor current (RMS), A
    double T_ref = 0.0;  ///< reference (shell) temperature, degC
    double T_W = 0.0;    ///< winding temperature, degC
    double T_DE = 0.0;   ///< drive-end bearing temperature, degC
    double T_NDE = 0.0;  ///< non-drive-end bearing temperature, degC

    bool operator==(const TelemetryFrame&) const = default;
};

enum class DynamicsClass { slow, medium, fast };

std::string_view to_string(DynamicsClass c);
DynamicsClass parse_dynamics(std::string_view text);

struct Profile {
    std::string id;
    DynamicsClass dynamics = DynamicsClass::medium;
    std::vector<TelemetryFrame> frames;

    bool operator==(const Profile&) const = default;

    std::vector<double> column(double TelemetryFrame::*field) const;
};

struct Dataset {
    std::vector<Profile> profiles;

    [[nodiscard]] const Profile& find(std::string_view id) const;
    [[nodiscard]] std::vector<std::string> ids() const;
};

/// Leave-one-profile-out partition of a dataset by profile id.
struct Split {
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::string test;
};

/// Checks the per-profile frame invariants; throws LoadError describing the first violation.
void validate_profile(const Profile& profile);

/// Parses one telemetry CSV. `source` names the file in error messages.
Profile parse_profile_csv(std::string_view text, std::string id, std::string_view source,
                          DynamicsClass fallback = DynamicsClass::medium);

std::string format_profile_csv(const Profile& profile);

Profile load_profile(const std::filesystem::path& file);
void save_profile(const Profile& profile, const std::filesystem::path& file);

/// Loads a single CSV or every `*.csv` in a directory (sorted by file name).
Dataset load_dataset(const std::filesystem::path& path);

/// Writes one `<id>.csv` per profile into `dir`, creating it if needed.
void export_dataset(const Dataset& dataset, const std::filesystem::path& dir);

/// One split per profile, validation ids being the lexicographically smallest
/// `n_validation` ids other than the test id.
std::vector<Split> make_lopo_splits(const Dataset& dataset, std::size_t n_validation);

/// Split for one named test profile, chosen as make_lopo_splits would.
Split make_split(const Dataset& dataset, std::string_view test_id, std::size_t n_validation);

}  // namespace thermoguard
