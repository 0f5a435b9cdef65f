#include "thermoguard/dataio.hpp"

#include "thermoguard/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace thermoguard {

namespace {

constexpr std::array<std::string_view, 8> kHeader = {"t", "n_m", "I_m", "T_ref", "T_W", "T_DE", "T_NDE", "dynamics"};

std::string where(std::string_view source, std::size_t line) {
    std::ostringstream os;
    os << source << ":" << line << ": ";
    return os.str();
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view cell, std::string_view source, std::size_t line, std::string_view column) {
    cell = trim(cell);
    double value = 0.0;
    const auto* end = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (cell.empty() || ec != std::errc{} || ptr != end) {
        throw LoadError(where(source, line) + "non-numeric value '" + std::string(cell) + "' in column " +
                        std::string(column));
    }
    return value;
}

std::string_view dynamics_suffix(std::string_view stem) {
    for (std::string_view name : {"slow", "medium", "fast"}) {
        const std::string suffix = "_" + std::string(name);
        if (stem.size() > suffix.size() && stem.substr(stem.size() - suffix.size()) == suffix) return name;
    }
    return {};
}

void append_number(std::string& out, double v) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 10);
    out.append(buf.data(), ptr);
}

}  // namespace

std::string_view to_string(DynamicsClass c) {
    switch (c) {
        case DynamicsClass::slow: return "slow";
        case DynamicsClass::medium: return "medium";
        case DynamicsClass::fast: return "fast";
    }
    return "medium";
}

DynamicsClass parse_dynamics(std::string_view text) {
    text = trim(text);
    if (text == "slow") return DynamicsClass::slow;
    if (text == "medium") return DynamicsClass::medium;
    if (text == "fast") return DynamicsClass::fast;
    throw ConfigError("unknown dynamics class '" + std::string(text) + "'");
}

std::vector<double> Profile::column(double TelemetryFrame::*field) const {
    std::vector<double> out;
    out.reserve(frames.size());
    for (const auto& f : frames) out.push_back(f.*field);
    return out;
}

const Profile& Dataset::find(std::string_view id) const {
    const auto it = std::find_if(profiles.begin(), profiles.end(), [&](const Profile& p) { return p.id == id; });
    if (it == profiles.end()) throw LoadError("profile '" + std::string(id) + "' not found in dataset");
    return *it;
}

std::vector<std::string> Dataset::ids() const {
    std::vector<std::string> out;
    out.reserve(profiles.size());
    for (const auto& p : profiles) out.push_back(p.id);
    return out;
}

void validate_profile(const Profile& profile) {
    if (profile.frames.empty()) throw LoadError("profile '" + profile.id + "' has no frames");
    for (std::size_t i = 0; i < profile.frames.size(); ++i) {
        const auto& f = profile.frames[i];
        if (i > 0 && f.t != profile.frames[i - 1].t + 1) {
            throw LoadError("profile '" + profile.id + "': non-contiguous time at frame " + std::to_string(i));
        }
        if (!std::isfinite(f.T_ref) || !std::isfinite(f.T_W) || !std::isfinite(f.T_DE) || !std::isfinite(f.T_NDE) ||
            !std::isfinite(f.n_m) || !std::isfinite(f.I_m)) {
            throw LoadError("profile '" + profile.id + "': non-finite value at frame " + std::to_string(i));
        }
        if (f.n_m < 0.0 || f.I_m < 0.0) {
            throw LoadError("profile '" + profile.id + "': negative speed or current at frame " + std::to_string(i));
        }
    }
}

Profile parse_profile_csv(std::string_view text, std::string id, std::string_view source, DynamicsClass fallback) {
    Profile profile;
    profile.id = std::move(id);
    profile.dynamics = fallback;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    std::array<int, kHeader.size()> column_of{};
    column_of.fill(-1);
    bool header_seen = false;
    bool dynamics_seen = false;

    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = trim(text.substr(pos, eol - pos));
        pos = eol + 1;
        ++line_no;
        if (line.empty()) continue;

        const auto fields = split_fields(line);
        if (!header_seen) {
            for (std::size_t c = 0; c < fields.size(); ++c) {
                const auto name = trim(fields[c]);
                const auto it = std::find(kHeader.begin(), kHeader.end(), name);
                if (it != kHeader.end()) column_of[static_cast<std::size_t>(it - kHeader.begin())] = static_cast<int>(c);
            }
            // dynamics is optional; every numeric column is required
            for (std::size_t k = 0; k + 1 < kHeader.size(); ++k) {
                if (column_of[k] < 0) {
                    throw LoadError(where(source, line_no) + "missing column '" + std::string(kHeader[k]) + "'");
                }
            }
            header_seen = true;
            continue;
        }

        auto cell = [&](std::size_t k) -> std::string_view {
            const auto c = static_cast<std::size_t>(column_of[k]);
            if (c >= fields.size()) {
                throw LoadError(where(source, line_no) + "missing value for column '" + std::string(kHeader[k]) + "'");
            }
            return fields[c];
        };

        TelemetryFrame f;
        const double t = parse_number(cell(0), source, line_no, kHeader[0]);
        if (t != std::floor(t)) throw LoadError(where(source, line_no) + "time must be an integer second");
        f.t = static_cast<std::int64_t>(t);
        f.n_m = parse_number(cell(1), source, line_no, kHeader[1]);
        f.I_m = parse_number(cell(2), source, line_no, kHeader[2]);
        f.T_ref = parse_number(cell(3), source, line_no, kHeader[3]);
        f.T_W = parse_number(cell(4), source, line_no, kHeader[4]);
        f.T_DE = parse_number(cell(5), source, line_no, kHeader[5]);
        f.T_NDE = parse_number(cell(6), source, line_no, kHeader[6]);
        if (column_of[7] >= 0 && !dynamics_seen) {
            const auto d = trim(cell(7));
            if (!d.empty()) {
                try {
                    profile.dynamics = parse_dynamics(d);
                } catch (const ConfigError& e) {
                    throw LoadError(where(source, line_no) + e.what());
                }
                dynamics_seen = true;
            }
        }
        if (!profile.frames.empty() && f.t != profile.frames.back().t + 1) {
            throw LoadError(where(source, line_no) + "non-contiguous time at line " + std::to_string(line_no));
        }
        if (!std::isfinite(f.n_m) || !std::isfinite(f.I_m) || !std::isfinite(f.T_ref) || !std::isfinite(f.T_W) ||
            !std::isfinite(f.T_DE) || !std::isfinite(f.T_NDE)) {
            throw LoadError(where(source, line_no) + "non-finite value");
        }
        if (f.n_m < 0.0 || f.I_m < 0.0) throw LoadError(where(source, line_no) + "negative speed or current");
        profile.frames.push_back(f);
    }
    if (!header_seen) throw LoadError(std::string(source) + ": empty file");
    if (profile.frames.empty()) throw LoadError(std::string(source) + ": no data rows");
    return profile;
}

std::string format_profile_csv(const Profile& profile) {
    std::string out;
    out.reserve(profile.frames.size() * 80 + 64);
    for (std::size_t k = 0; k < kHeader.size(); ++k) {
        if (k) out += ',';
        out += kHeader[k];
    }
    out += '\n';
    const auto dyn = to_string(profile.dynamics);
    for (const auto& f : profile.frames) {
        out += std::to_string(f.t);
        for (double v : {f.n_m, f.I_m, f.T_ref, f.T_W, f.T_DE, f.T_NDE}) {
            out += ',';
            append_number(out, v);
        }
        out += ',';
        out += dyn;
        out += '\n';
    }
    return out;
}

Profile load_profile(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw LoadError("cannot open " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string stem = file.stem().string();
    DynamicsClass fallback = DynamicsClass::medium;
    if (const auto suffix = dynamics_suffix(stem); !suffix.empty()) fallback = parse_dynamics(suffix);
    return parse_profile_csv(buf.str(), stem, file.string(), fallback);
}

void save_profile(const Profile& profile, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw LoadError("cannot write " + file.string());
    out << format_profile_csv(profile);
    if (!out) throw LoadError("write failed for " + file.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    if (!fs::exists(path)) throw LoadError("path does not exist: " + path.string());
    Dataset dataset;
    if (fs::is_regular_file(path)) {
        dataset.profiles.push_back(load_profile(path));
        return dataset;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw LoadError("no profiles found in " + path.string());
    std::set<std::string> seen;
    for (const auto& f : files) {
        auto p = load_profile(f);
        if (!seen.insert(p.id).second) throw LoadError("duplicate profile id '" + p.id + "'");
        dataset.profiles.push_back(std::move(p));
    }
    return dataset;
}

void export_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& p : dataset.profiles) save_profile(p, dir / (p.id + ".csv"));
}

Split make_split(const Dataset& dataset, std::string_view test_id, std::size_t n_validation) {
    auto ids = dataset.ids();
    if (ids.size() < n_validation + 2) {
        throw ConfigError("need at least " + std::to_string(n_validation + 2) + " profiles for a split, have " +
                          std::to_string(ids.size()));
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw ConfigError("duplicate profile ids");
    if (!std::binary_search(ids.begin(), ids.end(), std::string(test_id))) {
        throw ConfigError("test profile '" + std::string(test_id) + "' not in dataset");
    }
    Split split;
    split.test = std::string(test_id);
    for (const auto& id : ids) {
        if (id == test_id) continue;
        if (split.validation.size() < n_validation) {
            split.validation.push_back(id);
        } else {
            split.train.push_back(id);
        }
    }
    return split;
}

std::vector<Split> make_lopo_splits(const Dataset& dataset, std::size_t n_validation) {
    std::vector<Split> out;
    out.reserve(dataset.profiles.size());
    for (const auto& p : dataset.profiles) out.push_back(make_split(dataset, p.id, n_validation));
    return out;
}

}  // namespace thermoguard
