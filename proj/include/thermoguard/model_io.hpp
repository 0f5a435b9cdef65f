#pragma once

// Versioned binary model container:
//
//   "THGM"                      4 bytes magic
//   version                     u32
//   kind tag length, kind tag   u32 + bytes ("linear" | "cnn" | "rnn")
//   config length, config       u64 + UTF-8 JSON (hyperparameters, spans, standardizers)
//   tensor count                u32
//   per tensor: ndim (u32), dims (u64 each), values (f64, row-major)
//
// All integers and floats are little-endian.

#include "thermoguard/experiment.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace thermoguard {

inline constexpr std::string_view kContainerMagic = "THGM";
inline constexpr std::uint32_t kContainerVersion = 1;

std::string serialize_model(const Estimator& estimator);

/// Throws FormatError (bad magic or layout), VersionError or TruncatedError.
Estimator deserialize_model(std::string_view bytes, std::uint32_t expected_version = kContainerVersion);

void save_model(const Estimator& estimator, const std::filesystem::path& path);
Estimator load_model(const std::filesystem::path& path);

}  // namespace thermoguard
