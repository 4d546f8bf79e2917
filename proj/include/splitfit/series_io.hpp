#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace splitfit {

/// Shortest round-trip decimal representation ("nan"/"inf" for non-finite).
std::string format_double(double value);

/// Single-column CSV with header "x".
std::vector<double> read_series_csv(const std::filesystem::path& path);
void write_series_csv(const std::filesystem::path& path, const std::vector<double>& x);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& value);

/// Writes `contents` to `path`, throwing std::runtime_error with the OS
/// reason on failure.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace splitfit
