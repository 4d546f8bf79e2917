#include "splitfit/series_io.hpp"

#include <array>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "splitfit/error.hpp"

namespace splitfit {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buffer{};
  const auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc()) throw std::runtime_error("failed to format a double");
  return {buffer.data(), ptr};
}

std::vector<double> read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open series file " + path.string() + ": " + std::strerror(errno));
  std::string line;
  if (!std::getline(in, line) || trim(line) != "x") {
    throw ValidationError("series file " + path.string() + " must start with the header \"x\"");
  }
  std::vector<double> x;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string cell = trim(line);
    if (cell.empty()) continue;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
      throw ValidationError("series file " + path.string() + ", line " + std::to_string(line_no) +
                            ": not a finite number: \"" + cell + "\"");
    }
    x.push_back(value);
  }
  return x;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string() + ": " + std::strerror(errno));
  out << contents;
  out.flush();
  if (!out) throw std::runtime_error("error writing " + path.string() + ": " + std::strerror(errno));
}

void write_series_csv(const std::filesystem::path& path, const std::vector<double>& x) {
  std::string text = "x\n";
  for (double v : x) {
    text += format_double(v);
    text += '\n';
  }
  write_text_file(path, text);
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string() + ": " + std::strerror(errno));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& value) {
  write_text_file(path, value.dump(2) + "\n");
}

}  // namespace splitfit
