#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpm/types.hpp"

namespace lpm::io {

/// Shortest round-trip decimal form of a double ("%.17g").
std::string format_double(double v);

void write_csv(const std::filesystem::path& path, const RowMatrix& data,
               const std::vector<std::string>& header = {});
/// Reads a numeric CSV. A first line that does not parse as numbers is
/// treated as a header and skipped.
RowMatrix read_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
void ensure_directory(const std::filesystem::path& dir);

}  // namespace lpm::io
