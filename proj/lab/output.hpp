#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace lab {

using Cell = std::variant<long, double, std::string>;

/// Shortest round-trip decimal form of a double ("%.17g").
[[nodiscard]] std::string format_double(double v);
/// Current UTC time as ISO 8601.
[[nodiscard]] std::string timestamp_utc();

/**
 * @brief CSV trace with a fixed header.
 *
 * The first line is a '#'-prefixed timestamp; everything after it depends only on the rows written.
 */
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::vector<std::string> header, const std::string& stamp);

    void row(const std::vector<Cell>& cells);
    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] const std::vector<std::string>& header() const { return header_; }
    [[nodiscard]] long rows() const { return rows_; }

private:
    std::filesystem::path path_;
    std::vector<std::string> header_;
    std::ofstream out_;
    long rows_ = 0;
};

/// Writes pretty-printed JSON, creating parent directories.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace lab
