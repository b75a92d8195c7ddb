#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace lab {

/// Malformed or inconsistent configuration, with the offending line and field when known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, int line, std::string field, const std::string& message);

    [[nodiscard]] int line() const { return line_; }
    [[nodiscard]] const std::string& field() const { return field_; }

private:
    int line_;
    std::string field_;
};

/**
 * @brief Flat key = value configuration with [section] headers.
 *
 * Keys are addressed as "section.key"; keys before the first header have no prefix.
 * Comments start with '#' or ';'. Every lookup records the key so that unknown keys can be reported.
 */
class Config {
public:
    struct Entry {
        std::string value;
        int line = 0;  ///< 0 for values set programmatically
    };

    [[nodiscard]] static Config parse(std::istream& in, const std::string& source = "<config>");
    [[nodiscard]] static Config parse_string(const std::string& text, const std::string& source = "<config>");
    [[nodiscard]] static Config load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    [[nodiscard]] bool has(const std::string& key) const;

    [[nodiscard]] std::string get_string(const std::string& key) const;
    [[nodiscard]] std::string get_string(const std::string& key, const std::string& fallback) const;
    [[nodiscard]] double get_double(const std::string& key, double fallback) const;
    [[nodiscard]] double get_double(const std::string& key) const;
    [[nodiscard]] int get_int(const std::string& key, int fallback) const;
    [[nodiscard]] long get_long(const std::string& key, long fallback) const;
    [[nodiscard]] std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;
    /// Comma-separated list of reals.
    [[nodiscard]] std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
    /// Value restricted to one of `choices`.
    [[nodiscard]] std::string get_choice(const std::string& key, const std::vector<std::string>& choices,
                                         const std::string& fallback) const;

    /// Throws on the first key that no lookup has consumed.
    void reject_unused() const;

    [[nodiscard]] const std::map<std::string, Entry>& entries() const { return entries_; }
    [[nodiscard]] const std::string& source() const { return source_; }
    /// Error tied to a key's line.
    [[nodiscard]] ConfigError error(const std::string& key, const std::string& message) const;

private:
    [[nodiscard]] const Entry* find(const std::string& key) const;

    std::string source_;
    std::map<std::string, Entry> entries_;
    mutable std::set<std::string> used_;
};

}  // namespace lab
