#include "config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <fstream>
#include <sstream>

namespace lab {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_name(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    });
}

std::string strip_comment(const std::string& line) {
    const auto pos = line.find_first_of("#;");
    return pos == std::string::npos ? line : line.substr(0, pos);
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, std::string field, const std::string& message)
    : std::runtime_error([&] {
          std::ostringstream os;
          os << source;
          if (line > 0) os << ":" << line;
          if (!field.empty()) os << ": field '" << field << "'";
          os << ": " << message;
          return os.str();
      }()),
      line_(line),
      field_(std::move(field)) {}

Config Config::parse(std::istream& in, const std::string& source) {
    Config cfg;
    cfg.source_ = source;
    std::string section;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(source, lineno, "", "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_name(section)) throw ConfigError(source, lineno, section, "invalid section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(source, lineno, "", "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!valid_name(key)) throw ConfigError(source, lineno, key, "invalid key");
        const std::string full = section.empty() ? key : section + "." + key;
        if (cfg.entries_.count(full))
            throw ConfigError(source, lineno, full,
                              "duplicate key (first set on line " + std::to_string(cfg.entries_[full].line) + ")");
        if (value.empty()) throw ConfigError(source, lineno, full, "empty value");
        cfg.entries_[full] = {value, lineno};
    }
    return cfg;
}

Config Config::parse_string(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    return parse(in, source);
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), 0, "", "cannot open file");
    return parse(in, path.string());
}

void Config::set(const std::string& key, const std::string& value) { entries_[key] = {value, 0}; }

bool Config::has(const std::string& key) const {
    if (entries_.count(key)) used_.insert(key);
    return entries_.count(key) > 0;
}

const Config::Entry* Config::find(const std::string& key) const {
    used_.insert(key);
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

ConfigError Config::error(const std::string& key, const std::string& message) const {
    const auto it = entries_.find(key);
    return {source_, it == entries_.end() ? 0 : it->second.line, key, message};
}

std::string Config::get_string(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) throw ConfigError(source_, 0, key, "required key is missing");
    return e->value;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const Entry* e = find(key);
    return e ? e->value : fallback;
}

double Config::get_double(const std::string& key) const {
    const std::string v = get_string(key);
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw error(key, "expected a real number, got '" + v + "'");
    }
}

double Config::get_double(const std::string& key, double fallback) const {
    if (!find(key)) return fallback;
    return get_double(key);
}

long Config::get_long(const std::string& key, long fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    long out = 0;
    const auto* end = e->value.data() + e->value.size();
    const auto [ptr, ec] = std::from_chars(e->value.data(), end, out);
    if (ec != std::errc() || ptr != end) throw error(key, "expected an integer, got '" + e->value + "'");
    return out;
}

int Config::get_int(const std::string& key, int fallback) const {
    const long v = get_long(key, fallback);
    if (v < -(1L << 30) || v > (1L << 30)) throw error(key, "integer out of range");
    return static_cast<int>(v);
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    std::uint64_t out = 0;
    const auto* end = e->value.data() + e->value.size();
    const auto [ptr, ec] = std::from_chars(e->value.data(), end, out);
    if (ec != std::errc() || ptr != end) throw error(key, "expected an unsigned 64-bit integer, got '" + e->value + "'");
    return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "yes" || e->value == "1") return true;
    if (e->value == "false" || e->value == "no" || e->value == "0") return false;
    throw error(key, "expected true or false, got '" + e->value + "'");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    std::vector<double> out;
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw error(key, "expected a comma-separated list of reals, got '" + e->value + "'");
        }
    }
    if (out.empty()) throw error(key, "empty list");
    return out;
}

std::string Config::get_choice(const std::string& key, const std::vector<std::string>& choices,
                               const std::string& fallback) const {
    const std::string v = get_string(key, fallback);
    if (std::find(choices.begin(), choices.end(), v) != choices.end()) return v;
    std::string list;
    for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
    throw error(key, "'" + v + "' is not one of: " + list);
}

void Config::reject_unused() const {
    for (const auto& [key, entry] : entries_)
        if (!used_.count(key)) throw ConfigError(source_, entry.line, key, "unknown key for this experiment");
}

}  // namespace lab
