#include "output.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <stdexcept>

namespace lab {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string timestamp_utc() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace {

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header, const std::string& stamp)
    : path_(path), header_(std::move(header)) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << "# " << stamp << "\n";
    for (std::size_t i = 0; i < header_.size(); ++i) out_ << (i ? "," : "") << header_[i];
    out_ << "\n";
}

void CsvWriter::row(const std::vector<Cell>& cells) {
    if (cells.size() != header_.size())
        throw std::logic_error(path_.filename().string() + ": row has " + std::to_string(cells.size()) +
                               " cells, header has " + std::to_string(header_.size()));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ",";
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, double>)
                    out_ << format_double(v);
                else if constexpr (std::is_same_v<T, long>)
                    out_ << v;
                else
                    out_ << quote(v);
            },
            cells[i]);
    }
    out_ << "\n";
    out_.flush();
    ++rows_;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

}  // namespace lab
