#include "atlas/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "atlas/errors.hpp"

namespace atlas::io {

std::string fmt_double(double v) {
    // Shortest representation that parses back to the same bits.
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t h) { return fnv1a(s.data(), s.size(), h); }

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for writing: " + path.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw Error("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for reading: " + path.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void write_doubles(const std::filesystem::path& path, const std::vector<double>& values) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for writing: " + path.string());
    f.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!f) throw Error("write failed: " + path.string());
}

std::vector<double> read_doubles(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw Error("cannot open for reading: " + path.string());
    const auto bytes = static_cast<std::size_t>(f.tellg());
    if (bytes % sizeof(double) != 0) throw ParseError("binary file size not a multiple of 8: " + path.string());
    std::vector<double> values(bytes / sizeof(double));
    f.seekg(0);
    f.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(bytes));
    if (!f) throw Error("read failed: " + path.string());
    return values;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
        throw Error("CsvWriter: row width " + std::to_string(cells.size()) + " != header width " +
                    std::to_string(header_.size()));
    rows_.push_back(std::move(cells));
}

std::string CsvWriter::str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < header_.size(); ++i) os << (i ? "," : "") << header_[i];
    os << '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << '\n';
    }
    return os.str();
}

void CsvWriter::save(const std::filesystem::path& path) const { write_text(path, str()); }

}  // namespace atlas::io
