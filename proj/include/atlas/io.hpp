#ifndef ATLAS_IO_HPP
#define ATLAS_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace atlas::io {

// Shortest exact decimal form of a double (round-trips bit-exactly).
std::string fmt_double(double v);

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

void write_doubles(const std::filesystem::path& path, const std::vector<double>& values);
std::vector<double> read_doubles(const std::filesystem::path& path);

// Minimal CSV emitter: header + rows of preformatted cells.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);
    void add_row(std::vector<std::string> cells);
    std::string str() const;
    void save(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace atlas::io

#endif  // ATLAS_IO_HPP
