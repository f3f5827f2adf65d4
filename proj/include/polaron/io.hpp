// io.hpp — CSV/JSON/SVG artefact writers and the sha256 manifest
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace polaron::io {

struct Column {
    std::string name;
    std::string unit;  // empty for dimensionless
    std::vector<double> values;
};

// Header "name [unit]", fixed %.12e payload, LF endings. Written to a temporary file then renamed.
void write_csv(const std::filesystem::path& path, const std::vector<Column>& cols,
               const std::vector<std::pair<std::string, std::vector<std::string>>>& text_cols = {});

// Numeric columns of a CSV written by write_csv; the header names are returned without units.
std::vector<Column> read_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& body);

struct Series {
    std::string label;
    std::vector<double> x, y;
};

// Plain line plot; log_y drops non-positive samples.
std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series, bool log_y = false);

std::string sha256_file(const std::filesystem::path& path);

struct ManifestEntry {
    std::string path;  // relative to the output directory
    std::uintmax_t bytes = 0;
    std::string sha256;
};

std::vector<ManifestEntry> manifest(const std::filesystem::path& dir, const std::vector<std::string>& files);

}  // namespace polaron::io
