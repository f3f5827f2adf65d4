// io.cpp — deterministic artefact writers
#include "polaron/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "polaron/model.hpp"

namespace polaron::io {
namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '&': o += "&amp;"; break;
            default: o += c;
        }
    }
    return o;
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& body) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ConfigError("out", "cannot write " + tmp.string());
        f << body;
        if (!f) throw ConfigError("out", "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_csv(const std::filesystem::path& path, const std::vector<Column>& cols,
               const std::vector<std::pair<std::string, std::vector<std::string>>>& text_cols) {
    std::size_t rows = cols.empty() ? 0 : cols.front().values.size();
    for (const auto& c : cols)
        if (c.values.size() != rows) throw ConfigError("csv", "ragged column " + c.name);
    for (const auto& t : text_cols)
        if (t.second.size() != rows) throw ConfigError("csv", "ragged column " + t.first);
    std::ostringstream o;
    bool first = true;
    for (const auto& c : cols) {
        o << (first ? "" : ",") << c.name;
        if (!c.unit.empty()) o << " [" << c.unit << "]";
        first = false;
    }
    for (const auto& t : text_cols) o << (first ? "" : ",") << t.first, first = false;
    o << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        first = true;
        for (const auto& c : cols) o << (first ? "" : ",") << fmt(c.values[r]), first = false;
        for (const auto& t : text_cols) o << (first ? "" : ",") << t.second[r], first = false;
        o << '\n';
    }
    write_text(path, o.str());
}

std::vector<Column> read_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("input", "cannot read " + path.string());
    std::string line;
    if (!std::getline(f, line)) throw ConfigError("input", "empty CSV " + path.string());
    std::vector<Column> cols;
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) {
        Column c;
        const auto br = cell.find(" [");
        c.name = cell.substr(0, br);
        if (br != std::string::npos) c.unit = cell.substr(br + 2, cell.size() - br - 3);
        cols.push_back(c);
    }
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ls(line);
        for (auto& c : cols) {
            if (!std::getline(ls, cell, ',')) throw ConfigError("input", "short row at line " + std::to_string(lineno));
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            c.values.push_back(end == cell.c_str() ? std::numeric_limits<double>::quiet_NaN() : v);
        }
    }
    return cols;
}

std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series, bool log_y) {
    constexpr double W = 720, H = 440, L = 80, R = 20, T = 40, B = 60;
    static const char* colors[] = {"#1b7837", "#762a83", "#e08214", "#2166ac", "#b2182b", "#000000", "#35978f"};
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
    for (const auto& s : series)
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k]) || (log_y && s.y[k] <= 0.0)) continue;
            x0 = std::min(x0, s.x[k]);
            x1 = std::max(x1, s.x[k]);
            y0 = std::min(y0, ty(s.y[k]));
            y1 = std::max(y1, ty(s.y[k]));
        }
    if (!(x1 > x0)) x0 -= 0.5, x1 += 0.5;
    if (!(y1 > y0)) y0 -= 0.5, y1 += 0.5;
    auto px = [&](double x) { return L + (W - L - R) * (x - x0) / (x1 - x0); };
    auto py = [&](double y) { return H - B - (H - T - B) * (ty(y) - y0) / (y1 - y0); };

    std::ostringstream o;
    o << std::setprecision(6);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape_xml(title) << "</text>\n";
    o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double fx = x0 + (x1 - x0) * k / 4.0, fy = y0 + (y1 - y0) * k / 4.0;
        const double gx = L + (W - L - R) * k / 4.0, gy = H - B - (H - T - B) * k / 4.0;
        o << "<text x=\"" << gx << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\" font-size=\"11\">" << fx << "</text>\n";
        o << "<text x=\"" << L - 6 << "\" y=\"" << gy + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
          << (log_y ? "1e" : "") << fy << "</text>\n";
    }
    o << "<text x=\"" << W / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\" font-size=\"13\">" << escape_xml(xlabel) << "</text>\n";
    o << "<text x=\"18\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " << H / 2
      << ")\">" << escape_xml(ylabel) << "</text>\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* col = colors[si % 7];
        o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k]) || (log_y && s.y[k] <= 0.0)) continue;
            o << px(s.x[k]) << ',' << py(s.y[k]) << ' ';
        }
        o << "\"/>\n";
        o << "<text x=\"" << L + 10 << "\" y=\"" << T + 16 + 15 * double(si) << "\" font-size=\"12\" fill=\"" << col << "\">"
          << escape_xml(s.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("out", "cannot read " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 15];
    while (f) {
        f.read(buf, sizeof buf);
        if (f.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(f.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream o;
    for (unsigned int k = 0; k < len; ++k) o << std::hex << std::setw(2) << std::setfill('0') << int(md[k]);
    return o.str();
}

std::vector<ManifestEntry> manifest(const std::filesystem::path& dir, const std::vector<std::string>& files) {
    std::vector<ManifestEntry> out;
    for (const auto& f : files) {
        const auto p = dir / f;
        out.push_back({f, std::filesystem::file_size(p), sha256_file(p)});
    }
    return out;
}

}  // namespace polaron::io
