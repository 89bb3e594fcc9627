#pragma once

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gsmpc/errors.hpp"
#include "gsmpc/trace.hpp"

namespace gsmpc::io {

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

/// Shortest-independent full-precision rendering (17 significant digits).
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;  // drop the sign of negative zero
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Writes `content` to a sibling temporary file and renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) throw IoError("write to " + tmp.string() + " failed");
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename into " + path.string());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

/// CSV text: header "t,<channels>", one row per sample, LF line endings.
inline std::string trace_to_csv(const Trace& tr) {
    std::string out = "t";
    const auto& ch = tr.channels();
    for (const auto& c : ch) out += "," + c.first;
    out += '\n';
    for (std::size_t k = 0; k < tr.size(); ++k) {
        out += format_double(tr.time(k));
        for (const auto& c : ch) {
            out += ',';
            out += format_double(c.second[k]);
        }
        out += '\n';
    }
    return out;
}

inline void write_trace_csv(const Trace& tr, const std::filesystem::path& path) {
    write_atomic(path, trace_to_csv(tr));
}

/// Parses text written by trace_to_csv. The sample time is taken from the
/// first two time stamps (1 when there are fewer than two rows).
inline Trace trace_from_csv(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        const auto end = nl == std::string_view::npos ? text.size() : nl;
        lines.emplace_back(text.substr(pos, end - pos));
        pos = end + 1;
    }
    if (lines.empty() || lines.front().rfind("t", 0) != 0) throw InputError("CSV trace: missing header");
    auto split = [](const std::string& s) {
        std::vector<std::string> f;
        std::size_t p = 0;
        for (;;) {
            const auto c = s.find(',', p);
            f.push_back(s.substr(p, c == std::string::npos ? std::string::npos : c - p));
            if (c == std::string::npos) break;
            p = c + 1;
        }
        return f;
    };
    auto parse = [](const std::string& s, std::size_t row) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size())
            throw InputError("CSV trace: bad number '" + s + "' in row " + std::to_string(row));
        return v;
    };
    const auto header = split(lines.front());
    std::vector<std::vector<double>> cols(header.size());
    for (std::size_t r = 1; r < lines.size(); ++r) {
        if (lines[r].empty()) continue;
        const auto f = split(lines[r]);
        if (f.size() != header.size()) throw InputError("CSV trace: row " + std::to_string(r) + " has wrong width");
        for (std::size_t c = 0; c < f.size(); ++c) cols[c].push_back(parse(f[c], r));
    }
    const double t0 = cols[0].empty() ? 0.0 : cols[0][0];
    const double ts = cols[0].size() >= 2 ? cols[0][1] - cols[0][0] : 1.0;
    Trace tr(ts, t0);
    for (std::size_t c = 1; c < header.size(); ++c) tr.add_channel(header[c], std::move(cols[c]));
    return tr;
}

}  // namespace gsmpc::io
