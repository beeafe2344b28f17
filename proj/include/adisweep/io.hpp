#pragma once

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "experiments.hpp"
#include "model.hpp"

namespace adisweep::io {

// 17 significant decimal digits round-trip every finite double exactly.
inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline double parse_double(const std::string& s) {
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    if (end == begin || errno == ERANGE)
        throw validation_error("not a parseable number: '" + s + "'");
    return v;
}

// Whole-file atomic: the content lands under the final name only complete,
// via rename of a sibling temp file.
inline void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw validation_error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw validation_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw validation_error("rename failed for " + path.string() + ": " + ec.message());
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> cells;
};

inline std::string to_text(const Csv& table) {
    std::ostringstream out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out << ',';
        out << table.header[i];
    }
    out << '\n';
    for (const auto& row : table.cells) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
    return out.str();
}

inline void write_csv(const std::filesystem::path& path, const Csv& table) {
    atomic_write_text(path, to_text(table));
}

// Plain comma splitting; fields here never contain commas or quotes.
inline Csv parse_csv(const std::string& text) {
    Csv table;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            row.push_back(line.substr(start, comma == std::string::npos
                                                 ? std::string::npos
                                                 : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (first) {
            table.header = std::move(row);
            first = false;
        } else {
            table.cells.push_back(std::move(row));
        }
    }
    return table;
}

inline Csv read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

inline Csv trajectory_table(const Trajectory& traj,
                            const std::vector<DeviationSample>* devs = nullptr) {
    Csv t;
    t.header = {"t", "r", "q", "p", "energy"};
    if (devs) {
        t.header.push_back("dq");
        t.header.push_back("dp");
    }
    t.cells.reserve(traj.samples.size());
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const TrajectorySample& s = traj.samples[i];
        std::vector<std::string> row = {format_double(s.t), format_double(s.r),
                                        format_double(s.q), format_double(s.p),
                                        format_double(s.energy)};
        if (devs) {
            row.push_back(format_double((*devs)[i].dq));
            row.push_back(format_double((*devs)[i].dp));
        }
        t.cells.push_back(std::move(row));
    }
    return t;
}

inline Csv loop_table(const Trajectory& forward, const Trajectory& backward) {
    Csv t;
    t.header = {"t", "r", "q", "p", "energy", "leg"};
    t.cells.reserve(forward.samples.size() + backward.samples.size());
    auto put = [&](const TrajectorySample& s, const char* leg) {
        t.cells.push_back({format_double(s.t), format_double(s.r), format_double(s.q),
                           format_double(s.p), format_double(s.energy), leg});
    };
    for (const TrajectorySample& s : forward.samples) put(s, "forward");
    for (const TrajectorySample& s : backward.samples) put(s, "backward");
    return t;
}

inline Csv tracking_table(const std::vector<TrackingSample>& series) {
    Csv t;
    t.header = {"t", "R", "dq_actual", "dq_theory"};
    t.cells.reserve(series.size());
    for (const TrackingSample& s : series)
        t.cells.push_back({format_double(s.t), format_double(s.r),
                           format_double(s.dq_actual), format_double(s.mean_dq_theory)});
    return t;
}

// One row per fixed point per grid node; grid hits both endpoints exactly.
inline Csv fixed_point_table(const ModelParams& m, double r_lo, double r_hi, int n) {
    if (!(n >= 2)) throw validation_error("fixed-point grid needs at least two nodes");
    if (!(r_lo < r_hi)) throw validation_error("fixed-point grid must be strictly increasing");
    Csv t;
    t.header = {"R", "q_bar", "p_bar", "stability"};
    for (int k = 0; k < n; ++k) {
        double frac = static_cast<double>(k) / (n - 1);
        double r = r_lo + (r_hi - r_lo) * frac;
        for (const FixedPoint& fp : fixed_points(r, m))
            t.cells.push_back({format_double(r), format_double(fp.q_bar),
                               format_double(fp.p_bar), to_string(fp.stability)});
    }
    return t;
}

} // namespace adisweep::io
