#ifndef QLIMIT_FIELD_IO_HPP
#define QLIMIT_FIELD_IO_HPP

// Field state files. CSV: two header comment lines then one row per sample.
// Binary: fixed little-endian header then pi and phi as raw doubles.

#include <qlimit/error.hpp>
#include <qlimit/field.hpp>

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace qlimit::field {

struct stored_state {
    field_state state;
    double mass = 0.0;
};

inline constexpr const char* csv_magic = "# qlimit-field-state v1";
inline constexpr char binary_magic[8] = {'Q', 'L', 'F', 'S', 'v', '1', '\0', '\0'};

// Shortest text that reads back to the same double.
inline std::string format_double(double x) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline void write_state_csv(std::ostream& os, const field_state& s, double mass) {
    const auto& g = s.grid;
    os << csv_magic << '\n';
    os << "# geometry=" << geometry_name(g.geo) << ",dims=" << g.dims << ",points=" << g.points
       << ",extent=" << format_double(g.extent) << ",mass=" << format_double(mass)
       << ",components=" << s.components << '\n';
    os << "site,component,pi,phi\n";
    const long n = g.sites();
    for (int c = 0; c < s.components; ++c)
        for (long i = 0; i < n; ++i)
            os << i << ',' << c << ',' << format_double(s.pi[c * n + i]) << ','
               << format_double(s.phi[c * n + i]) << '\n';
}

inline stored_state read_state_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != csv_magic) throw error(errc::io, "missing field-state header");
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw error(errc::io, "missing geometry line");
    std::map<std::string, std::string> kv;
    std::stringstream ss(line.substr(2));
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw error(errc::io, "malformed header entry '" + item + "'");
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    for (const char* key : {"geometry", "dims", "points", "extent", "mass", "components"})
        if (!kv.count(key)) throw error(errc::io, std::string("header lacks ") + key);
    stored_state out;
    try {
        const int points = std::stoi(kv["points"]);
        const double extent = std::stod(kv["extent"]);
        if (kv["geometry"] == "torus")
            out.state.grid = field_grid::torus(std::stoi(kv["dims"]), points, extent);
        else if (kv["geometry"] == "half-line")
            out.state.grid = field_grid::half_line(points, extent);
        else
            throw error(errc::io, "unknown geometry '" + kv["geometry"] + "'");
        out.mass = std::stod(kv["mass"]);
        out.state.components = std::stoi(kv["components"]);
    } catch (const std::logic_error&) {
        throw error(errc::io, "unparsable header value");
    }
    if (out.state.components != 1 && out.state.components != 3) throw error(errc::io, "components must be 1 or 3");
    if (!std::getline(is, line) || line != "site,component,pi,phi") throw error(errc::io, "missing column line");
    const long n = out.state.grid.sites();
    const long total = n * out.state.components;
    out.state.pi = vec::Zero(total);
    out.state.phi = vec::Zero(total);
    std::vector<bool> seen(static_cast<std::size_t>(total), false);
    long rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        long site = 0;
        int comp = 0;
        double pi = 0, phi = 0;
        if (std::sscanf(line.c_str(), "%ld,%d,%lf,%lf", &site, &comp, &pi, &phi) != 4)
            throw error(errc::io, "malformed row '" + line + "'");
        if (site < 0 || site >= n || comp < 0 || comp >= out.state.components)
            throw error(errc::io, "row index out of range");
        const long at = comp * n + site;
        if (seen[static_cast<std::size_t>(at)]) throw error(errc::io, "duplicate row");
        seen[static_cast<std::size_t>(at)] = true;
        out.state.pi[at] = pi;
        out.state.phi[at] = phi;
        ++rows;
    }
    if (rows != total) throw error(errc::io, "expected " + std::to_string(total) + " rows, got " + std::to_string(rows));
    return out;
}

template <class T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw error(errc::io, "truncated binary state");
    return v;
}

inline void write_state_binary(std::ostream& os, const field_state& s, double mass) {
    os.write(binary_magic, sizeof binary_magic);
    put<std::int32_t>(os, s.grid.geo == geometry::torus ? 0 : 1);
    put<std::int32_t>(os, s.grid.dims);
    put<std::int32_t>(os, s.grid.points);
    put<std::int32_t>(os, s.components);
    put<double>(os, s.grid.extent);
    put<double>(os, mass);
    os.write(reinterpret_cast<const char*>(s.pi.data()), static_cast<std::streamsize>(s.pi.size() * sizeof(double)));
    os.write(reinterpret_cast<const char*>(s.phi.data()), static_cast<std::streamsize>(s.phi.size() * sizeof(double)));
}

inline stored_state read_state_binary(std::istream& is) {
    char magic[sizeof binary_magic];
    if (!is.read(magic, sizeof magic) || std::string(magic, sizeof magic) != std::string(binary_magic, sizeof magic))
        throw error(errc::io, "bad binary magic");
    const auto geo = get<std::int32_t>(is);
    const auto dims = get<std::int32_t>(is);
    const auto points = get<std::int32_t>(is);
    const auto comps = get<std::int32_t>(is);
    const auto extent = get<double>(is);
    stored_state out;
    out.mass = get<double>(is);
    if (geo == 0)
        out.state.grid = field_grid::torus(dims, points, extent);
    else if (geo == 1)
        out.state.grid = field_grid::half_line(points, extent);
    else
        throw error(errc::io, "unknown geometry code");
    if (comps != 1 && comps != 3) throw error(errc::io, "components must be 1 or 3");
    out.state.components = comps;
    const long total = out.state.grid.sites() * comps;
    out.state.pi.resize(total);
    out.state.phi.resize(total);
    const auto bytes = static_cast<std::streamsize>(total * sizeof(double));
    if (!is.read(reinterpret_cast<char*>(out.state.pi.data()), bytes) ||
        !is.read(reinterpret_cast<char*>(out.state.phi.data()), bytes))
        throw error(errc::io, "truncated binary state");
    return out;
}

inline bool is_binary_path(const std::string& path) {
    return path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0;
}

inline void save_state(const std::string& path, const field_state& s, double mass) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw error(errc::io, "cannot open " + path);
    if (is_binary_path(path))
        write_state_binary(os, s, mass);
    else
        write_state_csv(os, s, mass);
    if (!os) throw error(errc::io, "write failed for " + path);
}

inline stored_state load_state(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw error(errc::io, "cannot open " + path);
    return is_binary_path(path) ? read_state_binary(is) : read_state_csv(is);
}

} // namespace qlimit::field

#endif
