#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fgl/error.hpp"
#include "fgl/grid.hpp"
#include "fgl/solver.hpp"
#include "fgl/vortex.hpp"

namespace fgl {

static_assert(std::endian::native == std::endian::little, "FGL1 dumps assume a little-endian host");

/// Field kinds stored in the header of a grid dump.
enum class FieldKind : std::uint32_t { real = 1, complex = 2, one_form = 3 };

inline constexpr std::array<char, 4> kDumpMagic{'F', 'G', 'L', '1'};

struct FieldDump {
    PeriodicGrid grid;
    FieldKind kind = FieldKind::real;
    std::vector<double> data;  ///< row-major nodes; complex as (re, im); 1-forms as θ block then φ block
};

inline std::size_t doubles_per_node(FieldKind k) { return k == FieldKind::real ? 1 : 2; }

inline void write_dump(std::ostream& os, const FieldDump& d) {
    if (d.data.size() != d.grid.size() * doubles_per_node(d.kind)) throw ConstructionError("dump size mismatch");
    const std::uint32_t header[3] = {static_cast<std::uint32_t>(d.grid.n_theta()),
                                     static_cast<std::uint32_t>(d.grid.n_phi()), static_cast<std::uint32_t>(d.kind)};
    os.write(kDumpMagic.data(), 4);
    os.write(reinterpret_cast<const char*>(header), sizeof(header));
    os.write(reinterpret_cast<const char*>(d.data.data()), static_cast<std::streamsize>(d.data.size() * sizeof(double)));
    if (!os) throw std::runtime_error("failed to write field dump");
}

inline FieldDump read_dump(std::istream& is) {
    std::array<char, 4> magic{};
    std::uint32_t header[3] = {};
    is.read(magic.data(), 4);
    if (!is || magic != kDumpMagic) throw ConfigError("not an FGL1 dump");
    is.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!is) throw ConfigError("truncated FGL1 header");
    if (header[2] < 1 || header[2] > 3) throw ConfigError("unknown field kind in FGL1 dump");
    FieldDump d{PeriodicGrid(static_cast<int>(header[0]), static_cast<int>(header[1])),
                static_cast<FieldKind>(header[2]), {}};
    d.data.resize(d.grid.size() * doubles_per_node(d.kind));
    is.read(reinterpret_cast<char*>(d.data.data()), static_cast<std::streamsize>(d.data.size() * sizeof(double)));
    if (!is) throw ConfigError("truncated FGL1 payload");
    return d;
}

inline FieldDump to_dump(const RealField& f) {
    return {f.grid(), FieldKind::real, std::vector<double>(f.values().begin(), f.values().end())};
}

inline FieldDump to_dump(const ScalarField& f) {
    FieldDump d{f.grid(), FieldKind::complex, {}};
    d.data.reserve(2 * f.size());
    for (const Complex& z : f.values()) {
        d.data.push_back(z.real());
        d.data.push_back(z.imag());
    }
    return d;
}

inline FieldDump to_dump(const OneFormField& a) {
    FieldDump d{a.grid(), FieldKind::one_form, {}};
    d.data.reserve(2 * a.theta.size());
    for (double v : a.theta.values()) d.data.push_back(v);
    for (double v : a.phi.values()) d.data.push_back(v);
    return d;
}

inline RealField real_from_dump(const FieldDump& d) {
    if (d.kind != FieldKind::real) throw ConfigError("dump does not hold a real field");
    RealField f(d.grid);
    std::copy(d.data.begin(), d.data.end(), f.values().begin());
    return f;
}

inline ScalarField scalar_from_dump(const FieldDump& d) {
    if (d.kind != FieldKind::complex) throw ConfigError("dump does not hold a complex field");
    ScalarField f(d.grid);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = Complex(d.data[2 * k], d.data[2 * k + 1]);
    return f;
}

inline OneFormField one_form_from_dump(const FieldDump& d) {
    if (d.kind != FieldKind::one_form) throw ConfigError("dump does not hold a 1-form");
    OneFormField a(d.grid);
    const std::size_t n = d.grid.size();
    for (std::size_t k = 0; k < n; ++k) {
        a.theta[k] = d.data[k];
        a.phi[k] = d.data[n + k];
    }
    return a;
}

inline void save_dump(const std::string& path, const FieldDump& d) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    write_dump(os, d);
}

inline FieldDump load_dump(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open " + path);
    return read_dump(is);
}

// ---- CSV -----------------------------------------------------------------------

/// %.17g: the text reads back to the same double.
inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_trace_csv(std::ostream& os, const SolverTrace& t) {
    os << "iter,kinetic,maxwell,potential,total,grad_norm\n";
    for (const TraceRow& r : t.rows)
        os << r.iter << ',' << fmt(r.energy.kinetic) << ',' << fmt(r.energy.maxwell) << ',' << fmt(r.energy.potential)
           << ',' << fmt(r.energy.total) << ',' << fmt(r.grad_norm) << '\n';
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "epsilon,N,total,kinetic,maxwell,potential,vortex_count,energy_over_logeps\n";
    for (const SweepRow& r : rows)
        os << fmt(r.epsilon) << ',' << r.n << ',' << fmt(r.energy.total) << ',' << fmt(r.energy.kinetic) << ','
           << fmt(r.energy.maxwell) << ',' << fmt(r.energy.potential) << ',' << r.vortex_count << ','
           << fmt(r.energy_over_logeps) << '\n';
}

inline void write_vortex_csv(std::ostream& os, const VortexSet& v) {
    os << "theta,phi,degree\n";
    for (const Vortex& x : v.vortices) os << fmt(x.position.theta) << ',' << fmt(x.position.phi) << ',' << x.degree << '\n';
}

/// Real nodal field as (theta, phi, value).
inline void write_field_csv(std::ostream& os, const RealField& f, const char* name = "value") {
    const PeriodicGrid& g = f.grid();
    os << "theta,phi," << name << '\n';
    for (int i = 0; i < g.n_theta(); ++i)
        for (int j = 0; j < g.n_phi(); ++j) os << fmt(g.theta(i)) << ',' << fmt(g.phi(j)) << ',' << fmt(f(i, j)) << '\n';
}

/// Header "# multiplicity=<m> orientation=<±1> closed=<0|1>", then theta,phi rows.
inline void write_polyline_csv(std::ostream& os, const PolylineCurrent& c) {
    os << "# multiplicity=" << c.multiplicity() << " orientation=" << c.orientation() << " closed=" << (c.closed() ? 1 : 0)
       << '\n'
       << "theta,phi\n";
    for (const Vec2& v : c.vertices()) os << fmt(v[0]) << ',' << fmt(v[1]) << '\n';
}

inline PolylineCurrent read_polyline_csv(std::istream& is) {
    std::string line;
    int mult = 1, orient = 1, closed = 0;
    if (!std::getline(is, line) || line.rfind("# multiplicity=", 0) != 0)
        throw ConfigError("polyline CSV: missing multiplicity header");
    if (std::sscanf(line.c_str(), "# multiplicity=%d orientation=%d closed=%d", &mult, &orient, &closed) != 3)
        throw ConfigError("polyline CSV: malformed header '" + line + "'");
    if (!std::getline(is, line) || line != "theta,phi") throw ConfigError("polyline CSV: expected 'theta,phi'");
    std::vector<Vec2> v;
    int lineno = 2;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        double t = 0, p = 0;
        char extra = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf%c", &t, &p, &extra) != 2)
            throw ConfigError("polyline CSV line " + std::to_string(lineno) + ": expected two numbers");
        v.emplace_back(t, p);
    }
    return PolylineCurrent(std::move(v), closed != 0, mult, orient);
}

inline void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << body;
    if (!os) throw std::runtime_error("failed to write " + path);
}

template <class Fn>
void write_csv_file(const std::string& path, Fn&& fn) {
    std::ostringstream os;
    fn(os);
    write_text_file(path, os.str());
}

}  // namespace fgl
