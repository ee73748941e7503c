#pragma once

#include <charconv>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fgl/coefficient.hpp"
#include "fgl/error.hpp"
#include "fgl/finsler_norm.hpp"
#include "fgl/measures.hpp"
#include "fgl/solver.hpp"

namespace fgl {

/// Everything one CLI run needs. Text form: INI-like sections with
/// `key = value` lines and `#` comments; see print-config for the defaults.
struct ExperimentConfig {
    NormKind norm_kind = NormKind::quadratic;
    CoefficientProfile a = CoefficientProfile::constant(1.0);
    CoefficientProfile b = CoefficientProfile::constant(1.0);
    double beta_theta = 0.0;
    double beta_phi = 0.0;

    MeasureKind measure = MeasureKind::busemann_hausdorff;

    int n_theta = 128;
    int n_phi = 128;

    double lambda = 1.5;
    double epsilon = 0.25;

    SectorKind sector = SectorKind::theta_winding;
    int m = 1;
    int n = 1;
    double separation = kPi;
    double noise = 0.0;
    bool pin_cores = true;

    SolverConfig solver;

    std::vector<double> eps_list{0.25, 0.125, 0.0625};
    double h_over_eps = 0.25;

    std::string output_dir = "out";
    std::uint64_t seed = 0;

    bool operator==(const ExperimentConfig& o) const;

    FinslerNorm make_norm() const {
        return norm_kind == NormKind::quadratic ? FinslerNorm::quadratic(a, b)
                                                : FinslerNorm::randers(a, b, Vec2(beta_theta, beta_phi));
    }

    Sector make_sector() const {
        Sector s;
        s.kind = sector;
        s.winding = sector == SectorKind::phi_winding ? n : m;
        s.separation = separation;
        return s;
    }

    SolverConfig solver_config() const {
        SolverConfig c = solver;
        c.rng_seed = seed;
        return c;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& v) {
    double x = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(x))
        throw ConstructionError("expected a finite number, got '" + v + "'");
    return x;
}

template <class Int>
Int parse_int(const std::string& v) {
    Int x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConstructionError("expected an integer, got '" + v + "'");
    return x;
}

inline bool parse_bool(const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConstructionError("expected true or false, got '" + v + "'");
}

inline CoefficientProfile parse_profile(const std::string& v) {
    const auto open = v.find('(');
    if (open == std::string::npos) return CoefficientProfile::constant(parse_double(v));
    if (v.back() != ')') throw ConstructionError("profile must look like shape(c0, amp)");
    const std::string name = trim(std::string_view(v).substr(0, open));
    const std::string args = v.substr(open + 1, v.size() - open - 2);
    const auto comma = args.find(',');
    if (comma == std::string::npos) throw ConstructionError("profile needs two arguments");
    const double c0 = parse_double(trim(std::string_view(args).substr(0, comma)));
    const double amp = parse_double(trim(std::string_view(args).substr(comma + 1)));
    using S = CoefficientProfile::Shape;
    for (S s : {S::cos_theta, S::cos_phi, S::cos_theta_cos_phi})
        if (name == CoefficientProfile::shape_name(s)) return CoefficientProfile::make(s, c0, amp);
    throw ConstructionError("unknown profile shape '" + name + "'");
}

inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + fmt_double(v[k]);
    return s;
}

inline std::vector<double> parse_list(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        if (t.empty()) throw ConstructionError("empty list entry");
        out.push_back(parse_double(t));
    }
    return out;
}

struct ConfigField {
    const char* section;
    const char* key;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

inline const std::vector<ConfigField>& config_fields() {
    using C = ExperimentConfig;
    using V = const std::string&;
    auto dbl = [](double C::*m) {
        return std::pair{std::function<void(C&, V)>([m](C& c, V v) { c.*m = parse_double(v); }),
                         std::function<std::string(const C&)>([m](const C& c) { return fmt_double(c.*m); })};
    };
    auto integer = [](int C::*m) {
        return std::pair{std::function<void(C&, V)>([m](C& c, V v) { c.*m = parse_int<int>(v); }),
                         std::function<std::string(const C&)>([m](const C& c) { return std::to_string(c.*m); })};
    };
    auto field = [](const char* sec, const char* key, auto p) { return ConfigField{sec, key, p.first, p.second}; };

    static const std::vector<ConfigField> fields = {
        {"norm", "kind",
         [](C& c, V v) {
             if (v == "quadratic") c.norm_kind = NormKind::quadratic;
             else if (v == "randers") c.norm_kind = NormKind::randers;
             else throw ConstructionError("expected quadratic or randers, got '" + v + "'");
         },
         [](const C& c) { return std::string(c.norm_kind == NormKind::quadratic ? "quadratic" : "randers"); }},
        {"norm", "a", [](C& c, V v) { c.a = parse_profile(v); }, [](const C& c) { return c.a.to_string(); }},
        {"norm", "b", [](C& c, V v) { c.b = parse_profile(v); }, [](const C& c) { return c.b.to_string(); }},
        field("norm", "beta_theta", dbl(&C::beta_theta)),
        field("norm", "beta_phi", dbl(&C::beta_phi)),
        {"measure", "kind", [](C& c, V v) { c.measure = parse_measure_kind(v); },
         [](const C& c) { return std::string(measure_name(c.measure)); }},
        field("grid", "n_theta", integer(&C::n_theta)),
        field("grid", "n_phi", integer(&C::n_phi)),
        field("params", "lambda", dbl(&C::lambda)),
        field("params", "epsilon", dbl(&C::epsilon)),
        {"sector", "kind", [](C& c, V v) { c.sector = parse_sector_kind(v); },
         [](const C& c) { return std::string(sector_name(c.sector)); }},
        field("sector", "m", integer(&C::m)),
        field("sector", "n", integer(&C::n)),
        field("sector", "separation", dbl(&C::separation)),
        field("sector", "noise", dbl(&C::noise)),
        {"sector", "pin_cores", [](C& c, V v) { c.pin_cores = parse_bool(v); },
         [](const C& c) { return std::string(c.pin_cores ? "true" : "false"); }},
        {"solver", "max_iters", [](C& c, V v) { c.solver.max_iters = parse_int<int>(v); },
         [](const C& c) { return std::to_string(c.solver.max_iters); }},
        {"solver", "grad_tol", [](C& c, V v) { c.solver.grad_tol = parse_double(v); },
         [](const C& c) { return fmt_double(c.solver.grad_tol); }},
        {"solver", "step_rule", [](C& c, V v) { c.solver.step_rule = parse_step_rule(v); },
         [](const C& c) { return std::string(step_rule_name(c.solver.step_rule)); }},
        {"solver", "fixed_step", [](C& c, V v) { c.solver.fixed_step = parse_double(v); },
         [](const C& c) { return fmt_double(c.solver.fixed_step); }},
        {"solver", "gauge_reproject_every", [](C& c, V v) { c.solver.gauge_reproject_every = parse_int<int>(v); },
         [](const C& c) { return std::to_string(c.solver.gauge_reproject_every); }},
        {"solver", "precondition", [](C& c, V v) { c.solver.precondition = parse_bool(v); },
         [](const C& c) { return std::string(c.solver.precondition ? "true" : "false"); }},
        {"solver", "checkpoint_every", [](C& c, V v) { c.solver.checkpoint_every = parse_int<int>(v); },
         [](const C& c) { return std::to_string(c.solver.checkpoint_every); }},
        {"sweep", "eps_list", [](C& c, V v) { c.eps_list = parse_list(v); },
         [](const C& c) { return fmt_list(c.eps_list); }},
        field("sweep", "h_over_eps", dbl(&C::h_over_eps)),
        {"output", "dir", [](C& c, V v) { c.output_dir = v; }, [](const C& c) { return c.output_dir; }},
        {"output", "seed", [](C& c, V v) { c.seed = parse_int<std::uint64_t>(v); },
         [](const C& c) { return std::to_string(c.seed); }},
    };
    return fields;
}

}  // namespace detail

inline bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    for (const auto& f : detail::config_fields())
        if (f.get(*this) != f.get(o)) return false;
    return true;
}

inline std::string serialize_config(const ExperimentConfig& c) {
    std::string out;
    std::string section;
    for (const auto& f : detail::config_fields()) {
        if (section != f.section) {
            section = f.section;
            out += (out.empty() ? "[" : "\n[") + section + "]\n";
        }
        out += std::string(f.key) + " = " + f.get(c) + "\n";
    }
    return out;
}

/// Cross-field checks. `where(section, key)` names the source of a field in
/// error messages.
inline void validate_config(const ExperimentConfig& c,
                            const std::function<std::string(const char*, const char*)>& where) {
    auto fail = [&](const char* sec, const char* key, const std::string& msg) {
        throw ConfigError(where(sec, key) + ": [" + sec + "] " + key + ": " + msg);
    };
    try {
        (void)c.make_norm();
    } catch (const ConstructionError& e) {
        fail("norm", c.norm_kind == NormKind::randers ? "beta_theta" : "a", e.what());
    }
    if (c.norm_kind == NormKind::quadratic && (c.beta_theta != 0.0 || c.beta_phi != 0.0))
        fail("norm", "beta_theta", "a quadratic norm has no drift");
    try {
        (void)PeriodicGrid(c.n_theta, 8);
    } catch (const ConstructionError& e) {
        fail("grid", "n_theta", e.what());
    }
    try {
        (void)PeriodicGrid(8, c.n_phi);
    } catch (const ConstructionError& e) {
        fail("grid", "n_phi", e.what());
    }
    if (!(c.lambda > 0.0)) fail("params", "lambda", "must be > 0");
    if (!(c.epsilon > 0.0)) fail("params", "epsilon", "must be > 0");
    if (!(c.noise >= 0.0)) fail("sector", "noise", "must be >= 0");
    if (c.sector == SectorKind::vortex_pair && (!(c.separation > 0.0) || c.separation > 2.0 * kPi - 1.0))
        fail("sector", "separation", "must lie in (0, 2pi - 1)");
    if (c.solver.max_iters < 1) fail("solver", "max_iters", "must be >= 1");
    if (!(c.solver.grad_tol > 0.0)) fail("solver", "grad_tol", "must be > 0");
    if (c.solver.fixed_step < 0.0) fail("solver", "fixed_step", "must be >= 0");
    if (c.solver.gauge_reproject_every < 0) fail("solver", "gauge_reproject_every", "must be >= 0");
    if (c.solver.checkpoint_every < 0) fail("solver", "checkpoint_every", "must be >= 0");
    if (c.eps_list.empty()) fail("sweep", "eps_list", "must not be empty");
    for (std::size_t k = 0; k < c.eps_list.size(); ++k) {
        if (!(c.eps_list[k] > 0.0)) fail("sweep", "eps_list", "entries must be > 0");
        if (k > 0 && !(c.eps_list[k] < c.eps_list[k - 1])) fail("sweep", "eps_list", "must be strictly decreasing");
    }
    if (!(c.h_over_eps > 0.0) || c.h_over_eps > 0.25) fail("sweep", "h_over_eps", "must lie in (0, 0.25]");
    if (c.output_dir.empty()) fail("output", "dir", "must not be empty");
}

inline void validate_config(const ExperimentConfig& c) {
    validate_config(c, [](const char*, const char*) { return std::string("config"); });
}

/// Parses and validates. Errors name the line (or "default") and the field.
inline ExperimentConfig parse_config(std::istream& is, const std::string& source = "config") {
    ExperimentConfig c;
    std::map<std::string, int> seen;  // "section.key" -> line
    std::string section;
    std::string line;
    int lineno = 0;
    const auto& fields = detail::config_fields();
    auto at = [&](int l) { return source + ":" + std::to_string(l); };
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string t = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError(at(lineno) + ": malformed section header '" + t + "'");
            section = detail::trim(std::string_view(t).substr(1, t.size() - 2));
            bool known = false;
            for (const auto& f : fields) known = known || section == f.section;
            if (!known) throw ConfigError(at(lineno) + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(at(lineno) + ": expected 'key = value'");
        if (section.empty()) throw ConfigError(at(lineno) + ": key outside any section");
        const std::string key = detail::trim(std::string_view(t).substr(0, eq));
        const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
        const detail::ConfigField* field = nullptr;
        for (const auto& f : fields)
            if (section == f.section && key == f.key) field = &f;
        if (!field) throw ConfigError(at(lineno) + ": unknown key '" + key + "' in [" + section + "]");
        const std::string id = section + "." + key;
        if (seen.count(id))
            throw ConfigError(at(lineno) + ": [" + section + "] " + key + " already set on line " +
                              std::to_string(seen[id]));
        seen[id] = lineno;
        if (value.empty()) throw ConfigError(at(lineno) + ": [" + section + "] " + key + ": missing value");
        try {
            field->set(c, value);
        } catch (const ConstructionError& e) {
            throw ConfigError(at(lineno) + ": [" + section + "] " + key + ": " + e.what());
        }
    }
    validate_config(c, [&](const char* sec, const char* key) {
        const auto it = seen.find(std::string(sec) + "." + key);
        return it == seen.end() ? source + ":default" : at(it->second);
    });
    return c;
}

inline ExperimentConfig parse_config_string(const std::string& text, const std::string& source = "config") {
    std::istringstream is(text);
    return parse_config(is, source);
}

}  // namespace fgl
