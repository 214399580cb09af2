#include "biexsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <system_error>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "biexsim/units.hpp"

namespace biexsim {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string& key, std::string_view text) {
    const std::string s = trim(text);
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ConfigError(key, "expected a number, got '" + s + "'");
    }
    return v;
}

int to_int(const std::string& key, std::string_view text) {
    const std::string s = trim(text);
    int v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
        throw ConfigError(key, "expected an integer, got '" + s + "'");
    }
    return v;
}

bool to_bool(const std::string& key, std::string_view text) {
    const std::string s = trim(text);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(key, "expected true or false, got '" + s + "'");
}

std::vector<double> to_list(const std::string& key, std::string_view text) {
    const std::string s = trim(text);
    std::vector<double> out;
    if (s.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::string_view rest = s;
        for (std::size_t colon; (colon = rest.find(':')) != std::string_view::npos;) {
            parts.push_back(to_double(key, rest.substr(0, colon)));
            rest.remove_prefix(colon + 1);
        }
        parts.push_back(to_double(key, rest));
        if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
            throw ConfigError(key, "expected a range start:stop:step with step > 0 and stop >= start");
        }
        const long n = std::lround((parts[1] - parts[0]) / parts[2]);
        if (n > 1000000) throw ConfigError(key, "range has too many points");
        for (long i = 0; i <= n; ++i) out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
        return out;
    }
    std::string_view rest = s;
    for (std::size_t comma; (comma = rest.find(',')) != std::string_view::npos;) {
        out.push_back(to_double(key, rest.substr(0, comma)));
        rest.remove_prefix(comma + 1);
    }
    out.push_back(to_double(key, rest));
    return out;
}

using Setter = std::function<void(const std::string& key, const std::string& value)>;

}  // namespace

PulseSpec RunConfig::resolved_pulse() const {
    PulseSpec p = pulse;
    const double scale = sweep.area_axis == AreaAxis::renormalized
                             ? first_resonant_maximum(sweep.dot, p.fwhm_ps, p.gdd_ps2, p.shape)
                             : units::pi;
    p.area_rad = area_pi * scale;
    return p;
}

TimeGrid RunConfig::grid_for(const PulseSpec& p) const {
    return TimeGrid::for_pulse(p, sweep.dt_ps, sweep.memory, sweep.window_fwhm);
}

RunConfig parse_config(std::istream& in, const std::string& source) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("", source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }

    RunConfig c;
    SweepSpec& s = c.sweep;
    MaterialParameters material;
    bool material_keys = false;
    std::optional<bool> material_flag;

    auto number = [](double& target) { return [&target](const std::string& k, const std::string& v) { target = to_double(k, v); }; };
    auto mat = [&](double& target) {
        return [&target, &material_keys](const std::string& k, const std::string& v) {
            target = to_double(k, v);
            material_keys = true;
        };
    };

    const std::map<std::string, Setter> setters{
        {"solver", [&](const std::string& k, const std::string& v) {
             try {
                 c.solver = parse_solver(trim(v));
             } catch (const std::invalid_argument& e) {
                 throw ConfigError(k, e.what());
             }
         }},
        {"dot.exciton_energy", number(s.dot.exciton_energy_meV)},
        {"dot.binding_energy", number(s.dot.binding_energy_meV)},
        {"dot.dipole_ratio", number(s.dot.dipole_ratio)},
        {"dot.phonon_coupling_ratio", number(s.dot.phonon_coupling_ratio)},
        {"pulse.area", number(c.area_pi)},
        {"pulse.area_axis", [&](const std::string& k, const std::string& v) {
             try {
                 s.area_axis = parse_area_axis(trim(v));
             } catch (const std::invalid_argument& e) {
                 throw ConfigError(k, e.what());
             }
         }},
        {"pulse.fwhm", number(c.pulse.fwhm_ps)},
        {"pulse.detuning", number(c.pulse.detuning_meV)},
        {"pulse.gdd", number(c.pulse.gdd_ps2)},
        {"pulse.center", number(c.pulse.center_ps)},
        {"pulse.shape", [&](const std::string& k, const std::string& v) {
             const std::string t = trim(v);
             if (t == "gaussian") c.pulse.shape = PulseShape::gaussian;
             else if (t == "flat_top") c.pulse.shape = PulseShape::flat_top;
             else throw ConfigError(k, "expected gaussian or flat_top, got '" + t + "'");
         }},
        {"bath.temperature", number(s.bath.temperature_K)},
        {"bath.alpha", number(s.bath.alpha_ps2)},
        {"bath.cutoff", number(s.bath.cutoff_meV)},
        {"bath.material", [&](const std::string& k, const std::string& v) { material_flag = to_bool(k, v); }},
        {"bath.deformation_electron", mat(material.electron_deformation_eV)},
        {"bath.deformation_hole", mat(material.hole_deformation_eV)},
        {"bath.density", mat(material.mass_density_kg_m3)},
        {"bath.sound_velocity", mat(material.sound_velocity_m_s)},
        {"bath.radius_electron", mat(material.electron_radius_nm)},
        {"bath.radius_hole", mat(material.hole_radius_nm)},
        {"grid.dt", number(s.dt_ps)},
        {"grid.memory", [&](const std::string& k, const std::string& v) { s.memory = to_int(k, v); }},
        {"grid.window", number(s.window_fwhm)},
        {"grid.converge_tolerance", number(s.converge_tolerance)},
        {"grid.memory_budget_mb", [&](const std::string& k, const std::string& v) {
             const int mb = to_int(k, v);
             if (mb < 1) throw ConfigError(k, "must be >= 1");
             s.memory_budget_bytes = static_cast<std::size_t>(mb) << 20;
         }},
        {"sweep.areas", [&](const std::string& k, const std::string& v) { s.areas_pi = to_list(k, v); }},
        {"sweep.detunings", [&](const std::string& k, const std::string& v) { s.detunings_meV = to_list(k, v); }},
        {"sweep.durations", [&](const std::string& k, const std::string& v) { s.durations_ps = to_list(k, v); }},
        {"sweep.workers", [&](const std::string& k, const std::string& v) { s.workers = to_int(k, v); }},
        {"rates.secular", [&](const std::string& k, const std::string& v) { s.rates.secular = to_bool(k, v); }},
        {"rates.floor", number(s.rates.rate_floor)},
        {"output.directory", [&](const std::string&, const std::string& v) { c.output.directory = trim(v); }},
        {"output.plot_script", [&](const std::string& k, const std::string& v) { c.output.plot_script = to_bool(k, v); }},
        {"output.kernel_cache", [&](const std::string&, const std::string& v) { c.output.kernel_cache = trim(v); }},
    };
    const std::vector<std::string> sections{"dot", "pulse", "bath", "grid", "sweep", "rates", "output"};

    auto apply = [&](const std::string& key, const std::string& value) {
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError(key, "unknown key");
        it->second(key, value);
    };

    for (const auto& [name, node] : tree) {
        const bool is_section = std::find(sections.begin(), sections.end(), name) != sections.end();
        if (node.empty() && !is_section) {
            apply(name, node.data());
            continue;
        }
        if (!is_section) throw ConfigError(name, "unknown section");
        for (const auto& [key, leaf] : node) {
            if (!leaf.empty()) throw ConfigError(name + "." + key, "nested keys are not allowed");
            apply(name + "." + key, leaf.data());
        }
    }

    if (material_flag.value_or(material_keys)) {
        s.bath.material = material;
    } else if (material_keys) {
        throw ConfigError("bath.material", "material parameters given but bath.material is false");
    }

    // Single-point defaults for the sweep lists follow the [pulse] section.
    if (s.areas_pi.empty()) s.areas_pi = {c.area_pi};
    if (s.detunings_meV.empty()) s.detunings_meV = {c.pulse.detuning_meV};
    if (s.durations_ps.empty()) s.durations_ps = {c.pulse.fwhm_ps};
    s.solver = c.solver;
    s.gdd_ps2 = c.pulse.gdd_ps2;
    s.shape = c.pulse.shape;

    auto check = [](const std::function<void()>& validate) {
        try {
            validate();
        } catch (const std::invalid_argument& e) {
            const std::string what = e.what();
            const auto colon = what.find(' ');
            throw ConfigError(what.substr(0, colon), what.substr(colon == std::string::npos ? 0 : colon + 1));
        }
    };
    check([&] {
        if (!(c.area_pi >= 0.0)) throw std::invalid_argument("pulse.area must be >= 0");
    });
    check([&] { c.pulse.validate(); });
    check([&] { s.validate(); });
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
    return parse_config(in, path);
}

}  // namespace biexsim
