// config.hpp: run configuration read from an INI file
//
// Sections: [dot], [pulse], [bath], [grid], [sweep], [rates], [output], plus
// a top-level `solver` key. Every key is optional; unknown keys, unknown
// sections and values of the wrong type are rejected with the offending key
// named. Comment lines start with ';'. List values are comma separated or
// an inclusive range `start:stop:step`.

#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "biexsim/sweep.hpp"

namespace biexsim {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, const std::string& message)
        : std::runtime_error(key.empty() ? message : key + ": " + message), key_(key) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

struct OutputConfig {
    std::string directory{"out"};
    bool plot_script{true};
    std::string kernel_cache{};  // optional cache file, loaded before and saved after a run
};

struct RunConfig {
    SolverKind solver{SolverKind::pathint};
    double area_pi{1.0};  // [pulse] area, on the `area_axis` scale
    PulseSpec pulse;      // area_rad is resolved by resolve_area()
    SweepSpec sweep;      // also carries dot, bath, grid and rate settings
    OutputConfig output;

    /// Pulse with its raw area filled in (runs the resonant-maximum search on the renormalized axis).
    PulseSpec resolved_pulse() const;
    TimeGrid grid_for(const PulseSpec& pulse) const;
};

/// Parses INI text; `source` names the input in error messages.
RunConfig parse_config(std::istream& in, const std::string& source = "config");

RunConfig load_config(const std::string& path);

}  // namespace biexsim
