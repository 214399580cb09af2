// sweep.hpp: grids of terminal occupations over pulse area, detuning and
// duration, maximum-fidelity curves and the CSV form of a sweep.

#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "biexsim/model.hpp"
#include "biexsim/pathint.hpp"
#include "biexsim/reference.hpp"

namespace biexsim {

inline constexpr std::string_view kVersion = "0.3.1";

enum class SolverKind { pathint, unitary, rates };

std::string_view solver_name(SolverKind solver);
SolverKind parse_solver(std::string_view name);  // throws std::invalid_argument

/// `renormalized` scales theta_pi by the area of the first phonon-free
/// resonant maximum of each duration, so that maximum sits at 1.
enum class AreaAxis { renormalized, raw };

std::string_view area_axis_name(AreaAxis axis);
AreaAxis parse_area_axis(std::string_view name);

struct SweepSpec {
    std::vector<double> areas_pi;
    std::vector<double> detunings_meV;
    std::vector<double> durations_ps;
    SolverKind solver{SolverKind::pathint};
    AreaAxis area_axis{AreaAxis::renormalized};

    DotParameters dot;
    PhononBath bath;
    double gdd_ps2{0.0};
    PulseShape shape{PulseShape::gaussian};

    double dt_ps{0.4};
    int memory{6};
    double window_fwhm{3.0};         // half-width of the simulation window in durations
    double converge_tolerance{0.0};  // > 0: refine each path-integral point until it moves less
    std::size_t memory_budget_bytes{std::size_t{3} << 30};
    RateModelConfig rates;

    int workers{1};

    void validate() const;  // throws std::invalid_argument
    std::size_t size() const { return areas_pi.size() * detunings_meV.size() * durations_ps.size(); }
};

struct SweepRow {
    double theta_pi{0.0};
    double detuning_meV{0.0};
    double fwhm_ps{0.0};
    double p_g{0.0};
    double p_x{0.0};
    double p_xx{0.0};
    SolverKind solver{SolverKind::pathint};
    double dt_ps{0.0};
    int n_c{0};
    bool converged{false};  // solved, and within the refinement tolerance when one is set
    std::string error{};    // not serialized

    bool operator==(const SweepRow& other) const;
};

struct SweepResult {
    SweepSpec spec;
    std::map<double, double> resonant_max_rad;  // duration -> first resonant maximum (renormalized axis only)
    std::vector<SweepRow> rows;                 // durations outermost, areas innermost
};

/// Raw area of the first maximum of the phonon-free resonant P_XX.
double first_resonant_maximum(const DotParameters& dot, double fwhm_ps, double gdd_ps2 = 0.0,
                              PulseShape shape = PulseShape::gaussian);

/// Evaluates every grid point; rows come back in grid order independent of
/// the worker count. Point failures are recorded in their row.
SweepResult run_sweep(const SweepSpec& spec);

struct FidelityPoint {
    double detuning_meV{0.0};
    double fwhm_ps{0.0};
    double max_p_xx{0.0};
    double argmax_theta_pi{0.0};
};

/// Maximum P_XX over the areas in [area_min_pi, area_max_pi] for each (duration, detuning).
std::vector<FidelityPoint> max_fidelity_curve(const SweepResult& result, double area_min_pi, double area_max_pi);

struct Plateau {
    double from{0.0};
    double to{0.0};
    double maximum{0.0};
    double width() const { return to - from; }
};

/// Longest contiguous run of samples with y >= max(y) - tolerance. `x` must ascend.
Plateau plateau(const std::vector<double>& x, const std::vector<double>& y, double tolerance);

inline constexpr double kPlateauTolerance = 0.02;

/// Plateau of P_XX over area (units of pi) at one detuning and duration.
Plateau robustness_metric(const SweepResult& result, double detuning_meV, double fwhm_ps,
                          double tolerance = kPlateauTolerance);

void write_csv(std::ostream& out, const SweepResult& result);

struct ParsedCsv {
    std::vector<std::string> header;  // comment lines without the leading "# "
    std::vector<SweepRow> rows;
};

ParsedCsv read_csv(std::istream& in);  // throws std::runtime_error naming the line

void write_max_fidelity_csv(std::ostream& out, const std::vector<FidelityPoint>& curve);

/// gnuplot script plotting P_XX over area per detuning and the maximum-fidelity curve.
void write_plot_script(std::ostream& out, const SweepResult& result, const std::string& sweep_csv,
                       const std::string& fidelity_csv);

}  // namespace biexsim
