#include "biexsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <thread>

#include <boost/math/tools/minima.hpp>

#include "biexsim/errors.hpp"
#include "biexsim/units.hpp"

namespace biexsim {

namespace {

constexpr std::string_view kColumns = "theta_pi,detuning_meV,fwhm_ps,p_g,p_x,p_xx,solver,dt_ps,n_c,converged";

std::string format(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

double parse_double(std::string_view s, int line) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
        throw std::runtime_error("csv line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
    }
    return v;
}

int parse_int(std::string_view s, int line) {
    int v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
        throw std::runtime_error("csv line " + std::to_string(line) + ": bad integer '" + std::string(s) + "'");
    }
    return v;
}

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

void require_grid(const std::vector<double>& v, const char* name) {
    if (v.empty()) throw std::invalid_argument(std::string("sweep.") + name + " must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) throw std::invalid_argument(std::string("sweep.") + name + " must be finite");
        if (i > 0 && !(v[i] > v[i - 1])) {
            throw std::invalid_argument(std::string("sweep.") + name + " must be strictly increasing");
        }
    }
}

double terminal_p_xx(const DotParameters& dot, const PulseSpec& pulse) {
    const TimeGrid window = TimeGrid::for_pulse(pulse, 0.5 * pulse.fwhm_ps, 1);
    TimeGrid single{window.t_start_ps, window.t_end_ps() - window.t_start_ps, 1, 1};
    return unitary_evolve(dot, pulse, single).states.back().rho(2, 2).real();
}

SweepRow evaluate(const SweepSpec& spec, double theta_pi, double detuning, double fwhm, double area_rad) {
    SweepRow row;
    row.theta_pi = theta_pi;
    row.detuning_meV = detuning;
    row.fwhm_ps = fwhm;
    row.solver = spec.solver;
    row.dt_ps = spec.dt_ps;
    row.n_c = spec.solver == SolverKind::pathint ? spec.memory : 0;

    PulseSpec pulse;
    pulse.area_rad = area_rad;
    pulse.fwhm_ps = fwhm;
    pulse.detuning_meV = detuning;
    pulse.gdd_ps2 = spec.gdd_ps2;
    pulse.shape = spec.shape;

    try {
        const TimeGrid grid = TimeGrid::for_pulse(pulse, spec.dt_ps, spec.memory, spec.window_fwhm);
        Occupations occ;
        bool converged = true;
        switch (spec.solver) {
        case SolverKind::pathint:
            if (spec.converge_tolerance > 0.0) {
                ConvergenceOptions opts;
                opts.start = grid;
                opts.window_fwhm = spec.window_fwhm;
                opts.memory_budget_bytes = spec.memory_budget_bytes;
                const ConvergenceResult c = converge(spec.dot, pulse, spec.bath, spec.converge_tolerance, opts);
                occ = c.occupations;
                converged = c.converged;
                row.dt_ps = c.grid.dt_ps;
                row.n_c = c.grid.memory;
            } else {
                PropagationOptions opts;
                opts.record_history = false;
                opts.memory_budget_bytes = spec.memory_budget_bytes;
                occ = occupations_of(propagate(spec.dot, pulse, spec.bath, grid, opts).states.back().rho);
                row.n_c = grid.memory;
            }
            break;
        case SolverKind::unitary:
            occ = occupations_of(unitary_evolve(spec.dot, pulse, grid).states.back().rho);
            break;
        case SolverKind::rates:
            occ = dressed_rate_evolve(spec.dot, pulse, spec.bath, grid, spec.rates).states.back().bare;
            break;
        }
        row.p_g = occ.ground;
        row.p_x = occ.exciton;
        row.p_xx = occ.biexciton;
        row.converged = converged;
    } catch (const std::exception& e) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.p_g = row.p_x = row.p_xx = nan;
        row.converged = false;
        row.error = e.what();
    }
    return row;
}

}  // namespace

std::string_view solver_name(SolverKind solver) {
    switch (solver) {
    case SolverKind::pathint: return "pathint";
    case SolverKind::unitary: return "unitary";
    case SolverKind::rates: return "rates";
    }
    return "?";
}

SolverKind parse_solver(std::string_view name) {
    if (name == "pathint") return SolverKind::pathint;
    if (name == "unitary") return SolverKind::unitary;
    if (name == "rates") return SolverKind::rates;
    throw std::invalid_argument("unknown solver '" + std::string(name) + "' (pathint, unitary, rates)");
}

std::string_view area_axis_name(AreaAxis axis) { return axis == AreaAxis::raw ? "raw" : "renormalized"; }

AreaAxis parse_area_axis(std::string_view name) {
    if (name == "renormalized") return AreaAxis::renormalized;
    if (name == "raw") return AreaAxis::raw;
    throw std::invalid_argument("unknown area axis '" + std::string(name) + "' (renormalized, raw)");
}

void SweepSpec::validate() const {
    require_grid(areas_pi, "areas");
    require_grid(detunings_meV, "detunings");
    require_grid(durations_ps, "durations");
    if (areas_pi.front() < 0.0) throw std::invalid_argument("sweep.areas must be >= 0");
    if (durations_ps.front() <= 0.0) throw std::invalid_argument("sweep.durations must be > 0");
    if (!(dt_ps > 0.0) || !std::isfinite(dt_ps)) throw std::invalid_argument("grid.dt must be > 0");
    if (memory < 1) throw std::invalid_argument("grid.memory must be >= 1");
    if (!(window_fwhm > 0.0)) throw std::invalid_argument("grid.window must be > 0");
    if (!(converge_tolerance >= 0.0)) throw std::invalid_argument("grid.converge_tolerance must be >= 0");
    if (workers < 1) throw std::invalid_argument("sweep.workers must be >= 1");
    dot.validate();
    bath.validate();
    rates.validate();
    PulseSpec probe;
    probe.fwhm_ps = durations_ps.front();
    probe.gdd_ps2 = gdd_ps2;
    probe.shape = shape;
    probe.validate();
}

bool SweepRow::operator==(const SweepRow& o) const {
    return same(theta_pi, o.theta_pi) && same(detuning_meV, o.detuning_meV) && same(fwhm_ps, o.fwhm_ps) &&
           same(p_g, o.p_g) && same(p_x, o.p_x) && same(p_xx, o.p_xx) && solver == o.solver &&
           same(dt_ps, o.dt_ps) && n_c == o.n_c && converged == o.converged;
}

double first_resonant_maximum(const DotParameters& dot, double fwhm_ps, double gdd_ps2, PulseShape shape) {
    PulseSpec pulse;
    pulse.fwhm_ps = fwhm_ps;
    pulse.gdd_ps2 = gdd_ps2;
    pulse.shape = shape;
    pulse.validate();
    auto p_xx = [&](double area) {
        pulse.area_rad = area;
        return terminal_p_xx(dot, pulse);
    };

    // Walk up in area until P_XX has passed its first maximum above 1/2.
    const double step = 0.1 * units::pi;
    double prev2 = 0.0, prev = p_xx(step), area = step;
    for (int k = 2; k <= 400; ++k) {
        const double current = p_xx(k * step);
        if (prev > 0.5 && current < prev && prev >= prev2) {
            const auto best = boost::math::tools::brent_find_minima([&](double a) { return -p_xx(a); }, area - step,
                                                                    area + step, 40);
            return best.first;
        }
        prev2 = prev;
        prev = current;
        area = k * step;
    }
    throw SolverError("first_resonant_maximum: no resonant maximum below 40 pi");
}

SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();
    SweepResult result;
    result.spec = spec;

    std::vector<double> scale(spec.durations_ps.size(), units::pi);
    if (spec.area_axis == AreaAxis::renormalized) {
        for (std::size_t d = 0; d < spec.durations_ps.size(); ++d) {
            const double theta_star = first_resonant_maximum(spec.dot, spec.durations_ps[d], spec.gdd_ps2, spec.shape);
            result.resonant_max_rad[spec.durations_ps[d]] = theta_star;
            scale[d] = theta_star;
        }
    }

    const std::size_t na = spec.areas_pi.size();
    const std::size_t nd = spec.detunings_meV.size();
    result.rows.resize(spec.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < result.rows.size(); i = next++) {
            const std::size_t a = i % na;
            const std::size_t d = (i / na) % nd;
            const std::size_t t = i / (na * nd);
            result.rows[i] = evaluate(spec, spec.areas_pi[a], spec.detunings_meV[d], spec.durations_ps[t],
                                      spec.areas_pi[a] * scale[t]);
        }
    };
    const int threads = std::min<int>(spec.workers, static_cast<int>(result.rows.size()));
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < threads; ++w) pool.emplace_back(work);
    }
    return result;
}

std::vector<FidelityPoint> max_fidelity_curve(const SweepResult& result, double area_min_pi, double area_max_pi) {
    std::vector<FidelityPoint> curve;
    for (const SweepRow& row : result.rows) {
        if (row.theta_pi < area_min_pi || row.theta_pi > area_max_pi) continue;
        if (curve.empty() || curve.back().detuning_meV != row.detuning_meV || curve.back().fwhm_ps != row.fwhm_ps) {
            curve.push_back({row.detuning_meV, row.fwhm_ps, -1.0, std::numeric_limits<double>::quiet_NaN()});
        }
        FidelityPoint& p = curve.back();
        if (std::isfinite(row.p_xx) && row.p_xx > p.max_p_xx) {
            p.max_p_xx = row.p_xx;
            p.argmax_theta_pi = row.theta_pi;
        }
    }
    if (curve.empty()) throw std::invalid_argument("max_fidelity_curve: no areas inside the window");
    for (FidelityPoint& p : curve) {
        if (p.max_p_xx < 0.0) p.max_p_xx = std::numeric_limits<double>::quiet_NaN();
    }
    return curve;
}

Plateau plateau(const std::vector<double>& x, const std::vector<double>& y, double tolerance) {
    if (x.size() != y.size() || x.empty()) throw std::invalid_argument("plateau: need matching, non-empty samples");
    if (!(tolerance >= 0.0)) throw std::invalid_argument("plateau: tolerance must be >= 0");
    Plateau out;
    out.maximum = *std::max_element(y.begin(), y.end());
    std::size_t best_from = 0, best_to = 0;
    bool found = false;
    for (std::size_t i = 0; i < y.size();) {
        if (!(y[i] >= out.maximum - tolerance)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < y.size() && y[j + 1] >= out.maximum - tolerance) ++j;
        if (!found || x[j] - x[i] > x[best_to] - x[best_from]) {
            best_from = i;
            best_to = j;
            found = true;
        }
        i = j + 1;
    }
    out.from = x[best_from];
    out.to = x[best_to];
    return out;
}

Plateau robustness_metric(const SweepResult& result, double detuning_meV, double fwhm_ps, double tolerance) {
    std::vector<double> x, y;
    for (const SweepRow& row : result.rows) {
        if (row.detuning_meV != detuning_meV || row.fwhm_ps != fwhm_ps) continue;
        if (!std::isfinite(row.p_xx)) continue;
        x.push_back(row.theta_pi);
        y.push_back(row.p_xx);
    }
    if (x.size() < 10) {
        throw std::invalid_argument("robustness_metric: need at least 10 areas at detuning " + format(detuning_meV) +
                                    " meV, duration " + format(fwhm_ps) + " ps");
    }
    return plateau(x, y, tolerance);
}

void write_csv(std::ostream& out, const SweepResult& result) {
    const SweepSpec& s = result.spec;
    out << "# biexsim sweep\n";
    out << "# version = " << kVersion << '\n';
    out << "# solver = " << solver_name(s.solver) << '\n';
    out << "# area_axis = " << area_axis_name(s.area_axis) << '\n';
    out << "# dot.exciton_energy_meV = " << format(s.dot.exciton_energy_meV) << '\n';
    out << "# dot.binding_energy_meV = " << format(s.dot.binding_energy_meV) << '\n';
    out << "# dot.dipole_ratio = " << format(s.dot.dipole_ratio) << '\n';
    out << "# dot.phonon_coupling_ratio = " << format(s.dot.phonon_coupling_ratio) << '\n';
    out << "# pulse.gdd_ps2 = " << format(s.gdd_ps2) << '\n';
    out << "# pulse.shape = " << (s.shape == PulseShape::flat_top ? "flat_top" : "gaussian") << '\n';
    out << "# bath.temperature_K = " << format(s.bath.temperature_K) << '\n';
    if (s.bath.material) {
        const MaterialParameters& m = *s.bath.material;
        out << "# bath.material = D_e " << format(m.electron_deformation_eV) << " eV, D_h "
            << format(m.hole_deformation_eV) << " eV, rho " << format(m.mass_density_kg_m3) << " kg/m3, c_s "
            << format(m.sound_velocity_m_s) << " m/s, a_e " << format(m.electron_radius_nm) << " nm, a_h "
            << format(m.hole_radius_nm) << " nm\n";
    } else {
        out << "# bath.alpha_ps2 = " << format(s.bath.alpha_ps2) << '\n';
        out << "# bath.cutoff_meV = " << format(s.bath.cutoff_meV) << '\n';
    }
    out << "# grid.dt_ps = " << format(s.dt_ps) << '\n';
    out << "# grid.memory = " << s.memory << '\n';
    out << "# grid.window_fwhm = " << format(s.window_fwhm) << '\n';
    out << "# grid.converge_tolerance = " << format(s.converge_tolerance) << '\n';
    out << "# rates.secular = " << (s.rates.secular ? "true" : "false") << '\n';
    out << "# rates.floor = " << format(s.rates.rate_floor) << '\n';
    for (const auto& [fwhm, theta] : result.resonant_max_rad) {
        out << "# resonant_max_rad[" << format(fwhm) << " ps] = " << format(theta) << '\n';
    }
    out << kColumns << '\n';
    for (const SweepRow& r : result.rows) {
        out << format(r.theta_pi) << ',' << format(r.detuning_meV) << ',' << format(r.fwhm_ps) << ','
            << format(r.p_g) << ',' << format(r.p_x) << ',' << format(r.p_xx) << ',' << solver_name(r.solver) << ','
            << format(r.dt_ps) << ',' << r.n_c << ',' << (r.converged ? 1 : 0) << '\n';
    }
}

ParsedCsv read_csv(std::istream& in) {
    ParsedCsv parsed;
    std::string line;
    int number = 0;
    bool columns_seen = false;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        if (line.front() == '#') {
            parsed.header.push_back(line.size() > 2 ? line.substr(2) : std::string{});
            continue;
        }
        if (!columns_seen) {
            if (line != kColumns) throw std::runtime_error("csv line " + std::to_string(number) + ": unexpected columns");
            columns_seen = true;
            continue;
        }
        std::vector<std::string_view> fields;
        std::string_view rest = line;
        for (std::size_t comma; (comma = rest.find(',')) != std::string_view::npos;) {
            fields.push_back(rest.substr(0, comma));
            rest.remove_prefix(comma + 1);
        }
        fields.push_back(rest);
        if (fields.size() != 10) {
            throw std::runtime_error("csv line " + std::to_string(number) + ": expected 10 fields");
        }
        SweepRow row;
        row.theta_pi = parse_double(fields[0], number);
        row.detuning_meV = parse_double(fields[1], number);
        row.fwhm_ps = parse_double(fields[2], number);
        row.p_g = parse_double(fields[3], number);
        row.p_x = parse_double(fields[4], number);
        row.p_xx = parse_double(fields[5], number);
        try {
            row.solver = parse_solver(fields[6]);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error("csv line " + std::to_string(number) + ": " + e.what());
        }
        row.dt_ps = parse_double(fields[7], number);
        row.n_c = parse_int(fields[8], number);
        const int flag = parse_int(fields[9], number);
        if (flag != 0 && flag != 1) throw std::runtime_error("csv line " + std::to_string(number) + ": bad flag");
        row.converged = flag == 1;
        parsed.rows.push_back(row);
    }
    if (!columns_seen) throw std::runtime_error("csv: missing column header");
    return parsed;
}

void write_max_fidelity_csv(std::ostream& out, const std::vector<FidelityPoint>& curve) {
    out << "fwhm_ps,detuning_meV,max_p_xx,argmax_theta_pi\n";
    for (const FidelityPoint& p : curve) {
        out << format(p.fwhm_ps) << ',' << format(p.detuning_meV) << ',' << format(p.max_p_xx) << ','
            << format(p.argmax_theta_pi) << '\n';
    }
}

void write_plot_script(std::ostream& out, const SweepResult& result, const std::string& sweep_csv,
                       const std::string& fidelity_csv) {
    const SweepSpec& s = result.spec;
    out << "# gnuplot script for " << sweep_csv << "\n";
    out << "set datafile separator ','\n";
    out << "set terminal pngcairo size 1400,560\n";
    out << "set output 'sweep.png'\n";
    out << "set multiplot layout 1,2\n";
    out << "set xlabel 'pulse area (" << (s.area_axis == AreaAxis::raw ? "" : "renormalized, ") << "units of pi)'\n";
    out << "set ylabel 'P_{XX}'\n";
    out << "set yrange [0:1]\n";
    out << "set key outside right\n";
    out << "plot \\\n";
    bool first = true;
    for (double fwhm : s.durations_ps) {
        for (double det : s.detunings_meV) {
            if (!first) out << ", \\\n";
            first = false;
            out << "  '" << sweep_csv << "' using 1:((abs($2-(" << format(det) << "))<1e-12 && abs($3-("
                << format(fwhm) << "))<1e-12) ? $6 : 1/0) with linespoints title '" << format(det) << " meV, "
                << format(fwhm) << " ps'";
        }
    }
    out << "\n";
    out << "set xlabel 'detuning (meV)'\n";
    out << "set ylabel 'max P_{XX}'\n";
    out << "plot \\\n";
    first = true;
    for (double fwhm : s.durations_ps) {
        if (!first) out << ", \\\n";
        first = false;
        out << "  '" << fidelity_csv << "' using 2:(abs($1-(" << format(fwhm)
            << "))<1e-12 ? $3 : 1/0) with linespoints title '" << format(fwhm) << " ps'";
    }
    out << "\nunset multiplot\n";
}

}  // namespace biexsim
