#include "commands.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "biexsim/kernel_cache.hpp"
#include "biexsim/units.hpp"

namespace biexsim::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::ofstream open_output(const RunConfig& config, const std::string& name) {
    fs::create_directories(config.output.directory);
    const fs::path path = fs::path(config.output.directory) / name;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

// Kernels named in the config are loaded before a run and written back after it.
struct CacheScope {
    explicit CacheScope(const RunConfig& config) : path(config.output.kernel_cache) {
        if (!path.empty() && fs::exists(path)) KernelCache::global().load(path);
    }
    ~CacheScope() {
        if (path.empty()) return;
        try {
            KernelCache::global().save(path);
        } catch (const std::exception& e) {
            std::cerr << "warning: kernel cache not saved: " << e.what() << '\n';
        }
    }
    std::string path;
};

void write_header(std::ostream& out, const RunConfig& config, const PulseSpec& pulse) {
    const SweepSpec& s = config.sweep;
    out << "# biexsim " << kVersion << '\n';
    out << "# solver = " << solver_name(config.solver) << '\n';
    out << "# pulse.area_rad = " << num(pulse.area_rad) << " (" << num(config.area_pi) << " pi, "
        << area_axis_name(s.area_axis) << ")\n";
    out << "# pulse.fwhm_ps = " << num(pulse.fwhm_ps) << ", detuning_meV = " << num(pulse.detuning_meV)
        << ", gdd_ps2 = " << num(pulse.gdd_ps2) << '\n';
    out << "# bath.temperature_K = " << num(s.bath.temperature_K) << ", alpha_ps2 = " << num(s.bath.alpha_ps2)
        << ", cutoff_meV = " << num(s.bath.cutoff_meV) << (s.bath.material ? ", material form" : "") << '\n';
    out << "# grid.dt_ps = " << num(s.dt_ps) << ", memory = " << s.memory << '\n';
}

}  // namespace

int cmd_simulate(const RunConfig& config, std::ostream& out) {
    CacheScope cache(config);
    const PulseSpec pulse = config.resolved_pulse();
    const TimeGrid grid = config.grid_for(pulse);
    const SweepSpec& s = config.sweep;

    std::vector<ReducedState> states;
    double drift = 0.0;
    switch (config.solver) {
    case SolverKind::pathint: {
        PropagationOptions options;
        options.memory_budget_bytes = s.memory_budget_bytes;
        PropagationResult r = propagate(s.dot, pulse, s.bath, grid, options);
        states = std::move(r.states);
        drift = r.max_trace_drift;
        break;
    }
    case SolverKind::unitary:
        states = unitary_evolve(s.dot, pulse, grid).states;
        break;
    case SolverKind::rates:
        for (const DressedRateState& d : dressed_rate_evolve(s.dot, pulse, s.bath, grid, s.rates).states) {
            Matrix3c rho = Matrix3c::Zero();
            rho(0, 0) = d.bare.ground;
            rho(1, 1) = d.bare.exciton;
            rho(2, 2) = d.bare.biexciton;
            states.push_back({d.time_ps, rho});
        }
        break;
    }

    std::ofstream csv = open_output(config, "simulate.csv");
    write_header(csv, config, pulse);
    csv << "time_ps,p_g,p_x,p_xx,re_rho_gx,im_rho_gx,re_rho_xxx,im_rho_xxx,re_rho_gxx,im_rho_gxx\n";
    for (const ReducedState& st : states) {
        const Matrix3c& r = st.rho;
        csv << num(st.time_ps) << ',' << num(r(0, 0).real()) << ',' << num(r(1, 1).real()) << ','
            << num(r(2, 2).real()) << ',' << num(r(0, 1).real()) << ',' << num(r(0, 1).imag()) << ','
            << num(r(1, 2).real()) << ',' << num(r(1, 2).imag()) << ',' << num(r(0, 2).real()) << ','
            << num(r(0, 2).imag()) << '\n';
    }
    if (!csv) throw std::runtime_error("failed writing simulate.csv");

    const Occupations final_occ = occupations_of(states.back().rho);
    out << "area_rad = " << num(pulse.area_rad) << '\n';
    if (config.solver == SolverKind::pathint) out << "max_trace_drift = " << num(drift) << '\n';
    out << "P_0=" << num(final_occ.ground) << " P_X=" << num(final_occ.exciton) << " P_XX=" << num(final_occ.biexciton)
        << '\n';
    return kExitOk;
}

int cmd_sweep(const RunConfig& config, std::ostream& out) {
    CacheScope cache(config);
    const SweepResult result = run_sweep(config.sweep);

    {
        std::ofstream csv = open_output(config, "sweep.csv");
        write_csv(csv, result);
        if (!csv) throw std::runtime_error("failed writing sweep.csv");
    }
    const auto curve = max_fidelity_curve(result, config.sweep.areas_pi.front(), config.sweep.areas_pi.back());
    {
        std::ofstream csv = open_output(config, "max_fidelity.csv");
        write_max_fidelity_csv(csv, curve);
    }
    if (config.output.plot_script) {
        std::ofstream gp = open_output(config, "sweep.gp");
        write_plot_script(gp, result, "sweep.csv", "max_fidelity.csv");
    }

    std::size_t failed = 0;
    for (const SweepRow& row : result.rows) {
        if (!row.error.empty()) {
            ++failed;
            std::cerr << "point theta=" << num(row.theta_pi) << " pi, detuning=" << num(row.detuning_meV)
                      << " meV, fwhm=" << num(row.fwhm_ps) << " ps failed: " << row.error << '\n';
        }
    }
    for (const FidelityPoint& p : curve) {
        out << "fwhm " << num(p.fwhm_ps) << " ps, detuning " << num(p.detuning_meV) << " meV: max P_XX "
            << num(p.max_p_xx) << " at " << num(p.argmax_theta_pi) << " pi\n";
    }
    out << result.rows.size() << " points written to " << (fs::path(config.output.directory) / "sweep.csv").string()
        << '\n';
    return failed == 0 ? kExitOk : kExitSolverFailure;
}

int cmd_dressed(const RunConfig& config, std::ostream& out) {
    const PulseSpec pulse = config.resolved_pulse();
    const TimeGrid grid = config.grid_for(pulse);
    const SweepSpec& s = config.sweep;

    std::ofstream csv = open_output(config, "dressed.csv");
    double peak_low = 0.0, peak_high = 0.0, peak_time = grid.time(0);
    std::ostringstream body;
    body << "time_ps,re_f,im_f,e0_meV,e1_meV,e2_meV,split10_meV,split21_meV,"
            "rate_0_1,rate_1_0,rate_0_2,rate_2_0,rate_1_2,rate_2_1\n";
    for (int k = 0; k <= grid.n_steps; ++k) {
        const double t = grid.time(k);
        const Complex f = envelope(pulse, t);
        const DressedSpectrum d = dressed_states(s.dot, pulse, t);
        const Eigen::Matrix3d g = golden_rule_rates(s.dot, s.bath, d, s.rates.rate_floor);
        const double low = d.energies_meV[1] - d.energies_meV[0];
        const double high = d.energies_meV[2] - d.energies_meV[1];
        if (low > peak_low) {
            peak_low = low;
            peak_time = t;
        }
        peak_high = std::max(peak_high, high);
        body << num(t) << ',' << num(f.real()) << ',' << num(f.imag()) << ',' << num(d.energies_meV[0]) << ','
             << num(d.energies_meV[1]) << ',' << num(d.energies_meV[2]) << ',' << num(low) << ',' << num(high) << ','
             << num(g(1, 0)) << ',' << num(g(0, 1)) << ',' << num(g(2, 0)) << ',' << num(g(0, 2)) << ','
             << num(g(2, 1)) << ',' << num(g(1, 2)) << '\n';
    }
    const double j_peak_meV = units::frequency_to_energy(spectral_density_peak(s.bath));
    write_header(csv, config, pulse);
    csv << "# peak_split10_meV = " << num(peak_low) << " at t = " << num(peak_time) << " ps\n";
    csv << "# peak_split21_meV = " << num(peak_high) << '\n';
    csv << "# spectral_density_peak_meV = " << num(j_peak_meV) << '\n';
    csv << body.str();
    if (!csv) throw std::runtime_error("failed writing dressed.csv");

    out << "peak_split10_meV = " << num(peak_low) << '\n';
    out << "peak_split21_meV = " << num(peak_high) << '\n';
    out << "spectral_density_peak_meV = " << num(j_peak_meV) << '\n';
    return kExitOk;
}

int cmd_kernel_cache(const RunConfig& config, std::ostream& out) {
    const fs::path path = config.output.kernel_cache.empty()
                              ? fs::path(config.output.directory) / "kernel_cache.txt"
                              : fs::path(config.output.kernel_cache);
    KernelCache& cache = KernelCache::global();
    if (fs::exists(path)) out << "loaded " << cache.load(path) << " kernels from " << path.string() << '\n';
    const SweepSpec& s = config.sweep;
    const InfluenceKernel kernel = cache.get(s.bath, s.dt_ps, s.memory);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    cache.save(path);

    out << "bath " << std::hex << bath_hash(s.bath) << std::dec << ", dt " << num(kernel.dt_ps) << " ps, memory "
        << kernel.memory << '\n';
    out << "k,re_eta,im_eta\n";
    for (std::size_t k = 0; k < kernel.eta.size(); ++k) {
        out << k << ',' << num(kernel.eta[k].real()) << ',' << num(kernel.eta[k].imag()) << '\n';
    }
    out << "tail," << num(kernel.tail.real()) << ',' << num(kernel.tail.imag()) << '\n';
    out << cache.size() << " kernels saved to " << path.string() << '\n';
    return kExitOk;
}

}  // namespace biexsim::cli
