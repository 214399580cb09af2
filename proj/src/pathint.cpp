#include "biexsim/pathint.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "biexsim/errors.hpp"
#include "biexsim/kernel_cache.hpp"
#include "biexsim/units.hpp"

namespace biexsim {

namespace {

constexpr int kPairs = kLevels * kLevels;  // (forward, backward) labels per cell

std::size_t pow9(int n) {
    std::size_t v = 1;
    for (int i = 0; i < n; ++i) v *= kPairs;
    return v;
}

int forward_of(int pair) { return pair / kLevels; }
int backward_of(int pair) { return pair % kLevels; }

Matrix3c hermitian_exponential(const Matrix3c& k) {
    Eigen::SelfAdjointEigenSolver<Matrix3c> eig(k);
    Eigen::Vector3cd phases;
    for (int i = 0; i < kLevels; ++i) phases(i) = std::polar(1.0, -eig.eigenvalues()(i));
    return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

// Liouville-space action of a one-cell propagator on a path label pair:
// (U rho U^dagger)_{ab} = sum_{cd} U_ac rho_cd conj(U_bd).
Eigen::Matrix<Complex, kPairs, kPairs> pair_propagator(const Matrix3c& u) {
    Eigen::Matrix<Complex, kPairs, kPairs> m;
    for (int p = 0; p < kPairs; ++p) {
        for (int q = 0; q < kPairs; ++q) {
            m(p, q) = u(forward_of(p), forward_of(q)) * std::conj(u(backward_of(p), backward_of(q)));
        }
    }
    return m;
}

struct InfluenceFactors {
    std::array<Complex, kPairs> self{};                          // lag 0
    std::vector<Eigen::Matrix<Complex, kPairs, kPairs>> lagged;  // lag k at index k-1: (later, earlier)
};

Complex lag_weight(Complex eta, double later_diff, double nu_fwd, double nu_bwd) {
    return std::exp(-later_diff * (eta * nu_fwd - std::conj(eta) * nu_bwd));
}

InfluenceFactors influence_factors(const InfluenceKernel& kernel, const std::array<double, kLevels>& nu,
                                   bool fold_tail) {
    InfluenceFactors f;
    const Complex eta0 = kernel.eta[0];
    for (int p = 0; p < kPairs; ++p) {
        const double a = nu[forward_of(p)];
        const double b = nu[backward_of(p)];
        f.self[p] = lag_weight(eta0, a - b, a, b);
    }
    for (int k = 1; k <= kernel.memory; ++k) {
        Complex eta = kernel.eta[static_cast<std::size_t>(k)];
        if (k == kernel.memory && fold_tail) eta += kernel.tail;
        Eigen::Matrix<Complex, kPairs, kPairs> m;
        for (int p = 0; p < kPairs; ++p) {
            const double diff = nu[forward_of(p)] - nu[backward_of(p)];
            for (int q = 0; q < kPairs; ++q) m(p, q) = lag_weight(eta, diff, nu[forward_of(q)], nu[backward_of(q)]);
        }
        f.lagged.push_back(m);
    }
    return f;
}

// New labels whose forward/backward couplings differ by the same amount get
// identical weights from every earlier cell.
struct DiffClasses {
    std::array<int, kPairs> class_of{};
    std::vector<int> representative;
};

DiffClasses diff_classes(const std::array<double, kLevels>& nu) {
    DiffClasses c;
    std::vector<double> seen;
    for (int p = 0; p < kPairs; ++p) {
        const double d = nu[forward_of(p)] - nu[backward_of(p)];
        auto it = std::find(seen.begin(), seen.end(), d);
        if (it == seen.end()) {
            c.class_of[p] = static_cast<int>(seen.size());
            seen.push_back(d);
            c.representative.push_back(p);
        } else {
            c.class_of[p] = static_cast<int>(it - seen.begin());
        }
    }
    return c;
}

Matrix3c to_matrix(const Eigen::Matrix<Complex, kPairs, 1>& v) {
    Matrix3c rho;
    for (int p = 0; p < kPairs; ++p) rho(forward_of(p), backward_of(p)) = v(p);
    return rho;
}

}  // namespace

Occupations occupations_of(const Matrix3c& rho) {
    return {rho(0, 0).real(), rho(1, 1).real(), rho(2, 2).real()};
}

void TimeGrid::validate() const {
    if (!(dt_ps > 0.0) || !std::isfinite(dt_ps)) throw std::invalid_argument("grid.dt must be > 0");
    if (n_steps < 1) throw std::invalid_argument("grid.n_steps must be >= 1");
    if (memory < 1 || memory > n_steps) throw std::invalid_argument("grid.memory must lie in [1, n_steps]");
    if (!std::isfinite(t_start_ps)) throw std::invalid_argument("grid.t_start must be finite");
}

TimeGrid TimeGrid::for_pulse(const PulseSpec& pulse, double dt_ps, int memory, double half_width_fwhm) {
    if (!(dt_ps > 0.0)) throw std::invalid_argument("grid.dt must be > 0");
    if (!(half_width_fwhm > 0.0)) throw std::invalid_argument("grid window must be > 0");
    double half = half_width_fwhm * pulse.fwhm_ps;
    if (pulse.shape == PulseShape::gaussian && pulse.gdd_ps2 != 0.0) {
        // A chirped pulse is longer; keep the same number of widths around it.
        const double tau0_sq = 2.0 * pulse.sigma_ps() * pulse.sigma_ps();
        half *= std::sqrt(1.0 + (pulse.gdd_ps2 / tau0_sq) * (pulse.gdd_ps2 / tau0_sq));
    }
    if (pulse.shape == PulseShape::flat_top) half = 0.5 * pulse.fwhm_ps;
    TimeGrid grid;
    grid.dt_ps = dt_ps;
    grid.n_steps = std::max(1, static_cast<int>(std::ceil(2.0 * half / dt_ps - 1e-9)));
    grid.t_start_ps = pulse.center_ps - 0.5 * grid.n_steps * dt_ps;
    grid.memory = std::min(memory, grid.n_steps);
    return grid;
}

Matrix3c coherent_propagator(const DotParameters& dot, const PulseSpec& pulse, double t_a, double t_b,
                             const std::array<double, kLevels>& shift_meV, double max_substep_ps) {
    const double span = t_b - t_a;
    if (span == 0.0) return Matrix3c::Identity();
    const int substeps = std::max(1, static_cast<int>(std::ceil(std::abs(span) / max_substep_ps)));
    const double h = span / substeps;
    const double gauss = h / (2.0 * std::sqrt(3.0));
    Matrix3c shift = Matrix3c::Zero();
    for (int i = 0; i < kLevels; ++i) shift(i, i) = shift_meV[i];

    Matrix3c u = Matrix3c::Identity();
    for (int s = 0; s < substeps; ++s) {
        const double mid = t_a + (s + 0.5) * h;
        const Matrix3c h1 = (rotating_frame_hamiltonian(dot, pulse, mid - gauss) + shift) / units::hbar;
        const Matrix3c h2 = (rotating_frame_hamiltonian(dot, pulse, mid + gauss) + shift) / units::hbar;
        const Matrix3c commutator = h2 * h1 - h1 * h2;
        const Matrix3c k = 0.5 * h * (h1 + h2) - Complex(0.0, std::sqrt(3.0) / 12.0 * h * h) * commutator;
        u = hermitian_exponential(0.5 * (k + k.adjoint().eval())) * u;
    }
    return u;
}

std::size_t adm_bytes(int memory) {
    // current + next ADM, the precomputed lag products and the GEMM buffer
    return 4 * pow9(memory) * sizeof(Complex);
}

PropagationResult propagate(const DotParameters& dot, const PulseSpec& pulse, const PhononBath& bath,
                            const TimeGrid& grid, const PropagationOptions& options) {
    grid.validate();
    if (adm_bytes(grid.memory) > options.memory_budget_bytes) {
        throw MemoryBudgetError(adm_bytes(grid.memory), options.memory_budget_bytes);
    }
    const InfluenceKernel kernel = KernelCache::global().get(bath, grid.dt_ps, grid.memory);
    return propagate(dot, pulse, bath, grid, kernel, options);
}

PropagationResult propagate(const DotParameters& dot, const PulseSpec& pulse, const PhononBath& bath,
                            const TimeGrid& grid, const InfluenceKernel& kernel,
                            const PropagationOptions& options) {
    dot.validate();
    pulse.validate();
    bath.validate();
    grid.validate();
    if (kernel.memory != grid.memory || kernel.dt_ps != grid.dt_ps) {
        throw std::invalid_argument("propagate: kernel does not match the time grid");
    }
    for (const Complex& eta : kernel.eta) {
        if (!std::isfinite(eta.real()) || !std::isfinite(eta.imag())) {
            throw SolverError("propagate: influence kernel is not finite");
        }
    }
    const int memory = grid.memory;
    const std::size_t required = adm_bytes(memory);
    if (required > options.memory_budget_bytes) throw MemoryBudgetError(required, options.memory_budget_bytes);

    const auto nu = dot.coupling_diagonal();
    // The influence functional lowers each level by nu^2 times the polaron
    // shift; adding it back keeps the detuning referenced to the renormalized
    // (observed) two-photon resonance.
    const double shift = units::hbar * polaron_shift(bath);
    const std::array<double, kLevels> offsets{nu[0] * nu[0] * shift, nu[1] * nu[1] * shift, nu[2] * nu[2] * shift};

    const InfluenceFactors factors = influence_factors(kernel, nu, options.fold_tail);
    const DiffClasses classes = diff_classes(nu);
    const auto n_classes = static_cast<Eigen::Index>(classes.representative.size());
    const std::size_t total = pow9(memory);
    const std::size_t rest_count = total / kPairs;

    // Product of the lag-0 .. lag-(memory-1) weights of a new label with the
    // labels still held in memory; fixed for the whole propagation.
    std::vector<Complex> lag_products(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        const int s = static_cast<int>(idx % kPairs);
        std::size_t rest = idx / kPairs;
        Complex g = factors.self[s];
        for (int k = 1; k < memory; ++k) {
            g *= factors.lagged[static_cast<std::size_t>(k - 1)](s, static_cast<int>(rest % kPairs));
            rest /= kPairs;
        }
        lag_products[idx] = g;
    }
    // Weights between the oldest label and each class of new label: (oldest, class).
    Eigen::Matrix<Complex, kPairs, Eigen::Dynamic> oldest(kPairs, n_classes);
    for (Eigen::Index c = 0; c < n_classes; ++c) {
        oldest.col(c) = factors.lagged.back().row(classes.representative[static_cast<std::size_t>(c)]).transpose();
    }

    Matrix3c rho0 = options.initial_state;
    if (rho0.isZero(0.0)) rho0(0, 0) = 1.0;

    PropagationResult result;
    result.grid = grid;
    if (options.record_history) result.states.reserve(static_cast<std::size_t>(grid.n_steps) + 1);
    if (options.record_history) result.states.push_back({grid.time(0), rho0});

    auto half_in = [&](int cell) {
        return coherent_propagator(dot, pulse, grid.time(cell), grid.time(cell) + 0.5 * grid.dt_ps, offsets,
                                   options.max_substep_ps);
    };
    auto half_out = [&](int cell) {
        return coherent_propagator(dot, pulse, grid.time(cell) + 0.5 * grid.dt_ps, grid.time(cell + 1), offsets,
                                   options.max_substep_ps);
    };

    // Index layout: label of the newest cell is the least significant base-9
    // digit. Labels of cells before t_0 are the (0,0) pair, whose influence
    // weights are identically 1.
    std::vector<Complex> adm(total, Complex{0.0, 0.0});
    std::vector<Complex> next(total);
    Eigen::MatrixXcd carried(static_cast<Eigen::Index>(rest_count), n_classes);

    Matrix3c u_in = half_in(0);
    Matrix3c u_out = half_out(0);
    {
        const Matrix3c rho_mid = u_in * rho0 * u_in.adjoint();
        for (int p = 0; p < kPairs; ++p) {
            adm[static_cast<std::size_t>(p)] = rho_mid(forward_of(p), backward_of(p)) * factors.self[p];
        }
    }

    auto emit = [&](int cell) {
        Eigen::Matrix<Complex, kPairs, 1> reduced = Eigen::Matrix<Complex, kPairs, 1>::Zero();
        for (std::size_t idx = 0; idx < total; idx += kPairs) {
            for (int p = 0; p < kPairs; ++p) reduced(p) += adm[idx + static_cast<std::size_t>(p)];
        }
        Matrix3c rho = u_out * to_matrix(reduced) * u_out.adjoint();
        const Complex trace = rho.trace();
        result.max_trace_drift = std::max(result.max_trace_drift, std::abs(trace - 1.0));
        if (!std::isfinite(trace.real()) || std::abs(trace) < 1e-12) {
            throw SolverError("propagate: density matrix trace collapsed at t = " + std::to_string(grid.time(cell + 1)));
        }
        rho /= trace;
        rho = 0.5 * (rho + rho.adjoint().eval());
        if (options.record_history || cell + 1 == grid.n_steps) result.states.push_back({grid.time(cell + 1), rho});
    };

    if (options.record_history || grid.n_steps == 1) emit(0);

    for (int cell = 1; cell < grid.n_steps; ++cell) {
        const Matrix3c u_prev_out = u_out;
        u_in = half_in(cell);
        u_out = half_out(cell);
        const auto m = pair_propagator(u_in * u_prev_out);

        if (memory == 1) {
            // The only label in memory is also the one being summed out.
            const auto weights = factors.lagged.back().cwiseProduct(m);
            Eigen::Map<Eigen::Matrix<Complex, kPairs, 1>> a(adm.data());
            Eigen::Matrix<Complex, kPairs, 1> b = weights * a;
            for (int s = 0; s < kPairs; ++s) next[static_cast<std::size_t>(s)] = b(s) * factors.self[s];
        } else {
            const Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, kPairs>> a(
                adm.data(), static_cast<Eigen::Index>(rest_count), kPairs);
            carried.noalias() = a * oldest;
            std::array<const Complex*, kPairs> column{};
            for (int s = 0; s < kPairs; ++s) column[s] = carried.data() + classes.class_of[s] * rest_count;
            const Complex* g = lag_products.data();
            for (std::size_t rest = 0; rest < rest_count; ++rest) {
                const int newest_old = static_cast<int>(rest % kPairs);
                Complex* out = next.data() + rest * kPairs;
                const Complex* gr = g + rest * kPairs;
                for (int s = 0; s < kPairs; ++s) out[s] = m(s, newest_old) * gr[s] * column[s][rest];
            }
        }
        adm.swap(next);
        if (options.record_history || cell + 1 == grid.n_steps) emit(cell);
    }
    return result;
}

Occupations final_occupations(const DotParameters& dot, const PulseSpec& pulse, const PhononBath& bath,
                              const TimeGrid& grid) {
    PropagationOptions options;
    options.record_history = false;
    const PropagationResult r = propagate(dot, pulse, bath, grid, options);
    return occupations_of(r.states.back().rho);
}

ConvergenceResult converge(const DotParameters& dot, const PulseSpec& pulse, const PhononBath& bath,
                           double tolerance, const ConvergenceOptions& options) {
    if (!(tolerance > 0.0)) throw std::invalid_argument("converge: tolerance must be > 0");
    ConvergenceResult out;
    TimeGrid grid = TimeGrid::for_pulse(pulse, options.start.dt_ps, options.start.memory, options.window_fwhm);
    PropagationOptions prop;
    prop.record_history = false;
    prop.memory_budget_bytes = options.memory_budget_bytes;

    auto run = [&](const TimeGrid& g) { return occupations_of(propagate(dot, pulse, bath, g, prop).states.back().rho); };

    out.grid = grid;
    out.occupations = run(grid);
    for (int refinement = 0; refinement < options.max_refinements; ++refinement) {
        const TimeGrid finer =
            TimeGrid::for_pulse(pulse, options.refine_dt ? 0.5 * out.grid.dt_ps : out.grid.dt_ps, out.grid.memory + 1,
                                options.window_fwhm);
        if (adm_bytes(finer.memory) > options.memory_budget_bytes) break;
        const Occupations refined = run(finer);
        const double change = std::max({std::abs(refined.ground - out.occupations.ground),
                                        std::abs(refined.exciton - out.occupations.exciton),
                                        std::abs(refined.biexciton - out.occupations.biexciton)});
        out.changes.push_back(change);
        out.grid = finer;
        out.occupations = refined;
        if (change < tolerance) {
            out.converged = true;
            break;
        }
    }
    return out;
}

}  // namespace biexsim
