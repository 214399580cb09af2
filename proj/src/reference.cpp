#include "biexsim/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "biexsim/errors.hpp"
#include "biexsim/quadrature.hpp"
#include "biexsim/units.hpp"

namespace biexsim {

namespace {

using State = std::array<double, 2 * kLevels * kLevels>;

Matrix3c unpack(const State& x) {
    Matrix3c rho;
    for (int i = 0; i < kLevels * kLevels; ++i) rho(i / kLevels, i % kLevels) = {x[2 * i], x[2 * i + 1]};
    return rho;
}

State pack(const Matrix3c& rho) {
    State x{};
    for (int i = 0; i < kLevels * kLevels; ++i) {
        x[2 * i] = rho(i / kLevels, i % kLevels).real();
        x[2 * i + 1] = rho(i / kLevels, i % kLevels).imag();
    }
    return x;
}

double purity(const Matrix3c& rho) { return (rho * rho).trace().real(); }

// Permutation perm with new column perm[k] continuing old label k, chosen to
// maximize the summed squared overlaps.
std::array<int, kLevels> match_labels(const Matrix3c& previous, const Matrix3c& current) {
    const Eigen::Matrix3d overlap = (previous.adjoint() * current).cwiseAbs2();
    std::array<int, kLevels> perm{0, 1, 2};
    std::array<int, kLevels> best = perm;
    double best_score = -1.0;
    do {
        double score = 0.0;
        for (int k = 0; k < kLevels; ++k) score += overlap(k, perm[k]);
        if (score > best_score) {
            best_score = score;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

struct Tracked {
    std::array<double, kLevels> energies{};
    Matrix3c vectors{Matrix3c::Identity()};
};

Tracked reorder(const DressedSpectrum& s, const std::array<int, kLevels>& perm) {
    Tracked t;
    for (int k = 0; k < kLevels; ++k) {
        t.energies[k] = s.energies_meV[perm[k]];
        t.vectors.col(k) = s.vectors.col(perm[k]);
    }
    return t;
}

std::array<int, kLevels> energy_order(const std::array<double, kLevels>& energies) {
    std::array<int, kLevels> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return energies[a] < energies[b]; });
    return order;
}

Occupations bare_populations(const Matrix3c& vectors, const std::array<double, kLevels>& p) {
    std::array<double, kLevels> bare{};
    for (int a = 0; a < kLevels; ++a) {
        for (int k = 0; k < kLevels; ++k) bare[a] += std::norm(vectors(a, k)) * p[k];
    }
    return {bare[0], bare[1], bare[2]};
}

}  // namespace

UnitaryResult unitary_evolve(const DotParameters& dot, const PulseSpec& pulse, const TimeGrid& grid,
                             const UnitaryOptions& options) {
    dot.validate();
    pulse.validate();
    grid.validate();
    if (!(options.tolerance > 0.0)) throw std::invalid_argument("unitary_evolve: tolerance must be > 0");

    Matrix3c rho0 = options.initial_state;
    if (rho0.isZero(0.0)) rho0(0, 0) = 1.0;
    const double purity0 = purity(rho0);

    auto rhs = [&](const State& x, State& dxdt, double t) {
        const Matrix3c h = rotating_frame_hamiltonian(dot, pulse, t);
        const Matrix3c rho = unpack(x);
        const Matrix3c commutator = h * rho - rho * h;
        dxdt = pack(Complex(0.0, -1.0 / units::hbar) * commutator);
    };

    std::vector<double> times(static_cast<std::size_t>(grid.n_steps) + 1);
    for (int k = 0; k <= grid.n_steps; ++k) times[static_cast<std::size_t>(k)] = grid.time(k);

    UnitaryResult result;
    result.states.reserve(times.size());
    auto observe = [&](const State& x, double t) {
        const Matrix3c rho = unpack(x);
        result.max_purity_defect = std::max(result.max_purity_defect, std::abs(purity(rho) - purity0));
        result.states.push_back({t, rho});
    };

    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_dense_output(options.tolerance, options.tolerance, odeint::runge_kutta_dopri5<State>());
    State x = pack(rho0);
    try {
        odeint::integrate_times(stepper, rhs, x, times.begin(), times.end(), 0.1 * grid.dt_ps, observe,
                                odeint::max_step_checker(100000));
    } catch (const std::exception& e) {
        throw SolverError(std::string("unitary_evolve: step control failed: ") + e.what());
    }
    return result;
}

void RateModelConfig::validate() const {
    if (!(rate_floor >= 0.0) || !std::isfinite(rate_floor)) throw std::invalid_argument("rates.floor must be >= 0");
}

Eigen::Matrix3d golden_rule_rates(const DotParameters& dot, const PhononBath& bath, const DressedSpectrum& spectrum,
                                  double rate_floor) {
    Eigen::Matrix3d rates = Eigen::Matrix3d::Zero();
    if (!bath.coupled()) return rates;
    const auto nu = dot.coupling_diagonal();
    Matrix3c coupling = Matrix3c::Zero();
    for (int a = 0; a < kLevels; ++a) coupling(a, a) = nu[a];
    const Matrix3c elements = spectrum.vectors.adjoint() * coupling * spectrum.vectors;

    for (int i = 0; i < kLevels; ++i) {
        for (int j = 0; j < kLevels; ++j) {
            if (i == j) continue;
            const double gap = spectrum.energies_meV[i] - spectrum.energies_meV[j];
            const double omega = std::abs(units::energy_to_frequency(gap));
            if (omega == 0.0) continue;
            const double n = bose_occupation(bath, omega);
            const double thermal = gap > 0.0 ? n + 1.0 : n;
            const double rate = 2.0 * units::pi * std::norm(elements(j, i)) * spectral_density(bath, omega) * thermal;
            rates(j, i) = rate < rate_floor ? 0.0 : rate;
        }
    }
    return rates;
}

DressedRateResult dressed_rate_evolve(const DotParameters& dot, const PulseSpec& pulse, const PhononBath& bath,
                                      const TimeGrid& grid, const RateModelConfig& config) {
    dot.validate();
    pulse.validate();
    bath.validate();
    grid.validate();
    config.validate();

    DressedRateResult result;
    result.states.reserve(static_cast<std::size_t>(grid.n_steps) + 1);

    Tracked basis = reorder(dressed_states(dot, pulse, grid.time(0)), {0, 1, 2});
    std::array<double, kLevels> p{};
    for (int k = 0; k < kLevels; ++k) p[k] = std::norm(basis.vectors(0, k));
    result.states.push_back({grid.time(0), basis.energies, p, bare_populations(basis.vectors, p)});

    for (int step = 0; step < grid.n_steps; ++step) {
        const double t = grid.time(step + 1);
        const DressedSpectrum next = dressed_states(dot, pulse, t);
        const auto perm = match_labels(basis.vectors, next.vectors);
        Tracked moved = reorder(next, perm);
        if (energy_order(moved.energies) != energy_order(basis.energies)) {
            result.crossing_flagged = true;
            result.crossing_times_ps.push_back(t);
        }

        if (!config.secular) {
            const Eigen::Matrix3d overlap = (moved.vectors.adjoint() * basis.vectors).cwiseAbs2();
            std::array<double, kLevels> projected{};
            for (int j = 0; j < kLevels; ++j) {
                for (int k = 0; k < kLevels; ++k) projected[j] += overlap(j, k) * p[k];
            }
            const double total = std::accumulate(projected.begin(), projected.end(), 0.0);
            for (double& v : projected) v /= total;
            p = projected;
        }

        DressedSpectrum labelled;
        labelled.energies_meV = moved.energies;
        labelled.vectors = moved.vectors;
        labelled.time_ps = t;
        const Eigen::Matrix3d rates = golden_rule_rates(dot, bath, labelled, config.rate_floor);
        Eigen::Matrix3d generator = rates;
        for (int i = 0; i < kLevels; ++i) generator(i, i) = -rates.col(i).sum();
        const Eigen::Matrix3d transfer = (generator * grid.dt_ps).exp();
        Eigen::Vector3d v(p[0], p[1], p[2]);
        v = transfer * v;
        v /= v.sum();
        p = {v(0), v(1), v(2)};

        basis = moved;
        result.states.push_back({t, basis.energies, p, bare_populations(basis.vectors, p)});
    }
    return result;
}

std::array<double, kLevels> boltzmann_populations(const std::array<double, kLevels>& energies_meV,
                                                  double temperature_K) {
    if (!(temperature_K >= 0.0)) throw std::invalid_argument("boltzmann_populations: temperature must be >= 0");
    const double lowest = *std::min_element(energies_meV.begin(), energies_meV.end());
    std::array<double, kLevels> w{};
    for (int k = 0; k < kLevels; ++k) {
        if (temperature_K == 0.0) {
            w[k] = energies_meV[k] == lowest ? 1.0 : 0.0;
        } else {
            w[k] = std::exp(-(energies_meV[k] - lowest) / (units::k_boltzmann * temperature_K));
        }
    }
    const double total = w[0] + w[1] + w[2];
    for (double& v : w) v /= total;
    return w;
}

Complex independent_boson_coherence(const PhononBath& bath, double t_ps) {
    if (!(t_ps >= 0.0)) throw std::invalid_argument("independent_boson_coherence: t must be >= 0");
    if (!bath.coupled() || t_ps == 0.0) return {1.0, 0.0};
    const double extent = spectral_density_extent(bath);
    auto over_w2 = [&](double w) { return spectral_density(bath, w) / (w * w); };
    const double re = integrate(
        [&](double w) {
            if (w <= 0.0) return 0.0;
            const double s = std::sin(0.5 * w * t_ps);
            return over_w2(w) * thermal_factor(bath, w) * 2.0 * s * s;
        },
        0.0, extent, "Re phi(t)");
    const double im = integrate([&](double w) { return w > 0.0 ? over_w2(w) * std::sin(w * t_ps) : 0.0; }, 0.0,
                                extent, "Im phi(t)");
    return std::exp(-Complex(re, im));
}

}  // namespace biexsim
