#include "biexsim/bath.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "biexsim/quadrature.hpp"

namespace biexsim {

namespace {

// Integrand weights that lose precision through cancellation at small w·dt.
double one_minus_cos(double x) {
    const double s = std::sin(0.5 * x);
    return 2.0 * s * s;
}

double x_minus_sin(double x) {
    if (std::abs(x) < 1e-3) {
        const double x3 = x * x * x;
        return x3 / 6.0 - x3 * x * x / 120.0;
    }
    return x - std::sin(x);
}

// J(w) coth(...) is regular at w -> 0 but evaluates as 0 * inf there.
double thermal_density(const PhononBath& bath, double w) {
    if (w <= 0.0) return 0.0;
    return spectral_density(bath, w) * thermal_factor(bath, w);
}

double integrate_band(const PhononBath& bath, const std::function<double(double)>& f, std::string_view what) {
    return integrate(f, 0.0, spectral_density_extent(bath), what);
}

void mix(std::uint64_t& h, std::uint64_t value) {
    for (int byte = 0; byte < 8; ++byte) {
        h ^= (value >> (8 * byte)) & 0xffu;
        h *= 0x100000001b3ull;
    }
}

}  // namespace

Complex bath_correlation(const PhononBath& bath, double t_ps) {
    if (!(t_ps >= 0.0)) throw std::invalid_argument("bath_correlation: t must be >= 0");
    if (!bath.coupled()) return {0.0, 0.0};
    const double re = integrate_band(
        bath, [&](double w) { return thermal_density(bath, w) * std::cos(w * t_ps); }, "Re C(t)");
    const double im = integrate_band(
        bath, [&](double w) { return -spectral_density(bath, w) * std::sin(w * t_ps); }, "Im C(t)");
    return {re, im};
}

double polaron_shift(const PhononBath& bath) {
    if (!bath.coupled()) return 0.0;
    return integrate_band(
        bath, [&](double w) { return w > 0.0 ? spectral_density(bath, w) / w : 0.0; }, "polaron shift");
}

InfluenceKernel compute_kernel(const PhononBath& bath, double dt_ps, int memory, double tail_horizon_ps) {
    if (!(dt_ps > 0.0)) throw std::invalid_argument("compute_kernel: dt must be > 0");
    if (memory < 1) throw std::invalid_argument("compute_kernel: memory must be >= 1");

    InfluenceKernel kernel;
    kernel.dt_ps = dt_ps;
    kernel.memory = memory;
    kernel.eta.assign(static_cast<std::size_t>(memory) + 1, Complex{0.0, 0.0});
    if (!bath.coupled()) return kernel;

    auto over_w2 = [&](double w) { return spectral_density(bath, w) / (w * w); };

    const double re0 = integrate_band(
        bath,
        [&](double w) { return w > 0.0 ? over_w2(w) * thermal_factor(bath, w) * one_minus_cos(w * dt_ps) : 0.0; },
        "Re eta_0");
    const double im0 = integrate_band(
        bath, [&](double w) { return w > 0.0 ? -over_w2(w) * x_minus_sin(w * dt_ps) : 0.0; }, "Im eta_0");
    kernel.eta[0] = {re0, im0};

    const int horizon = std::max(memory, static_cast<int>(std::ceil(tail_horizon_ps / dt_ps)));
    for (int k = 1; k <= horizon; ++k) {
        const double lag = k * dt_ps;
        auto cell = [&](double w) { return 2.0 * over_w2(w) * one_minus_cos(w * dt_ps); };
        const double re = integrate_band(
            bath,
            [&](double w) { return w > 0.0 ? cell(w) * thermal_factor(bath, w) * std::cos(w * lag) : 0.0; },
            "Re eta_k");
        const double im = integrate_band(
            bath, [&](double w) { return w > 0.0 ? -cell(w) * std::sin(w * lag) : 0.0; }, "Im eta_k");
        if (k <= memory) {
            kernel.eta[static_cast<std::size_t>(k)] = {re, im};
        } else {
            kernel.tail += Complex{re, im};
        }
    }
    return kernel;
}

std::uint64_t bath_hash(const PhononBath& bath) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    mix(h, std::bit_cast<std::uint64_t>(bath.temperature_K));
    mix(h, std::bit_cast<std::uint64_t>(bath.alpha_ps2));
    mix(h, std::bit_cast<std::uint64_t>(bath.cutoff_meV));
    mix(h, bath.material ? 1u : 0u);
    if (bath.material) {
        const auto& m = *bath.material;
        for (double v : {m.electron_deformation_eV, m.hole_deformation_eV, m.mass_density_kg_m3,
                         m.sound_velocity_m_s, m.electron_radius_nm, m.hole_radius_nm}) {
            mix(h, std::bit_cast<std::uint64_t>(v));
        }
    }
    return h;
}

}  // namespace biexsim
