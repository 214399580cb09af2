#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "biexsim/pathint.hpp"
#include "biexsim/reference.hpp"
#include "biexsim/sweep.hpp"
#include "biexsim/units.hpp"

using namespace biexsim;

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return sum * h / 3.0;
}

double final_p_xx_unitary(const PulseSpec& p) {
    const TimeGrid g = TimeGrid::for_pulse(p, 0.4, 1);
    return occupations_of(unitary_evolve(DotParameters{}, p, g).states.back().rho).biexciton;
}

}  // namespace

TEST_CASE("unitary evolution without a pulse stays in the ground state") {
    PulseSpec p;
    const UnitaryResult r = unitary_evolve(DotParameters{}, p, TimeGrid::for_pulse(p));
    for (const ReducedState& s : r.states) {
        CHECK(std::abs(s.rho(0, 0) - 1.0) < 1e-14);
        CHECK(s.rho.cwiseAbs().sum() == doctest::Approx(1.0));
    }
}

TEST_CASE("unitary evolution keeps the state pure") {
    PulseSpec p;
    p.area_rad = 25.0;
    p.detuning_meV = 0.3;
    p.gdd_ps2 = 12.0;
    const UnitaryResult r = unitary_evolve(DotParameters{}, p, TimeGrid::for_pulse(p, 0.2, 1));
    CHECK(r.max_purity_defect < 1e-8);
    for (const ReducedState& s : r.states) {
        const double purity = (s.rho * s.rho).trace().real();
        CHECK(std::abs(purity - 1.0) < 1e-8);
    }
}

TEST_CASE("resonant two-photon Rabi oscillation speeds up with area") {
    PulseSpec p;
    std::vector<double> areas, values;
    for (double a = 0.05; a <= 30.0; a += 0.05) {
        p.area_rad = a * units::pi;
        areas.push_back(a);
        values.push_back(final_p_xx_unitary(p));
    }
    std::vector<double> maxima;
    double largest = 0.0;
    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
        if (values[i] > values[i - 1] && values[i] >= values[i + 1] && values[i] > 0.5) {
            maxima.push_back(areas[i]);
            largest = std::max(largest, values[i]);
        }
    }
    REQUIRE(maxima.size() >= 4);
    CHECK(largest > 0.99);
    for (std::size_t i = 2; i < maxima.size(); ++i) {
        CAPTURE(i);
        CHECK(maxima[i] - maxima[i - 1] < maxima[i - 1] - maxima[i - 2]);
    }
}

TEST_CASE("off-resonant drive without phonons leaves the biexciton mostly empty") {
    PulseSpec p;
    p.detuning_meV = 0.65;
    const double unit = first_resonant_maximum(DotParameters{}, 13.0);
    double best = 0.0;
    for (double a = 0.0; a <= 4.0; a += 0.05) {
        p.area_rad = a * unit;
        best = std::max(best, final_p_xx_unitary(p));
    }
    CHECK(best < 0.5);
}

TEST_CASE("golden-rule rates") {
    DotParameters dot;
    PulseSpec p;
    p.area_rad = 20.0;
    p.detuning_meV = 0.65;
    const DressedSpectrum d = dressed_states(dot, p, 0.0);

    SUBCASE("no uphill rates at zero temperature") {
        PhononBath cold;
        cold.temperature_K = 0.0;
        const Eigen::Matrix3d g = golden_rule_rates(dot, cold, d);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                if (d.energies_meV[j] > d.energies_meV[i]) CHECK(g(j, i) == 0.0);
                if (d.energies_meV[j] < d.energies_meV[i]) CHECK(g(j, i) > 0.0);
            }
        }
    }
    SUBCASE("detailed balance") {
        for (double temperature : {1.0, 4.2, 20.0}) {
            PhononBath bath;
            bath.temperature_K = temperature;
            const Eigen::Matrix3d g = golden_rule_rates(dot, bath, d);
            CHECK(g.minCoeff() >= 0.0);
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    if (d.energies_meV[j] <= d.energies_meV[i]) continue;
                    const double gap = d.energies_meV[j] - d.energies_meV[i];
                    const double boltzmann = std::exp(-gap / (units::k_boltzmann * temperature));
                    CHECK(g(j, i) / g(i, j) == doctest::Approx(boltzmann).epsilon(1e-10));
                }
            }
        }
    }
    SUBCASE("rate floor") {
        const Eigen::Matrix3d g = golden_rule_rates(dot, PhononBath{}, d);
        double smallest = 1e300;
        for (int i = 0; i < 9; ++i) {
            if (g(i) > 0.0) smallest = std::min(smallest, g(i));
        }
        const Eigen::Matrix3d floored = golden_rule_rates(dot, PhononBath{}, d, smallest * 1.0001);
        for (int i = 0; i < 9; ++i) CHECK(floored(i) == (g(i) == smallest ? 0.0 : g(i)));
        RateModelConfig bad;
        bad.rate_floor = -1.0;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    }
}

TEST_CASE("long flat-top drive thermalizes the dressed populations") {
    PulseSpec p;
    p.shape = PulseShape::flat_top;
    p.fwhm_ps = 200.0;
    p.area_rad = 600.0;
    p.detuning_meV = 0.65;
    const TimeGrid g{-99.5, 0.5, 398, 1};
    for (bool secular : {true, false}) {
        RateModelConfig c;
        c.secular = secular;
        const DressedRateResult r = dressed_rate_evolve(DotParameters{}, p, PhononBath{}, g, c);
        const DressedRateState& last = r.states.back();
        const auto thermal = boltzmann_populations(last.energies_meV, 4.2);
        for (int k = 0; k < 3; ++k) CHECK(last.populations[k] == doctest::Approx(thermal[k]).epsilon(1e-6));
    }
}

TEST_CASE("rate model conserves population and starts in the ground state") {
    PulseSpec p;
    p.area_rad = 3.0 * first_resonant_maximum(DotParameters{}, 13.0);
    p.detuning_meV = 0.65;
    const TimeGrid g = TimeGrid::for_pulse(p, 0.1, 1);
    const DressedRateResult r = dressed_rate_evolve(DotParameters{}, p, PhononBath{}, g);
    CHECK(r.states.front().bare.ground == doctest::Approx(1.0).epsilon(1e-10));
    for (const DressedRateState& s : r.states) {
        CHECK(std::abs(s.populations[0] + s.populations[1] + s.populations[2] - 1.0) < 1e-10);
        CHECK(std::abs(s.bare.sum() - 1.0) < 1e-10);
        for (double q : s.populations) CHECK(q >= -1e-12);
    }
    CHECK_FALSE(r.crossing_flagged);
}

TEST_CASE("rate model follows the path integral on the plateau") {
    PulseSpec p;
    p.area_rad = 3.0 * first_resonant_maximum(DotParameters{}, 13.0);
    p.detuning_meV = 0.65;
    const double exact = final_occupations(DotParameters{}, p, PhononBath{}, TimeGrid::for_pulse(p)).biexciton;
    for (bool secular : {true, false}) {
        RateModelConfig c;
        c.secular = secular;
        const DressedRateResult r = dressed_rate_evolve(DotParameters{}, p, PhononBath{}, TimeGrid::for_pulse(p, 0.1, 1), c);
        CAPTURE(secular);
        CHECK(std::abs(r.states.back().bare.biexciton - exact) < 0.1);
    }
}

TEST_CASE("independent-boson coherence") {
    PhononBath bath;
    CHECK(independent_boson_coherence(bath, 0.0) == Complex(1.0, 0.0));
    CHECK_THROWS_AS(independent_boson_coherence(bath, -1.0), std::invalid_argument);

    PhononBath free = bath;
    free.alpha_ps2 = 0.0;
    for (double t : {0.5, 5.0, 40.0}) CHECK(independent_boson_coherence(free, t) == Complex(1.0, 0.0));

    const double t = 5.0;
    const double top = 12.0 * bath.cutoff_frequency();
    const double kt = units::k_boltzmann * bath.temperature_K;
    auto j_over_w2 = [&](double w) { return bath.alpha_ps2 * w * std::exp(-w * w / std::pow(bath.cutoff_frequency(), 2)); };
    const double re = simpson(
        [&](double w) {
            if (w == 0.0) return 0.0;
            return j_over_w2(w) / std::tanh(units::hbar * w / (2.0 * kt)) * (1.0 - std::cos(w * t));
        },
        0.0, top, 400000);
    const double im = simpson([&](double w) { return j_over_w2(w) * std::sin(w * t); }, 0.0, top, 400000);
    const Complex oracle = std::exp(-Complex(re, im));
    CHECK(std::abs(independent_boson_coherence(bath, t) - oracle) < 1e-6);
    CHECK(std::abs(independent_boson_coherence(bath, t)) < 1.0);
}

TEST_CASE("boltzmann populations") {
    const auto p = boltzmann_populations({-1.0, 0.0, 2.0}, 4.2);
    CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0));
    CHECK(p[1] / p[0] == doctest::Approx(std::exp(-1.0 / (units::k_boltzmann * 4.2))));
    const auto cold = boltzmann_populations({0.5, -0.2, 0.1}, 0.0);
    CHECK(cold[1] == 1.0);
    CHECK(cold[0] == 0.0);
}
