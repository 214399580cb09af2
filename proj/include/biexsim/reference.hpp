// reference.hpp: phonon-free unitary evolution, the dressed-state rate
// model and the independent-boson coherence.

#pragma once

#include <array>
#include <vector>

#include "biexsim/model.hpp"
#include "biexsim/pathint.hpp"

namespace biexsim {

struct UnitaryOptions {
    Matrix3c initial_state{Matrix3c::Zero()};  // zero means |0><0|
    double tolerance{1e-12};                   // absolute and relative step-control tolerance
};

struct UnitaryResult {
    std::vector<ReducedState> states;  // at the grid times t_0 .. t_N
    double max_purity_defect{0.0};     // max |Tr rho^2 - Tr rho0^2|
};

/// Integrates the von Neumann equation of the bare rotating-frame Hamiltonian
/// with adaptive Dormand–Prince steps; output is dense at the grid times.
UnitaryResult unitary_evolve(const DotParameters& dot, const PulseSpec& pulse, const TimeGrid& grid,
                             const UnitaryOptions& options = {});

struct RateModelConfig {
    bool secular{true};     // populations follow their tracked dressed state
    double rate_floor{0.0}; // 1/ps; rates below it are dropped

    void validate() const;
};

/// Golden-rule transition rates between the dressed states of `spectrum`,
/// rates(j, i) = rate of i -> j in 1/ps. Downhill transitions carry n + 1,
/// uphill ones n.
Eigen::Matrix3d golden_rule_rates(const DotParameters& dot, const PhononBath& bath, const DressedSpectrum& spectrum,
                                  double rate_floor = 0.0);

struct DressedRateState {
    double time_ps{0.0};
    std::array<double, kLevels> energies_meV{};  // per tracked label
    std::array<double, kLevels> populations{};   // per tracked label
    Occupations bare;                            // populations mapped onto |0>, |X>, |XX>
};

struct DressedRateResult {
    std::vector<DressedRateState> states;  // at the grid times t_0 .. t_N
    bool crossing_flagged{false};
    std::vector<double> crossing_times_ps;  // end of each step where tracked labels swapped energy order
};

/// Markovian rate equations between instantaneous dressed states. The
/// basis is re-diagonalized at every grid time and labels follow the
/// largest eigenvector overlap with the previous step. With `secular` off,
/// populations are re-projected through the squared overlaps instead.
DressedRateResult dressed_rate_evolve(const DotParameters& dot, const PulseSpec& pulse, const PhononBath& bath,
                                      const TimeGrid& grid, const RateModelConfig& config = {});

/// Thermal populations over the given energies at temperature `temperature_K`.
std::array<double, kLevels> boltzmann_populations(const std::array<double, kLevels>& energies_meV,
                                                  double temperature_K);

/// exp(-phi(t)) with phi(t) = ∫ J(w)/w² [coth(hbar w/2kT)(1 - cos wt) + i sin wt] dw:
/// the decay of a ground/exciton coherence of the undriven dot.
Complex independent_boson_coherence(const PhononBath& bath, double t_ps);

}  // namespace biexsim
