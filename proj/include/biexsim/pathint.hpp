// pathint.hpp: real-time path-integral propagation of the dot density matrix
//
// The phonon bath enters through a finite-memory influence functional. The
// augmented density matrix (ADM) carries the forward/backward path labels of
// the last `memory` time cells; each step applies the coherent one-cell
// propagator, multiplies the influence weights linking the new cell to every
// cell still in memory, and sums out the cell that leaves the memory window.
//
// Because the bath couples through diag(0, 1, c_XX), every electronic level
// is its own coupling class and a path label is one of the 9 (i, j) pairs.

#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "biexsim/bath.hpp"
#include "biexsim/model.hpp"

namespace biexsim {

struct TimeGrid {
    double t_start_ps{0.0};
    double dt_ps{0.4};
    int n_steps{1};
    int memory{6};  // n_c, in cells

    double time(int step) const { return t_start_ps + step * dt_ps; }
    double t_end_ps() const { return time(n_steps); }

    void validate() const;

    /// Window of `half_width_fwhm` pulse durations on each side of the pulse center.
    static TimeGrid for_pulse(const PulseSpec& pulse, double dt_ps = 0.4, int memory = 6,
                              double half_width_fwhm = 3.0);
};

struct ReducedState {
    double time_ps{0.0};
    Matrix3c rho{Matrix3c::Zero()};
};

struct Occupations {
    double ground{1.0};
    double exciton{0.0};
    double biexciton{0.0};

    double sum() const { return ground + exciton + biexciton; }
};

Occupations occupations_of(const Matrix3c& rho);

struct PropagationOptions {
    Matrix3c initial_state{Matrix3c::Zero()};  // zero means |0><0|
    bool record_history{true};                 // otherwise only the final state is returned
    std::size_t memory_budget_bytes{std::size_t{3} << 30};
    double max_substep_ps{0.01};  // sub-step length of the coherent propagator
    bool fold_tail{true};         // add the kernel tail beyond the memory to the last lag
};

struct PropagationResult {
    TimeGrid grid;
    std::vector<ReducedState> states;  // t_0 .. t_N, trace-normalized
    double max_trace_drift{0.0};       // max |Tr rho - 1| before normalization
};

/// Propagator U(t_b, t_a) of the bare rotating-frame Hamiltonian plus the
/// diagonal energy offsets `shift_meV`, from sub-stepped fourth-order Magnus.
Matrix3c coherent_propagator(const DotParameters& dot, const PulseSpec& pulse, double t_a, double t_b,
                             const std::array<double, kLevels>& shift_meV = {}, double max_substep_ps = 0.01);

/// Bytes needed by the ADM work arrays for a memory of `memory` cells.
std::size_t adm_bytes(int memory);

PropagationResult propagate(const DotParameters& dot, const PulseSpec& pulse, const PhononBath& bath,
                            const TimeGrid& grid, const PropagationOptions& options = {});

/// Same as propagate but with an explicitly supplied influence kernel.
PropagationResult propagate(const DotParameters& dot, const PulseSpec& pulse, const PhononBath& bath,
                            const TimeGrid& grid, const InfluenceKernel& kernel,
                            const PropagationOptions& options = {});

Occupations final_occupations(const DotParameters& dot, const PulseSpec& pulse, const PhononBath& bath,
                              const TimeGrid& grid);

struct ConvergenceOptions {
    TimeGrid start{};          // dt and memory of the first run; the window comes from the pulse
    double window_fwhm{3.0};
    int max_refinements{3};
    std::size_t memory_budget_bytes{std::size_t{3} << 30};
    // false keeps dt and only extends the memory, which isolates the
    // truncation error from the time-step error
    bool refine_dt{true};
};

struct ConvergenceResult {
    TimeGrid grid;
    Occupations occupations;
    bool converged{false};
    std::vector<double> changes;  // max occupation change of each refinement
};

/// Halves dt (unless `refine_dt` is off) and extends the memory by one cell until the terminal
/// occupations move by less than `tolerance`. A refinement that would exceed
/// the memory budget ends the search with `converged` false.
ConvergenceResult converge(const DotParameters& dot, const PulseSpec& pulse, const PhononBath& bath,
                           double tolerance, const ConvergenceOptions& options = {});

}  // namespace biexsim
