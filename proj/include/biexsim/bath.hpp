// bath.hpp: phonon correlation function and the discretized influence kernel

#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "biexsim/model.hpp"

namespace biexsim {

/// Bath correlation function C(t) = ∫ J(w) [coth(hbar w / 2kT) cos(wt) - i sin(wt)] dw, in 1/ps².
Complex bath_correlation(const PhononBath& bath, double t_ps);

/// Polaron shift ∫ J(w)/w dw of the exciton, in 1/ps.
double polaron_shift(const PhononBath& bath);

/// Coefficients eta_k, k = 0..memory, of the discretized influence functional.
///
/// eta_k (k >= 1) is the double integral of C(t - t') over two time cells of
/// width dt separated by k cells; eta_0 is the integral over the ordered half
/// of a single cell (t' < t). `tail` is the sum of eta_k over the lags beyond
/// the memory, up to `tail_horizon_ps`.
struct InfluenceKernel {
    double dt_ps{0.0};
    int memory{0};
    std::vector<Complex> eta;
    Complex tail{0.0, 0.0};
};

inline constexpr double kDefaultTailHorizon = 20.0;  // ps

InfluenceKernel compute_kernel(const PhononBath& bath, double dt_ps, int memory,
                               double tail_horizon_ps = kDefaultTailHorizon);

/// Stable 64-bit identifier of the bath parameters (FNV-1a of their exact bit patterns).
std::uint64_t bath_hash(const PhononBath& bath);

}  // namespace biexsim
