// quadrature.hpp: adaptive Gauss–Kronrod integration over finite intervals

#pragma once

#include <functional>
#include <string_view>

namespace biexsim {

struct QuadratureOptions {
    double relative_tolerance{1e-12};
    unsigned max_depth{25};
};

/// Integrates `f` over [a, b]. The error estimate is checked against the
/// tolerance relative to the L1 norm of the integrand; a miss throws
/// QuadratureError carrying the achieved estimate.
double integrate(const std::function<double(double)>& f, double a, double b, std::string_view what,
                 const QuadratureOptions& options = {});

}  // namespace biexsim
