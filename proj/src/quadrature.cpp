#include "biexsim/quadrature.hpp"

#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "biexsim/errors.hpp"

namespace biexsim {

double integrate(const std::function<double(double)>& f, double a, double b, std::string_view what,
                 const QuadratureOptions& options) {
    double error = 0.0;
    double l1 = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, a, b, options.max_depth, options.relative_tolerance, &error, &l1);
    // Allow a few ulps of slack on top of the requested relative accuracy.
    const double allowed = 10.0 * options.relative_tolerance * l1 + 1e-300;
    if (!std::isfinite(value) || error > allowed) {
        throw QuadratureError(std::string(what) + ": quadrature did not converge (error estimate " +
                                  std::to_string(error) + ", L1 norm " + std::to_string(l1) + ")",
                              error);
    }
    return value;
}

}  // namespace biexsim
