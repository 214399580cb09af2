#include "biexsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "biexsim/units.hpp"

namespace biexsim {

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) throw std::invalid_argument(message);
}

// Extent of the spectral density in units of its Gaussian cutoff frequency.
constexpr double kCutoffMultiples = 8.5;

double material_cutoff(const MaterialParameters& m) {
    const double radius = std::min(m.electron_radius_nm, m.hole_radius_nm) * 1e-9;
    return std::sqrt(2.0) * m.sound_velocity_m_s / radius * 1e-12;
}

double material_density(const MaterialParameters& m, double omega) {
    const double w = omega * 1e12;  // 1/s
    const double c = m.sound_velocity_m_s;
    const double ae = m.electron_radius_nm * 1e-9;
    const double ah = m.hole_radius_nm * 1e-9;
    const double form = m.electron_deformation_eV * std::exp(-w * w * ae * ae / (4.0 * c * c)) -
                        m.hole_deformation_eV * std::exp(-w * w * ah * ah / (4.0 * c * c));
    const double prefactor = units::electron_volt_si * units::electron_volt_si /
                             (4.0 * units::pi * units::pi * m.mass_density_kg_m3 * units::hbar_si *
                              std::pow(c, 5));
    return prefactor * w * w * w * form * form * 1e-12;
}

}  // namespace

void DotParameters::validate() const {
    require(std::isfinite(exciton_energy_meV), "dot.exciton_energy must be finite");
    require(std::isfinite(binding_energy_meV), "dot.binding_energy must be finite");
    require(std::isfinite(dipole_ratio) && dipole_ratio > 0.0, "dot.dipole_ratio must be > 0");
    require(std::isfinite(phonon_coupling_ratio), "dot.phonon_coupling_ratio must be finite");
}

double PulseSpec::sigma_ps() const { return fwhm_ps / (2.0 * std::sqrt(2.0 * std::log(2.0))); }

void PulseSpec::validate() const {
    require(std::isfinite(area_rad) && area_rad >= 0.0, "pulse.area must be >= 0");
    require(std::isfinite(fwhm_ps) && fwhm_ps > 0.0, "pulse.fwhm must be > 0");
    require(std::isfinite(detuning_meV), "pulse.detuning must be finite");
    require(std::isfinite(gdd_ps2), "pulse.gdd must be finite");
    require(std::isfinite(center_ps), "pulse.center must be finite");
    require(shape == PulseShape::gaussian || gdd_ps2 == 0.0, "pulse.gdd requires the gaussian shape");
}

double PhononBath::cutoff_frequency() const { return units::energy_to_frequency(cutoff_meV); }

bool PhononBath::coupled() const {
    if (material) {
        return material->electron_deformation_eV != 0.0 || material->hole_deformation_eV != 0.0;
    }
    return alpha_ps2 > 0.0;
}

void PhononBath::validate() const {
    require(std::isfinite(temperature_K) && temperature_K >= 0.0, "bath.temperature must be >= 0");
    require(std::isfinite(alpha_ps2) && alpha_ps2 >= 0.0, "bath.alpha must be >= 0");
    require(std::isfinite(cutoff_meV) && cutoff_meV > 0.0, "bath.cutoff must be > 0");
    if (material) {
        require(material->mass_density_kg_m3 > 0.0, "bath.density must be > 0");
        require(material->sound_velocity_m_s > 0.0, "bath.sound_velocity must be > 0");
        require(material->electron_radius_nm > 0.0 && material->hole_radius_nm > 0.0,
                "bath confinement radii must be > 0");
    }
}

Complex envelope(const PulseSpec& pulse, double t_ps) {
    if (!std::isfinite(t_ps)) throw std::invalid_argument("envelope: time must be finite");
    if (!(pulse.fwhm_ps > 0.0)) throw std::invalid_argument("envelope: fwhm must be > 0");
    if (pulse.area_rad == 0.0) return {0.0, 0.0};

    const double s = t_ps - pulse.center_ps;
    if (pulse.shape == PulseShape::flat_top) {
        return std::abs(s) <= 0.5 * pulse.fwhm_ps ? Complex{pulse.area_rad / pulse.fwhm_ps, 0.0}
                                                  : Complex{0.0, 0.0};
    }

    const double sigma = pulse.sigma_ps();
    const double peak = pulse.area_rad / (sigma * std::sqrt(2.0 * units::pi));
    if (pulse.gdd_ps2 == 0.0) {
        return {peak * std::exp(-s * s / (2.0 * sigma * sigma)), 0.0};
    }

    // Linear chirp from a quadratic spectral phase: the envelope stretches,
    // its amplitude drops so that the pulse energy is unchanged, and it picks
    // up a quadratic temporal phase.
    const double tau0 = sigma * std::sqrt(2.0);
    const double tau0_sq = tau0 * tau0;
    const double gdd = pulse.gdd_ps2;
    const double stretch = std::sqrt(1.0 + (gdd / tau0_sq) * (gdd / tau0_sq));
    const double tau_chirped = tau0 * stretch;
    const double rate = gdd / (gdd * gdd + tau0_sq * tau0_sq);
    const double amplitude = peak / std::sqrt(stretch) * std::exp(-s * s / (tau_chirped * tau_chirped));
    return std::polar(amplitude, 0.5 * rate * s * s);
}

Matrix3c rotating_frame_hamiltonian(const DotParameters& dot, double detuning_meV, Complex rabi_coupling) {
    const Complex half = 0.5 * units::hbar * rabi_coupling;
    Matrix3c h = Matrix3c::Zero();
    h(1, 1) = 0.5 * dot.binding_energy_meV - detuning_meV;
    h(2, 2) = -2.0 * detuning_meV;
    h(0, 1) = half;
    h(1, 0) = std::conj(half);
    h(1, 2) = dot.dipole_ratio * half;
    h(2, 1) = std::conj(h(1, 2));
    return h;
}

Matrix3c rotating_frame_hamiltonian(const DotParameters& dot, const PulseSpec& pulse, double t_ps) {
    return rotating_frame_hamiltonian(dot, pulse.detuning_meV, envelope(pulse, t_ps));
}

DressedSpectrum diagonalize(const Matrix3c& hamiltonian, double t_ps) {
    Eigen::SelfAdjointEigenSolver<Matrix3c> solver(hamiltonian);
    DressedSpectrum out;
    out.time_ps = t_ps;
    out.vectors = solver.eigenvectors();
    for (int k = 0; k < kLevels; ++k) {
        out.energies_meV[k] = solver.eigenvalues()(k);
        Eigen::Index largest = 0;
        out.vectors.col(k).cwiseAbs().maxCoeff(&largest);
        const Complex pivot = out.vectors(largest, k);
        out.vectors.col(k) *= std::conj(pivot) / std::abs(pivot);
        out.vectors(largest, k) = std::abs(out.vectors(largest, k));
    }
    return out;
}

DressedSpectrum dressed_states(const DotParameters& dot, const PulseSpec& pulse, double t_ps) {
    return diagonalize(rotating_frame_hamiltonian(dot, pulse, t_ps), t_ps);
}

double spectral_density(const PhononBath& bath, double omega) {
    if (!(omega >= 0.0)) throw std::invalid_argument("spectral_density: omega must be >= 0");
    if (bath.material) return material_density(*bath.material, omega);
    const double wc = bath.cutoff_frequency();
    return bath.alpha_ps2 * omega * omega * omega * std::exp(-omega * omega / (wc * wc));
}

double spectral_density_peak(const PhononBath& bath) {
    if (!bath.material) return bath.cutoff_frequency() * std::sqrt(1.5);
    const double upper = spectral_density_extent(bath);
    const auto result = boost::math::tools::brent_find_minima(
        [&](double w) { return -spectral_density(bath, w); }, 0.0, upper / kCutoffMultiples * 3.0, 50);
    return result.first;
}

double spectral_density_extent(const PhononBath& bath) {
    const double wc = bath.material ? material_cutoff(*bath.material) : bath.cutoff_frequency();
    return kCutoffMultiples * wc;
}

double thermal_factor(const PhononBath& bath, double omega) {
    if (bath.temperature_K == 0.0) return 1.0;
    const double x = units::hbar * omega / (2.0 * units::k_boltzmann * bath.temperature_K);
    return 1.0 / std::tanh(x);
}

double bose_occupation(const PhononBath& bath, double omega) {
    if (bath.temperature_K == 0.0) return 0.0;
    const double x = units::hbar * omega / (units::k_boltzmann * bath.temperature_K);
    return 1.0 / std::expm1(x);
}

double pulse_area_axis(double first_resonant_max_rad) {
    if (!(first_resonant_max_rad > 0.0) || !std::isfinite(first_resonant_max_rad)) {
        throw std::invalid_argument("pulse_area_axis: first resonant maximum must be > 0");
    }
    return units::pi / first_resonant_max_rad;
}

}  // namespace biexsim
