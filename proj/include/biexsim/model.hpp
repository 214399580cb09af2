// model.hpp: quantum-dot level scheme, driving pulse, phonon bath and the
// rotating-frame Hamiltonian of the ground/exciton/biexciton ladder.
//
// Basis order everywhere: |0> (ground), |X> (exciton), |XX> (biexciton).

#pragma once

#include <array>
#include <complex>
#include <optional>

#include <Eigen/Dense>

namespace biexsim {

using Complex = std::complex<double>;
using Matrix3c = Eigen::Matrix3cd;

inline constexpr int kLevels = 3;

struct DotParameters {
    double exciton_energy_meV{1421.2};
    double binding_energy_meV{2.3};    // > 0: bound biexciton
    double dipole_ratio{1.0};          // X<->XX over 0<->X dipole element
    double phonon_coupling_ratio{2.0}; // biexciton over exciton deformation coupling

    double biexciton_energy_meV() const { return 2.0 * exciton_energy_meV - binding_energy_meV; }

    /// Diagonal of the bath coupling operator in units of the exciton coupling.
    std::array<double, kLevels> coupling_diagonal() const { return {0.0, 1.0, phonon_coupling_ratio}; }

    void validate() const;
};

enum class PulseShape { gaussian, flat_top };

/// Excitation pulse. For the Gaussian shape `fwhm_ps` is the FWHM of the
/// unchirped field envelope; for the flat-top shape it is the full length of
/// the constant-amplitude window.
struct PulseSpec {
    double area_rad{0.0};
    double fwhm_ps{13.0};
    double detuning_meV{0.0};  // laser energy minus half the biexciton energy
    double gdd_ps2{0.0};       // group-delay dispersion (linear chirp)
    double center_ps{0.0};
    PulseShape shape{PulseShape::gaussian};

    /// Standard deviation of the unchirped Gaussian field envelope.
    double sigma_ps() const;

    void validate() const;
};

/// Deformation-potential coupling to bulk LA phonons with Gaussian
/// electron/hole confinement.
struct MaterialParameters {
    double electron_deformation_eV{7.0};
    double hole_deformation_eV{-3.5};
    double mass_density_kg_m3{5370.0};
    double sound_velocity_m_s{5110.0};
    double electron_radius_nm{3.0};
    double hole_radius_nm{3.0 / 1.15};
};

struct PhononBath {
    double temperature_K{4.2};
    double alpha_ps2{0.07};
    double cutoff_meV{1.25};
    std::optional<MaterialParameters> material{};

    double cutoff_frequency() const;  // omega_c in 1/ps
    bool coupled() const;
    void validate() const;
};

/// Instantaneous eigensystem of the rotating-frame Hamiltonian. Column k of
/// `vectors` belongs to `energies_meV[k]`; energies ascend.
struct DressedSpectrum {
    std::array<double, kLevels> energies_meV{};
    Matrix3c vectors{Matrix3c::Identity()};
    double time_ps{0.0};
};

/// Complex Rabi coupling f(t) in 1/ps; the Gaussian shape integrates to the area.
Complex envelope(const PulseSpec& pulse, double t_ps);

/// Hamiltonian (meV) in the frame rotating at the laser frequency for a given coupling value.
Matrix3c rotating_frame_hamiltonian(const DotParameters& dot, double detuning_meV, Complex rabi_coupling);

Matrix3c rotating_frame_hamiltonian(const DotParameters& dot, const PulseSpec& pulse, double t_ps);

/// Eigendecomposition with the largest component of each eigenvector made real positive.
DressedSpectrum diagonalize(const Matrix3c& hamiltonian, double t_ps = 0.0);

DressedSpectrum dressed_states(const DotParameters& dot, const PulseSpec& pulse, double t_ps);

/// Phonon spectral density J(omega) in 1/ps for omega in 1/ps.
double spectral_density(const PhononBath& bath, double omega);

/// Frequency at which J(omega) is maximal.
double spectral_density_peak(const PhononBath& bath);

/// Largest frequency at which J still carries weight (J/Jmax above ~1e-28).
double spectral_density_extent(const PhononBath& bath);

/// coth(hbar omega / 2 kT), equal to 1 at zero temperature.
double thermal_factor(const PhononBath& bath, double omega);

/// Bose occupation n(omega), zero at zero temperature.
double bose_occupation(const PhononBath& bath, double omega);

/// Scale that maps raw pulse area onto the renormalized axis (first resonant maximum at pi).
double pulse_area_axis(double first_resonant_max_rad);

}  // namespace biexsim
