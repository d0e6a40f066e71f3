#pragma once

/**
 * @file plant.hpp
 * @brief Average model of a grid-feeding inverter behind an L filter on a weak grid.
 *
 * All quantities are per unit. Three-phase variables are complex space vectors
 * (alpha + j beta). The model is
 *
 *   (L + Lg) di/dt = vc mu - vg - Rg i
 *   C dvc/dt       = p_i / vc - Re{mu conj(i)}
 *   d(phase)/dt    = omega
 *
 * and the PCC voltage follows algebraically from the two inductor equations.
 */

#include <cmath>
#include <complex>
#include <numbers>

namespace flatgrid {

/// Complex space vector (alpha-beta) or complex power / energy quantity.
using ComplexSV = std::complex<double>;

[[nodiscard]] inline double magnitude(ComplexSV z) noexcept { return std::abs(z); }

/// Angle in (-pi, pi].
[[nodiscard]] inline double angle(ComplexSV z) noexcept {
    const double a = std::atan2(z.imag(), z.real());
    return a == -std::numbers::pi ? std::numbers::pi : a;
}

inline constexpr double kMaxModulation = 1.0 / std::numbers::sqrt2;
inline constexpr double kNominalOmega = 2.0 * std::numbers::pi * 50.0;

struct PlantParams {
    double L = 0.02 / kNominalOmega;  ///< inverter filter inductance (pu s)
    double C = 48e-6;                 ///< DC-link capacitance (pu s)
    double Lg = 0.0;                  ///< grid inductance (pu s)
    double Rg = 0.0;                  ///< grid resistance (pu)
    double omega = kNominalOmega;     ///< grid angular frequency (rad/s)
    double vg_mag = 1.0;              ///< grid voltage magnitude (pu)

    /// Throws InvariantError if any physical constant is out of range.
    void validate() const;
};

struct PlantState {
    ComplexSV i{};     ///< injected current
    double vc = 1.0;   ///< DC-link voltage
    double phase = 0;  ///< grid source angle (rad)
};

struct PlantInput {
    ComplexSV mu{};   ///< modulation index
    double p_i = 0;   ///< input source power
};

struct PlantDerivative {
    ComplexSV di{};
    double dvc = 0;
    double dphase = 0;
};

struct Saturated {
    ComplexSV mu;
    bool clipped;
};

/// Clips |mu| to the SVM bound 1/sqrt(2), preserving the angle.
[[nodiscard]] Saturated saturate_modulation(ComplexSV mu) noexcept;

[[nodiscard]] ComplexSV grid_voltage(const PlantState& state, const PlantParams& params) noexcept;

/// Throws NonPositiveDcLink if state.vc <= 0.
[[nodiscard]] PlantDerivative plant_derivative(const PlantState& state, const PlantInput& input,
                                               const PlantParams& params);

[[nodiscard]] ComplexSV pcc_voltage(const PlantState& state, const PlantInput& input,
                                    const PlantParams& params) noexcept;

/// One classical RK4 step with the input held over the step.
[[nodiscard]] PlantState integrate_step(const PlantState& state, const PlantInput& input,
                                        const PlantParams& params, double dt);

}  // namespace flatgrid
