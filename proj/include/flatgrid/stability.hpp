#pragma once

/**
 * @file stability.hpp
 * @brief Static transient-stability checks of the closed-loop error dynamics.
 *
 * With grid impedance present the error dynamics keep the companion structure
 *
 *   f(s) = s^3 + K2 s^2 + K1 s + K3,   K1, K3 real,  K2 complex,
 *
 * and stability is decided by the generalized Routh-Hurwitz conditions for a cubic
 * with one complex coefficient. The PCC-voltage derivatives that enter K2 are not
 * simulated here: they are supplied as worst-case bounds through an OperatingEnvelope.
 */

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flatgrid/controller.hpp"

namespace flatgrid::stability {

struct ClosedLoopCoeffs {
    double K1 = 0;
    ComplexSV K2{};
    double K3 = 0;
};

struct OperatingEnvelope {
    double e_theta = 0;      ///< bound on theta - theta_hat (rad)
    double vp_ratio = 1;     ///< bound on Vp / Vhat_p
    double dVp_over_Vp = 0;  ///< bound on dVp/dt / Vp (1/s), measured variant only
    std::optional<double> theta_dot;  ///< d(theta)/dt, defaults to the grid omega
};

struct GridLine {
    double L = 0;
    double Lg = 0;
    double Rg = 0;
    double omega = kNominalOmega;
};

[[nodiscard]] ClosedLoopCoeffs coeffs_measured(const ControllerGains& gains, const GridLine& line,
                                               const OperatingEnvelope& env);

[[nodiscard]] ClosedLoopCoeffs coeffs_filtered(const ControllerGains& gains, const GridLine& line,
                                               const OperatingEnvelope& env);

struct StabilityVerdict {
    bool stable = false;
    /// Left-hand sides of the three conditions; stable iff all are > 0.
    std::array<double, 3> margins{};
};

[[nodiscard]] StabilityVerdict routh_hurwitz_complex_cubic(const ClosedLoopCoeffs& c) noexcept;

struct ConservativeCheck {
    bool holds = false;
    double margin1 = 0;
    double margin2 = 0;
};

/// Sufficient conditions for the filtered loop with a real notch gain.
/// margin1 is independent of e_theta; margin2 uses the actual Khat_2r at env.e_theta
/// and the worst-case bound on |Khat_2i|. Throws AssumptionViolated if kappa_i != 0
/// or |e_theta| > pi/2.
[[nodiscard]] ConservativeCheck conservative_conditions(const ControllerGains& gains,
                                                        const GridLine& line,
                                                        const OperatingEnvelope& env);

struct SweepRow {
    double Xg = 0;
    StabilityVerdict verdict;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::optional<double> first_unstable_Xg;
};

/// Evaluates the Routh-Hurwitz verdict over grid reactances Xg (Lg = Xg / omega).
[[nodiscard]] SweepResult impedance_sweep(const ControllerGains& gains, double L, double Rg,
                                          double omega, std::span<const double> Xg_values,
                                          ControllerVariant variant,
                                          const OperatingEnvelope& env);

[[nodiscard]] std::string sweep_csv(const SweepResult& sweep);

}  // namespace flatgrid::stability
