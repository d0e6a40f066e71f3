#pragma once

/**
 * @file controller.hpp
 * @brief Flatness-based instantaneous complex-power controller.
 *
 * Flat outputs:
 *   xi1 = 1/2 (L |i|^2 + C vc^2) + j eta     (complex energy, d eta/dt = q)
 *   xi2 = p_i - conj(v) i = p_i - p + j q    (complex power balance)
 *
 * The auxiliary input u = d(xi2r)/dt - k1 e1 - k2 e2 - k3 y with dy/dt = e1 renders
 * the error dynamics linear when v is the true PCC voltage of a stiff grid. The
 * filtered variant replaces the measured PCC voltage by the output of a notch
 * filter tuned to +omega, which decouples the loop from fast PCC voltage changes
 * on weak grids.
 */

#include "flatgrid/plant.hpp"

namespace flatgrid {

enum class ControllerVariant { Measured, Filtered };

struct ControllerGains {
    double k1 = 0;          ///< 1/s^2
    double k2 = 0;          ///< 1/s
    double k3 = 0;          ///< 1/s^3
    double delta_p = 0.01;  ///< pu, keeps the p_r update finite at p_r = 0
    ComplexSV kappa{};      ///< notch gain kappa_r + j kappa_i (1/s)

    void validate() const;
};

/// 2% settling-time convention for a first-order pole: a = 4.6 / ts.
inline constexpr double kSettlingFactor = 4.6;

/// Places three real poles at -4.6/ts_i. delta_p and kappa are left at defaults.
[[nodiscard]] ControllerGains gains_from_settling_times(double ts1, double ts2, double ts3);

/// Real notch gain kappa_r = 4.6 / ts.
[[nodiscard]] double notch_gain_from_settling_time(double ts);

/// Advances d(vhat)/dt = j omega vhat + kappa (vp - vhat) by dt.
///
/// The input is held as a positive-sequence vector over the step
/// (vp(t) = vp e^{j omega (t - t0)}), for which the update is exact:
/// in the rotating frame the filter is a first-order lag with rate kappa.
[[nodiscard]] ComplexSV notch_step(ComplexSV vhat, ComplexSV vp, ComplexSV kappa, double omega,
                                   double dt) noexcept;

struct FlatCoords {
    ComplexSV xi1{};
    ComplexSV xi2{};
};

/// `eta_imag` is the value placed on the imaginary axis of xi1. The controller only
/// tracks eta - eta_r, so it passes that error and a reference with zero imaginary part.
[[nodiscard]] FlatCoords build_flat_coords(ComplexSV i, double vc, ComplexSV v_used, double p_i,
                                           double eta_imag, double L, double C) noexcept;

struct ReferenceSet {
    double vcr = 1.3 * std::numbers::sqrt2;
    double dvcr = 0;
    double qr = 0;
    double dqr = 0;
    double p_i = 0;
    double dp_i = 0;
};

struct ControllerState {
    ComplexSV y{};       ///< integral of e_xi1
    double eta_err = 0;  ///< integral of q - q_r
    double p_r = 0;      ///< active power reference
    ComplexSV vhat_p{};  ///< notch filter state
};

struct ReferenceOutputs {
    ComplexSV xi1r{};   ///< imaginary part is zero, see build_flat_coords
    ComplexSV xi2r{};
    ComplexSV dxi2r{};
    double p_r_next = 0;
    double dp_r = 0;
    double dq_r = 0;
};

/// Instantaneous d(p_r)/dt.
[[nodiscard]] double reference_power_rate(const ReferenceSet& refs, double p_r, double v_used_mag,
                                          double L, double C, double delta_p) noexcept;

/// Evaluates the references at the current p_r and advances p_r over dt.
///
/// The p_r update is backward Euler (the rate at p_r = 0 is |v|^2 / (L delta_p), far
/// too stiff for an explicit step at controller rates), so dp_r equals both the
/// realised slope (p_r_next - p_r) / dt and the rate evaluated at p_r_next.
[[nodiscard]] ReferenceOutputs update_references(const ReferenceSet& refs,
                                                 const ControllerState& state, double v_used_mag,
                                                 double L, double C, double delta_p, double dt);

struct ControlLaw {
    ComplexSV mu{};
    ComplexSV e1{};
    ComplexSV e2{};
};

/// Control law built on the measured PCC voltage. Throws ZeroPccVoltage.
[[nodiscard]] ControlLaw control_measured(const FlatCoords& flat, const ReferenceOutputs& refs,
                                          const ControllerGains& gains, ComplexSV y, ComplexSV i,
                                          double vc, ComplexSV v_p, double omega, double L);

/// Control law built on the notch-filtered PCC voltage. Throws ZeroFilteredVoltage.
[[nodiscard]] ControlLaw control_filtered(const FlatCoords& flat_hat, const ReferenceOutputs& refs,
                                          const ControllerGains& gains, ComplexSV y_hat,
                                          ComplexSV i, double vc, ComplexSV vhat_p, double omega,
                                          double L);

struct Measurement {
    ComplexSV i{};
    double vc = 0;
    ComplexSV v_p{};
};

struct ControlTick {
    ComplexSV mu_raw{};  ///< before saturation
    ComplexSV mu{};      ///< applied
    bool saturated = false;
    ComplexSV v_used{};  ///< v_p or vhat_p, whichever fed the law
    ComplexSV e1{};
    ComplexSV e2{};
};

/// Discrete-time controller executing once per tick with zero-order-held output.
class FlatnessController {
public:
    FlatnessController(ControllerVariant variant, const ControllerGains& gains, double L, double C,
                       double omega);

    /// Resets the integrators and seeds the notch state with the PCC voltage.
    void reset(ComplexSV v_p0, double p_r0 = 0.0);

    ControlTick step(const Measurement& m, const ReferenceSet& refs, double Ts);

    [[nodiscard]] const ControllerState& state() const noexcept { return state_; }
    [[nodiscard]] ControllerVariant variant() const noexcept { return variant_; }
    [[nodiscard]] const ControllerGains& gains() const noexcept { return gains_; }

private:
    ControllerVariant variant_;
    ControllerGains gains_;
    double L_;
    double C_;
    double omega_;
    ControllerState state_;
};

}  // namespace flatgrid
