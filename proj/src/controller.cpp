#include "flatgrid/controller.hpp"

#include <algorithm>
#include <cmath>

#include "flatgrid/errors.hpp"

namespace flatgrid {

void ControllerGains::validate() const {
    if (!(k1 > 0 && k2 > 0 && k3 > 0)) throw InvariantError("gains: k1, k2, k3 must be > 0");
    if (!(delta_p > 0)) throw InvariantError("gains: delta_p must be > 0");
}

ControllerGains gains_from_settling_times(double ts1, double ts2, double ts3) {
    if (!(ts1 > 0 && ts2 > 0 && ts3 > 0))
        throw InvariantError("settling times must be > 0");
    const double a1 = kSettlingFactor / ts1;
    const double a2 = kSettlingFactor / ts2;
    const double a3 = kSettlingFactor / ts3;
    // (s + a1)(s + a2)(s + a3) = s^3 + k2 s^2 + k1 s + k3
    ControllerGains g;
    g.k2 = a1 + a2 + a3;
    g.k1 = a1 * a2 + a1 * a3 + a2 * a3;
    g.k3 = a1 * a2 * a3;
    return g;
}

double notch_gain_from_settling_time(double ts) {
    if (!(ts > 0)) throw InvariantError("notch settling time must be > 0");
    return kSettlingFactor / ts;
}

ComplexSV notch_step(ComplexSV vhat, ComplexSV vp, ComplexSV kappa, double omega,
                     double dt) noexcept {
    const ComplexSV rotation = std::polar(1.0, omega * dt);
    return rotation * (vp + (vhat - vp) * std::exp(-kappa * dt));
}

FlatCoords build_flat_coords(ComplexSV i, double vc, ComplexSV v_used, double p_i, double eta_imag,
                             double L, double C) noexcept {
    FlatCoords f;
    f.xi1 = {0.5 * (L * std::norm(i) + C * vc * vc), eta_imag};
    f.xi2 = p_i - std::conj(v_used) * i;
    return f;
}

double reference_power_rate(const ReferenceSet& refs, double p_r, double v_used_mag, double L,
                            double C, double delta_p) noexcept {
    const double v2 = v_used_mag * v_used_mag;
    return (v2 * (refs.p_i - p_r - C * refs.dvcr * refs.vcr) - L * refs.dqr * refs.qr) /
           (L * (std::abs(p_r) + delta_p));
}

namespace {

// Solves L (x - p)(|x| + delta) = dt (A - B x) for x between p and the fixed point A/B.
double backward_euler_pr(double p, double A, double B, double L, double delta, double dt) {
    const double target = A / B;
    if (p == target) return p;
    auto g = [&](double x) { return L * (x - p) * (std::abs(x) + delta) - dt * (A - B * x); };
    auto dg = [&](double x) {
        return L * ((std::abs(x) + delta) + (x - p) * (x >= 0 ? 1.0 : -1.0)) + dt * B;
    };

    double lo = std::min(p, target);
    double hi = std::max(p, target);
    // g(lo) <= 0 <= g(hi) for either ordering of p and the fixed point
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double gx = g(x);
        if (gx == 0.0) return x;
        if (gx > 0.0)
            hi = x;
        else
            lo = x;
        const double d = dg(x);
        double next = d != 0.0 ? x - gx / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) return next;
        x = next;
    }
    return x;
}

ControlLaw control_law(const FlatCoords& flat, const ReferenceOutputs& refs,
                       const ControllerGains& gains, ComplexSV y, ComplexSV i, double vc,
                       ComplexSV v, double omega, double L) {
    ControlLaw out;
    out.e1 = flat.xi1 - refs.xi1r;
    out.e2 = flat.xi2 - refs.xi2r;
    // dp_i - u with the dp_i inside d(xi2r)/dt cancelled analytically
    const ComplexSV dpi_minus_u = ComplexSV{refs.dp_r, -refs.dq_r} + gains.k1 * out.e1 +
                                  gains.k2 * out.e2 + gains.k3 * y;
    const ComplexSV vconj = std::conj(v);
    const ComplexSV j{0.0, 1.0};
    out.mu = (L * (dpi_minus_u + j * omega * vconj * i) + std::norm(v)) / (vconj * vc);
    return out;
}

}  // namespace

ReferenceOutputs update_references(const ReferenceSet& refs, const ControllerState& state,
                                   double v_used_mag, double L, double C, double delta_p,
                                   double dt) {
    const double v2 = v_used_mag * v_used_mag;
    const double p_r = state.p_r;

    ReferenceOutputs out;
    const double ir2 = (p_r * p_r + refs.qr * refs.qr) / v2;
    out.xi1r = {0.5 * (L * ir2 + C * refs.vcr * refs.vcr), 0.0};
    out.xi2r = {refs.p_i - p_r, refs.qr};

    const double A = v2 * (refs.p_i - C * refs.dvcr * refs.vcr) - L * refs.dqr * refs.qr;
    out.p_r_next = backward_euler_pr(p_r, A, v2, L, delta_p, dt);
    out.dp_r = (out.p_r_next - p_r) / dt;
    out.dq_r = refs.dqr;
    out.dxi2r = {refs.dp_i - out.dp_r, refs.dqr};
    return out;
}

ControlLaw control_measured(const FlatCoords& flat, const ReferenceOutputs& refs,
                            const ControllerGains& gains, ComplexSV y, ComplexSV i, double vc,
                            ComplexSV v_p, double omega, double L) {
    if (std::abs(v_p) == 0.0) throw ZeroPccVoltage();
    return control_law(flat, refs, gains, y, i, vc, v_p, omega, L);
}

ControlLaw control_filtered(const FlatCoords& flat_hat, const ReferenceOutputs& refs,
                            const ControllerGains& gains, ComplexSV y_hat, ComplexSV i, double vc,
                            ComplexSV vhat_p, double omega, double L) {
    if (std::abs(vhat_p) == 0.0) throw ZeroFilteredVoltage();
    return control_law(flat_hat, refs, gains, y_hat, i, vc, vhat_p, omega, L);
}

FlatnessController::FlatnessController(ControllerVariant variant, const ControllerGains& gains,
                                       double L, double C, double omega)
    : variant_(variant), gains_(gains), L_(L), C_(C), omega_(omega) {
    gains_.validate();
}

void FlatnessController::reset(ComplexSV v_p0, double p_r0) {
    state_ = ControllerState{};
    state_.p_r = p_r0;
    state_.vhat_p = v_p0;
}

ControlTick FlatnessController::step(const Measurement& m, const ReferenceSet& refs, double Ts) {
    const bool filtered = variant_ == ControllerVariant::Filtered;
    const ComplexSV v_used = filtered ? state_.vhat_p : m.v_p;
    if (std::abs(v_used) == 0.0) {
        if (filtered) throw ZeroFilteredVoltage();
        throw ZeroPccVoltage();
    }

    const FlatCoords flat =
        build_flat_coords(m.i, m.vc, v_used, refs.p_i, state_.eta_err, L_, C_);
    const ReferenceOutputs r =
        update_references(refs, state_, std::abs(v_used), L_, C_, gains_.delta_p, Ts);
    const ControlLaw law =
        filtered ? control_filtered(flat, r, gains_, state_.y, m.i, m.vc, v_used, omega_, L_)
                 : control_measured(flat, r, gains_, state_.y, m.i, m.vc, v_used, omega_, L_);

    ControlTick tick;
    tick.mu_raw = law.mu;
    const Saturated sat = saturate_modulation(law.mu);
    tick.mu = sat.mu;
    tick.saturated = sat.clipped;
    tick.v_used = v_used;
    tick.e1 = law.e1;
    tick.e2 = law.e2;

    // forward-Euler integrators, reference and filter updates for the next tick
    const double q_used = std::imag(v_used * std::conj(m.i));
    state_.y += Ts * law.e1;
    state_.eta_err += Ts * (q_used - refs.qr);
    state_.p_r = r.p_r_next;
    // the notch runs in both variants; only the filtered law reads it
    state_.vhat_p = notch_step(state_.vhat_p, m.v_p, gains_.kappa, omega_, Ts);
    return tick;
}

}  // namespace flatgrid
