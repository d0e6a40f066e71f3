#include "flatgrid/stability.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "flatgrid/errors.hpp"

namespace flatgrid::stability {

namespace {

struct Split {
    double scale;  // L / (L + Lg)
    double damping;  // (Rg + L k2) / (L + Lg)
};

Split split(const ControllerGains& g, const GridLine& line) {
    const double total = line.L + line.Lg;
    if (!(total > 0)) throw InvariantError("stability: L + Lg must be > 0");
    return {line.L / total, (line.Rg + line.L * g.k2) / total};
}

}  // namespace

ClosedLoopCoeffs coeffs_measured(const ControllerGains& gains, const GridLine& line,
                                 const OperatingEnvelope& env) {
    const Split s = split(gains, line);
    const double theta_dot = env.theta_dot.value_or(line.omega);
    ClosedLoopCoeffs c;
    c.K1 = s.scale * gains.k1;
    c.K3 = s.scale * gains.k3;
    c.K2 = {s.damping - env.dVp_over_Vp, -line.omega * s.scale + theta_dot};
    return c;
}

ClosedLoopCoeffs coeffs_filtered(const ControllerGains& gains, const GridLine& line,
                                 const OperatingEnvelope& env) {
    if (!(env.vp_ratio > 0)) throw InvariantError("stability: vp_ratio must be > 0");
    const Split s = split(gains, line);
    const double kr = gains.kappa.real();
    const double ki = gains.kappa.imag();
    const double rc = env.vp_ratio * std::cos(env.e_theta) - 1.0;
    const double rs = env.vp_ratio * std::sin(env.e_theta);
    const double grid_reactive = line.omega * line.Lg / (line.L + line.Lg);

    ClosedLoopCoeffs c;
    c.K1 = s.scale * gains.k1;
    c.K3 = s.scale * gains.k3;
    c.K2 = {s.damping - kr * rc + ki * rs, grid_reactive + ki * rc + kr * rs};
    return c;
}

StabilityVerdict routh_hurwitz_complex_cubic(const ClosedLoopCoeffs& c) noexcept {
    const double K2r = c.K2.real();
    const double K2i = c.K2.imag();
    const double gap = c.K3 - c.K1 * K2r;

    StabilityVerdict v;
    v.margins[0] = K2r;
    v.margins[1] = -K2r * gap;
    v.margins[2] = c.K3 * K2r * K2r * gap * gap - c.K3 * c.K3 * K2i * K2i * K2r * K2r * K2r;
    v.stable = v.margins[0] > 0 && v.margins[1] > 0 && v.margins[2] > 0;
    return v;
}

ConservativeCheck conservative_conditions(const ControllerGains& gains, const GridLine& line,
                                          const OperatingEnvelope& env) {
    if (gains.kappa.imag() != 0.0)
        throw AssumptionViolated("conservative conditions require kappa_i = 0");
    if (std::abs(env.e_theta) > std::numbers::pi / 2)
        throw AssumptionViolated("conservative conditions require |e_theta| <= pi/2");

    const Split s = split(gains, line);
    const double kr = gains.kappa.real();
    const double K1 = s.scale * gains.k1;
    const double K3 = s.scale * gains.k3;
    const double k3_over_k1 = gains.k3 / gains.k1;

    // lower bound on Khat_2r over |e_theta| <= pi/2 (cos e_theta <= 1)
    const double K2r_lower = s.damping - kr * (env.vp_ratio - 1.0);
    const double K2r = coeffs_filtered(gains, line, env).K2.real();
    const double K2i_bound = line.omega * line.Lg / (line.L + line.Lg) + kr * env.vp_ratio;

    ConservativeCheck out;
    out.margin1 = K2r_lower - k3_over_k1;
    const double excess = K2r - k3_over_k1;
    out.margin2 = excess * excess - K3 / (K1 * K1) * K2i_bound * K2i_bound * K2r;
    out.holds = out.margin1 > 0 && out.margin2 > 0;
    return out;
}

SweepResult impedance_sweep(const ControllerGains& gains, double L, double Rg, double omega,
                            std::span<const double> Xg_values, ControllerVariant variant,
                            const OperatingEnvelope& env) {
    SweepResult out;
    out.rows.reserve(Xg_values.size());
    for (const double Xg : Xg_values) {
        const GridLine line{L, Xg / omega, Rg, omega};
        const ClosedLoopCoeffs c = variant == ControllerVariant::Measured
                                       ? coeffs_measured(gains, line, env)
                                       : coeffs_filtered(gains, line, env);
        SweepRow row{Xg, routh_hurwitz_complex_cubic(c)};
        if (!row.verdict.stable && !out.first_unstable_Xg) out.first_unstable_Xg = Xg;
        out.rows.push_back(row);
    }
    return out;
}

std::string sweep_csv(const SweepResult& sweep) {
    std::string out = "Xg,stable,margin_a,margin_b,margin_c\n";
    for (const auto& r : sweep.rows)
        out += fmt::format("{},{},{},{},{}\n", r.Xg, r.verdict.stable ? 1 : 0, r.verdict.margins[0],
                           r.verdict.margins[1], r.verdict.margins[2]);
    return out;
}

}  // namespace flatgrid::stability
