#include "flatgrid/ss_limits.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "flatgrid/errors.hpp"

namespace flatgrid::ss {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sq(double x) { return x * x; }

}  // namespace

double lambda_discriminant(PowerPoint pt, const GridImpedance& z) noexcept {
    const double vg2 = sq(z.vg_mag);
    const auto [p, q] = pt;
    return vg2 - 4.0 * z.Xg * (z.Xg * p * p / vg2 - q) +
           4.0 * z.Rg * ((2.0 * z.Xg * p * q - z.Rg * q * q) / vg2 + p);
}

double current_mag_sq(PowerPoint pt, const GridImpedance& z, Branch branch) {
    const double den = 2.0 * (sq(z.Rg) + sq(z.Xg));
    if (den == 0.0) throw SingularImpedance();
    const double lambda = lambda_discriminant(pt, z);
    if (lambda < 0.0) throw NoSteadyState(lambda);
    const double root = z.vg_mag * std::sqrt(lambda);
    const double signed_root = branch == Branch::Low ? -root : root;
    return (2.0 * z.Rg * pt.p + 2.0 * z.Xg * pt.q + signed_root + sq(z.vg_mag)) / den;
}

double pcc_mag_sq(PowerPoint pt, const GridImpedance& z) {
    const double lambda = lambda_discriminant(pt, z);
    if (lambda < 0.0) throw NoSteadyState(lambda);
    return z.Rg * pt.p + z.Xg * pt.q + 0.5 * z.vg_mag * (z.vg_mag + std::sqrt(lambda));
}

double inductive_q_stable_min(double p, double Xg, double vg) {
    return Xg * p * p / sq(vg) - sq(vg) / (4.0 * Xg);
}

Bounds inductive_q_safe_bounds(double p, double Xg, double vg, double i_max) {
    const double radicand = sq(vg * i_max) - p * p;
    if (radicand < 0.0)
        throw PowerExceedsCurrentLimit(
            fmt::format("|{}| exceeds vg * i_max = {}", p, vg * i_max));
    const double r = std::sqrt(radicand);
    const double centre = Xg * sq(i_max);
    return {centre - r, centre + r};
}

double inductive_touch_point(double p, double vg, double i_max) {
    const double radicand = sq(vg * i_max) - p * p;
    if (radicand <= 0.0)
        throw PowerExceedsCurrentLimit(
            fmt::format("touch point requires |{}| < vg * i_max = {}", p, vg * i_max));
    return sq(vg) / (2.0 * std::sqrt(radicand));
}

double inductive_q_ctrl_max(double p, double Xg, double vg, double vc) {
    const double radicand = sq(vc * vg) - 2.0 * sq(Xg * p);
    if (radicand < 0.0)
        throw ControlRootNegative(fmt::format(
            "control limit undefined: vc^2 vg^2 - 2 Xg^2 p^2 = {} < 0", radicand));
    return (sq(vc) - std::numbers::sqrt2 * std::sqrt(radicand)) / (2.0 * Xg);
}

ResistiveLimits resistive_limits(double q, double Rg, double vg, double i_max, double vc) {
    const Bounds safe = inductive_q_safe_bounds(q, Rg, vg, i_max);
    return {inductive_q_stable_min(q, Rg, vg), safe.lo, safe.hi,
            inductive_q_ctrl_max(q, Rg, vg, vc)};
}

std::vector<RegionCurves> scan_region(std::span<const double> impedance_axis,
                                      std::span<const double> fixed_powers,
                                      const ScanSettings& s) {
    // The resistive closed forms are the inductive ones with (p, Xg) -> (q, Rg), so a
    // single tabulation serves both kinds.
    auto finite_or_nan = [](double v) { return std::isfinite(v) ? v : kNaN; };

    std::vector<RegionCurves> out;
    out.reserve(fixed_powers.size());
    for (const double fixed : fixed_powers) {
        RegionCurves c;
        c.kind = s.kind;
        c.fixed_power = fixed;
        c.axis.assign(impedance_axis.begin(), impedance_axis.end());
        for (const double z : impedance_axis) {
            double stable = kNaN, lo = kNaN, hi = kNaN, ctrl = kNaN;
            if (z > 0) stable = finite_or_nan(inductive_q_stable_min(fixed, z, s.vg));
            if (s.i_max > 0 && std::abs(fixed) <= s.vg * s.i_max) {
                const Bounds b = inductive_q_safe_bounds(fixed, z, s.vg, s.i_max);
                lo = b.lo;
                hi = b.hi;
            }
            if (z > 0) {
                try {
                    ctrl = finite_or_nan(inductive_q_ctrl_max(fixed, z, s.vg, s.vc));
                } catch (const ControlRootNegative&) {
                }
            }
            c.stable_boundary.push_back(stable);
            c.safe_lower.push_back(lo);
            c.safe_upper.push_back(hi);
            c.ctrl_saturation.push_back(ctrl);
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::string region_csv(std::span<const RegionCurves> families) {
    if (families.empty()) throw InvariantError("region_csv: no curve families");
    const bool inductive = families.front().kind == GridKind::Inductive;
    const char* imp = inductive ? "Xg" : "Rg";
    const char* var = inductive ? "q" : "p";
    const char* fixed = inductive ? "p" : "q";

    std::string out = imp;
    for (const auto& f : families) {
        if (f.axis != families.front().axis)
            throw InvariantError("region_csv: families must share the impedance axis");
        for (const char* curve : {"stable_min", "safe_lo", "safe_hi", "ctrl_max"})
            out += fmt::format(",{}_{}@{}={}", var, curve, fixed, f.fixed_power);
    }
    out += '\n';

    const auto& axis = families.front().axis;
    for (std::size_t k = 0; k < axis.size(); ++k) {
        out += fmt::format("{}", axis[k]);
        for (const auto& f : families)
            out += fmt::format(",{},{},{},{}", f.stable_boundary[k], f.safe_lower[k],
                               f.safe_upper[k], f.ctrl_saturation[k]);
        out += '\n';
    }
    return out;
}

}  // namespace flatgrid::ss
