#pragma once

/**
 * @file ss_limits.hpp
 * @brief Closed-form steady-state limits of complex power injection into a weak grid.
 *
 * In sinusoidal steady state the injected current satisfies
 *
 *   0 = (Rg + jXg) |i|^2 + vg conj(i) - s,   s = vp conj(i) = p + jq,
 *
 * which has a real solution iff the discriminant lambda >= 0. The pure inductive
 * (Rg = 0) and pure resistive (Xg = 0) grids admit closed-form boundaries for
 * stable operation, the |i| <= i_max safe zone, and the SVM saturation limit.
 * The resistive boundaries are the inductive ones under (p <-> q, Xg <-> Rg).
 */

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace flatgrid::ss {

struct GridImpedance {
    double Rg = 0;      ///< pu
    double Xg = 0;      ///< pu, omega * Lg
    double vg_mag = 1;  ///< pu
};

struct PowerPoint {
    double p = 0;
    double q = 0;
};

enum class Branch { Low, High };

[[nodiscard]] double lambda_discriminant(PowerPoint pt, const GridImpedance& z) noexcept;

/// |i|^2 in steady state. Branch::Low is the physical (minus sqrt) root.
/// Throws NoSteadyState if lambda < 0, SingularImpedance if Rg = Xg = 0.
[[nodiscard]] double current_mag_sq(PowerPoint pt, const GridImpedance& z,
                                    Branch branch = Branch::Low);

/// |vp|^2 in steady state on the low-current branch. Throws NoSteadyState.
[[nodiscard]] double pcc_mag_sq(PowerPoint pt, const GridImpedance& z);

// -- purely inductive grid ------------------------------------------------------

/// Lowest q with lambda >= 0 at the given p.
[[nodiscard]] double inductive_q_stable_min(double p, double Xg, double vg);

struct Bounds {
    double lo;
    double hi;
};

/// q range keeping |i| <= i_max. Throws PowerExceedsCurrentLimit if |p| > vg i_max.
[[nodiscard]] Bounds inductive_q_safe_bounds(double p, double Xg, double vg, double i_max);

/// Xg at which the stable boundary touches the lower safe bound.
[[nodiscard]] double inductive_touch_point(double p, double vg, double i_max);

/// q above which |mu| saturates for DC-link voltage vc. Throws ControlRootNegative.
[[nodiscard]] double inductive_q_ctrl_max(double p, double Xg, double vg, double vc);

// -- purely resistive grid ------------------------------------------------------

struct ResistiveLimits {
    double p_stable_min;
    double p_lo;
    double p_hi;
    double p_ctrl_max;
};

/// The four resistive-grid limits at reactive power q.
[[nodiscard]] ResistiveLimits resistive_limits(double q, double Rg, double vg, double i_max,
                                               double vc);

// -- region scans ---------------------------------------------------------------

enum class GridKind { Inductive, Resistive };

/// One curve family for a fixed value of the "other" power (p for inductive, q for resistive).
/// Missing points are NaN.
struct RegionCurves {
    GridKind kind = GridKind::Inductive;
    double fixed_power = 0;
    std::vector<double> axis;  ///< impedance values (Xg or Rg)
    std::vector<double> stable_boundary;
    std::vector<double> safe_lower;
    std::vector<double> safe_upper;
    std::vector<double> ctrl_saturation;
};

struct ScanSettings {
    GridKind kind = GridKind::Inductive;
    double vg = 1.0;
    double vc = 1.3 * 1.4142135623730951;
    double i_max = 1.0;
};

/// Tabulates the boundaries over an impedance axis for each fixed power value.
/// Per-point failures become NaN gaps.
[[nodiscard]] std::vector<RegionCurves> scan_region(std::span<const double> impedance_axis,
                                                    std::span<const double> fixed_powers,
                                                    const ScanSettings& settings);

/// Wide CSV: the impedance column followed by four curves per family, one row per
/// axis point. All families must share the same axis. Gaps are written as "nan".
[[nodiscard]] std::string region_csv(std::span<const RegionCurves> families);

}  // namespace flatgrid::ss
