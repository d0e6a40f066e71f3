#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the closed forms it is used to check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;

/// Largest real part among the roots of s^3 + a2 s^2 + a1 s + a0 (complex coefficients),
/// from the eigenvalues of the companion matrix.
inline double cubic_max_real_part(cplx a2, cplx a1, cplx a0) {
    Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
    m(0, 0) = -a2;
    m(0, 1) = -a1;
    m(0, 2) = -a0;
    m(1, 0) = 1.0;
    m(2, 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(m, false);
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) best = std::max(best, es.eigenvalues()(k).real());
    return best;
}

/// Scale used for the margin band: largest root magnitude bound (Cauchy).
inline double cubic_root_scale(cplx a2, cplx a1, cplx a0) {
    return 1.0 + std::max({std::abs(a2), std::abs(a1), std::abs(a0)});
}

struct PhasorSolution {
    cplx i;
    cplx v_p;
    int iterations;
};

/// Steady-state phasor current injected through Zg = Rg + jXg into an ideal source vg∠0
/// that delivers s = p + jq at the PCC: vg conj(i) + Zg |i|^2 = s.
/// Damped Newton on the real/imaginary residual, seeded at conj(s)/vg.
inline std::optional<PhasorSolution> solve_ss_phasor(double p, double q, double Rg, double Xg,
                                                     double vg, int max_iter = 200) {
    double x = p / vg;
    double y = -q / vg;  // i = conj(s) / vg
    auto residual = [&](double xx, double yy, double& f1, double& f2) {
        const double r2 = xx * xx + yy * yy;
        f1 = vg * xx + Rg * r2 - p;
        f2 = -vg * yy + Xg * r2 - q;
    };
    double f1 = 0, f2 = 0;
    residual(x, y, f1, f2);
    const double tol = 1e-15 * (1.0 + std::hypot(p, q));
    for (int it = 0; it < max_iter; ++it) {
        const double norm = std::hypot(f1, f2);
        if (norm <= tol) return PhasorSolution{{x, y}, cplx(vg) + cplx(Rg, Xg) * cplx(x, y), it};
        const double j11 = vg + 2 * Rg * x, j12 = 2 * Rg * y;
        const double j21 = 2 * Xg * x, j22 = -vg + 2 * Xg * y;
        const double det = j11 * j22 - j12 * j21;
        if (det == 0 || !std::isfinite(det)) return std::nullopt;
        const double dx = (f1 * j22 - f2 * j12) / det;
        const double dy = (j11 * f2 - j21 * f1) / det;
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            double g1 = 0, g2 = 0;
            residual(x - t * dx, y - t * dy, g1, g2);
            if (std::hypot(g1, g2) < norm || t < 1e-12) {
                x -= t * dx;
                y -= t * dy;
                f1 = g1;
                f2 = g2;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;
        // once the residual stalls at rounding level, stop
        if (std::hypot(f1, f2) >= norm && t < 1e-12) break;
    }
    if (std::hypot(f1, f2) <= 1e-12 * (1.0 + std::hypot(p, q)))
        return PhasorSolution{{x, y}, cplx(vg) + cplx(Rg, Xg) * cplx(x, y), max_iter};
    return std::nullopt;
}

/// Solution of x' = A x for the controllable-canonical error system driven by the
/// polynomial s^3 + k2 s^2 + k1 s + k3, state ordered (y, e1, e2).
inline Eigen::Vector3d linear_error_solution(double k1, double k2, double k3,
                                             const Eigen::Vector3d& x0, double t) {
    Eigen::Matrix3d a;
    a << 0, 1, 0, 0, 0, 1, -k3, -k1, -k2;
    Eigen::EigenSolver<Eigen::Matrix3d> es(a);
    const Eigen::Matrix3cd v = es.eigenvectors();
    const Eigen::Vector3cd lam = es.eigenvalues();
    Eigen::Vector3cd c = v.partialPivLu().solve(x0.cast<cplx>());
    for (int k = 0; k < 3; ++k) c(k) *= std::exp(lam(k) * t);
    return (v * c).real();
}

}  // namespace oracle
