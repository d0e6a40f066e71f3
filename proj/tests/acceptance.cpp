// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cli.hpp"
#include "flatgrid/errors.hpp"
#include "flatgrid/scenario.hpp"
#include "flatgrid/ss_limits.hpp"
#include "flatgrid/stability.hpp"
#include "oracles.hpp"

using namespace flatgrid;

namespace {

const std::string kScenarioDir = FLATGRID_SCENARIO_DIR;
const double kVcr = 1.3 * std::numbers::sqrt2;

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool within_rel(double x, double ref, double tol) { return std::abs(x - ref) <= tol * std::abs(ref); }

// largest |f(row)| over rows with lo <= t < hi
double worst_over(const SimTrace& tr, double lo, double hi,
                  const std::function<double(const TraceRow&)>& f) {
    double w = 0;
    for (const TraceRow& r : tr.rows)
        if (r.t >= lo - 1e-12 && r.t < hi - 1e-12) w = std::max(w, std::abs(f(r)));
    return w;
}

Outcome gain_reproduction() {
    std::ostringstream out, err;
    const int code = cli::cli_main({"gains", "--ts", "0.001,0.0011,0.020", "--notch-ts", "0.05"},
                                   out, err);
    if (code != 0) return {false, fmt::format("gains exited {}", code)};
    const std::string text = out.str();
    auto value = [&](const std::string& key) {
        std::smatch m;
        const std::regex re(key + R"( = ([-+0-9.eE]+))");
        return std::regex_search(text, m, re) ? std::stod(m[1]) : std::nan("");
    };
    const double k1 = value("k1"), k2 = value("k2"), k3 = value("k3"), kr = value("kappa_r");
    const bool ok = within_rel(k1, 21.25e6, 5e-3) && within_rel(k2, 9011, 5e-3) &&
                    within_rel(k3, 4424e6, 5e-3) && within_rel(kr, 92, 5e-3);
    return {ok, fmt::format("k1={:.6g} k2={:.6g} k3={:.6g} kappa_r={:.6g} (tol 0.5%)", k1, k2,
                            k3, kr)};
}

Outcome strong_grid_tracking() {
    const auto t0 = std::chrono::steady_clock::now();
    const SimTrace tr = run_scenario(load_config_file(kScenarioDir + "/fig4.json"));
    const double runtime = seconds_since(t0);
    // p band from 20 ms after its step until the next step; q band from 20 ms after its step
    const double p_err = worst_over(tr, 0.03, 0.11, [](const TraceRow& r) { return r.p - 0.707; });
    const double q_err = worst_over(tr, 0.13, 1.0, [](const TraceRow& r) { return r.q - 0.707; });
    const double vc_err =
        worst_over(tr, 0.28, 1.0, [](const TraceRow& r) { return (r.vc - kVcr) / kVcr; });
    const bool ok = p_err < 0.01 && q_err < 0.01 && vc_err < 0.01 && runtime < 5;
    return {ok, fmt::format("max|p-0.707| on [30,110) ms = {:.2e}, max|q-0.707| after 130 ms = "
                            "{:.2e}, steady vc error = {:.2e}, runtime {:.2f} s",
                            p_err, q_err, vc_err, runtime)};
}

const SimTrace* g_fig5 = nullptr;

Outcome weak_grid_robustness() {
    const auto t0 = std::chrono::steady_clock::now();
    static SimTrace tr;
    try {
        tr = run_scenario(load_config_file(kScenarioDir + "/fig5.json"));
    } catch (const DivergenceDetected& e) {
        return {false, fmt::format("diverged: {}", e.what())};
    }
    const double runtime = seconds_since(t0);
    g_fig5 = &tr;

    // targets 100 ms after each step: (0.707, 0) just before the q step, (0.707, 0.707) after
    const double p1 = worst_over(tr, 0.1099, 0.11, [](const TraceRow& r) { return r.p - 0.707; });
    const double q1 = worst_over(tr, 0.1099, 0.11, [](const TraceRow& r) { return r.q; });
    const double p2 = worst_over(tr, 0.21, 1.0, [](const TraceRow& r) { return r.p - 0.707; });
    const double q2 = worst_over(tr, 0.21, 1.0, [](const TraceRow& r) { return r.q - 0.707; });
    double ratio = 0, t_ratio = 0;
    for (const TraceRow& r : tr.rows) {
        const double x = std::abs(r.v_p) / (r.vc / std::numbers::sqrt2);
        if (x > ratio) {
            ratio = x;
            t_ratio = r.t;
        }
    }
    const bool targets = p1 < 0.02 && q1 < 0.02 && p2 < 0.02 && q2 < 0.02;
    const bool headroom = ratio < 1.0;
    const bool ok = targets && headroom && runtime < 5;
    return {ok, fmt::format("bounded; targets {} (errors {:.3f}, {:.3f} at 110 ms; {:.3f}, {:.3f} "
                            "after 210 ms); max |vp|/(vc/sqrt2) = {:.4f} at t = {:.4f} s {}; "
                            "runtime {:.2f} s",
                            targets ? "met" : "missed", p1, q1, p2, q2, ratio, t_ratio,
                            headroom ? "< 1" : ">= 1 (headroom clause violated)", runtime)};
}

Outcome destabilisation() {
    try {
        const SimTrace tr = run_scenario(load_config_file(kScenarioDir + "/fig5_measured.json"));
        return {false, fmt::format("ran to t = {} s without divergence", tr.rows.back().t)};
    } catch (const DivergenceDetected& e) {
        return {e.time() < 0.3, fmt::format("DivergenceDetected at t = {:.5f} s ({})", e.time(),
                                            e.what())};
    }
}

Outcome ss_oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(5150);
    std::uniform_real_distribution<double> u(0, 1);
    double worst_i = 0, worst_v = 0;
    int n = 0, failed_solves = 0;
    while (n < 1000) {
        const double p = 2 * u(rng) - 1, q = 2 * u(rng) - 1, rg = u(rng), xg = u(rng);
        const ss::GridImpedance z{rg, xg, 1.0};
        if (!(ss::lambda_discriminant({p, q}, z) > 0)) continue;
        ++n;
        const auto sol = oracle::solve_ss_phasor(p, q, rg, xg, 1.0);
        if (!sol) {
            ++failed_solves;
            continue;
        }
        const double i2 = std::norm(sol->i), v2 = std::norm(sol->v_p);
        worst_i = std::max(worst_i, std::abs(ss::current_mag_sq({p, q}, z) - i2) / i2);
        worst_v = std::max(worst_v, std::abs(ss::pcc_mag_sq({p, q}, z) - v2) / v2);
    }
    const double runtime = seconds_since(t0);
    const bool ok = failed_solves == 0 && worst_i < 1e-8 && worst_v < 1e-8 && runtime < 10;
    return {ok, fmt::format("1000 points, worst relative error |i|^2 {:.2e}, |vp|^2 {:.2e}, "
                            "{} oracle failures, runtime {:.2f} s",
                            worst_i, worst_v, failed_solves, runtime)};
}

Outcome safe_zone_datum() {
    const double lo = ss::inductive_q_safe_bounds(0.707, 0.3, 1, 1).lo;
    return {std::abs(lo - -0.4072) <= 0.001, fmt::format("q_lo = {:.5f} (expected -0.4072 +/- 0.001)", lo)};
}

Outcome routh_hurwitz_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> u(0, 1);
    int agree = 0, compared = 0, banded = 0;
    for (int k = 0; k < 10000; ++k) {
        const double a = 10 * u(rng) - 5, b = 10 * u(rng) - 5;
        const double c = std::pow(10, 3 * u(rng) - 1), d = std::pow(10, 3 * u(rng) - 1);
        const double re = oracle::cubic_max_real_part({a, b}, c, d);
        if (std::abs(re) < 1e-9 * oracle::cubic_root_scale({a, b}, c, d)) {
            ++banded;
            continue;
        }
        ++compared;
        const bool stable = stability::routh_hurwitz_complex_cubic({c, {a, b}, d}).stable;
        agree += stable == (re < 0);
    }
    const double runtime = seconds_since(t0);
    return {agree == compared && runtime < 10,
            fmt::format("{}/{} verdicts agree, {} inside the margin band, runtime {:.2f} s", agree,
                        compared, banded, runtime)};
}

Outcome closed_form_consistency() {
    if (!g_fig5) return {false, "weak-grid run unavailable"};
    const TraceRow& r = g_fig5->rows.back();
    const ss::GridImpedance z{0.0, 0.3, 1.0};
    const double i2 = ss::current_mag_sq({r.p, r.q}, z);
    const double v2 = ss::pcc_mag_sq({r.p, r.q}, z);
    const double ei = std::abs(std::norm(r.i) - i2) / i2;
    const double ev = std::abs(std::norm(r.v_p) - v2) / v2;
    return {ei < 0.01 && ev < 0.01,
            fmt::format("at (p, q) = ({:.4f}, {:.4f}): |i|^2 {:.5f} vs {:.5f} ({:.2e}), |vp|^2 "
                        "{:.5f} vs {:.5f} ({:.2e})",
                        r.p, r.q, std::norm(r.i), i2, ei, std::norm(r.v_p), v2, ev)};
}

Outcome sufficiency_check() {
    ControllerGains g = gains_from_settling_times(0.001, 0.0011, 0.020);
    g.kappa = notch_gain_from_settling_time(0.05);
    const double w = kNominalOmega;
    const stability::GridLine line{0.02 / w, 0.3 / w, 0.0, w};
    double worst1 = INFINITY, worst2 = INFINITY;
    bool all = true;
    for (int a = 0; a <= 30; ++a) {
        for (int b = 0; b <= 32; ++b) {
            stability::OperatingEnvelope env;
            env.vp_ratio = 0.5 + 1.5 * a / 30.0;
            env.e_theta = -std::numbers::pi / 2 + std::numbers::pi * b / 32.0;
            const auto c = stability::conservative_conditions(g, line, env);
            all = all && c.holds;
            worst1 = std::min(worst1, c.margin1);
            worst2 = std::min(worst2, c.margin2);
        }
    }
    ControllerGains big = g;
    big.kappa = g.k2;
    stability::OperatingEnvelope env2;
    env2.vp_ratio = 2;
    const auto fail = stability::conservative_conditions(big, line, env2);
    return {all && !fail.holds,
            fmt::format("design holds on vp_ratio [0.5, 2] x e_theta [-pi/2, pi/2] (min margins "
                        "{:.4g}, {:.4g}); kappa_r = k2 at ratio 2 {} (margin1 {:.4g})",
                        worst1, worst2, fail.holds ? "holds" : "fails", fail.margin1)};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        Outcome (*run)();
    };
    const std::vector<Criterion> criteria{
        {1, "gain reproduction", gain_reproduction},
        {2, "strong-grid tracking", strong_grid_tracking},
        {3, "weak-grid robustness", weak_grid_robustness},
        {4, "destabilisation without filtering", destabilisation},
        {5, "steady-state oracle equivalence", ss_oracle_equivalence},
        {6, "safe-zone datum", safe_zone_datum},
        {7, "Routh-Hurwitz vs eigenvalues", routh_hurwitz_oracle},
        {8, "closed-loop / closed-form consistency", closed_form_consistency},
        {9, "sufficiency check", sufficiency_check},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        failed += !o.pass;
        fmt::print("[{}] criterion {}: {}: {}\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail);
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
