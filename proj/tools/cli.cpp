#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "flatgrid/controller.hpp"
#include "flatgrid/scenario.hpp"
#include "flatgrid/ss_limits.hpp"
#include "flatgrid/stability.hpp"

namespace flatgrid::cli {

std::vector<double> parse_range(const std::string& spec) {
    std::vector<double> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw CLI::ValidationError("range", "cannot parse '" + spec + "' as lo:hi:step");
        }
    }
    if (parts.size() != 3 || !(parts[2] > 0) || parts[1] < parts[0])
        throw CLI::ValidationError("range", "expected lo:hi:step with hi >= lo and step > 0");
    const auto n = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    std::vector<double> axis;
    axis.reserve(static_cast<std::size_t>(n) + 1);
    for (long k = 0; k <= n; ++k) axis.push_back(parts[0] + static_cast<double>(k) * parts[2]);
    return axis;
}

namespace {

// Parameters shared by the `stability` and `sweep` subcommands.
struct DesignOptions {
    std::string variant = "filtered";
    double xl = 0.02;
    double rg = 0.0;
    double omega = kNominalOmega;
    std::vector<double> ts{1e-3, 1.1e-3, 20e-3};
    double k1 = 0, k2 = 0, k3 = 0;
    double notch_ts = 50e-3;
    std::vector<double> kappa;
    double e_theta = 0.0;
    double vp_ratio = 1.0;
    double dvp = 0.0;
    std::vector<double> theta_dot;

    void attach(CLI::App* cmd) {
        cmd->add_option("--variant", variant, "measured | filtered")
            ->check(CLI::IsMember({"measured", "filtered"}))
            ->capture_default_str();
        cmd->add_option("--xl", xl, "converter filter reactance omega*L (pu)")->capture_default_str();
        cmd->add_option("--rg", rg, "grid resistance (pu)")->capture_default_str();
        cmd->add_option("--omega", omega, "grid angular frequency (rad/s)")->capture_default_str();
        cmd->add_option("--ts", ts, "three settling times t1,t2,t3 (s)")
            ->delimiter(',')
            ->expected(3);
        cmd->add_option("--k1", k1, "explicit k1 (overrides --ts)");
        cmd->add_option("--k2", k2, "explicit k2 (overrides --ts)");
        cmd->add_option("--k3", k3, "explicit k3 (overrides --ts)");
        cmd->add_option("--notch-ts", notch_ts, "notch settling time (s)")->capture_default_str();
        cmd->add_option("--kappa", kappa, "explicit notch gain kr[,ki] (overrides --notch-ts)")
            ->delimiter(',')
            ->expected(1, 2);
        cmd->add_option("--e-theta", e_theta, "bound on theta - theta_hat (rad)");
        cmd->add_option("--vp-ratio", vp_ratio, "bound on Vp / Vhat_p");
        cmd->add_option("--dvp", dvp, "bound on dVp/dt / Vp (1/s), measured variant");
        cmd->add_option("--theta-dot", theta_dot, "d(theta)/dt (rad/s), defaults to omega")
            ->expected(1);
    }

    [[nodiscard]] ControllerGains gains() const {
        ControllerGains g;
        if (k1 > 0 || k2 > 0 || k3 > 0) {
            g.k1 = k1;
            g.k2 = k2;
            g.k3 = k3;
        } else {
            g = gains_from_settling_times(ts.at(0), ts.at(1), ts.at(2));
        }
        if (!kappa.empty())
            g.kappa = {kappa[0], kappa.size() > 1 ? kappa[1] : 0.0};
        else
            g.kappa = notch_gain_from_settling_time(notch_ts);
        g.validate();
        return g;
    }

    [[nodiscard]] stability::OperatingEnvelope envelope() const {
        stability::OperatingEnvelope env;
        env.e_theta = e_theta;
        env.vp_ratio = vp_ratio;
        env.dVp_over_Vp = dvp;
        if (!theta_dot.empty()) env.theta_dot = theta_dot.front();
        return env;
    }

    [[nodiscard]] ControllerVariant controller_variant() const {
        return variant == "measured" ? ControllerVariant::Measured : ControllerVariant::Filtered;
    }
};

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw Error("write to '" + path + "' failed");
}

int run_simulate(const std::string& config_path, const std::string& out_path, std::ostream& out,
                 std::ostream& err) {
    ScenarioConfig cfg;
    try {
        cfg = load_config_file(config_path);
    } catch (const SchemaError& e) {
        fmt::print(err, "config error: {}\n", e.what());
        return kExitConfigError;
    } catch (const InvariantError& e) {
        fmt::print(err, "config error: {}\n", e.what());
        return kExitConfigError;
    }

    auto report = [&](const SimTrace& trace) {
        if (trace.saturation_ticks > 0)
            fmt::print(err, "warning: modulation saturated on {} controller ticks (first at t = {} s)\n",
                       trace.saturation_ticks, trace.first_saturation_time);
        if (!out_path.empty()) {
            emit_csv(trace, out_path);
            fmt::print(out, "wrote {} rows to {}\n", trace.rows.size(), out_path);
        } else {
            write_trace_csv(trace, out);
        }
    };

    try {
        const SimTrace trace = run_scenario(cfg);
        report(trace);
        if (!out_path.empty() && !trace.rows.empty()) {
            const TraceRow& last = trace.rows.back();
            fmt::print(out, "{}: t = {} s, p = {:.4f}, q = {:.4f}, vc = {:.4f}, |vp| = {:.4f}\n",
                       cfg.name, last.t, last.p, last.q, last.vc, std::abs(last.v_p));
        }
        return kExitOk;
    } catch (const DivergenceDetected& e) {
        fmt::print(err, "{}: {}\n", cfg.name, e.what());
        if (!e.trace().rows.empty()) report(e.trace());
        return kExitDiverged;
    }
}

int run_limits(const std::string& kind, const std::vector<double>& powers, double vc, double imax,
               double vg, const std::string& range, const std::string& out_path,
               std::ostream& out) {
    const std::vector<double> axis = parse_range(range);
    ss::ScanSettings s;
    s.kind = kind == "resistive" ? ss::GridKind::Resistive : ss::GridKind::Inductive;
    s.vc = vc;
    s.i_max = imax;
    s.vg = vg;
    const auto families = ss::scan_region(axis, powers, s);
    write_text(out_path, ss::region_csv(families), out);
    return kExitOk;
}

int run_gains(const std::vector<double>& ts, double notch_ts, std::ostream& out) {
    const ControllerGains g = gains_from_settling_times(ts.at(0), ts.at(1), ts.at(2));
    fmt::print(out, "poles (1/s): {:.6g}, {:.6g}, {:.6g}\n", kSettlingFactor / ts[0],
               kSettlingFactor / ts[1], kSettlingFactor / ts[2]);
    fmt::print(out, "k1 = {:.6g}\nk2 = {:.6g}\nk3 = {:.6g}\n", g.k1, g.k2, g.k3);
    if (notch_ts > 0) fmt::print(out, "kappa_r = {:.6g}\n", notch_gain_from_settling_time(notch_ts));
    return kExitOk;
}

int run_stability(const DesignOptions& o, double xg, std::ostream& out) {
    const ControllerGains g = o.gains();
    const stability::GridLine line{o.xl / o.omega, xg / o.omega, o.rg, o.omega};
    const auto env = o.envelope();
    const bool measured = o.controller_variant() == ControllerVariant::Measured;
    const auto c = measured ? stability::coeffs_measured(g, line, env)
                            : stability::coeffs_filtered(g, line, env);
    const auto v = stability::routh_hurwitz_complex_cubic(c);
    fmt::print(out, "variant = {}\n", o.variant);
    fmt::print(out, "K1 = {:.6g}\nK2 = {:.6g} {:+.6g}j\nK3 = {:.6g}\n", c.K1, c.K2.real(),
               c.K2.imag(), c.K3);
    fmt::print(out, "margins = {:.6g}, {:.6g}, {:.6g}\n", v.margins[0], v.margins[1], v.margins[2]);
    fmt::print(out, "verdict = {}\n", v.stable ? "stable" : "unstable");
    if (!measured && g.kappa.imag() == 0.0 && std::abs(o.e_theta) <= std::numbers::pi / 2) {
        const auto cc = stability::conservative_conditions(g, line, env);
        fmt::print(out, "conservative = {} (margins {:.6g}, {:.6g})\n",
                   cc.holds ? "holds" : "fails", cc.margin1, cc.margin2);
    }
    return kExitOk;
}

int run_sweep(const DesignOptions& o, const std::string& range, const std::string& out_path,
              std::ostream& out, std::ostream& err) {
    const std::vector<double> xg = parse_range(range);
    const auto sweep = stability::impedance_sweep(o.gains(), o.xl / o.omega, o.rg, o.omega, xg,
                                                  o.controller_variant(), o.envelope());
    write_text(out_path, stability::sweep_csv(sweep), out);
    if (sweep.first_unstable_Xg)
        fmt::print(err, "first unstable Xg = {}\n", *sweep.first_unstable_Xg);
    else
        fmt::print(err, "stable over the whole range\n");
    return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Flatness-based power control of a grid-feeding inverter on a weak grid"};
    app.name("flatgrid");
    app.require_subcommand(1);

    std::string out_path;

    auto* simulate = app.add_subcommand("simulate", "run a JSON scenario and emit a CSV trace");
    std::string config_path;
    simulate->add_option("config", config_path, "scenario JSON file")->required();
    simulate->add_option("-o,--output", out_path, "CSV output path (stdout if omitted)");

    auto* limits = app.add_subcommand("limits", "steady-state power limits over grid impedance");
    std::string kind = "inductive";
    std::vector<double> p_list, q_list;
    double vc = 1.3 * std::numbers::sqrt2, imax = 1.0, vg = 1.0;
    std::string imp_range = "0:1:0.01";
    limits->add_option("--kind", kind, "inductive | resistive")
        ->check(CLI::IsMember({"inductive", "resistive"}))
        ->capture_default_str();
    auto* p_opt = limits->add_option("--p", p_list, "active powers (inductive grid)")->delimiter(',');
    auto* q_opt = limits->add_option("--q", q_list, "reactive powers (resistive grid)")->delimiter(',');
    p_opt->excludes(q_opt);
    limits->add_option("--vc", vc, "DC-link voltage (pu)")->capture_default_str();
    limits->add_option("--imax", imax, "current limit (pu)")->capture_default_str();
    limits->add_option("--vg", vg, "grid voltage magnitude (pu)")->capture_default_str();
    limits->add_option("--range", imp_range, "impedance axis lo:hi:step")->capture_default_str();
    limits->add_option("-o,--output", out_path, "CSV output path");

    auto* gains = app.add_subcommand("gains", "controller gains from settling times");
    std::vector<double> ts;
    double notch_ts = 0;
    gains->add_option("--ts", ts, "t1,t2,t3 (s)")->delimiter(',')->expected(3)->required();
    gains->add_option("--notch-ts", notch_ts, "notch settling time (s)");

    auto* stab = app.add_subcommand("stability", "Routh-Hurwitz verdict at one grid impedance");
    DesignOptions stab_opts;
    double xg = 0.0;
    stab_opts.attach(stab);
    stab->add_option("--xg", xg, "grid reactance (pu)")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "Routh-Hurwitz verdict over a grid reactance range");
    DesignOptions sweep_opts;
    std::string xg_range;
    sweep_opts.attach(sweep);
    sweep->add_option("--xg", xg_range, "lo:hi:step")->required();
    sweep->add_option("-o,--output", out_path, "CSV output path");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfigError;
    }

    try {
        if (*simulate) return run_simulate(config_path, out_path, out, err);
        if (*limits) {
            const bool resistive = kind == "resistive";
            const auto& powers = resistive ? q_list : p_list;
            if (powers.empty()) {
                fmt::print(err, "limits: give {} values\n", resistive ? "--q" : "--p");
                return kExitConfigError;
            }
            return run_limits(kind, powers, vc, imax, vg, imp_range, out_path, out);
        }
        if (*gains) return run_gains(ts, notch_ts, out);
        if (*stab) return run_stability(stab_opts, xg, out);
        if (*sweep) return run_sweep(sweep_opts, xg_range, out_path, out, err);
    } catch (const CLI::ValidationError& e) {
        fmt::print(err, "{}\n", e.what());
        return kExitConfigError;
    } catch (const InvariantError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitConfigError;
    } catch (const Error& e) {
        fmt::print(err, "error: {}\n", e.what());
        return 1;
    }
    return kExitConfigError;
}

}  // namespace flatgrid::cli
