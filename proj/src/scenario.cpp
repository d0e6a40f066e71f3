#include "flatgrid/scenario.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace flatgrid {

DivergenceDetected::DivergenceDetected(double time, const std::string& reason,
                                       std::shared_ptr<const SimTrace> trace)
    : Error(fmt::format("divergence detected at t = {} s: {}", time, reason)),
      time_(time),
      trace_(std::move(trace)) {}

namespace {

struct Recorder {
    SimTrace trace;

    void record(double t, const PlantState& s, const PlantInput& in, const PlantParams& params,
                const ControllerState& cs, const ReferenceSet& refs, bool saturated) {
        TraceRow r;
        r.t = t;
        r.i = s.i;
        r.v_p = pcc_voltage(s, in, params);
        r.vhat_p = cs.vhat_p;
        r.vc = s.vc;
        const ComplexSV power = r.v_p * std::conj(s.i);
        r.p = power.real();
        r.q = power.imag();
        r.p_r = cs.p_r;
        r.q_r = refs.qr;
        r.p_i = refs.p_i;
        r.mu = in.mu;
        r.saturated = saturated;
        trace.rows.push_back(r);
    }
};

bool is_finite(const PlantState& s) {
    return std::isfinite(s.i.real()) && std::isfinite(s.i.imag()) && std::isfinite(s.vc);
}

}  // namespace

SimTrace run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    const PlantParams& params = cfg.plant;
    const double Ts = cfg.rates.Ts_ctrl;
    const double dt = cfg.rates.dt_plant;
    const auto substeps = static_cast<long>(std::llround(Ts / dt));
    const auto ticks = static_cast<long>(std::llround(cfg.duration / Ts));
    const long decimation = cfg.rates.decimation;

    PlantState state{cfg.initial.i, cfg.initial.vc, cfg.initial.phase};
    ReferenceSet refs;
    refs.vcr = cfg.initial.vcr;
    refs.p_i = cfg.initial.p_i;
    refs.qr = cfg.initial.q_r;

    // modulation that reproduces the grid voltage at the converter terminals
    PlantInput input{grid_voltage(state, params) / state.vc, refs.p_i};

    FlatnessController controller(cfg.variant, cfg.gains, params.L, params.C, params.omega);
    controller.reset(pcc_voltage(state, input, params));

    Recorder rec;
    std::size_t next_event = 0;
    bool saturated = false;
    ControllerState held = controller.state();  // controller state at the last tick

    auto diverge = [&](double t, const std::string& reason) {
        rec.trace.diverged = true;
        throw DivergenceDetected(t, reason, std::make_shared<const SimTrace>(std::move(rec.trace)));
    };

    for (long k = 0; k <= ticks; ++k) {
        const double t_tick = static_cast<double>(k) * Ts;
        while (next_event < cfg.events.size() && cfg.events[next_event].time <= t_tick + 1e-12) {
            const Event& e = cfg.events[next_event++];
            switch (e.target) {
                case EventTarget::InputPower: refs.p_i = e.value; break;
                case EventTarget::ReactiveRef: refs.qr = e.value; break;
                case EventTarget::DcLinkRef: refs.vcr = e.value; break;
            }
        }
        input.p_i = refs.p_i;

        const Measurement m{state.i, state.vc, pcc_voltage(state, input, params)};
        const ControllerState before = controller.state();
        ControlTick tick;
        try {
            tick = controller.step(m, refs, Ts);
        } catch (const ZeroPccVoltage&) {
            diverge(t_tick, "PCC voltage collapsed to zero");
        } catch (const ZeroFilteredVoltage&) {
            diverge(t_tick, "filtered PCC voltage collapsed to zero");
        }
        if (!std::isfinite(tick.mu.real()) || !std::isfinite(tick.mu.imag()))
            diverge(t_tick, "non-finite modulation index");
        input.mu = tick.mu;
        saturated = tick.saturated;
        held = before;
        if (saturated) {
            if (rec.trace.saturation_ticks == 0) rec.trace.first_saturation_time = t_tick;
            ++rec.trace.saturation_ticks;
        }

        for (long s = 0; s < substeps; ++s) {
            const long global = k * substeps + s;
            const double t = static_cast<double>(global) * dt;
            if (global % decimation == 0)
                rec.record(t, state, input, params, held, refs, saturated);
            if (k == ticks) break;

            try {
                state = integrate_step(state, input, params, dt);
            } catch (const NonPositiveDcLink&) {
                diverge(t + dt, "DC-link voltage collapsed");
            }
            if (!is_finite(state)) diverge(t + dt, "non-finite plant state");
            if (std::abs(state.i) > cfg.divergence_current) {
                rec.record(t + dt, state, input, params, held, refs, saturated);
                diverge(t + dt, fmt::format("|i| = {:.3g} pu exceeds {} pu", std::abs(state.i),
                                            cfg.divergence_current));
            }
            if (state.vc > cfg.divergence_vc) {
                rec.record(t + dt, state, input, params, held, refs, saturated);
                diverge(t + dt, fmt::format("vc = {:.3g} pu exceeds {} pu", state.vc,
                                            cfg.divergence_vc));
            }
        }
    }
    return std::move(rec.trace);
}

const std::vector<std::string>& trace_columns() {
    static const std::vector<std::string> cols = {
        "t",     "i_alpha", "i_beta", "i_mag", "vp_alpha", "vp_beta", "vp_mag",
        "vhat_alpha", "vhat_beta", "vc", "vc_scaled", "p", "q", "p_r",
        "q_r",   "p_i",     "mu_alpha", "mu_beta", "mu_mag", "saturated"};
    return cols;
}

void write_trace_csv(const SimTrace& trace, std::ostream& os) {
    if (trace.rows.empty()) throw InvariantError("cannot write an empty trace");
    const auto& cols = trace_columns();
    for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
    os << '\n';
    for (const TraceRow& r : trace.rows) {
        fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.t,
                   r.i.real(), r.i.imag(), std::abs(r.i), r.v_p.real(), r.v_p.imag(),
                   std::abs(r.v_p), r.vhat_p.real(), r.vhat_p.imag(), r.vc,
                   r.vc / std::numbers::sqrt2, r.p, r.q, r.p_r, r.q_r, r.p_i, r.mu.real(),
                   r.mu.imag(), std::abs(r.mu), r.saturated ? 1 : 0);
    }
}

void emit_csv(const SimTrace& trace, const std::string& path) {
    if (trace.rows.empty()) throw InvariantError("cannot write an empty trace");
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    write_trace_csv(trace, out);
    out.flush();
    if (!out) throw Error("write to '" + path + "' failed");
}

SimTrace read_trace_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw Error("trace CSV is empty");
    SimTrace trace;
    const std::size_t ncol = trace_columns().size();
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> v;
        v.reserve(ncol);
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
        if (v.size() != ncol) throw Error("trace CSV row has the wrong number of columns");
        TraceRow r;
        r.t = v[0];
        r.i = {v[1], v[2]};
        r.v_p = {v[4], v[5]};
        r.vhat_p = {v[7], v[8]};
        r.vc = v[9];
        r.p = v[11];
        r.q = v[12];
        r.p_r = v[13];
        r.q_r = v[14];
        r.p_i = v[15];
        r.mu = {v[16], v[17]};
        r.saturated = v[19] != 0.0;
        trace.rows.push_back(r);
    }
    return trace;
}

}  // namespace flatgrid
