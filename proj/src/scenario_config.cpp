#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "flatgrid/scenario.hpp"

namespace flatgrid {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw SchemaError(path + "/" + key, "unknown field");
    }
}

const json& require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    return j;
}

double number_at(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) throw SchemaError(path + "/" + key, "missing field");
    const json& v = obj.at(key);
    if (!v.is_number()) throw SchemaError(path + "/" + key, "expected a number");
    return v.get<double>();
}

bool read_number(const json& obj, const std::string& key, const std::string& path, double& out) {
    if (!obj.contains(key)) return false;
    out = number_at(obj, key, path);
    return true;
}

ComplexSV complex_at(const json& v, const std::string& path) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw SchemaError(path, "expected a number or a [re, im] pair");
}

void parse_plant(const json& j, const std::string& path, PlantParams& p) {
    require_object(j, path);
    reject_unknown(j, path, {"L", "XL", "C", "Lg", "Xg", "Rg", "omega", "vg"});
    if (j.contains("L") && j.contains("XL")) throw SchemaError(path, "give either L or XL");
    if (j.contains("Lg") && j.contains("Xg")) throw SchemaError(path, "give either Lg or Xg");
    read_number(j, "omega", path, p.omega);
    if (!(p.omega > 0)) throw InvariantError("plant: omega must be > 0");
    read_number(j, "C", path, p.C);
    read_number(j, "Rg", path, p.Rg);
    read_number(j, "vg", path, p.vg_mag);
    read_number(j, "L", path, p.L);
    double x = 0;
    if (read_number(j, "XL", path, x)) p.L = x / p.omega;
    read_number(j, "Lg", path, p.Lg);
    if (read_number(j, "Xg", path, x)) p.Lg = x / p.omega;
}

void parse_controller(const json& j, const std::string& path, ScenarioConfig& cfg) {
    require_object(j, path);
    reject_unknown(j, path,
                   {"variant", "settling_times", "gains", "notch_settling_time", "kappa", "delta_p"});
    if (j.contains("variant")) {
        const json& v = j["variant"];
        if (v == "measured")
            cfg.variant = ControllerVariant::Measured;
        else if (v == "filtered")
            cfg.variant = ControllerVariant::Filtered;
        else
            throw SchemaError(path + "/variant", "expected \"measured\" or \"filtered\"");
    }

    if (j.contains("settling_times") && j.contains("gains"))
        throw SchemaError(path, "give either settling_times or gains");
    const ComplexSV kappa = cfg.gains.kappa;
    const double delta = cfg.gains.delta_p;
    if (j.contains("settling_times")) {
        const json& ts = j["settling_times"];
        const std::string tp = path + "/settling_times";
        if (!ts.is_array() || ts.size() != 3) throw SchemaError(tp, "expected three numbers");
        for (std::size_t k = 0; k < 3; ++k)
            if (!ts[k].is_number()) throw SchemaError(tp + "/" + std::to_string(k), "expected a number");
        cfg.gains = gains_from_settling_times(ts[0].get<double>(), ts[1].get<double>(),
                                              ts[2].get<double>());
    } else if (j.contains("gains")) {
        const std::string gp = path + "/gains";
        const json& g = require_object(j["gains"], gp);
        reject_unknown(g, gp, {"k1", "k2", "k3"});
        cfg.gains.k1 = number_at(g, "k1", gp);
        cfg.gains.k2 = number_at(g, "k2", gp);
        cfg.gains.k3 = number_at(g, "k3", gp);
    }
    cfg.gains.kappa = kappa;
    cfg.gains.delta_p = delta;

    if (j.contains("notch_settling_time") && j.contains("kappa"))
        throw SchemaError(path, "give either notch_settling_time or kappa");
    double ts = 0;
    if (read_number(j, "notch_settling_time", path, ts))
        cfg.gains.kappa = notch_gain_from_settling_time(ts);
    if (j.contains("kappa")) cfg.gains.kappa = complex_at(j["kappa"], path + "/kappa");
    read_number(j, "delta_p", path, cfg.gains.delta_p);
}

EventTarget parse_target(const json& v, const std::string& path) {
    if (v == "p_i") return EventTarget::InputPower;
    if (v == "q_r") return EventTarget::ReactiveRef;
    if (v == "vcr") return EventTarget::DcLinkRef;
    throw SchemaError(path, "expected one of \"p_i\", \"q_r\", \"vcr\"");
}

}  // namespace

void ScenarioConfig::validate() const {
    plant.validate();
    gains.validate();
    if (!(duration > 0)) throw InvariantError("duration must be > 0");
    if (!(rates.dt_plant > 0) || !(rates.Ts_ctrl > 0))
        throw InvariantError("rates must be > 0");
    if (rates.dt_plant > rates.Ts_ctrl) throw InvariantError("dt_plant must be <= Ts_ctrl");
    const double ratio = rates.Ts_ctrl / rates.dt_plant;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
        throw InvariantError("Ts_ctrl must be an integer multiple of dt_plant");
    if (rates.decimation < 1) throw InvariantError("decimation must be >= 1");
    if (!(initial.vc > 0)) throw InvariantError("initial vc must be > 0");
    if (!(initial.vcr > 0)) throw InvariantError("initial vcr must be > 0");
    if (!(divergence_current > 0)) throw InvariantError("divergence_current must be > 0");
    if (!(divergence_vc > initial.vc)) throw InvariantError("divergence_vc must exceed the initial vc");
    double last = 0;
    for (const Event& e : events) {
        if (!(e.time >= 0) || e.time > duration)
            throw InvariantError("event time outside [0, duration]");
        if (e.time < last) throw InvariantError("events must be sorted by time");
        if (e.target == EventTarget::DcLinkRef && !(e.value > 0))
            throw InvariantError("vcr events must be > 0");
        last = e.time;
    }
}

ScenarioConfig reference_config() {
    ScenarioConfig cfg;
    cfg.name = "base";
    cfg.gains = gains_from_settling_times(1e-3, 1.1e-3, 20e-3);
    cfg.gains.kappa = notch_gain_from_settling_time(50e-3);
    return cfg;
}

ScenarioConfig load_config(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SchemaError("", std::string("invalid JSON: ") + e.what());
    }
    require_object(root, "");
    reject_unknown(root, "",
                   {"name", "plant", "controller", "rates", "duration", "initial", "events",
                    "divergence_current", "divergence_vc", "$schema", "description"});

    ScenarioConfig cfg = reference_config();
    if (root.contains("name")) {
        if (!root["name"].is_string()) throw SchemaError("/name", "expected a string");
        cfg.name = root["name"].get<std::string>();
    }
    if (root.contains("plant")) parse_plant(root["plant"], "/plant", cfg.plant);
    if (root.contains("controller")) parse_controller(root["controller"], "/controller", cfg);

    if (root.contains("rates")) {
        const json& r = require_object(root["rates"], "/rates");
        reject_unknown(r, "/rates", {"dt_plant", "Ts_ctrl", "decimation"});
        read_number(r, "dt_plant", "/rates", cfg.rates.dt_plant);
        read_number(r, "Ts_ctrl", "/rates", cfg.rates.Ts_ctrl);
        if (r.contains("decimation")) {
            if (!r["decimation"].is_number_integer())
                throw SchemaError("/rates/decimation", "expected an integer");
            cfg.rates.decimation = r["decimation"].get<int>();
        }
    }
    read_number(root, "duration", "", cfg.duration);
    read_number(root, "divergence_current", "", cfg.divergence_current);
    read_number(root, "divergence_vc", "", cfg.divergence_vc);

    if (root.contains("initial")) {
        const json& in = require_object(root["initial"], "/initial");
        reject_unknown(in, "/initial", {"i", "vc", "phase", "vcr", "p_i", "q_r"});
        read_number(in, "vcr", "/initial", cfg.initial.vcr);
        cfg.initial.vc = cfg.initial.vcr;
        read_number(in, "vc", "/initial", cfg.initial.vc);
        read_number(in, "phase", "/initial", cfg.initial.phase);
        read_number(in, "p_i", "/initial", cfg.initial.p_i);
        read_number(in, "q_r", "/initial", cfg.initial.q_r);
        if (in.contains("i")) cfg.initial.i = complex_at(in["i"], "/initial/i");
    }

    if (root.contains("events")) {
        const json& ev = root["events"];
        if (!ev.is_array()) throw SchemaError("/events", "expected an array");
        for (std::size_t k = 0; k < ev.size(); ++k) {
            const std::string ep = "/events/" + std::to_string(k);
            const json& e = require_object(ev[k], ep);
            reject_unknown(e, ep, {"time", "target", "value", "mode"});
            if (!e.contains("time") || !e.contains("target") || !e.contains("value"))
                throw SchemaError(ep, "events need time, target and value");
            if (e.contains("mode") && e["mode"] != "step")
                throw SchemaError(ep + "/mode", "only \"step\" is supported");
            Event out;
            out.time = number_at(e, "time", ep);
            out.target = parse_target(e["target"], ep + "/target");
            out.value = number_at(e, "value", ep);
            cfg.events.push_back(out);
        }
    }

    cfg.validate();
    return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("", "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_config(ss.str());
}

}  // namespace flatgrid
