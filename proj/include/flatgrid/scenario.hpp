#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "flatgrid/controller.hpp"
#include "flatgrid/errors.hpp"
#include "flatgrid/plant.hpp"

namespace flatgrid {

enum class EventTarget { InputPower, ReactiveRef, DcLinkRef };

/// Step change of a reference or the input power. Derivatives stay at zero.
struct Event {
    double time = 0;
    EventTarget target = EventTarget::InputPower;
    double value = 0;
};

struct Rates {
    double dt_plant = 5e-6;
    double Ts_ctrl = 5e-5;
    int decimation = 10;  ///< trace row every `decimation` plant steps
};

struct InitialConditions {
    ComplexSV i{};
    double vc = 1.3 * std::numbers::sqrt2;
    double phase = 0;
    double vcr = 1.3 * std::numbers::sqrt2;
    double p_i = 0;
    double q_r = 0;
};

struct ScenarioConfig {
    std::string name = "scenario";
    PlantParams plant;
    ControllerGains gains;
    ControllerVariant variant = ControllerVariant::Filtered;
    Rates rates;
    double duration = 0.3;
    InitialConditions initial;
    std::vector<Event> events;
    double divergence_current = 10.0;  ///< |i| above this (pu) ends the run
    double divergence_vc = 10.0;       ///< vc above this (pu) ends the run

    /// Throws InvariantError.
    void validate() const;
};

/// Parses and validates a JSON scenario. Throws SchemaError (with a JSON pointer to the
/// offending field) or InvariantError.
[[nodiscard]] ScenarioConfig load_config(std::string_view json_text);
[[nodiscard]] ScenarioConfig load_config_file(const std::string& path);

/// The section-V operating point: XL = 0.02, C = 48e-6, vcr = 1.3 sqrt(2), gains from
/// settling times (1, 1.1, 20) ms and a 50 ms notch.
[[nodiscard]] ScenarioConfig reference_config();

struct TraceRow {
    double t = 0;
    ComplexSV i{};
    ComplexSV v_p{};
    ComplexSV vhat_p{};
    double vc = 0;
    double p = 0;
    double q = 0;
    double p_r = 0;
    double q_r = 0;
    double p_i = 0;
    ComplexSV mu{};
    bool saturated = false;
};

struct SimTrace {
    std::vector<TraceRow> rows;
    std::size_t saturation_ticks = 0;
    double first_saturation_time = -1;
    bool diverged = false;
};

/// Thrown by run_scenario when |i| or vc leave their divergence bounds, vc collapses or
/// the state becomes non-finite. Carries the trace recorded up to that point.
class DivergenceDetected : public Error {
public:
    DivergenceDetected(double time, const std::string& reason, std::shared_ptr<const SimTrace> trace);
    [[nodiscard]] double time() const noexcept { return time_; }
    [[nodiscard]] const SimTrace& trace() const noexcept { return *trace_; }

private:
    double time_;
    std::shared_ptr<const SimTrace> trace_;
};

/// Runs plant, controller and notch filter at their rates. Deterministic.
[[nodiscard]] SimTrace run_scenario(const ScenarioConfig& cfg);

/// Header of the trace CSV, in column order.
[[nodiscard]] const std::vector<std::string>& trace_columns();

void write_trace_csv(const SimTrace& trace, std::ostream& os);
/// Throws InvariantError on an empty trace and Error on I/O failure.
void emit_csv(const SimTrace& trace, const std::string& path);

/// Reads back a CSV produced by write_trace_csv.
[[nodiscard]] SimTrace read_trace_csv(std::istream& is);

}  // namespace flatgrid
