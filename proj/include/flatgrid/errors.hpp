#pragma once

#include <stdexcept>
#include <string>

namespace flatgrid {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// plant_model
class NonPositiveDcLink : public Error {
public:
    explicit NonPositiveDcLink(double vc)
        : Error("DC-link voltage is not positive (vc = " + std::to_string(vc) + ")"), vc_(vc) {}
    [[nodiscard]] double vc() const noexcept { return vc_; }

private:
    double vc_;
};

// ss_limits
class NoSteadyState : public Error {
public:
    explicit NoSteadyState(double lambda)
        : Error("no steady-state solution exists (lambda = " + std::to_string(lambda) + " < 0)"),
          lambda_(lambda) {}
    [[nodiscard]] double lambda() const noexcept { return lambda_; }

private:
    double lambda_;
};

class SingularImpedance : public Error {
public:
    SingularImpedance() : Error("grid impedance is zero (Rg = Xg = 0)") {}
};

class PowerExceedsCurrentLimit : public Error {
public:
    using Error::Error;
};

class ControlRootNegative : public Error {
public:
    using Error::Error;
};

// flatness_controller
class ZeroPccVoltage : public Error {
public:
    ZeroPccVoltage() : Error("measured PCC voltage magnitude is zero") {}
};

class ZeroFilteredVoltage : public Error {
public:
    ZeroFilteredVoltage() : Error("filtered PCC voltage magnitude is zero") {}
};

// stability_analysis
class AssumptionViolated : public Error {
public:
    using Error::Error;
};

// scenario_harness
class SchemaError : public Error {
public:
    SchemaError(std::string path, const std::string& what)
        : Error("schema error at '" + path + "': " + what), path_(std::move(path)) {}
    [[nodiscard]] const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class InvariantError : public Error {
public:
    using Error::Error;
};

}  // namespace flatgrid
