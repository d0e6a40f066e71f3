#include "flatgrid/plant.hpp"

#include "flatgrid/errors.hpp"

namespace flatgrid {

void PlantParams::validate() const {
    if (!(L > 0)) throw InvariantError("plant: L must be > 0");
    if (!(C > 0)) throw InvariantError("plant: C must be > 0");
    if (!(Lg >= 0)) throw InvariantError("plant: Lg must be >= 0");
    if (!(Rg >= 0)) throw InvariantError("plant: Rg must be >= 0");
    if (!(omega > 0)) throw InvariantError("plant: omega must be > 0");
    if (!(vg_mag > 0)) throw InvariantError("plant: vg_mag must be > 0");
}

Saturated saturate_modulation(ComplexSV mu) noexcept {
    const double m = std::abs(mu);
    if (m > kMaxModulation) return {mu * (kMaxModulation / m), true};
    return {mu, false};
}

ComplexSV grid_voltage(const PlantState& state, const PlantParams& params) noexcept {
    return std::polar(params.vg_mag, state.phase);
}

PlantDerivative plant_derivative(const PlantState& state, const PlantInput& input,
                                 const PlantParams& params) {
    if (!(state.vc > 0)) throw NonPositiveDcLink(state.vc);
    const ComplexSV vg = grid_voltage(state, params);
    PlantDerivative d;
    d.di = (state.vc * input.mu - vg - params.Rg * state.i) / (params.L + params.Lg);
    d.dvc = (input.p_i / state.vc - std::real(input.mu * std::conj(state.i))) / params.C;
    d.dphase = params.omega;
    return d;
}

ComplexSV pcc_voltage(const PlantState& state, const PlantInput& input,
                      const PlantParams& params) noexcept {
    const ComplexSV vg = grid_voltage(state, params);
    return (params.Lg * state.vc * input.mu + params.L * (vg + params.Rg * state.i)) /
           (params.L + params.Lg);
}

namespace {

PlantState advance(const PlantState& s, const PlantDerivative& d, double h) {
    return {s.i + h * d.di, s.vc + h * d.dvc, s.phase + h * d.dphase};
}

}  // namespace

PlantState integrate_step(const PlantState& state, const PlantInput& input,
                          const PlantParams& params, double dt) {
    const PlantDerivative k1 = plant_derivative(state, input, params);
    const PlantDerivative k2 = plant_derivative(advance(state, k1, dt / 2), input, params);
    const PlantDerivative k3 = plant_derivative(advance(state, k2, dt / 2), input, params);
    const PlantDerivative k4 = plant_derivative(advance(state, k3, dt), input, params);

    PlantState next;
    next.i = state.i + dt / 6.0 * (k1.di + 2.0 * k2.di + 2.0 * k3.di + k4.di);
    next.vc = state.vc + dt / 6.0 * (k1.dvc + 2.0 * k2.dvc + 2.0 * k3.dvc + k4.dvc);
    // phase is linear in time; integrate it exactly
    next.phase = state.phase + params.omega * dt;
    if (!(next.vc > 0)) throw NonPositiveDcLink(next.vc);
    return next;
}

}  // namespace flatgrid
