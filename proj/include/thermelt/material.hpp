#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace thermelt {

// Value of a temperature-dependent quantity together with its derivative
// with respect to temperature. The derivative feeds the consistent tangent.
struct ValueAndSlope {
    double value = 0.0;
    double slope = 0.0;
};

// Piecewise linear interpolation over sorted breakpoints with constant
// extrapolation beyond the table range (slope zero outside).
class PiecewiseLinear {
public:
    PiecewiseLinear() = default;

    PiecewiseLinear(std::vector<double> temperatures, std::vector<double> values)
        : t_(std::move(temperatures)), v_(std::move(values)) {
        if (t_.empty() || t_.size() != v_.size())
            throw std::invalid_argument("PiecewiseLinear: need matching non-empty breakpoints");
        for (size_t i = 1; i < t_.size(); ++i)
            if (!(t_[i] > t_[i - 1]))
                throw std::invalid_argument("PiecewiseLinear: breakpoints must increase strictly");
    }

    static PiecewiseLinear constant(double v) { return PiecewiseLinear({0.0}, {v}); }

    double value(double T) const {
        if (t_.size() == 1 || T <= t_.front()) return v_.front();
        if (T >= t_.back()) return v_.back();
        const size_t i = segment(T);
        const double w = (T - t_[i]) / (t_[i + 1] - t_[i]);
        return v_[i] + w * (v_[i + 1] - v_[i]);
    }

    double slope(double T) const {
        if (t_.size() == 1 || T < t_.front() || T > t_.back()) return 0.0;
        const size_t i = segment(T);
        return (v_[i + 1] - v_[i]) / (t_[i + 1] - t_[i]);
    }

    ValueAndSlope eval(double T) const { return {value(T), slope(T)}; }

    double min_value() const { return *std::min_element(v_.begin(), v_.end()); }

    const std::vector<double>& breakpoints() const { return t_; }

private:
    size_t segment(double T) const {
        auto it = std::upper_bound(t_.begin(), t_.end(), T);
        size_t i = static_cast<size_t>(it - t_.begin());
        if (i > 0) --i;
        if (i > t_.size() - 2) i = t_.size() - 2;
        return i;
    }

    std::vector<double> t_{0.0};
    std::vector<double> v_{0.0};
};

enum class Phase { Powder, Melt, Solid };
enum class PropertyKind { Capacity, Conductivity };

// Phase-wise thermal parameters plus the phase change data. Capacities are
// volumetric (J/m^3 K), conductivities in W/(m K). An isothermal phase change
// has T_s == T_l == T_m; a mushy material has T_s < T_m < T_l.
struct MaterialModel {
    PiecewiseLinear capacity_powder = PiecewiseLinear::constant(1.0);
    PiecewiseLinear capacity_melt = PiecewiseLinear::constant(1.0);
    PiecewiseLinear capacity_solid = PiecewiseLinear::constant(1.0);
    PiecewiseLinear conductivity_powder = PiecewiseLinear::constant(1.0);
    PiecewiseLinear conductivity_melt = PiecewiseLinear::constant(1.0);
    PiecewiseLinear conductivity_solid = PiecewiseLinear::constant(1.0);
    double T_s = 0.0;
    double T_l = 0.0;
    double T_m = 0.0;
    double H_m = 0.0;  // volumetric latent heat, J/m^3

    const PiecewiseLinear& table(PropertyKind kind, Phase phase) const {
        if (kind == PropertyKind::Capacity)
            return phase == Phase::Powder ? capacity_powder
                 : phase == Phase::Melt   ? capacity_melt
                                          : capacity_solid;
        return phase == Phase::Powder ? conductivity_powder
             : phase == Phase::Melt   ? conductivity_melt
                                      : conductivity_solid;
    }

    bool isothermal() const { return T_l <= T_s; }

    void validate() const {
        if (!(T_s <= T_m && T_m <= T_l))
            throw std::invalid_argument("MaterialModel: need T_s <= T_m <= T_l");
        if (H_m < 0.0) throw std::invalid_argument("MaterialModel: negative latent heat");
        for (PropertyKind kind : {PropertyKind::Capacity, PropertyKind::Conductivity})
            for (Phase ph : {Phase::Powder, Phase::Melt, Phase::Solid})
                if (!(table(kind, ph).min_value() > 0.0))
                    throw std::invalid_argument("MaterialModel: material tables must be positive");
    }
};

// Ice/water parameters, the classic benchmark material for phase change
// solvers. The powder tables alias the solid ones; there is no powder phase.
inline MaterialModel water_parameters() {
    MaterialModel m;
    m.capacity_solid = PiecewiseLinear::constant(1.762e6);
    m.capacity_melt = PiecewiseLinear::constant(4.226e6);
    m.capacity_powder = m.capacity_solid;
    m.conductivity_solid = PiecewiseLinear::constant(2.22);
    m.conductivity_melt = PiecewiseLinear::constant(0.556);
    m.conductivity_powder = m.conductivity_solid;
    m.T_s = m.T_m = m.T_l = 273.0;
    m.H_m = 338.0e6;
    return m;
}

// Stainless steel 316L with a distinct low-conductivity powder phase.
inline MaterialModel stainless_steel_316l_parameters() {
    MaterialModel m;
    m.capacity_powder = PiecewiseLinear::constant(2.98e6);
    m.capacity_solid = PiecewiseLinear::constant(4.25e6);
    m.capacity_melt = PiecewiseLinear::constant(5.95e6);
    m.conductivity_powder = PiecewiseLinear({200.0, 1600.0}, {0.2, 0.3});
    m.conductivity_solid = PiecewiseLinear::constant(20.0);
    m.conductivity_melt = PiecewiseLinear::constant(20.0);
    m.T_s = m.T_m = m.T_l = 1700.0;
    m.H_m = 2.18e9;
    return m;
}

// Liquid phase fraction from temperature: clamped linear ramp over (T_s, T_l).
// The kink derivatives are taken one-sided from inside the ramp. Requires a
// proper interval; isothermal windows are handled by liquid_fraction_window.
inline ValueAndSlope liquid_fraction_from_temperature(double T, double T_s, double T_l) {
    if (!(T_s < T_l))
        throw std::invalid_argument("liquid_fraction_from_temperature: need T_s < T_l");
    const double inv = 1.0 / (T_l - T_s);
    if (T < T_s) return {0.0, 0.0};
    if (T > T_l) return {1.0, 0.0};
    return {(T - T_s) * inv, inv};
}

// Same ramp with optional C1 rounding of the two kinks over a half-width w:
// quadratic blends on [T_s - w, T_s + w] and [T_l - w, T_l + w] that match the
// ramp value and slope where they meet. w <= 0 gives the plain ramp.
inline ValueAndSlope liquid_fraction_from_temperature_smoothed(double T, double T_s, double T_l,
                                                               double w) {
    if (w <= 0.0) return liquid_fraction_from_temperature(T, T_s, T_l);
    if (!(T_s < T_l))
        throw std::invalid_argument("liquid_fraction_from_temperature_smoothed: need T_s < T_l");
    const double delta = T_l - T_s;
    w = std::min(w, 0.5 * delta);
    const double inv = 1.0 / delta;
    if (T <= T_s - w) return {0.0, 0.0};
    if (T >= T_l + w) return {1.0, 0.0};
    if (T < T_s + w) {
        const double u = T - (T_s - w);
        return {u * u * inv / (4.0 * w), u * inv / (2.0 * w)};
    }
    if (T > T_l - w) {
        const double u = (T_l + w) - T;
        return {1.0 - u * u * inv / (4.0 * w), u * inv / (2.0 * w)};
    }
    return {(T - T_s) * inv, inv};
}

// Liquid phase fraction recovered from the absorbed latent heat history.
// Both arguments are non-positive heat rates; g = |q_hist / q_tot|. The
// fraction is state data, so its temperature derivative is zero.
inline ValueAndSlope liquid_fraction_from_enthalpy(double q_hist, double q_tot) {
    if (q_tot == 0.0)
        throw std::invalid_argument("liquid_fraction_from_enthalpy: q_tot must be nonzero");
    const double g = std::clamp(std::abs(q_hist / q_tot), 0.0, 1.0);
    return {g, 0.0};
}

struct PhaseFractions {
    double powder = 1.0;
    double melt = 0.0;
    double solid = 0.0;
};

// Splits unity into powder/melt/solid from the consolidated fraction r_c and
// the current melt fraction g. Material that has ever been molten counts as
// consolidated, so g may never exceed r_c.
inline PhaseFractions phase_fractions(double r_c, double g) {
    if (g < -1e-12 || r_c < -1e-12 || r_c > 1.0 + 1e-12)
        throw std::invalid_argument("phase_fractions: fractions out of [0,1]");
    if (g > r_c + 1e-12)
        throw std::invalid_argument("phase_fractions: melt fraction " + std::to_string(g) +
                                    " exceeds consolidated fraction " + std::to_string(r_c));
    PhaseFractions f;
    f.melt = std::clamp(g, 0.0, 1.0);
    f.powder = std::clamp(1.0 - r_c, 0.0, 1.0);
    f.solid = std::max(0.0, r_c - g);
    return f;
}

inline double update_consolidated_fraction(double r_c_prev, double g) {
    return std::clamp(std::max(r_c_prev, g), 0.0, 1.0);
}

inline double interpolate_by_phase(const PhaseFractions& f, double powder, double melt,
                                   double solid) {
    return f.powder * powder + f.melt * melt + f.solid * solid;
}

// History-dependent parameter interpolation: blends the phase tables with the
// current fractions and carries a consistent temperature derivative. When g
// still grows past the consolidated record, melting consumes powder; once
// r_c leads, freezing and remelting trade melt against solid.
inline ValueAndSlope effective_property(const MaterialModel& model, PropertyKind kind, double T,
                                        double r_c_prev, ValueAndSlope g) {
    const double r_c = update_consolidated_fraction(r_c_prev, g.value);
    const PhaseFractions f = phase_fractions(r_c, g.value);
    const ValueAndSlope p = model.table(kind, Phase::Powder).eval(T);
    const ValueAndSlope m = model.table(kind, Phase::Melt).eval(T);
    const ValueAndSlope s = model.table(kind, Phase::Solid).eval(T);
    ValueAndSlope out;
    out.value = interpolate_by_phase(f, p.value, m.value, s.value);
    out.slope = interpolate_by_phase(f, p.slope, m.slope, s.slope);
    out.slope += g.slope * (g.value >= r_c_prev ? m.value - p.value : m.value - s.value);
    return out;
}

}  // namespace thermelt
