#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermelt/material.hpp"

namespace thermelt {

enum class SchemeType { None, ApparentCapacity, HeatIntegration };
enum class HiMode { Isothermal, Mushy };
enum class HiCriterion { Original, Tolerance };
enum class BumpShape { SmoothedQuartic, Boxcar };

// Selects how latent heat enters the discrete equations. Apparent capacity
// folds it into C(T) as a bump over a finite interval; heat integration
// tracks an absorbed-heat budget per node and corrects temperatures after
// each nonlinear iteration. The interval (T_s, T_l) here is the scheme's
// artificial one; if unset, the material's own interval applies.
struct LatentHeatScheme {
    SchemeType type = SchemeType::None;
    bool has_interval = false;
    double T_s = 0.0;
    double T_l = 0.0;
    BumpShape bump = BumpShape::SmoothedQuartic;
    HiMode hi_mode = HiMode::Isothermal;
    HiCriterion hi_criterion = HiCriterion::Original;
    double eps_tol = 1e-3;
    double ramp_smoothing = 0.0;  // half-width for C1 rounding of the fraction ramp, in K

    static LatentHeatScheme none() { return {}; }

    static LatentHeatScheme apparent_capacity(double T_s, double T_l,
                                              BumpShape shape = BumpShape::SmoothedQuartic) {
        LatentHeatScheme s;
        s.type = SchemeType::ApparentCapacity;
        s.bump = shape;
        s.set_interval(T_s, T_l);
        return s;
    }

    static LatentHeatScheme heat_integration(HiMode mode, HiCriterion criterion,
                                             double eps = 1e-3) {
        LatentHeatScheme s;
        s.type = SchemeType::HeatIntegration;
        s.hi_mode = mode;
        s.hi_criterion = criterion;
        s.eps_tol = eps;
        return s;
    }

    void set_interval(double solidus, double liquidus) {
        if (!(solidus < liquidus))
            throw std::invalid_argument("LatentHeatScheme: interval needs T_s < T_l");
        T_s = solidus;
        T_l = liquidus;
        has_interval = true;
    }

    bool uses_heat_integration() const { return type == SchemeType::HeatIntegration; }

    // Isothermal heat integration recovers the melt fraction from the
    // absorbed-heat budget instead of from temperature. Without latent heat
    // there is no budget and the temperature ramp is the only option left.
    bool uses_enthalpy_fraction(const MaterialModel& model) const {
        return type == SchemeType::HeatIntegration && hi_mode == HiMode::Isothermal &&
               model.H_m > 0.0;
    }

    std::string label() const {
        switch (type) {
            case SchemeType::None:
                return "none";
            case SchemeType::ApparentCapacity:
                return "ac";
            case SchemeType::HeatIntegration:
                break;
        }
        std::string s = hi_mode == HiMode::Isothermal ? "hi-iso" : "hi-mushy";
        s += hi_criterion == HiCriterion::Original ? "-orig" : "-tol";
        return s;
    }
};

struct PhaseWindow {
    double T_s = 0.0;
    double T_l = 0.0;
    bool is_interval() const { return T_l > T_s; }
};

// The temperature window that governs phase fraction ramps, skip criteria and
// the apparent capacity bump. Isothermal heat integration pins everything to
// T_m; otherwise a scheme-supplied artificial interval wins over the material.
inline PhaseWindow effective_window(const LatentHeatScheme& scheme, const MaterialModel& model) {
    if (scheme.type == SchemeType::HeatIntegration && scheme.hi_mode == HiMode::Isothermal)
        return {model.T_m, model.T_m};
    if (scheme.has_interval) return {scheme.T_s, scheme.T_l};
    return {model.T_s, model.T_l};
}

// Temperature-based melt fraction over a window, degenerating to a step at
// T_s for a collapsed (isothermal) window.
inline ValueAndSlope liquid_fraction_window(double T, const PhaseWindow& win, double smoothing) {
    if (!win.is_interval()) return {T >= win.T_s ? 1.0 : 0.0, 0.0};
    return liquid_fraction_from_temperature_smoothed(T, win.T_s, win.T_l, smoothing);
}

inline void validate_scheme(const LatentHeatScheme& scheme, const MaterialModel& model) {
    const PhaseWindow win = effective_window(scheme, model);
    if (scheme.type == SchemeType::ApparentCapacity && !win.is_interval())
        throw std::invalid_argument(
            "apparent capacity needs a melting interval; set an artificial one for "
            "isothermal materials");
    if (scheme.type == SchemeType::HeatIntegration && scheme.hi_mode == HiMode::Mushy &&
        !win.is_interval())
        throw std::invalid_argument(
            "mushy heat integration needs a melting interval; set an artificial one for "
            "isothermal materials");
    if (scheme.type == SchemeType::HeatIntegration &&
        scheme.hi_criterion == HiCriterion::Tolerance && !(scheme.eps_tol > 0.0))
        throw std::invalid_argument("tolerance heat integration needs eps_tol > 0");
    if (scheme.ramp_smoothing < 0.0)
        throw std::invalid_argument("ramp smoothing must be non-negative");
}

// Normalized bump density over s in [0,1]; integrates to one. The smoothed
// quartic vanishes with zero slope at both ends, so the apparent capacity
// stays C1; the boxcar is the classic constant variant.
inline double bump_density(double s, BumpShape shape) {
    if (s < 0.0 || s > 1.0) return 0.0;
    if (shape == BumpShape::Boxcar) return 1.0;
    const double u = s * (1.0 - s);
    return 30.0 * u * u;
}

inline double bump_density_derivative(double s, BumpShape shape) {
    if (s < 0.0 || s > 1.0 || shape == BumpShape::Boxcar) return 0.0;
    return 60.0 * s - 180.0 * s * s + 120.0 * s * s * s;
}

// Integral of bump_density from 0 to s; reaches 1 at s = 1. This is the
// fraction of latent heat the bump has released up to s, used by energy
// bookkeeping.
inline double bump_cumulative(double s, BumpShape shape) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    if (shape == BumpShape::Boxcar) return s;
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

// Latent heat contribution to the apparent capacity: H_m spread over the
// interval with the chosen bump profile.
inline ValueAndSlope latent_bump(double T, double T_s, double T_l, double H_m, BumpShape shape) {
    if (!(T_s < T_l)) throw std::invalid_argument("latent_bump: needs T_s < T_l");
    const double inv = 1.0 / (T_l - T_s);
    const double s = (T - T_s) * inv;
    return {H_m * bump_density(s, shape) * inv,
            H_m * bump_density_derivative(s, shape) * inv * inv};
}

// Full apparent capacity: phase-interpolated capacity plus the latent bump.
inline ValueAndSlope apparent_capacity(const MaterialModel& model, const LatentHeatScheme& scheme,
                                       double T, double r_c_prev) {
    const PhaseWindow win = effective_window(scheme, model);
    const ValueAndSlope g = liquid_fraction_window(T, win, scheme.ramp_smoothing);
    ValueAndSlope c = effective_property(model, PropertyKind::Capacity, T, r_c_prev, g);
    const ValueAndSlope b = latent_bump(T, win.T_s, win.T_l, model.H_m, scheme.bump);
    c.value += b.value;
    c.slope += b.slope;
    return c;
}

namespace detail {

// Three-point Gauss-Legendre rule on [-1, 1], exact through degree five.
inline constexpr double kGauss3X[3] = {-0.77459666924148338, 0.0, 0.77459666924148338};
inline constexpr double kGauss3W[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

// Temperature at which the (possibly smoothed) fraction ramp reaches r. The
// capacity integral splits there because the interpolation switches between
// consuming powder and trading melt against solid.
inline double ramp_fraction_crossing(const PhaseWindow& win, double smoothing, double r) {
    if (!win.is_interval()) return win.T_s;
    const double delta = win.T_l - win.T_s;
    const double w = std::min(smoothing, 0.5 * delta);
    if (w > 0.0) {
        if (r < w / delta) return win.T_s - w + std::sqrt(4.0 * w * delta * r);
        if (r > 1.0 - w / delta) return win.T_l + w - std::sqrt(4.0 * w * delta * (1.0 - r));
    }
    return win.T_s + r * delta;
}

template <typename F>
double integrate_piecewise(double lo, double hi, std::vector<double>& cuts, F&& integrand) {
    std::sort(cuts.begin(), cuts.end());
    double sum = 0.0;
    double a = lo;
    for (size_t i = 0; i <= cuts.size(); ++i) {
        const double b = i < cuts.size() ? cuts[i] : hi;
        if (b <= a) continue;
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        for (int q = 0; q < 3; ++q)
            sum += half * kGauss3W[q] * integrand(mid + half * kGauss3X[q]);
        a = b;
    }
    return sum;
}

}  // namespace detail

// Integral of the scheme's capacity (phase-interpolated, plus the latent bump
// under apparent capacity) from T_a to T_b, with the consolidation history
// frozen at r_c_prev. The integrand is piecewise polynomial, so splitting at
// each kink and applying three-point Gauss per piece gives the exact value.
// This enthalpy difference is what the time discretization charges per step;
// using it instead of a point value of C makes the scheme conserve energy
// exactly and keeps the nodal equations monotone through the bump.
inline double integrate_capacity(const MaterialModel& model, const LatentHeatScheme& scheme,
                                 double r_c_prev, double T_a, double T_b) {
    if (T_a == T_b) return 0.0;
    const PhaseWindow win = effective_window(scheme, model);
    const double lo = std::min(T_a, T_b);
    const double hi = std::max(T_a, T_b);
    static thread_local std::vector<double> cuts;
    cuts.clear();
    auto add = [&](double t) {
        if (t > lo && t < hi) cuts.push_back(t);
    };
    if (win.is_interval()) {
        add(win.T_s);
        add(win.T_l);
        const double w = std::min(scheme.ramp_smoothing, 0.5 * (win.T_l - win.T_s));
        if (w > 0.0) {
            add(win.T_s - w);
            add(win.T_s + w);
            add(win.T_l - w);
            add(win.T_l + w);
        }
    } else {
        add(win.T_s);
    }
    if (r_c_prev > 0.0 && r_c_prev < 1.0)
        add(detail::ramp_fraction_crossing(win, scheme.ramp_smoothing, r_c_prev));
    for (Phase ph : {Phase::Powder, Phase::Melt, Phase::Solid})
        for (double t : model.table(PropertyKind::Capacity, ph).breakpoints()) add(t);
    const double sum = detail::integrate_piecewise(lo, hi, cuts, [&](double T) {
        const ValueAndSlope g = liquid_fraction_window(T, win, scheme.ramp_smoothing);
        double c = effective_property(model, PropertyKind::Capacity, T, r_c_prev, g).value;
        if (scheme.type == SchemeType::ApparentCapacity)
            c += latent_bump(T, win.T_s, win.T_l, model.H_m, scheme.bump).value;
        return c;
    });
    return T_b >= T_a ? sum : -sum;
}

// Same integral with the melt fraction held fixed, for the isothermal heat
// integration branch where the fraction comes from the absorbed-heat budget
// rather than from temperature.
inline double integrate_capacity_fixed_fraction(const MaterialModel& model, double g,
                                                double r_c_prev, double T_a, double T_b) {
    if (T_a == T_b) return 0.0;
    const double lo = std::min(T_a, T_b);
    const double hi = std::max(T_a, T_b);
    static thread_local std::vector<double> cuts;
    cuts.clear();
    for (Phase ph : {Phase::Powder, Phase::Melt, Phase::Solid})
        for (double t : model.table(PropertyKind::Capacity, ph).breakpoints())
            if (t > lo && t < hi) cuts.push_back(t);
    const ValueAndSlope frac{g, 0.0};
    const double sum = detail::integrate_piecewise(lo, hi, cuts, [&](double T) {
        return effective_property(model, PropertyKind::Capacity, T, r_c_prev, frac).value;
    });
    return T_b >= T_a ? sum : -sum;
}

// Per-node absorbed latent heat bookkeeping for heat integration. All
// quantities are heat rates (W) scaled to the current time step: q_tot is the
// (negative) rate equivalent of the full latent budget, q_hist the absorbed
// part, q_step the source contribution accumulated in the current step.
struct HiNodeState {
    std::vector<double> pseudo_mass;
    std::vector<double> q_tot;
    std::vector<double> q_hist;       // committed at the last converged step
    std::vector<double> q_hist_work;  // evolving within the current step attempt
    std::vector<double> q_step;
    double dt = 0.0;

    bool enabled() const { return !q_tot.empty(); }
    int size() const { return static_cast<int>(q_tot.size()); }

    // initial_melt_fraction 1 starts fully molten (budget absorbed), 0 solid.
    void initialize(const std::vector<double>& node_pseudo_mass, double H_m, double step_dt,
                    double initial_melt_fraction) {
        if (step_dt <= 0.0) throw std::invalid_argument("HiNodeState: dt must be positive");
        pseudo_mass = node_pseudo_mass;
        dt = step_dt;
        const size_t n = pseudo_mass.size();
        q_tot.assign(n, 0.0);
        q_hist.assign(n, 0.0);
        q_step.assign(n, 0.0);
        for (size_t j = 0; j < n; ++j) {
            q_tot[j] = -H_m * pseudo_mass[j] / dt;
            q_hist[j] = initial_melt_fraction * q_tot[j];
        }
        q_hist_work = q_hist;
    }

    void begin_step() {
        q_hist_work = q_hist;
        std::fill(q_step.begin(), q_step.end(), 0.0);
    }

    void commit() { q_hist = q_hist_work; }

    // Histories are heat rates, so a new step size rescales them in place;
    // the stored melt fractions |q_hist/q_tot| are unchanged by this.
    void rescale(double H_m, double dt_new) {
        if (dt_new <= 0.0) throw std::invalid_argument("HiNodeState: dt must be positive");
        const double factor = dt / dt_new;
        for (size_t j = 0; j < q_tot.size(); ++j) {
            q_tot[j] = -H_m * pseudo_mass[j] / dt_new;
            q_hist[j] *= factor;
            q_hist_work[j] *= factor;
            q_step[j] = 0.0;
        }
        dt = dt_new;
    }
};

// Total latent budget per node as a (negative) heat rate for one step.
inline std::vector<double> hi_totals(const std::vector<double>& pseudo_mass, double H_m,
                                     double dt) {
    if (dt <= 0.0) throw std::invalid_argument("hi_totals: dt must be positive");
    std::vector<double> q(pseudo_mass.size());
    for (size_t j = 0; j < q.size(); ++j) q[j] = -H_m * pseudo_mass[j] / dt;
    return q;
}

// Temperature a node in transition is held at: the melt fraction mapped onto
// the interval. A collapsed interval (isothermal) always yields T_s = T_m,
// and an empty budget defaults to the solidus.
inline double hi_intermediate_temperature(double q_hist, double q_tot, double T_s, double T_l) {
    if (q_tot == 0.0) return T_s;
    const double g = std::clamp(std::abs(q_hist / q_tot), 0.0, 1.0);
    return T_s + g * (T_l - T_s);
}

// Capacity used to convert a temperature excess into absorbed heat. Derived
// from the mean inverse-capacity over the interval; for a collapsed interval
// it reduces to the mean of the solidus/liquidus capacities.
inline double hi_modified_capacity(const MaterialModel& model, double T_s, double T_l) {
    const double c_s = model.capacity_solid.value(T_s);
    const double c_l = model.capacity_melt.value(T_l);
    const double mean = 0.5 * (c_s + c_l);
    if (model.H_m <= 0.0) return mean;
    return 1.0 / ((T_l - T_s) / model.H_m + 1.0 / mean);
}

// Heat rate increment that would pull the node from T_i back to T_star.
// Negative while melting (T_i overshoots), positive while solidifying.
inline double hi_increment(double T_i, double T_star, double C_star, double pseudo_mass_j,
                           double dt) {
    return -C_star * (T_i - T_star) * pseudo_mass_j / dt;
}

// Clips an increment so the accumulated history stays within [q_tot, 0].
// Hitting a bound returns exactly the distance to it.
inline double hi_limit(double q_hist, double increment, double q_tot) {
    const double total = q_hist + increment;
    if (total > 0.0) return -q_hist;
    if (total < q_tot) return q_tot - q_hist;
    return increment;
}

// Original skip rule: no correction while the node stayed strictly on one
// side of the interval for both the current iterate and the last step.
inline bool hi_skip_original(double T_i, double T_prev_step, double T_s, double T_l) {
    if (T_i < T_s && T_prev_step < T_s) return true;
    if (T_i > T_l && T_prev_step > T_l) return true;
    return false;
}

// Tolerance skip rule: no correction while the iterate sits within a band of
// eps_tol * H_m / C_star around the hold temperature (strict inequality).
inline bool hi_skip_tolerance(double T_i, double T_star, double eps_tol, double H_m,
                              double C_star) {
    return std::abs(T_i - T_star) < eps_tol * H_m / C_star;
}

struct HiIterationResult {
    int active_nodes = 0;         // nodes that received a nonzero increment
    double max_abs_increment = 0.0;
};

// One heat-integration pass over all nodes, run after each Newton iterate:
// decides per node whether a latent correction applies, accumulates the
// clipped increment into the budget and step source, and pins the node's
// temperature to its hold value. Dirichlet values must be re-imposed by the
// caller afterwards.
inline HiIterationResult hi_iteration(HiNodeState& state, std::vector<double>& T,
                                      const std::vector<double>& T_prev_step,
                                      const LatentHeatScheme& scheme, const MaterialModel& model,
                                      double dt) {
    HiIterationResult out;
    if (model.H_m <= 0.0) return out;  // empty budget, every increment would clip to zero
    if (state.dt != dt)
        throw std::logic_error("hi_iteration: state is scaled to a different step size");
    const PhaseWindow win = effective_window(scheme, model);
    const double c_star = hi_modified_capacity(model, win.T_s, win.T_l);
    const int n = state.size();
    for (int j = 0; j < n; ++j) {
        const size_t sj = static_cast<size_t>(j);
        const double t_star =
            hi_intermediate_temperature(state.q_hist_work[sj], state.q_tot[sj], win.T_s, win.T_l);
        const bool skip =
            scheme.hi_criterion == HiCriterion::Original
                ? hi_skip_original(T[sj], T_prev_step[sj], win.T_s, win.T_l)
                : hi_skip_tolerance(T[sj], t_star, scheme.eps_tol, model.H_m, c_star);
        if (skip) continue;
        double dq = hi_increment(T[sj], t_star, c_star, state.pseudo_mass[sj], dt);
        dq = hi_limit(state.q_hist_work[sj], dq, state.q_tot[sj]);
        if (dq == 0.0) continue;
        state.q_hist_work[sj] += dq;
        state.q_step[sj] += dq;
        T[sj] = t_star;
        ++out.active_nodes;
        out.max_abs_increment = std::max(out.max_abs_increment, std::abs(dq));
        const double slack = 1e-9 * std::abs(state.q_tot[sj]);
        if (state.q_hist_work[sj] > slack || state.q_hist_work[sj] < state.q_tot[sj] - slack)
            throw std::logic_error("hi_iteration: node " + std::to_string(j) +
                                   " left the latent budget bounds");
    }
    return out;
}

}  // namespace thermelt
