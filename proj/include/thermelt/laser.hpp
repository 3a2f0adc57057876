#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace thermelt {

// Volumetric deposition of a Gaussian-free radial beam into a powder layer,
// following the two-flux radiative transfer solution for a scattering powder
// bed. Published transcriptions of the depth profile disagree in two signs;
// `Standard` is the variant with a non-negative, monotonically decaying
// deposition profile. `AltSign` keeps the other transcription (a plus sign on
// the first boundary exponential and (1-a) on both denominator products) and
// is retained for comparison only.
enum class DepthProfile { Standard, AltSign };

struct LaserBeam {
    double effective_power = 0.0;       // W_e, W
    double radius = 0.0;                // R, m
    double scan_speed = 0.0;            // v, m/s
    std::array<double, 2> start{0.0, 0.0};      // beam center at t = 0, in-plane
    std::array<double, 2> direction{1.0, 0.0};  // in-plane scan direction
    double reflectivity = 0.0;          // rho_h, hemispherical
    double extinction = 0.0;            // beta_h, 1/m
    double layer_thickness = 0.0;       // L, m
    double surface_z = 0.0;             // z of the irradiated powder surface
    DepthProfile depth_profile = DepthProfile::Standard;

    double optical_thickness() const { return extinction * layer_thickness; }

    std::array<double, 2> center(double t) const {
        return {start[0] + scan_speed * t * direction[0],
                start[1] + scan_speed * t * direction[1]};
    }

    void validate() const {
        if (!(effective_power > 0.0)) throw std::invalid_argument("beam: power must be positive");
        if (!(radius > 0.0)) throw std::invalid_argument("beam: radius must be positive");
        if (scan_speed < 0.0) throw std::invalid_argument("beam: negative scan speed");
        if (!(reflectivity >= 0.0 && reflectivity < 1.0))
            throw std::invalid_argument("beam: reflectivity must lie in [0, 1)");
        if (std::abs(4.0 * reflectivity - 3.0) < 1e-12)
            throw std::invalid_argument("beam: reflectivity 0.75 makes the profile singular");
        if (!(extinction > 0.0)) throw std::invalid_argument("beam: extinction must be positive");
        if (!(layer_thickness > 0.0))
            throw std::invalid_argument("beam: layer thickness must be positive");
        const double d = std::hypot(direction[0], direction[1]);
        if (!(d > 0.0)) throw std::invalid_argument("beam: zero scan direction");
    }
};

// Radial irradiance profile: parabolic-squared with total power W_e, zero
// from the beam radius outward.
inline double nominal_power_density(double r_h, const LaserBeam& beam) {
    if (r_h >= beam.radius) return 0.0;
    const double u = r_h / beam.radius;
    const double shape = (1.0 - u * u);
    constexpr double pi = 3.14159265358979323846;
    return 3.0 * beam.effective_power / (pi * beam.radius * beam.radius) * shape * shape;
}

namespace detail {

struct DepthEval {
    double q = 0.0;   // normalized net flux at depth xi
    double dq = 0.0;  // d q / d xi, negative where energy is deposited
};

inline DepthEval depth_profile_eval(double xi, double rho, double lam, DepthProfile variant) {
    const double a = std::sqrt(1.0 - rho);
    const double four_rho_3 = 4.0 * rho - 3.0;
    const double b1 = 1.0 - a - rho * (1.0 + a);
    const double b2 = 1.0 + a - rho * (1.0 - a);
    const double d_second = variant == DepthProfile::Standard ? (1.0 + a) * b2 : (1.0 - a) * b2;
    const double D = (1.0 - a) * b1 * std::exp(-2.0 * a * lam) - d_second * std::exp(2.0 * a * lam);
    if (std::abs(D) < 1e-300)
        throw std::runtime_error("depth profile: degenerate optical constants (D ~ 0)");
    const double K = rho * a / (four_rho_3 * D);
    const double em = std::exp(-2.0 * a * xi);
    const double ep = std::exp(2.0 * a * xi);
    const double t1 = std::exp(-lam) * (1.0 - rho * rho) * (em * (1.0 - a) + ep * (1.0 + a));
    const double dt1 =
        std::exp(-lam) * (1.0 - rho * rho) * 2.0 * a * (-em * (1.0 - a) + ep * (1.0 + a));
    const double fm = std::exp(-2.0 * a * (lam - xi));
    const double fp = std::exp(2.0 * a * (lam - xi));
    const double shell = rho * std::exp(-2.0 * lam) + 3.0;
    double t2, dt2;
    if (variant == DepthProfile::Standard) {
        t2 = (fm * b1 + fp * b2) * shell;
        dt2 = 2.0 * a * (fm * b1 - fp * b2) * shell;
    } else {
        t2 = (fp * b1 + fp * b2) * shell;
        dt2 = -2.0 * a * fp * (b1 + b2) * shell;
    }
    const double t3 = 3.0 * (1.0 - rho) * (std::exp(-xi) - rho * std::exp(xi - 2.0 * lam)) / four_rho_3;
    const double dt3 =
        3.0 * (1.0 - rho) * (-std::exp(-xi) - rho * std::exp(xi - 2.0 * lam)) / four_rho_3;
    DepthEval out;
    out.q = K * (t1 - t2) - t3;
    out.dq = K * (dt1 - dt2) - dt3;
    return out;
}

}  // namespace detail

// Normalized net radiative flux at optical depth xi in [0, lambda].
inline double normalized_depth_flux(double xi, const LaserBeam& beam) {
    return detail::depth_profile_eval(xi, beam.reflectivity, beam.optical_thickness(),
                                      beam.depth_profile)
        .q;
}

inline double normalized_depth_flux_slope(double xi, const LaserBeam& beam) {
    return detail::depth_profile_eval(xi, beam.reflectivity, beam.optical_thickness(),
                                      beam.depth_profile)
        .dq;
}

// Fraction of the incident power the layer absorbs, q(0) - q(lambda).
inline double absorbed_fraction(const LaserBeam& beam) {
    return normalized_depth_flux(0.0, beam) - normalized_depth_flux(beam.optical_thickness(), beam);
}

// Volumetric heat source at a point and time: r = -beta * Q0(r_h) * dq/dxi,
// nonzero only under the beam spot and within the powder layer depth.
inline double volumetric_source(const std::array<double, 3>& p, double t, const LaserBeam& beam) {
    const double depth = beam.surface_z - p[2];
    if (depth < 0.0 || depth > beam.layer_thickness) return 0.0;
    const auto c = beam.center(t);
    const double r_h = std::hypot(p[0] - c[0], p[1] - c[1]);
    const double q0 = nominal_power_density(r_h, beam);
    if (q0 == 0.0) return 0.0;
    const double xi = beam.extinction * depth;
    return -beam.extinction * q0 * normalized_depth_flux_slope(xi, beam);
}

}  // namespace thermelt
