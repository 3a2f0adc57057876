#pragma once

#include <cmath>
#include <stdexcept>

#include "thermelt/material.hpp"

namespace thermelt {

// Similarity solution for a semi-infinite liquid slab at T_0 whose wall is
// quenched to T_hat < T_m: the solidification front sits at
// x_f(t) = 2 lambda sqrt(alpha_s t) with erf/erfc temperature branches on
// either side. Serves as the reference solution for the 1D front benchmark.
struct StefanProblem {
    double wall_temperature = 0.0;     // T_hat, held at x = 0
    double initial_temperature = 0.0;  // T_0, also the far-field value
    double melting_temperature = 0.0;  // T_m
    double capacity_solid = 1.0;
    double capacity_liquid = 1.0;
    double conductivity_solid = 1.0;
    double conductivity_liquid = 1.0;
    double latent_heat = 0.0;

    double alpha_solid() const { return conductivity_solid / capacity_solid; }
    double alpha_liquid() const { return conductivity_liquid / capacity_liquid; }

    void validate() const {
        if (!(capacity_solid > 0.0 && capacity_liquid > 0.0 && conductivity_solid > 0.0 &&
              conductivity_liquid > 0.0))
            throw std::invalid_argument("StefanProblem: material data must be positive");
        if (latent_heat < 0.0) throw std::invalid_argument("StefanProblem: negative latent heat");
        if (!(wall_temperature < melting_temperature))
            throw std::invalid_argument("StefanProblem: wall must be colder than T_m");
        if (!(melting_temperature <= initial_temperature))
            throw std::invalid_argument("StefanProblem: initial state must not be undercooled");
    }

    static StefanProblem from_material(const MaterialModel& m, double wall, double initial) {
        StefanProblem p;
        p.wall_temperature = wall;
        p.initial_temperature = initial;
        p.melting_temperature = m.T_m;
        p.capacity_solid = m.capacity_solid.value(m.T_m);
        p.capacity_liquid = m.capacity_melt.value(m.T_m);
        p.conductivity_solid = m.conductivity_solid.value(m.T_m);
        p.conductivity_liquid = m.conductivity_melt.value(m.T_m);
        p.latent_heat = m.H_m;
        return p;
    }
};

namespace detail {

// Interface energy balance as a function of the similarity constant; the
// physical constant is its unique positive root.
inline double stefan_residual(double lam, const StefanProblem& p) {
    const double a_s = p.alpha_solid();
    const double a_l = p.alpha_liquid();
    const double nu = std::sqrt(a_s / a_l);
    constexpr double pi = 3.14159265358979323846;
    const double solid = p.conductivity_solid * (p.melting_temperature - p.wall_temperature) *
                         std::exp(-lam * lam) / (std::sqrt(pi * a_s) * std::erf(lam));
    const double liquid = p.conductivity_liquid *
                          (p.initial_temperature - p.melting_temperature) *
                          std::exp(-lam * lam * nu * nu) /
                          (std::sqrt(pi * a_l) * std::erfc(lam * nu));
    return solid - liquid - p.latent_heat * lam * std::sqrt(a_s);
}

}  // namespace detail

inline double similarity_constant(const StefanProblem& p) {
    p.validate();
    // Bracket by scanning outward from zero, where the residual diverges to
    // +inf, then bisect. The residual decreases through its root.
    double lo = 0.0, hi = 0.0;
    double prev_lam = 1e-8;
    double prev_val = detail::stefan_residual(prev_lam, p);
    for (double lam = 0.01; lam <= 10.0 + 1e-9; lam += 0.01) {
        const double val = detail::stefan_residual(lam, p);
        if ((prev_val > 0.0) != (val > 0.0)) {
            lo = prev_lam;
            hi = lam;
            break;
        }
        prev_lam = lam;
        prev_val = val;
    }
    if (hi == 0.0)
        throw std::runtime_error(
            "similarity_constant: no sign change in (0, 10); problem data inconsistent");
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if ((detail::stefan_residual(mid, p) > 0.0) == (detail::stefan_residual(lo, p) > 0.0))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

class StefanSolution {
public:
    explicit StefanSolution(const StefanProblem& p)
        : problem_(p), lambda_(similarity_constant(p)) {}

    double similarity() const { return lambda_; }

    double front_position(double t) const {
        require_time(t);
        return 2.0 * lambda_ * std::sqrt(problem_.alpha_solid() * t);
    }

    double temperature(double x, double t) const {
        require_time(t);
        if (x < 0.0) throw std::invalid_argument("StefanSolution: x must be non-negative");
        const double a_s = problem_.alpha_solid();
        const double a_l = problem_.alpha_liquid();
        if (x <= front_position(t)) {
            return problem_.wall_temperature +
                   (problem_.melting_temperature - problem_.wall_temperature) *
                       std::erf(x / (2.0 * std::sqrt(a_s * t))) / std::erf(lambda_);
        }
        const double nu = std::sqrt(a_s / a_l);
        return problem_.initial_temperature -
               (problem_.initial_temperature - problem_.melting_temperature) *
                   std::erfc(x / (2.0 * std::sqrt(a_l * t))) / std::erfc(lambda_ * nu);
    }

private:
    static void require_time(double t) {
        if (!(t > 0.0)) throw std::invalid_argument("StefanSolution: time must be positive");
    }

    StefanProblem problem_;
    double lambda_;
};

inline double stefan_temperature_at(const StefanProblem& p, double x, double t) {
    return StefanSolution(p).temperature(x, t);
}

}  // namespace thermelt
