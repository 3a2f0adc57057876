#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermelt/laser.hpp"
#include "thermelt/latent_heat.hpp"
#include "thermelt/linalg.hpp"
#include "thermelt/material.hpp"
#include "thermelt/mesh.hpp"

namespace thermelt {

enum class CapacityForm { Consistent, Lumped };
enum class LinearSolverKind { Auto, Direct, ConjugateGradient };

struct SolverConfig {
    double theta = 1.0;  // one-step-theta blending; 1 = backward Euler
    double newton_rel_tol = 1e-6;
    double newton_abs_tol = 1e-10;
    int max_newton_iterations = 500;
    CapacityForm capacity_form = CapacityForm::Consistent;
    LinearSolverKind linear_solver = LinearSolverKind::Auto;
    double cg_rel_tol = 1e-10;
    int cg_max_iterations = 20000;

    void validate() const {
        if (!(theta >= 0.0 && theta <= 1.0))
            throw std::invalid_argument("solver: theta must lie in [0, 1]");
        if (!(newton_rel_tol > 0.0 && newton_abs_tol > 0.0 && cg_rel_tol > 0.0))
            throw std::invalid_argument("solver: tolerances must be positive");
        if (max_newton_iterations < 1 || cg_max_iterations < 1)
            throw std::invalid_argument("solver: iteration limits must be at least 1");
    }
};

struct DirichletBc {
    std::string node_set;
    double value = 0.0;
};

// Adaptive step size control: halve on a failed step, double again after a
// run of convergent steps on the reduced size, never exceeding the initial
// step. Non-adaptive mode turns any failure into an abort.
class TimeController {
public:
    TimeController(double dt_initial, double dt_min, bool adaptive, int doubling_threshold = 4)
        : dt_initial_(dt_initial),
          dt_min_(dt_min),
          adaptive_(adaptive),
          threshold_(doubling_threshold),
          dt_(dt_initial) {
        if (!(dt_initial > 0.0) || !(dt_min > 0.0) || dt_min > dt_initial)
            throw std::invalid_argument("TimeController: need 0 < dt_min <= dt_initial");
        if (doubling_threshold < 1)
            throw std::invalid_argument("TimeController: doubling threshold must be positive");
    }

    static TimeController fixed(double dt) { return TimeController(dt, dt, false); }

    double dt() const { return dt_; }
    double dt_initial() const { return dt_initial_; }

    void on_success() {
        ++consecutive_;
        if (adaptive_ && dt_ < dt_initial_ && consecutive_ >= threshold_) {
            dt_ = std::min(2.0 * dt_, dt_initial_);
            consecutive_ = 0;
        }
    }

    // Returns false when the march has to stop (floor reached or fixed mode).
    bool on_failure() {
        consecutive_ = 0;
        if (!adaptive_) return false;
        dt_ *= 0.5;
        if (dt_ < dt_min_) {
            dt_ = dt_min_;
            return false;
        }
        return true;
    }

private:
    double dt_initial_;
    double dt_min_;
    bool adaptive_;
    int threshold_;
    double dt_;
    int consecutive_ = 0;
};

// Consolidated-fraction memory, one value per quadrature point, updated only
// when a step has converged.
struct PhaseState {
    std::vector<double> committed;
};

struct TransientState {
    std::vector<double> temperature;
    PhaseState phase;
    HiNodeState hi;
    double time = 0.0;
};

struct NewtonOutcome {
    bool converged = false;
    int iterations = 0;
    double residual_norm = 0.0;
};

struct StepRecord {
    int step = 0;          // attempt counter; failed attempts get a row too
    double time = 0.0;     // target time of the attempt (committed time if converged)
    double dt = 0.0;
    int newton_iterations = 0;
    bool converged = false;
};

struct SimulationResult {
    std::vector<StepRecord> steps;
    bool completed = false;
    bool stopped_by_observer = false;
    std::string failure_reason;
};

// Transient nonlinear heat conduction on a fixed mesh: assembles the
// one-step-theta residual with history-dependent phase interpolation, applies
// the selected latent heat scheme, and marches in time with Newton's method.
class ThermalSystem {
public:
    ThermalSystem(const Mesh& mesh, const MaterialModel& model, const LatentHeatScheme& scheme,
                  const SolverConfig& config)
        : mesh_(mesh),
          model_(model),
          scheme_(scheme),
          config_(config),
          shapes_(ReferenceShapes::create(mesh.dim)),
          jacobian_(make_system_matrix(mesh)),
          window_(effective_window(scheme, model)) {
        config_.validate();
        model_.validate();
        validate_scheme(scheme_, model_);
        validate_mesh(mesh_);
        if (scheme_.uses_heat_integration() && config_.capacity_form != CapacityForm::Lumped)
            throw std::invalid_argument("heat integration requires the lumped capacity form");
        laser_active_.assign(static_cast<size_t>(mesh_.n_elements()), true);
        if (mesh_.has_element_set("powder")) {
            laser_active_.assign(static_cast<size_t>(mesh_.n_elements()), false);
            for (int e : mesh_.element_sets.at("powder"))
                laser_active_[static_cast<size_t>(e)] = true;
        }
    }

    const Mesh& mesh() const { return mesh_; }
    const MaterialModel& model() const { return model_; }
    const LatentHeatScheme& scheme() const { return scheme_; }
    const SolverConfig& config() const { return config_; }

    void set_dirichlet(const std::vector<DirichletBc>& bcs) {
        constrained_.clear();
        for (const auto& bc : bcs)
            for (int n : mesh_.node_set(bc.node_set)) constrained_.push_back({n, bc.value});
        std::sort(constrained_.begin(), constrained_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    }

    void set_beam(const LaserBeam& beam) {
        beam.validate();
        beam_ = beam;
        has_beam_ = true;
    }

    void set_fixed_source(std::function<double(const std::array<double, 3>&, double)> src) {
        fixed_source_ = std::move(src);
    }

    // initial_melt_fraction: 1 starts molten, 0 solid/powder. Consolidation
    // starts at zero inside the tagged powder elements and one elsewhere.
    TransientState make_initial_state(double initial_temperature,
                                      double initial_melt_fraction, double dt) const {
        TransientState st;
        st.temperature.assign(static_cast<size_t>(mesh_.n_nodes()), initial_temperature);
        const int n_qp_total = mesh_.n_elements() * shapes_.n_qp;
        st.phase.committed.assign(static_cast<size_t>(n_qp_total), 1.0);
        if (mesh_.has_element_set("powder") && initial_melt_fraction < 1.0) {
            for (int e : mesh_.element_sets.at("powder"))
                for (int q = 0; q < shapes_.n_qp; ++q)
                    st.phase.committed[static_cast<size_t>(e * shapes_.n_qp + q)] = 0.0;
        }
        if (initial_melt_fraction >= 1.0)
            std::fill(st.phase.committed.begin(), st.phase.committed.end(), 1.0);
        if (scheme_.uses_heat_integration())
            st.hi.initialize(mesh_.node_pseudo_mass, model_.H_m, dt, initial_melt_fraction);
        return st;
    }

    // Residual and Jacobian of the discrete equations at trial temperatures
    // T_new, around the committed state. The heat integration step source is
    // subtracted from the residual but, by construction, never linearized.
    void assemble(const TransientState& state, const std::vector<double>& T_new, double dt,
                  CsrMatrix& jac, std::vector<double>& res) const {
        const int n = mesh_.n_nodes();
        if (static_cast<int>(T_new.size()) != n || static_cast<int>(state.temperature.size()) != n)
            throw std::invalid_argument("assemble: temperature vector size mismatch");
        jac.set_zero();
        res.assign(static_cast<size_t>(n), 0.0);
        const double theta = config_.theta;
        const double t_eval = state.time + theta * dt;
        const bool lumped = config_.capacity_form == CapacityForm::Lumped;
        const bool enthalpy_g = scheme_.uses_enthalpy_fraction(model_);
        const bool is_ac = scheme_.type == SchemeType::ApparentCapacity;
        const int npe = shapes_.n_local;
        const double ref_cell = mesh_.dim == 1 ? 2.0 : 8.0;

        std::vector<double> node_g;
        if (enthalpy_g) {
            node_g.resize(static_cast<size_t>(n));
            for (int j = 0; j < n; ++j)
                node_g[static_cast<size_t>(j)] =
                    liquid_fraction_from_enthalpy(state.hi.q_hist_work[static_cast<size_t>(j)],
                                                  state.hi.q_tot[static_cast<size_t>(j)])
                        .value;
        }

        // The capacity term is charged as the exact enthalpy difference over
        // the step, (h(T_new) - h(T_old)) / dt with h the integral of the
        // (apparent) capacity. Its tangent is the capacity at T_new, and the
        // enthalpy is monotone in temperature, which keeps Newton stable even
        // when a step crosses the whole latent bump.
        auto enthalpy_change = [&](double t_old, double t_new, double r_c_prev, double g_fixed) {
            if (enthalpy_g)
                return integrate_capacity_fixed_fraction(model_, g_fixed, r_c_prev, t_old, t_new);
            return integrate_capacity(model_, scheme_, r_c_prev, t_old, t_new);
        };
        auto capacity_end = [&](double t_new, double r_c_prev, double g_fixed) {
            const ValueAndSlope g_end =
                enthalpy_g ? ValueAndSlope{g_fixed, 0.0}
                           : liquid_fraction_window(t_new, window_, scheme_.ramp_smoothing);
            double c = effective_property(model_, PropertyKind::Capacity, t_new, r_c_prev, g_end)
                           .value;
            if (is_ac)
                c += latent_bump(t_new, window_.T_s, window_.T_l, model_.H_m, scheme_.bump).value;
            return c;
        };

        std::vector<double> t_new_el(static_cast<size_t>(npe)), t_old_el(static_cast<size_t>(npe));
        std::vector<double> g_el(static_cast<size_t>(npe));
        std::vector<std::array<double, 3>> grad(static_cast<size_t>(npe));

        for (int e = 0; e < mesh_.n_elements(); ++e) {
            const int* conn = mesh_.element_nodes(e);
            const auto& h = mesh_.element_size[static_cast<size_t>(e)];
            const double jac_det = mesh_.element_volume(e) / ref_cell;
            const auto& corner = mesh_.nodes[static_cast<size_t>(conn[0])];
            for (int a = 0; a < npe; ++a) {
                t_new_el[static_cast<size_t>(a)] = T_new[static_cast<size_t>(conn[a])];
                t_old_el[static_cast<size_t>(a)] = state.temperature[static_cast<size_t>(conn[a])];
                if (enthalpy_g) g_el[static_cast<size_t>(a)] = node_g[static_cast<size_t>(conn[a])];
            }

            for (int q = 0; q < shapes_.n_qp; ++q) {
                const size_t sq = static_cast<size_t>(q);
                const auto& nv = shapes_.N[sq];
                double t_theta = 0.0, t_new_qp = 0.0, t_old_qp = 0.0;
                std::array<double, 3> grad_theta{0.0, 0.0, 0.0};
                std::array<double, 3> pos{corner[0], corner[1], corner[2]};
                for (int ax = 0; ax < mesh_.dim; ++ax)
                    pos[ax] += 0.5 * (shapes_.xi[sq][ax] + 1.0) * h[ax];
                for (int a = 0; a < npe; ++a) {
                    const size_t sa = static_cast<size_t>(a);
                    const double t_mix =
                        theta * t_new_el[sa] + (1.0 - theta) * t_old_el[sa];
                    t_theta += nv[sa] * t_mix;
                    t_new_qp += nv[sa] * t_new_el[sa];
                    t_old_qp += nv[sa] * t_old_el[sa];
                    for (int ax = 0; ax < mesh_.dim; ++ax) {
                        grad[sa][ax] = shapes_.dN[sq][sa][ax] * 2.0 / h[ax];
                        grad_theta[ax] += grad[sa][ax] * t_mix;
                    }
                }

                ValueAndSlope g;
                double g_qp = 0.0;
                if (enthalpy_g) {
                    for (int a = 0; a < npe; ++a)
                        g_qp += nv[static_cast<size_t>(a)] * g_el[static_cast<size_t>(a)];
                    g = {g_qp, 0.0};
                } else {
                    g = liquid_fraction_window(t_theta, window_, scheme_.ramp_smoothing);
                }
                const double r_c_prev =
                    state.phase.committed[static_cast<size_t>(e * shapes_.n_qp + q)];

                const ValueAndSlope cond =
                    effective_property(model_, PropertyKind::Conductivity, t_theta, r_c_prev, g);

                double dh_rate = 0.0, cap_end = 0.0;
                if (!lumped) {
                    dh_rate = enthalpy_change(t_old_qp, t_new_qp, r_c_prev, g_qp) / dt;
                    cap_end = capacity_end(t_new_qp, r_c_prev, g_qp);
                }

                double source = 0.0;
                if (has_beam_ && laser_active_[static_cast<size_t>(e)])
                    source += volumetric_source(pos, t_eval, beam_);
                if (fixed_source_) source += fixed_source_(pos, t_eval);

                const double w = shapes_.weight[sq] * jac_det;
                for (int a = 0; a < npe; ++a) {
                    const size_t sa = static_cast<size_t>(a);
                    const int ga = conn[a];
                    double cond_flux = 0.0;
                    for (int ax = 0; ax < mesh_.dim; ++ax)
                        cond_flux += grad[sa][ax] * grad_theta[ax];
                    res[static_cast<size_t>(ga)] += w * (cond.value * cond_flux - nv[sa] * source);
                    if (!lumped) res[static_cast<size_t>(ga)] += w * nv[sa] * dh_rate;

                    for (int b = 0; b < npe; ++b) {
                        const size_t sb = static_cast<size_t>(b);
                        double grad_ab = 0.0;
                        for (int ax = 0; ax < mesh_.dim; ++ax)
                            grad_ab += grad[sa][ax] * grad[sb][ax];
                        double jab = w * theta *
                                     (cond.value * grad_ab + cond.slope * nv[sb] * cond_flux);
                        if (!lumped) jab += w * nv[sa] * nv[sb] * cap_end / dt;
                        jac.add(ga, conn[b], jab);
                    }
                }
            }

            // Lumped capacity works on nodal temperatures with the nodal
            // pseudo-mass. The per-point consolidation history still applies,
            // so the nodal enthalpy change is reused across points that share
            // a history value (within one element they normally all do).
            if (lumped) {
                for (int a = 0; a < npe; ++a) {
                    const size_t sa = static_cast<size_t>(a);
                    const int ga = conn[a];
                    const double g_node = enthalpy_g ? g_el[sa] : 0.0;
                    double dh_acc = 0.0, cap_acc = 0.0;
                    double last_rc = -1.0, dh_q = 0.0, cap_q = 0.0;
                    for (int q = 0; q < shapes_.n_qp; ++q) {
                        const double r_c_prev =
                            state.phase.committed[static_cast<size_t>(e * shapes_.n_qp + q)];
                        if (r_c_prev != last_rc) {
                            dh_q = enthalpy_change(t_old_el[sa], t_new_el[sa], r_c_prev, g_node);
                            cap_q = capacity_end(t_new_el[sa], r_c_prev, g_node);
                            last_rc = r_c_prev;
                        }
                        const double m_aq = shapes_.weight[static_cast<size_t>(q)] * jac_det *
                                            shapes_.N[static_cast<size_t>(q)][sa];
                        dh_acc += m_aq * dh_q;
                        cap_acc += m_aq * cap_q;
                    }
                    res[static_cast<size_t>(ga)] += dh_acc / dt;
                    jac.add(ga, ga, cap_acc / dt);
                }
            }
        }

        if (scheme_.uses_heat_integration())
            for (int j = 0; j < n; ++j)
                res[static_cast<size_t>(j)] -= state.hi.q_step[static_cast<size_t>(j)];
    }

    // Row and column elimination that keeps the matrix symmetric: prescribed
    // rows become identity with zero residual, and since prescribed nodes
    // never receive an update the coupling columns can be zeroed outright.
    void apply_dirichlet(CsrMatrix& jac, std::vector<double>& res) const {
        for (const auto& [node, value] : constrained_) {
            (void)value;
            res[static_cast<size_t>(node)] = 0.0;
            for (int k = jac.row_begin(node); k < jac.row_end(node); ++k) {
                const int c = jac.col(k);
                if (c == node) {
                    jac.value(k) = 1.0;
                } else {
                    jac.value(k) = 0.0;
                    jac.at(c, node) = 0.0;
                }
            }
        }
    }

    void enforce_dirichlet_values(std::vector<double>& T) const {
        for (const auto& [node, value] : constrained_) T[static_cast<size_t>(node)] = value;
    }

    // Newton iteration for one time step. T_new enters as the initial guess
    // and leaves as the last iterate; heat integration bookkeeping happens in
    // state.hi. The residual is always evaluated after the latent correction
    // pass, so pending latent increments keep the loop alive.
    NewtonOutcome newton_step_loop(TransientState& state, std::vector<double>& T_new, double dt) {
        enforce_dirichlet_values(T_new);
        const bool with_hi = scheme_.uses_heat_integration() && model_.H_m > 0.0;
        assemble(state, T_new, dt, jacobian_, residual_);
        apply_dirichlet(jacobian_, residual_);
        const double r0 = norm2(residual_);
        NewtonOutcome out;
        while (true) {
            const double norm = norm2(residual_);
            out.residual_norm = norm;
            if (norm < config_.newton_abs_tol || norm < config_.newton_rel_tol * r0) {
                out.converged = true;
                return out;
            }
            if (out.iterations >= config_.max_newton_iterations) return out;
            std::vector<double> delta;
            if (!solve_linear(delta)) return out;
            ++out.iterations;
            if (with_hi) {
                // The latent correction pass is the paper's own damping; it
                // resets overshooting nodes itself, so take the full step.
                for (size_t i = 0; i < delta.size(); ++i) T_new[i] += delta[i];
                enforce_dirichlet_values(T_new);
                hi_iteration(state.hi, T_new, state.temperature, scheme_, model_, dt);
                enforce_dirichlet_values(T_new);
                assemble(state, T_new, dt, jacobian_, residual_);
                apply_dirichlet(jacobian_, residual_);
            } else {
                // Backtracking line search on the residual norm. The Newton
                // direction descends |R|^2, so damping breaks the cycles the
                // apparent-capacity bump provokes at coarse time steps.
                const std::vector<double> base = T_new;
                double alpha = 1.0;
                for (int cut = 0; cut < 12; ++cut) {
                    for (size_t i = 0; i < delta.size(); ++i)
                        T_new[i] = base[i] + alpha * delta[i];
                    enforce_dirichlet_values(T_new);
                    assemble(state, T_new, dt, jacobian_, residual_);
                    apply_dirichlet(jacobian_, residual_);
                    if (norm2(residual_) < (1.0 - 1e-4 * alpha) * norm) break;
                    alpha *= 0.5;
                }
            }
        }
    }

    // Accepts a converged iterate: advances time, persists temperatures, the
    // consolidated fractions and the latent heat budget.
    void commit_step(TransientState& state, const std::vector<double>& T_new, double dt) const {
        const bool enthalpy_g = scheme_.uses_enthalpy_fraction(model_);
        const int npe = shapes_.n_local;
        for (int e = 0; e < mesh_.n_elements(); ++e) {
            const int* conn = mesh_.element_nodes(e);
            for (int q = 0; q < shapes_.n_qp; ++q) {
                const size_t sq = static_cast<size_t>(q);
                double g = 0.0;
                if (enthalpy_g) {
                    for (int a = 0; a < npe; ++a) {
                        const size_t j = static_cast<size_t>(conn[a]);
                        g += shapes_.N[sq][static_cast<size_t>(a)] *
                             liquid_fraction_from_enthalpy(state.hi.q_hist_work[j],
                                                           state.hi.q_tot[j])
                                 .value;
                    }
                } else {
                    double t_qp = 0.0;
                    for (int a = 0; a < npe; ++a)
                        t_qp += shapes_.N[sq][static_cast<size_t>(a)] *
                                T_new[static_cast<size_t>(conn[a])];
                    g = liquid_fraction_window(t_qp, window_, scheme_.ramp_smoothing).value;
                }
                double& r_c = state.phase.committed[static_cast<size_t>(e * shapes_.n_qp + q)];
                r_c = update_consolidated_fraction(r_c, g);
            }
        }
        if (scheme_.uses_heat_integration()) state.hi.commit();
        state.temperature = T_new;
        state.time += dt;
    }

    // Marches to t_end. The observer runs after every committed step and may
    // stop the march early (steady-state detection) by returning true.
    SimulationResult advance(TransientState& state, TimeController& controller, double t_end,
                             const std::function<bool(const TransientState&, const StepRecord&)>&
                                 observer = {}) {
        SimulationResult result;
        int attempt = 0;
        const double time_eps = 1e-12 * std::max(1.0, std::abs(t_end));
        while (state.time < t_end - time_eps) {
            double dt_step = std::min(controller.dt(), t_end - state.time);
            if (t_end - state.time - dt_step < 1e-9 * dt_step) dt_step = t_end - state.time;
            if (scheme_.uses_heat_integration() && state.hi.dt != dt_step)
                state.hi.rescale(model_.H_m, dt_step);
            if (scheme_.uses_heat_integration()) state.hi.begin_step();
            std::vector<double> trial = state.temperature;
            const NewtonOutcome outcome = newton_step_loop(state, trial, dt_step);
            StepRecord rec;
            rec.step = ++attempt;
            rec.time = state.time + dt_step;
            rec.dt = dt_step;
            rec.newton_iterations = outcome.iterations;
            rec.converged = outcome.converged;
            result.steps.push_back(rec);
            if (outcome.converged) {
                commit_step(state, trial, dt_step);
                controller.on_success();
                if (observer && observer(state, rec)) {
                    result.stopped_by_observer = true;
                    result.completed = true;
                    return result;
                }
            } else {
                if (!controller.on_failure()) {
                    result.failure_reason =
                        "no convergence at t = " + std::to_string(state.time) +
                        " s and the step size floor is reached (dt = " +
                        std::to_string(dt_step) + " s)";
                    return result;
                }
            }
        }
        result.completed = true;
        return result;
    }

private:
    bool solve_linear(std::vector<double>& delta) {
        std::vector<double> rhs(residual_.size());
        for (size_t i = 0; i < rhs.size(); ++i) rhs[i] = -residual_[i];
        LinearSolverKind kind = config_.linear_solver;
        if (kind == LinearSolverKind::Auto)
            kind = mesh_.dim == 1 ? LinearSolverKind::Direct : LinearSolverKind::ConjugateGradient;
        if (kind == LinearSolverKind::Direct) {
            delta = solve_tridiagonal(jacobian_, rhs);
            return true;
        }
        CgResult cg = solve_cg_jacobi(jacobian_, rhs, config_.cg_rel_tol, config_.cg_max_iterations);
        delta = std::move(cg.x);
        return cg.converged;
    }

    const Mesh& mesh_;
    MaterialModel model_;
    LatentHeatScheme scheme_;
    SolverConfig config_;
    ReferenceShapes shapes_;
    CsrMatrix jacobian_;
    std::vector<double> residual_;
    PhaseWindow window_;
    std::vector<std::pair<int, double>> constrained_;
    LaserBeam beam_{};
    bool has_beam_ = false;
    std::function<double(const std::array<double, 3>&, double)> fixed_source_;
    std::vector<bool> laser_active_;
};

}  // namespace thermelt
