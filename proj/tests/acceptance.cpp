// Acceptance gate for the simulation kit. Each numbered check prints one
// PASS/FAIL line; the process exit code is the number of failed checks.
// Expensive simulations are shared: the freezing-front matrix feeds checks 1
// and 2, the two single-track scans feed checks 7 and 8.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "thermelt/config.hpp"
#include "thermelt/experiments.hpp"
#include "thermelt/latent_heat.hpp"
#include "thermelt/material.hpp"
#include "thermelt/mesh.hpp"
#include "thermelt/metrics.hpp"
#include "thermelt/solver.hpp"
#include "thermelt/stefan.hpp"

using namespace thermelt;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& detail) {
    if (!pass) ++g_failures;
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
}

void note(const std::string& text) {
    std::printf("  [note] %s\n", text.c_str());
    std::fflush(stdout);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

ExperimentSetup setup_from_text(const std::string& text) {
    Config cfg = Config::from_string(text);
    return parse_experiment(cfg);
}

// ---------------------------------------------------------------------------
// Freezing-front benchmark matrix: five latent heat treatments, three meshes,
// three step sizes. Shared between the accuracy and iteration-count checks.

const std::vector<std::pair<std::string, std::string>> kFrontSchemes = {
    {"ac", "scheme.kind = ac\nscheme.d = 3\n"},
    {"hi-iso-orig", "scheme.kind = hi\nscheme.criterion = original\n"},
    {"hi-iso-tol", "scheme.kind = hi\nscheme.criterion = tolerance\nscheme.epsilon = 1e-3\n"},
    {"hi-mushy-orig", "scheme.kind = hi\nscheme.criterion = original\nscheme.d = 3\n"},
    {"hi-mushy-tol",
     "scheme.kind = hi\nscheme.criterion = tolerance\nscheme.epsilon = 1e-3\nscheme.d = 3\n"},
};
const int kFrontMeshes[] = {25, 50, 100};
const double kFrontSteps[] = {200.0, 400.0, 800.0};

struct FrontCell {
    bool completed = false;
    double error = -1.0;
    double avg_iters = 0.0;
    std::string failure;
};

std::string front_config(const std::string& scheme_block, int elements, double dt) {
    std::ostringstream os;
    os << "case = front_1d\n"
       << scheme_block << "mesh.elements = " << elements << "\ntime.dt = " << dt << "\n";
    return os.str();
}

std::string cell_key(const std::string& scheme, int elements, double dt) {
    return scheme + "/" + std::to_string(elements) + "/" + std::to_string(static_cast<int>(dt));
}

std::map<std::string, FrontCell> run_front_matrix() {
    std::map<std::string, FrontCell> cells;
    for (const auto& [label, block] : kFrontSchemes)
        for (int elements : kFrontMeshes)
            for (double dt : kFrontSteps) {
                const ExperimentResult res =
                    run_experiment(setup_from_text(front_config(block, elements, dt)));
                FrontCell cell;
                cell.completed = res.sim.completed;
                cell.error = res.error_norm;
                cell.avg_iters = res.summary.avg_iterations_per_step;
                cell.failure = res.sim.failure_reason;
                cells[cell_key(label, elements, dt)] = cell;
            }
    return cells;
}

void criterion_1(const std::map<std::string, FrontCell>& cells) {
    std::vector<std::string> violations;
    for (const auto& [label, block] : kFrontSchemes) {
        (void)block;
        for (int elements : kFrontMeshes)
            for (double dt : kFrontSteps) {
                const FrontCell& cell = cells.at(cell_key(label, elements, dt));
                if (!cell.completed) {
                    if (label == "ac") {
                        note("ac did not converge at " + std::to_string(elements) +
                             " elements, dt = " + fmt(dt) + " s: " + cell.failure);
                        continue;
                    }
                    violations.push_back(label + " at " + std::to_string(elements) +
                                         " elements, dt = " + fmt(dt) + " s did not finish");
                    continue;
                }
                const double bound = elements == 25 ? 0.04 : 0.03;
                if (!(cell.error <= bound))
                    violations.push_back(label + " at " + std::to_string(elements) +
                                         " elements, dt = " + fmt(dt) + " s: error " +
                                         fmt(cell.error) + " > " + fmt(bound));
            }
    }
    if (violations.empty()) {
        report(1, true,
               "front benchmark error within 0.04 (25 elements) and 0.03 (50/100 elements) "
               "for every scheme and step size");
    } else {
        std::string detail = "front benchmark error bounds violated in " +
                             std::to_string(violations.size()) + " of 45 cells";
        for (const auto& v : violations) detail += "; " + v;
        report(1, false, detail);
    }
}

void criterion_2(const std::map<std::string, FrontCell>& cells) {
    std::vector<std::string> violations;
    for (int elements : kFrontMeshes)
        for (double dt : kFrontSteps)
            for (const char* mode : {"iso", "mushy"}) {
                const FrontCell& orig =
                    cells.at(cell_key(std::string("hi-") + mode + "-orig", elements, dt));
                const FrontCell& tol =
                    cells.at(cell_key(std::string("hi-") + mode + "-tol", elements, dt));
                if (!orig.completed || !tol.completed) {
                    violations.push_back(std::string(mode) + " pair incomplete at " +
                                         std::to_string(elements) + "/" + fmt(dt));
                    continue;
                }
                if (!(orig.avg_iters > tol.avg_iters))
                    violations.push_back(std::string("hi-") + mode + "-orig " +
                                         fmt(orig.avg_iters) + " <= hi-" + mode + "-tol " +
                                         fmt(tol.avg_iters) + " at " +
                                         std::to_string(elements) + " elements, dt = " +
                                         fmt(dt));
            }

    const double a25 = cells.at(cell_key("hi-iso-orig", 25, 800.0)).avg_iters;
    const double a50 = cells.at(cell_key("hi-iso-orig", 50, 800.0)).avg_iters;
    const double a100 = cells.at(cell_key("hi-iso-orig", 100, 800.0)).avg_iters;
    if (!(a50 > a25 && a100 > a50))
        violations.push_back("hi-iso-orig iterations not increasing under refinement at dt = "
                             "800 s: " +
                             fmt(a25) + ", " + fmt(a50) + ", " + fmt(a100));

    if (violations.empty()) {
        report(2, true,
               "original-criterion runs need more Newton iterations than tolerance runs in "
               "every cell, and grow under mesh refinement at dt = 800 s");
    } else {
        std::string detail = "iteration ordering violated";
        for (const auto& v : violations) detail += "; " + v;
        report(2, false, detail);
    }
}

// ---------------------------------------------------------------------------
// Latent heat conservation on the insulated melting-volume case.

double source_energy(const ExperimentSetup& s, double time) {
    return 0.5 * s.source_amplitude * s.domain_length * time;
}

// Path enthalpy of one node against the 263 K initial state: table capacity
// below and above the melting point plus the ledger-tracked latent portion.
double sensible_energy(const ExperimentSetup& s, const std::vector<double>& T) {
    const LatentHeatScheme plain = LatentHeatScheme::none();
    double sum = 0.0;
    for (int j = 0; j < s.mesh.n_nodes(); ++j) {
        const auto ju = static_cast<size_t>(j);
        sum += s.mesh.node_pseudo_mass[ju] *
               integrate_capacity(s.material, plain, 1.0, s.initial_temperature, T[ju]);
    }
    return sum;
}

void criterion_3() {
    std::vector<std::string> violations;

    // Apparent capacity: the latent heat travels inside the capacity bump, so
    // the element-quadrature enthalpy of the final field must match the
    // injected energy directly.
    {
        const ExperimentSetup s = setup_from_text(
            "case = meltvol_1d\n"
            "scheme.kind = ac\n"
            "scheme.d = 3\n");
        const ExperimentResult res = run_experiment(s);
        if (!res.sim.completed) {
            violations.push_back("ac run did not finish: " + res.sim.failure_reason);
        } else {
            const double e_in = source_energy(s, res.state.time);
            const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
            double e_out = 0.0;
            for (int e = 0; e < s.mesh.n_elements(); ++e) {
                const int* nodes = s.mesh.element_nodes(e);
                const double x0 = s.mesh.nodes[static_cast<size_t>(nodes[0])][0];
                const double x1 = s.mesh.nodes[static_cast<size_t>(nodes[1])][0];
                const double t0 = res.state.temperature[static_cast<size_t>(nodes[0])];
                const double t1 = res.state.temperature[static_cast<size_t>(nodes[1])];
                for (double xi : {-inv_sqrt3, inv_sqrt3}) {
                    const double t_qp = 0.5 * (1.0 - xi) * t0 + 0.5 * (1.0 + xi) * t1;
                    e_out += 0.5 * (x1 - x0) *
                             integrate_capacity(s.material, s.scheme, 1.0,
                                                s.initial_temperature, t_qp);
                }
            }
            const double defect = std::abs(e_out - e_in);
            if (!(defect <= 0.005 * e_in))
                violations.push_back("ac defect " + fmt(defect) + " J > 0.5% of " + fmt(e_in));
        }
    }

    // Tolerance-based heat integration: the budget may neglect latent heat up
    // to the tolerance fraction of the absorbed portion.
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        std::ostringstream cfg;
        cfg << "case = meltvol_1d\nscheme.kind = hi\nscheme.criterion = tolerance\n"
            << "scheme.epsilon = " << eps << "\n";
        const ExperimentSetup s = setup_from_text(cfg.str());
        const ExperimentResult res = run_experiment(s);
        if (!res.sim.completed) {
            violations.push_back("hi run at eps " + fmt(eps) +
                                 " did not finish: " + res.sim.failure_reason);
            continue;
        }
        const double e_in = source_energy(s, res.state.time);
        const double e_latent = s.material.H_m * res.molten_volume;
        const double e_out = sensible_energy(s, res.state.temperature) + e_latent;
        const double defect = std::abs(e_out - e_in);
        const double bound = eps * e_latent + 0.005 * e_in;
        if (!(defect <= bound))
            violations.push_back("eps " + fmt(eps) + ": defect " + fmt(defect) + " J > " +
                                 fmt(bound) + " J");
    }

    if (violations.empty()) {
        report(3, true,
               "insulated melting conserves energy: apparent capacity within 0.5%, "
               "tolerance-based heat integration within its tolerance of the latent portion");
    } else {
        std::string detail = "energy balance violated";
        for (const auto& v : violations) detail += "; " + v;
        report(3, false, detail);
    }
}

// ---------------------------------------------------------------------------
// Plateau quality: while a node holds a partial latent budget its committed
// temperature must stay inside the tolerance band around the hold value.

struct PlateauScan {
    bool completed = false;
    double max_excess = -1e300;  // |T - T*| minus the band, worst over the run
};

PlateauScan scan_melting_plateau(const std::string& scheme_block, double dt) {
    std::ostringstream cfg;
    cfg << "case = meltvol_1d\n" << scheme_block << "time.dt = " << dt << "\n";
    const ExperimentSetup s = setup_from_text(cfg.str());
    ThermalSystem system(s.mesh, s.material, s.scheme, s.solver);
    system.set_dirichlet(s.bcs);
    const double amp = s.source_amplitude;
    const double length = s.domain_length;
    system.set_fixed_source([amp, length](const std::array<double, 3>& p, double) {
        return amp * (1.0 - p[0] / length);
    });
    TransientState state =
        system.make_initial_state(s.initial_temperature, s.initial_melt_fraction, s.dt0);
    TimeController controller = TimeController::fixed(s.dt0);

    const PhaseWindow win = effective_window(s.scheme, s.material);
    const double c_star = hi_modified_capacity(s.material, win.T_s, win.T_l);
    const double band = 1e-3 * s.material.H_m / c_star;

    PlateauScan scan;
    auto observer = [&](const TransientState& st, const StepRecord&) {
        for (size_t j = 0; j < st.temperature.size(); ++j) {
            if (st.hi.q_tot[j] == 0.0) continue;
            const double g = liquid_fraction_from_enthalpy(st.hi.q_hist[j], st.hi.q_tot[j]).value;
            if (!(g > 1e-9 && g < 1.0 - 1e-9)) continue;
            const double t_star =
                hi_intermediate_temperature(st.hi.q_hist[j], st.hi.q_tot[j], win.T_s, win.T_l);
            scan.max_excess =
                std::max(scan.max_excess, std::abs(st.temperature[j] - t_star) - band);
        }
        return false;
    };
    const SimulationResult sim = system.advance(state, controller, s.t_end, observer);
    scan.completed = sim.completed;
    return scan;
}

void criterion_4() {
    const std::string tol_block =
        "scheme.kind = hi\nscheme.criterion = tolerance\nscheme.epsilon = 1e-3\n";
    const std::string orig_block = "scheme.kind = hi\nscheme.criterion = original\n";
    const double fuzz = 1e-3;  // K, room for the Newton stopping point

    std::vector<std::string> violations;
    for (double dt : kFrontSteps) {
        const PlateauScan scan = scan_melting_plateau(tol_block, dt);
        if (!scan.completed) {
            violations.push_back("tolerance run at dt = " + fmt(dt) + " s did not finish");
            continue;
        }
        if (scan.max_excess > fuzz)
            violations.push_back("tolerance run at dt = " + fmt(dt) + " s left the band by " +
                                 fmt(scan.max_excess) + " K");
    }

    const PlateauScan orig = scan_melting_plateau(orig_block, 800.0);
    if (!orig.completed)
        violations.push_back("original run at dt = 800 s did not finish");
    else if (!(orig.max_excess > fuzz))
        violations.push_back("original run at dt = 800 s stayed within the band (worst excess " +
                             fmt(orig.max_excess) + " K), expected a violation");

    if (violations.empty()) {
        report(4, true,
               "partial-budget nodes stay within eps*H_m/C* of the hold temperature at every "
               "step size; the original criterion breaks the band at dt = 800 s");
    } else {
        std::string detail = "plateau band check failed";
        for (const auto& v : violations) detail += "; " + v;
        report(4, false, detail);
    }
}

// ---------------------------------------------------------------------------
// The capacity bump must carry exactly the latent heat for arbitrary windows.

void criterion_5() {
    std::mt19937 rng(20260819u);
    std::uniform_real_distribution<double> t_m_dist(300.0, 2000.0);
    std::uniform_real_distribution<double> half_dist(0.5, 50.0);
    std::uniform_real_distribution<double> h_m_dist(1e6, 1e9);
    std::uniform_real_distribution<double> cap_dist(5e5, 6e6);

    // 5-point Gauss rule per panel: exact for the quartic bump and for the
    // boxcar, and it never samples the window endpoints.
    const double gx[5] = {-0.90617984593866396, -0.53846931010568311, 0.0,
                          0.53846931010568311, 0.90617984593866396};
    const double gw[5] = {0.23692688505618909, 0.47862867049936647, 0.56888888888888889,
                          0.47862867049936647, 0.23692688505618909};

    int bad = 0;
    std::string first_bad;
    for (int trial = 0; trial < 200; ++trial) {
        MaterialModel m = water_parameters();
        m.T_s = m.T_m = m.T_l = t_m_dist(rng);
        m.H_m = h_m_dist(rng);
        m.capacity_solid = PiecewiseLinear::constant(cap_dist(rng));
        m.capacity_powder = m.capacity_solid;
        m.capacity_melt = PiecewiseLinear::constant(cap_dist(rng));
        MaterialModel base = m;
        base.H_m = 0.0;

        const double lo = m.T_m - half_dist(rng);
        const double hi = m.T_m + half_dist(rng);
        for (BumpShape shape : {BumpShape::SmoothedQuartic, BumpShape::Boxcar}) {
            const LatentHeatScheme scheme = LatentHeatScheme::apparent_capacity(lo, hi, shape);
            double integral = 0.0;
            const int panels = 8;
            for (int p = 0; p < panels; ++p) {
                const double a = lo + (hi - lo) * p / panels;
                const double b = lo + (hi - lo) * (p + 1) / panels;
                const double mid = 0.5 * (a + b);
                const double half = 0.5 * (b - a);
                for (int q = 0; q < 5; ++q) {
                    const double T = mid + half * gx[q];
                    const double diff = apparent_capacity(m, scheme, T, 1.0).value -
                                        apparent_capacity(base, scheme, T, 1.0).value;
                    integral += gw[q] * half * diff;
                }
            }
            if (!(std::abs(integral - m.H_m) <= 1e-10 * m.H_m)) {
                ++bad;
                if (first_bad.empty())
                    first_bad = "H_m " + fmt(m.H_m) + ", window [" + fmt(lo) + ", " + fmt(hi) +
                                "], got " + fmt(integral);
            }
        }
    }

    if (bad == 0)
        report(5, true,
               "capacity bump integrates to the latent heat within 1e-10 relative across 200 "
               "randomized windows, both bump shapes");
    else
        report(5, false,
               std::to_string(bad) + " of 400 bump integrals off by more than 1e-10 relative; "
               "first: " + first_bad);
}

// ---------------------------------------------------------------------------
// Budget reversibility: scripted melt-freeze cycles must return the latent
// ledger to exactly zero while consolidation is preserved.

void criterion_6() {
    const MaterialModel m = water_parameters();
    std::mt19937 rng(123456u);
    std::uniform_real_distribution<double> mass_dist(0.005, 2.0);
    std::uniform_real_distribution<double> dt_dist(25.0, 800.0);
    std::uniform_real_distribution<double> push_dist(0.5, 30.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> steps_dist(2, 14);
    std::uniform_int_distribution<int> crit_dist(0, 4);

    const double c_star = hi_modified_capacity(m, m.T_m, m.T_m);

    int bad = 0, full_melts = 0, partial_melts = 0;
    std::string first_bad;
    for (int trial = 0; trial < 1000; ++trial) {
        const int pick = crit_dist(rng);
        LatentHeatScheme scheme;
        double band = 0.0;
        if (pick == 0) {
            scheme = LatentHeatScheme::heat_integration(HiMode::Isothermal,
                                                        HiCriterion::Original);
        } else {
            const double eps = std::pow(10.0, -pick);  // 1e-1 .. 1e-4
            scheme = LatentHeatScheme::heat_integration(HiMode::Isothermal,
                                                        HiCriterion::Tolerance, eps);
            band = eps * m.H_m / c_star;
        }

        const double mass = mass_dist(rng);
        const double dt = dt_dist(rng);
        HiNodeState state;
        state.initialize({mass}, m.H_m, dt, 0.0);
        double r_c = unit(rng);
        const double r_c_init = r_c;
        double g_peak = 0.0;

        std::vector<double> T_prev = {m.T_m - push_dist(rng)};
        std::vector<double> T(1);

        const int cycles = 1 + (unit(rng) < 0.4 ? 1 : 0);
        for (int cycle = 0; cycle < cycles; ++cycle) {
            const int melt_steps = steps_dist(rng);
            for (int k = 0; k < melt_steps; ++k) {
                state.begin_step();
                T[0] = m.T_m + band + push_dist(rng);
                hi_iteration(state, T, T_prev, scheme, m, dt);
                hi_iteration(state, T, T_prev, scheme, m, dt);
                state.commit();
                T_prev = T;
                const double g =
                    liquid_fraction_from_enthalpy(state.q_hist[0], state.q_tot[0]).value;
                g_peak = std::max(g_peak, g);
                r_c = update_consolidated_fraction(r_c, g);
            }
            for (int k = 0; k < 300 && state.q_hist[0] != 0.0; ++k) {
                state.begin_step();
                T[0] = m.T_m - band - push_dist(rng);
                hi_iteration(state, T, T_prev, scheme, m, dt);
                hi_iteration(state, T, T_prev, scheme, m, dt);
                state.commit();
                T_prev = T;
                r_c = update_consolidated_fraction(
                    r_c, liquid_fraction_from_enthalpy(state.q_hist[0], state.q_tot[0]).value);
            }
        }

        if (g_peak >= 1.0)
            ++full_melts;
        else
            ++partial_melts;

        const PhaseFractions f = phase_fractions(r_c, 0.0);
        const bool ok = state.q_hist[0] == 0.0 && r_c == std::max(r_c_init, g_peak) &&
                        f.melt == 0.0 && f.solid == r_c &&
                        f.powder == std::clamp(1.0 - r_c, 0.0, 1.0);
        if (!ok) {
            ++bad;
            if (first_bad.empty())
                first_bad = "trial " + std::to_string(trial) + ": q_hist " +
                            fmt(state.q_hist[0]) + ", r_c " + fmt(r_c);
        }
    }

    if (bad == 0 && full_melts >= 50 && partial_melts >= 50)
        report(6, true,
               "1000 fuzzed melt-freeze cycles return the budget to exactly zero with "
               "consolidation preserved (" +
                   std::to_string(full_melts) + " full melts, " +
                   std::to_string(partial_melts) + " partial)");
    else if (bad == 0)
        report(6, false,
               "cycle fuzzing lacked coverage: " + std::to_string(full_melts) + " full vs " +
                   std::to_string(partial_melts) + " partial melts");
    else
        report(6, false, std::to_string(bad) + " of 1000 cycles broke the ledger; first: " +
                             first_bad);
}

// ---------------------------------------------------------------------------
// Single-track scans: melt pool size and the oscillation contrast between the
// two latent heat treatments. Both checks share the same pair of runs.

// Largest rise above the running minimum when walking from the peak outward;
// zero for a profile that decays monotonically on both sides.
double max_rebound(const std::vector<std::pair<double, double>>& line) {
    if (line.empty()) return 0.0;
    size_t peak = 0;
    for (size_t i = 1; i < line.size(); ++i)
        if (line[i].second > line[peak].second) peak = i;
    double worst = 0.0;
    double running = line[peak].second;
    for (size_t i = peak; i-- > 0;) {
        worst = std::max(worst, line[i].second - running);
        running = std::min(running, line[i].second);
    }
    running = line[peak].second;
    for (size_t i = peak + 1; i < line.size(); ++i) {
        worst = std::max(worst, line[i].second - running);
        running = std::min(running, line[i].second);
    }
    return worst;
}

void criteria_7_and_8() {
    const std::string mesh_block = "mesh.h = 1.6666666666666667e-5\n";
    const ExperimentSetup ac_setup = setup_from_text(
        "case = single_track\nscheme.kind = ac\nscheme.d = 100\n" + mesh_block);
    const ExperimentSetup hi_setup = setup_from_text(
        "case = single_track\nscheme.kind = hi\nscheme.criterion = tolerance\n"
        "scheme.epsilon = 1e-3\n" +
        mesh_block);

    const ExperimentResult ac = run_experiment(ac_setup);
    const ExperimentResult hi = run_experiment(hi_setup);

    std::vector<std::string> pool_violations;
    auto check_pool = [&](const char* label, const ExperimentResult& res) {
        if (!res.sim.completed) {
            pool_violations.push_back(std::string(label) +
                                      " did not finish: " + res.sim.failure_reason);
            return;
        }
        if (!res.metrics_valid || !res.metrics.pool_found) {
            pool_violations.push_back(std::string(label) + " found no melt pool");
            return;
        }
        const MeltPoolMetrics& p = res.metrics;
        if (!(p.length >= 2.2e-4 && p.length <= 3.4e-4))
            pool_violations.push_back(std::string(label) + " length " + fmt(p.length * 1e3) +
                                      " mm outside 0.28 +- 0.06");
        if (!(p.width >= 1.6e-4 && p.width <= 2.4e-4))
            pool_violations.push_back(std::string(label) + " width " + fmt(p.width * 1e3) +
                                      " mm outside 0.20 +- 0.04");
        if (!(p.depth >= 5e-5 && p.depth <= 9e-5))
            pool_violations.push_back(std::string(label) + " depth " + fmt(p.depth * 1e3) +
                                      " mm outside 0.07 +- 0.02");
        if (!(p.peak_temperature >= 4250.0 && p.peak_temperature <= 5750.0))
            pool_violations.push_back(std::string(label) + " peak " +
                                      fmt(p.peak_temperature) + " K outside 5000 +- 15%");
    };
    check_pool("ac", ac);
    check_pool("hi-iso-tol", hi);

    if (pool_violations.empty()) {
        report(7, true,
               "melt pool length/width/depth and peak temperature inside the published "
               "windows for both treatments (ac: " +
                   fmt(ac.metrics.length * 1e3) + "/" + fmt(ac.metrics.width * 1e3) + "/" +
                   fmt(ac.metrics.depth * 1e3) + " mm, " + fmt(ac.metrics.peak_temperature) +
                   " K)");
    } else {
        std::string detail = "melt pool out of range";
        for (const auto& v : pool_violations) detail += "; " + v;
        report(7, false, detail);
    }

    // Oscillation contrast along the scan line of the same two runs.
    if (!ac.sim.completed || !hi.sim.completed) {
        report(8, false, "oscillation contrast not evaluated: a track run did not finish");
        return;
    }
    const auto ac_line = surface_scan_line(ac.state.temperature, ac_setup.mesh);
    const auto hi_line = surface_scan_line(hi.state.temperature, hi_setup.mesh);
    const double t0 = 303.0;
    auto line_peak = [](const std::vector<std::pair<double, double>>& line) {
        double peak = -1e300;
        for (const auto& [x, t] : line) peak = std::max(peak, t);
        return peak;
    };
    const double ac_thresh = 0.01 * (line_peak(ac_line) - t0);
    const double hi_thresh = 0.01 * (line_peak(hi_line) - t0);
    const double ac_osc = max_rebound(ac_line);
    const double hi_osc = max_rebound(hi_line);

    if (ac_osc > ac_thresh && hi_osc <= hi_thresh)
        report(8, true,
               "apparent capacity rebounds by " + fmt(ac_osc) + " K (> 1% of the rise), heat "
               "integration by " +
                   fmt(hi_osc) + " K (below)");
    else
        report(8, false,
               "oscillation contrast missing: ac rebound " + fmt(ac_osc) + " K vs threshold " +
                   fmt(ac_thresh) + " K, hi rebound " + fmt(hi_osc) + " K vs threshold " +
                   fmt(hi_thresh) + " K");
}

// ---------------------------------------------------------------------------
// The analytic reference must balance the interface fluxes and reduce to the
// one-phase solution when the bulk starts at the melting point.

void criterion_9() {
    const MaterialModel m = water_parameters();
    const StefanProblem p = StefanProblem::from_material(m, 253.0, 283.0);
    const StefanSolution sol(p);
    const double lam = sol.similarity();
    const double a_s = p.alpha_solid();
    const double a_l = p.alpha_liquid();
    const double nu = std::sqrt(a_s / a_l);
    const double pi = 3.14159265358979323846;
    const double t = 72000.0;

    const double solid_flux = p.conductivity_solid *
                              (p.melting_temperature - p.wall_temperature) / std::erf(lam) *
                              std::exp(-lam * lam) / std::sqrt(pi * a_s * t);
    const double liquid_flux = p.conductivity_liquid *
                               (p.initial_temperature - p.melting_temperature) /
                               std::erfc(lam * nu) * std::exp(-lam * lam * nu * nu) /
                               std::sqrt(pi * a_l * t);
    const double front_release = p.latent_heat * lam * std::sqrt(a_s / t);
    const double rel = std::abs(solid_flux - liquid_flux - front_release) / front_release;

    const StefanProblem one_phase = StefanProblem::from_material(m, 253.0, 273.0);
    const double lam_one = StefanSolution(one_phase).similarity();
    const double lam_one_ref = 0.22450381846991416;

    if (rel <= 1e-10 && std::abs(lam_one - lam_one_ref) <= 1e-12)
        report(9, true,
               "interface fluxes balance to " + fmt(rel) + " relative and the one-phase "
               "reduction reproduces the independent similarity constant");
    else
        report(9, false,
               "flux-jump residual " + fmt(rel) + " (bound 1e-10), one-phase constant " +
                   fmt(lam_one) + " vs " + fmt(lam_one_ref));
}

// ---------------------------------------------------------------------------
// With the latent heat removed and identical phase tables, every treatment
// must solve the same plain conduction problem.

void criterion_10() {
    const std::string base =
        "case = front_1d\n"
        "mesh.elements = 25\n"
        "time.dt = 200\n"
        "solver.capacity = lumped\n"
        "material.H_m = 0\n"
        "material.C_powder = 3e6\n"
        "material.C_solid = 3e6\n"
        "material.C_melt = 3e6\n"
        "material.k_powder = 1.5\n"
        "material.k_solid = 1.5\n"
        "material.k_melt = 1.5\n";
    const std::vector<std::pair<std::string, std::string>> schemes = {
        {"none", "scheme.kind = none\n"},
        {"ac", "scheme.kind = ac\nscheme.d = 3\n"},
        {"hi-iso-orig", "scheme.kind = hi\nscheme.criterion = original\n"},
        {"hi-iso-tol", "scheme.kind = hi\nscheme.criterion = tolerance\n"},
        {"hi-mushy-orig", "scheme.kind = hi\nscheme.criterion = original\nscheme.d = 3\n"},
        {"hi-mushy-tol", "scheme.kind = hi\nscheme.criterion = tolerance\nscheme.d = 3\n"},
    };

    std::vector<std::string> labels;
    std::vector<std::vector<double>> fields;
    std::vector<std::string> violations;
    for (const auto& [label, block] : schemes) {
        const ExperimentResult res = run_experiment(setup_from_text(base + block));
        if (!res.sim.completed) {
            violations.push_back(label + " did not finish: " + res.sim.failure_reason);
            continue;
        }
        labels.push_back(label);
        fields.push_back(res.state.temperature);
    }

    double worst = 0.0;
    std::string worst_pair;
    for (size_t a = 0; a < fields.size(); ++a)
        for (size_t b = a + 1; b < fields.size(); ++b) {
            double diff = 0.0;
            for (size_t j = 0; j < fields[a].size(); ++j)
                diff = std::max(diff, std::abs(fields[a][j] - fields[b][j]));
            if (diff > worst) {
                worst = diff;
                worst_pair = labels[a] + " vs " + labels[b];
            }
        }
    if (worst > 1e-6)
        violations.push_back("largest pairwise gap " + fmt(worst) + " K (" + worst_pair + ")");

    if (violations.empty())
        report(10, true,
               "all six treatments coincide to " + fmt(worst) +
                   " K max-norm with the latent heat removed");
    else {
        std::string detail = "degenerate problem disagrees";
        for (const auto& v : violations) detail += "; " + v;
        report(10, false, detail);
    }
}

}  // namespace

int main() {
    try {
        const std::map<std::string, FrontCell> cells = run_front_matrix();
        criterion_1(cells);
        criterion_2(cells);
    } catch (const std::exception& e) {
        report(1, false, std::string("front matrix threw: ") + e.what());
        report(2, false, "front matrix unavailable");
    }
    try {
        criterion_3();
    } catch (const std::exception& e) {
        report(3, false, std::string("threw: ") + e.what());
    }
    try {
        criterion_4();
    } catch (const std::exception& e) {
        report(4, false, std::string("threw: ") + e.what());
    }
    try {
        criterion_5();
    } catch (const std::exception& e) {
        report(5, false, std::string("threw: ") + e.what());
    }
    try {
        criterion_6();
    } catch (const std::exception& e) {
        report(6, false, std::string("threw: ") + e.what());
    }
    try {
        criteria_7_and_8();
    } catch (const std::exception& e) {
        report(7, false, std::string("threw: ") + e.what());
        report(8, false, "track runs unavailable");
    }
    try {
        criterion_9();
    } catch (const std::exception& e) {
        report(9, false, std::string("threw: ") + e.what());
    }
    try {
        criterion_10();
    } catch (const std::exception& e) {
        report(10, false, std::string("threw: ") + e.what());
    }

    std::printf("%d of 10 criteria failed\n", g_failures);
    return g_failures;
}
