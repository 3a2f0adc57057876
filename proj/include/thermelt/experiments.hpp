#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "thermelt/config.hpp"
#include "thermelt/io.hpp"
#include "thermelt/laser.hpp"
#include "thermelt/latent_heat.hpp"
#include "thermelt/material.hpp"
#include "thermelt/mesh.hpp"
#include "thermelt/metrics.hpp"
#include "thermelt/solver.hpp"
#include "thermelt/stefan.hpp"

namespace thermelt {

enum class ExperimentCase { Front1d, MeltVol1d, SingleTrack };

inline std::string case_name(ExperimentCase c) {
    switch (c) {
        case ExperimentCase::Front1d: return "front_1d";
        case ExperimentCase::MeltVol1d: return "meltvol_1d";
        case ExperimentCase::SingleTrack: return "single_track";
    }
    return "?";
}

// Stop the transient once the melt pool length has settled: sampled on a
// fixed wall-clock grid, required to change by less than rel_change between
// consecutive samples several times in a row, and never before min_time.
struct SteadyDetection {
    bool enabled = false;
    double interval = 1e-5;
    double rel_change = 0.01;
    double min_time = 2.5e-3;
    int consecutive = 3;
};

struct ExperimentSetup {
    ExperimentCase kind = ExperimentCase::Front1d;
    Mesh mesh;
    int n_elements = 0;
    MaterialModel material;
    LatentHeatScheme scheme;
    SolverConfig solver;

    double dt0 = 0.0;
    double dt_min = 0.0;
    double t_end = 0.0;
    bool adaptive = false;
    int double_after = 4;

    double initial_temperature = 0.0;
    double initial_melt_fraction = 0.0;

    std::vector<DirichletBc> bcs;
    std::optional<LaserBeam> beam;
    double source_amplitude = 0.0;  // linearly decaying volumetric source (W/m^3 at x = 0)
    double domain_length = 0.0;

    SteadyDetection steady;

    std::filesystem::path output_dir;
    bool write_vtk = false;
    bool write_snapshot = true;
};

namespace detail {

inline ExperimentCase parse_case(const std::string& s) {
    if (s == "front_1d") return ExperimentCase::Front1d;
    if (s == "meltvol_1d") return ExperimentCase::MeltVol1d;
    if (s == "single_track") return ExperimentCase::SingleTrack;
    throw ConfigError("unknown case '" + s + "' (expected front_1d, meltvol_1d or single_track)");
}

inline MaterialModel parse_material(Config& cfg, ExperimentCase kind) {
    const std::string base =
        cfg.get_string("material.name",
                       kind == ExperimentCase::SingleTrack ? "316l" : "water");
    MaterialModel m;
    if (base == "water")
        m = water_parameters();
    else if (base == "316l")
        m = stainless_steel_316l_parameters();
    else
        throw ConfigError("unknown material.name '" + base + "' (expected water or 316l)");

    const bool base_iso = m.isothermal();
    m.T_m = cfg.get_double("material.T_m", m.T_m);
    m.T_s = cfg.get_double("material.T_s", base_iso ? m.T_m : m.T_s);
    m.T_l = cfg.get_double("material.T_l", base_iso ? m.T_m : m.T_l);
    m.H_m = cfg.get_double("material.H_m", m.H_m);

    const std::pair<const char*, PiecewiseLinear*> tables[] = {
        {"material.C_powder", &m.capacity_powder},
        {"material.C_melt", &m.capacity_melt},
        {"material.C_solid", &m.capacity_solid},
        {"material.k_powder", &m.conductivity_powder},
        {"material.k_melt", &m.conductivity_melt},
        {"material.k_solid", &m.conductivity_solid},
    };
    for (const auto& [key, slot] : tables)
        if (cfg.has(key)) *slot = cfg.get_table(key);

    try {
        m.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("material block: ") + e.what());
    }
    return m;
}

inline LatentHeatScheme parse_scheme(Config& cfg, const MaterialModel& m) {
    const std::string kind = cfg.get_string("scheme.kind");
    LatentHeatScheme s;
    if (kind == "none") {
        s = LatentHeatScheme::none();
    } else if (kind == "ac") {
        const double d = cfg.get_double("scheme.d", 0.0);
        BumpShape shape = BumpShape::SmoothedQuartic;
        if (cfg.has("scheme.bump")) {
            const std::string b = cfg.get_string("scheme.bump");
            if (b == "smoothed")
                shape = BumpShape::SmoothedQuartic;
            else if (b == "boxcar")
                shape = BumpShape::Boxcar;
            else
                throw ConfigError("scheme.bump must be smoothed or boxcar, got '" + b + "'");
        }
        if (d > 0.0)
            s = LatentHeatScheme::apparent_capacity(m.T_m - d, m.T_m + d, shape);
        else if (!m.isothermal())
            s = LatentHeatScheme::apparent_capacity(m.T_s, m.T_l, shape);
        else
            throw ConfigError(
                "scheme.kind = ac needs scheme.d (artificial half interval) for an "
                "isothermal material");
    } else if (kind == "hi") {
        const std::string crit_s = cfg.get_string("scheme.criterion", "original");
        HiCriterion crit;
        if (crit_s == "original")
            crit = HiCriterion::Original;
        else if (crit_s == "tolerance")
            crit = HiCriterion::Tolerance;
        else
            throw ConfigError("scheme.criterion must be original or tolerance, got '" + crit_s +
                              "'");
        double eps = 1e-3;
        if (crit == HiCriterion::Tolerance) eps = cfg.get_double("scheme.epsilon", 1e-3);

        const double d = cfg.get_double("scheme.d", 0.0);
        const std::string mode_s = cfg.get_string("scheme.mode", "auto");
        HiMode mode;
        if (mode_s == "auto")
            mode = (d > 0.0 || !m.isothermal()) ? HiMode::Mushy : HiMode::Isothermal;
        else if (mode_s == "isothermal")
            mode = HiMode::Isothermal;
        else if (mode_s == "mushy")
            mode = HiMode::Mushy;
        else
            throw ConfigError("scheme.mode must be auto, isothermal or mushy, got '" + mode_s +
                              "'");
        s = LatentHeatScheme::heat_integration(mode, crit, eps);
        if (d > 0.0) s.set_interval(m.T_m - d, m.T_m + d);
        if (mode == HiMode::Mushy && !s.has_interval && m.isothermal())
            throw ConfigError("scheme.mode = mushy needs scheme.d for an isothermal material");
    } else {
        throw ConfigError("scheme.kind must be none, ac or hi, got '" + kind + "'");
    }
    s.ramp_smoothing = cfg.get_double("scheme.smoothing", 0.0);
    try {
        validate_scheme(s, m);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("scheme block: ") + e.what());
    }
    return s;
}

inline SolverConfig parse_solver(Config& cfg, const LatentHeatScheme& scheme) {
    SolverConfig sc;
    sc.theta = cfg.get_double("solver.theta", 1.0);
    const std::string cap = cfg.get_string("solver.capacity", "auto");
    if (cap == "auto")
        sc.capacity_form = scheme.uses_heat_integration() ? CapacityForm::Lumped
                                                          : CapacityForm::Consistent;
    else if (cap == "lumped")
        sc.capacity_form = CapacityForm::Lumped;
    else if (cap == "consistent")
        sc.capacity_form = CapacityForm::Consistent;
    else
        throw ConfigError("solver.capacity must be auto, lumped or consistent, got '" + cap +
                          "'");
    if (scheme.uses_heat_integration() && sc.capacity_form != CapacityForm::Lumped)
        throw ConfigError("heat integration requires solver.capacity = lumped");

    sc.newton_rel_tol = cfg.get_double("solver.newton_rel", 1e-6);
    sc.newton_abs_tol = cfg.get_double("solver.newton_abs", 1e-10);
    sc.max_newton_iterations = cfg.get_int("solver.max_iterations", 200);

    const std::string lin = cfg.get_string("solver.linear", "auto");
    if (lin == "auto")
        sc.linear_solver = LinearSolverKind::Auto;
    else if (lin == "direct")
        sc.linear_solver = LinearSolverKind::Direct;
    else if (lin == "cg")
        sc.linear_solver = LinearSolverKind::ConjugateGradient;
    else
        throw ConfigError("solver.linear must be auto, direct or cg, got '" + lin + "'");
    sc.cg_rel_tol = cfg.get_double("solver.cg_rel", 1e-10);
    sc.cg_max_iterations = cfg.get_int("solver.cg_max", 20000);
    try {
        sc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("solver block: ") + e.what());
    }
    return sc;
}

inline void add_bc_if_set(Config& cfg, const std::string& key, const std::string& set,
                          std::vector<DirichletBc>& bcs) {
    if (cfg.has(key)) bcs.push_back({set, cfg.get_double(key)});
}

}  // namespace detail

// Builds a complete runnable setup from a parsed config, applying per-case
// defaults so a minimal file only names the case and the scheme. Unknown keys
// are rejected wholesale after parsing.
inline ExperimentSetup parse_experiment(Config& cfg,
                                        const std::filesystem::path& config_path = {}) {
    ExperimentSetup s;
    s.kind = detail::parse_case(cfg.get_string("case"));
    s.material = detail::parse_material(cfg, s.kind);
    s.scheme = detail::parse_scheme(cfg, s.material);
    s.solver = detail::parse_solver(cfg, s.scheme);

    if (s.kind == ExperimentCase::SingleTrack) {
        const double h = cfg.get_length("mesh.h", 2.5e-6);
        const double lx = cfg.get_length("mesh.lx", 0.6e-3);
        const double ly = cfg.get_length("mesh.ly", 0.1e-3);
        const double lz = cfg.get_length("mesh.lz", 0.2e-3);
        const double layer = cfg.get_length("mesh.layer", 0.05e-3);
        const double zfac = cfg.get_double("mesh.substrate_factor", 2.0);
        try {
            s.mesh = build_layered_hex_mesh({lx, ly, lz}, layer, h, zfac);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("mesh block: ") + e.what());
        }
        s.domain_length = lx;

        LaserBeam beam;
        beam.effective_power = cfg.get_double("beam.power", 30.0);
        beam.radius = cfg.get_length("beam.radius", 6e-5);
        beam.scan_speed = cfg.get_double("beam.speed", 0.12);
        beam.start = {cfg.get_length("beam.start_x", -6e-5), 0.0};
        beam.direction = {1.0, 0.0};
        beam.reflectivity = cfg.get_double("beam.reflectivity", 0.7);
        beam.extinction = cfg.get_double("beam.extinction", 60.0e3);
        beam.layer_thickness = layer;
        beam.surface_z = lz;
        const std::string prof = cfg.get_string("beam.depth_profile", "standard");
        if (prof == "standard")
            beam.depth_profile = DepthProfile::Standard;
        else if (prof == "alt-sign")
            beam.depth_profile = DepthProfile::AltSign;
        else
            throw ConfigError("beam.depth_profile must be standard or alt-sign, got '" + prof +
                              "'");
        try {
            beam.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("beam block: ") + e.what());
        }
        s.beam = beam;

        detail::add_bc_if_set(cfg, "bc.x0_T", "x0", s.bcs);
        if (!cfg.has("bc.x1_T")) s.bcs.push_back({"x1", 303.0});
        detail::add_bc_if_set(cfg, "bc.x1_T", "x1", s.bcs);
        detail::add_bc_if_set(cfg, "bc.y1_T", "y1", s.bcs);
        detail::add_bc_if_set(cfg, "bc.z0_T", "z0", s.bcs);

        s.dt0 = cfg.get_double("time.dt", 1e-6);
        s.t_end = cfg.get_double("time.t_end", 4.5e-3);
        s.adaptive = cfg.get_bool("time.adaptive", true);
        s.initial_temperature = cfg.get_double("initial.T", 303.0);
        s.steady.enabled = cfg.get_bool("steady.enabled", true);
    } else {
        s.domain_length = cfg.get_length("mesh.length", 1.0);
        const int n = cfg.get_int("mesh.elements", 100);
        if (n < 1) throw ConfigError("mesh.elements must be positive");
        s.mesh = build_line_mesh(s.domain_length, n);

        if (s.kind == ExperimentCase::Front1d) {
            if (!cfg.has("bc.left_T")) s.bcs.push_back({"left", 253.0});
            detail::add_bc_if_set(cfg, "bc.left_T", "left", s.bcs);
            detail::add_bc_if_set(cfg, "bc.right_T", "right", s.bcs);
            s.dt0 = cfg.get_double("time.dt", 200.0);
            s.t_end = cfg.get_double("time.t_end", 72.0e3);
            s.initial_temperature = cfg.get_double("initial.T", 283.0);
        } else {
            detail::add_bc_if_set(cfg, "bc.left_T", "left", s.bcs);
            detail::add_bc_if_set(cfg, "bc.right_T", "right", s.bcs);
            s.source_amplitude = cfg.get_double("source.amplitude", 20.0e3);
            s.dt0 = cfg.get_double("time.dt", 200.0);
            s.t_end = cfg.get_double("time.t_end", 20.0e3);
            s.initial_temperature = cfg.get_double("initial.T", 263.0);
        }
        s.adaptive = cfg.get_bool("time.adaptive", false);
        s.steady.enabled = cfg.get_bool("steady.enabled", false);
    }
    s.n_elements = s.mesh.n_elements();

    if (!(s.dt0 > 0.0)) throw ConfigError("time.dt must be positive");
    if (!(s.t_end > 0.0)) throw ConfigError("time.t_end must be positive");
    s.dt_min = cfg.get_double("time.dt_min", s.dt0 / 1024.0);
    s.double_after = cfg.get_int("time.double_after", 4);
    if (s.adaptive && !(s.dt_min > 0.0 && s.dt_min <= s.dt0))
        throw ConfigError("time.dt_min must lie in (0, time.dt]");

    const std::string phase = cfg.get_string("initial.phase", "auto");
    if (phase == "auto")
        s.initial_melt_fraction = s.initial_temperature >= s.material.T_m ? 1.0 : 0.0;
    else if (phase == "liquid")
        s.initial_melt_fraction = 1.0;
    else if (phase == "solid")
        s.initial_melt_fraction = 0.0;
    else
        throw ConfigError("initial.phase must be auto, solid or liquid, got '" + phase + "'");

    s.steady.interval = cfg.get_double("steady.interval", s.steady.interval);
    s.steady.rel_change = cfg.get_double("steady.rel_change", s.steady.rel_change);
    s.steady.min_time = cfg.get_double("steady.min_time", s.steady.min_time);
    s.steady.consecutive = cfg.get_int("steady.consecutive", s.steady.consecutive);
    if (s.steady.enabled &&
        !(s.steady.interval > 0.0 && s.steady.rel_change > 0.0 && s.steady.consecutive >= 1))
        throw ConfigError("steady block: interval, rel_change and consecutive must be positive");

    std::filesystem::path out_default = config_path.empty()
                                            ? std::filesystem::path(case_name(s.kind) + ".out")
                                            : config_path.parent_path() /
                                                  (config_path.stem().string() + ".out");
    s.output_dir = cfg.get_string("output.dir", out_default.string());
    s.write_vtk = cfg.get_bool("output.vtk", s.mesh.dim == 3);
    s.write_snapshot = cfg.get_bool("output.snapshot", true);

    cfg.require_all_consumed();
    return s;
}

struct ExperimentResult {
    ExperimentSetup setup;
    SimulationResult sim;
    TransientState state;  // fields at the stop time
    RunSummary summary;
    MeltPoolMetrics metrics;
    bool metrics_valid = false;
    bool steady_detected = false;
    double error_norm = -1.0;     // front benchmark only, against the similarity solution
    double molten_volume = 0.0;   // liquid volume at the stop time, m^3
};

namespace detail {

// Nodal liquid fraction consistent with the scheme's own bookkeeping.
inline double molten_volume_now(const ExperimentSetup& s, const TransientState& st) {
    const PhaseWindow win = effective_window(s.scheme, s.material);
    const bool from_budget = s.scheme.uses_enthalpy_fraction(s.material);
    double vol = 0.0;
    for (int j = 0; j < s.mesh.n_nodes(); ++j) {
        const auto ju = static_cast<size_t>(j);
        double g;
        if (from_budget)
            g = liquid_fraction_from_enthalpy(st.hi.q_hist[ju], st.hi.q_tot[ju]).value;
        else
            g = liquid_fraction_window(st.temperature[ju], win, s.scheme.ramp_smoothing).value;
        vol += s.mesh.node_pseudo_mass[ju] * g;
    }
    return vol;
}

}  // namespace detail

inline ExperimentResult run_experiment(const ExperimentSetup& setup) {
    ExperimentResult res;
    res.setup = setup;
    const ExperimentSetup& s = res.setup;  // the system keeps a mesh reference

    ThermalSystem system(s.mesh, s.material, s.scheme, s.solver);
    system.set_dirichlet(s.bcs);
    if (s.beam) system.set_beam(*s.beam);
    if (s.kind == ExperimentCase::MeltVol1d) {
        const double amp = s.source_amplitude;
        const double length = s.domain_length;
        system.set_fixed_source([amp, length](const std::array<double, 3>& p, double) {
            return amp * (1.0 - p[0] / length);
        });
    }

    TransientState state =
        system.make_initial_state(s.initial_temperature, s.initial_melt_fraction, s.dt0);
    TimeController controller =
        s.adaptive ? TimeController(s.dt0, s.dt_min, true, s.double_after)
                   : TimeController::fixed(s.dt0);

    double last_sample = 0.0;
    double last_length = -1.0;
    int hits = 0;
    std::function<bool(const TransientState&, const StepRecord&)> observer;
    if (s.steady.enabled) {
        observer = [&](const TransientState& st, const StepRecord&) {
            if (st.time + 1e-15 < last_sample + s.steady.interval) return false;
            const double len = melt_pool_metrics(st.temperature, s.mesh, s.material.T_m).length;
            const bool settled =
                last_length > 0.0 && std::abs(len - last_length) < s.steady.rel_change * last_length;
            last_sample = st.time;
            last_length = len;
            if (st.time < s.steady.min_time) {
                hits = 0;
                return false;
            }
            hits = settled ? hits + 1 : 0;
            return hits >= s.steady.consecutive;
        };
    }

    res.sim = system.advance(state, controller, s.t_end, observer);
    res.state = std::move(state);
    res.steady_detected = res.sim.stopped_by_observer;
    res.summary = summarize_run(res.sim, case_name(s.kind), s.scheme.label(), s.n_elements, s.dt0);

    if (s.mesh.dim == 3) {
        res.metrics = melt_pool_metrics(res.state.temperature, s.mesh, s.material.T_m);
        res.metrics_valid = true;
    }
    res.molten_volume = detail::molten_volume_now(s, res.state);

    if (s.kind == ExperimentCase::Front1d && res.sim.completed && !s.bcs.empty()) {
        const StefanProblem p = StefanProblem::from_material(s.material, s.bcs.front().value,
                                                             s.initial_temperature);
        const StefanSolution sol(p);
        std::vector<double> ref(res.state.temperature.size());
        for (size_t i = 0; i < ref.size(); ++i)
            ref[i] = sol.temperature(s.mesh.nodes[i][0], res.state.time);
        res.error_norm = max_error_norm(res.state.temperature, ref, s.initial_temperature,
                                        s.bcs.front().value);
    }
    return res;
}

inline void write_experiment_outputs(const ExperimentResult& res) {
    const ExperimentSetup& s = res.setup;
    std::filesystem::create_directories(s.output_dir);

    {
        std::ostringstream os;
        write_statistics_csv(os, res.sim.steps, s.scheme.label());
        write_text_file(s.output_dir / "stats.csv", os.str());
    }
    if (s.write_snapshot) {
        std::ostringstream os;
        write_snapshot_csv(os, s.mesh, res.state.temperature);
        write_text_file(s.output_dir / "snapshot_final.csv", os.str());
    }
    if (s.write_vtk && s.mesh.dim == 3) {
        std::ostringstream os;
        write_vtk_structured(os, s.mesh, res.state.temperature, res.state.time);
        write_text_file(s.output_dir / "field_final.vtk", os.str());
    }
    {
        std::ostringstream os;
        write_iteration_report_csv(os, {res.summary});
        write_text_file(s.output_dir / "summary.csv", os.str());
    }
    {
        std::ostringstream os;
        if (res.metrics_valid)
            write_melt_pool_metrics(os, res.metrics, res.state.time, res.steady_detected);
        if (res.error_norm >= 0.0)
            os << "error_norm = " << detail::format_double(res.error_norm) << '\n';
        os << "molten_volume_m3 = " << detail::format_double(res.molten_volume) << '\n';
        os << "final_time_s = " << detail::format_double(res.state.time) << '\n';
        os << "completed = " << (res.sim.completed ? 1 : 0) << '\n';
        if (!res.sim.completed) os << "failure_reason = " << res.sim.failure_reason << '\n';
        write_text_file(s.output_dir / "metrics.txt", os.str());
    }
}

// One config file end to end: parse, simulate, write the output set.
inline ExperimentResult run_config_file(const std::filesystem::path& path,
                                        const std::vector<std::string>& overrides) {
    Config cfg = Config::from_file(path.string());
    for (const auto& ov : overrides) cfg.set_override(ov);
    const ExperimentSetup setup = parse_experiment(cfg, path);
    ExperimentResult res = run_experiment(setup);
    write_experiment_outputs(res);
    return res;
}

struct SweepOutcome {
    int runs = 0;
    int config_errors = 0;
    int solver_failures = 0;
    std::vector<std::string> messages;  // one line per config, in sorted config order
};

inline SweepOutcome run_sweep(const std::filesystem::path& dir,
                              const std::vector<std::string>& overrides, bool serial) {
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("sweep: '" + dir.string() + "' is not a directory");
    std::vector<std::filesystem::path> configs;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".cfg")
            configs.push_back(entry.path());
    std::sort(configs.begin(), configs.end());
    if (configs.empty()) throw ConfigError("sweep: no .cfg files in " + dir.string());

    SweepOutcome out;
    out.runs = static_cast<int>(configs.size());
    out.messages.resize(configs.size());
    std::vector<int> status(configs.size(), 0);  // 0 ok, 2 config error, 3 failed run

    auto work_one = [&](size_t i) {
        const auto& path = configs[i];
        std::ostringstream msg;
        msg << path.filename().string() << ": ";
        try {
            const ExperimentResult res = run_config_file(path, overrides);
            if (res.sim.completed) {
                msg << "ok, " << res.summary.converged_steps << " steps";
            } else {
                status[i] = 3;
                msg << "did not finish: " << res.sim.failure_reason;
            }
        } catch (const ConfigError& e) {
            status[i] = 2;
            msg << "config error: " << e.what();
        } catch (const std::exception& e) {
            status[i] = 3;
            msg << "error: " << e.what();
        }
        out.messages[i] = msg.str();
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const size_t workers = serial ? 1 : std::min<size_t>(hw, configs.size());
    if (workers <= 1) {
        for (size_t i = 0; i < configs.size(); ++i) work_one(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < configs.size(); i = next.fetch_add(1))
                    work_one(i);
            });
        for (auto& t : pool) t.join();
    }
    for (int st : status) {
        if (st == 2) ++out.config_errors;
        if (st == 3) ++out.solver_failures;
    }
    return out;
}

// Aggregates per-run summary.csv and metrics.txt files found under a results
// tree into one comparison report (written next to the runs and returned for
// printing).
inline std::string build_report(const std::filesystem::path& results_dir) {
    if (!std::filesystem::is_directory(results_dir))
        throw ConfigError("report: '" + results_dir.string() + "' is not a directory");
    std::vector<std::filesystem::path> summary_files, metrics_files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(results_dir)) {
        if (!entry.is_regular_file()) continue;
        if (entry.path().filename() == "summary.csv") summary_files.push_back(entry.path());
        if (entry.path().filename() == "metrics.txt") metrics_files.push_back(entry.path());
    }
    std::sort(summary_files.begin(), summary_files.end());
    std::sort(metrics_files.begin(), metrics_files.end());
    if (summary_files.empty())
        throw ConfigError("report: no summary.csv files under " + results_dir.string());

    std::vector<RunSummary> rows;
    for (const auto& f : summary_files) {
        auto part = read_run_summaries(f);
        rows.insert(rows.end(), part.begin(), part.end());
    }

    std::ostringstream txt;
    write_iteration_report_table(txt, rows);
    if (!metrics_files.empty()) {
        txt << '\n' << std::left << std::setw(28) << "run" << std::right << std::setw(12)
            << "length[mm]" << std::setw(12) << "width[mm]" << std::setw(12) << "depth[mm]"
            << std::setw(10) << "peak[K]" << '\n';
        for (const auto& f : metrics_files) {
            const auto kv = read_key_value_file(f);
            if (!kv.count("length_m")) continue;
            txt << std::left << std::setw(28)
                << std::filesystem::relative(f.parent_path(), results_dir).string() << std::right
                << std::fixed << std::setprecision(4) << std::setw(12)
                << 1e3 * std::stod(kv.at("length_m")) << std::setw(12)
                << 1e3 * std::stod(kv.at("width_m")) << std::setw(12)
                << 1e3 * std::stod(kv.at("depth_m")) << std::setprecision(1) << std::setw(10)
                << std::stod(kv.at("peak_temperature_K")) << '\n';
            txt.unsetf(std::ios::fixed);
        }
    }

    std::ostringstream csv;
    write_iteration_report_csv(csv, rows);
    write_text_file(results_dir / "report.csv", csv.str());
    write_text_file(results_dir / "report.txt", txt.str());
    return txt.str();
}

}  // namespace thermelt
