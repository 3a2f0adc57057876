#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "thermelt/mesh.hpp"
#include "thermelt/solver.hpp"

namespace thermelt {

// Maximum nodal temperature error normalized by the driving temperature
// difference of the problem.
inline double max_error_norm(const std::vector<double>& T_fem, const std::vector<double>& T_ref,
                             double T_0, double T_hat) {
    if (T_fem.size() != T_ref.size())
        throw std::invalid_argument("max_error_norm: vector size mismatch");
    const double scale = std::abs(T_0 - T_hat);
    if (!(scale > 0.0)) throw std::invalid_argument("max_error_norm: zero temperature scale");
    double worst = 0.0;
    for (size_t i = 0; i < T_fem.size(); ++i)
        worst = std::max(worst, std::abs(T_fem[i] - T_ref[i]) / scale);
    return worst;
}

struct MeltPoolMetrics {
    double length = 0.0;
    double width = 0.0;
    double depth = 0.0;
    double peak_temperature = 0.0;
    bool pool_found = false;
};

namespace detail {

// Extent [lo, hi] of the T >= T_m region along one sampled line, with the
// boundaries located by linear interpolation between neighbouring samples.
inline bool melt_extent(const std::vector<double>& coord, const std::vector<double>& temp,
                        double t_m, double& lo, double& hi) {
    const size_t n = coord.size();
    size_t first = n, last = n;
    for (size_t i = 0; i < n; ++i)
        if (temp[i] >= t_m) {
            if (first == n) first = i;
            last = i;
        }
    if (first == n) return false;
    lo = coord[first];
    if (first > 0) {
        const double t0 = temp[first - 1], t1 = temp[first];
        lo = coord[first - 1] + (t_m - t0) / (t1 - t0) * (coord[first] - coord[first - 1]);
    }
    hi = coord[last];
    if (last + 1 < n) {
        const double t0 = temp[last], t1 = temp[last + 1];
        hi = coord[last] + (t_m - t0) / (t1 - t0) * (coord[last + 1] - coord[last]);
    }
    return true;
}

}  // namespace detail

// Melt pool size from the T_m level set, sampled along the lattice lines of
// the structured mesh. Length and depth are taken along the scan plane
// (smallest y), width from the symmetry plane outward, doubled when the mesh
// models the half domain. Works on node values only, so the result does not
// depend on node numbering.
inline MeltPoolMetrics melt_pool_metrics(const std::vector<double>& T, const Mesh& mesh,
                                         double t_m, bool mirror_width = true) {
    if (T.size() != mesh.nodes.size())
        throw std::invalid_argument("melt_pool_metrics: field size mismatch");
    MeltPoolMetrics out;
    out.peak_temperature = *std::max_element(T.begin(), T.end());
    if (out.peak_temperature < t_m) return out;
    out.pool_found = true;

    const StructuredLattice lat = StructuredLattice::build(mesh);
    const int nx = lat.nx(), ny = lat.ny(), nz = lat.nz();
    const int k_top = nz - 1;

    std::vector<double> line_t(static_cast<size_t>(nx));
    for (int i = 0; i < nx; ++i)
        line_t[static_cast<size_t>(i)] = T[static_cast<size_t>(lat.node(i, 0, k_top))];
    double lo = 0.0, hi = 0.0;
    if (detail::melt_extent(lat.xs, line_t, t_m, lo, hi)) out.length = hi - lo;

    if (mesh.dim == 3) {
        for (int i = 0; i < nx; ++i) {
            std::vector<double> col(static_cast<size_t>(ny));
            for (int j = 0; j < ny; ++j)
                col[static_cast<size_t>(j)] = T[static_cast<size_t>(lat.node(i, j, k_top))];
            double wlo = 0.0, whi = 0.0;
            if (!detail::melt_extent(lat.ys, col, t_m, wlo, whi)) continue;
            double w;
            if (mirror_width) {
                // Only the half pool touching the symmetry plane counts.
                if (col[0] < t_m) continue;
                w = 2.0 * (whi - lat.ys.front());
            } else {
                w = whi - wlo;
            }
            out.width = std::max(out.width, w);

            std::vector<double> shaft(static_cast<size_t>(nz));
            for (int k = 0; k < nz; ++k)
                shaft[static_cast<size_t>(k)] = T[static_cast<size_t>(lat.node(i, 0, k))];
            double dlo = 0.0, dhi = 0.0;
            if (detail::melt_extent(lat.zs, shaft, t_m, dlo, dhi) &&
                shaft[static_cast<size_t>(k_top)] >= t_m)
                out.depth = std::max(out.depth, lat.zs.back() - dlo);
        }
    }
    return out;
}

// Temperature along the lattice line y = min, z = max (the scan line on the
// irradiated surface), as (x, T) samples ordered by x.
inline std::vector<std::pair<double, double>> surface_scan_line(const std::vector<double>& T,
                                                                const Mesh& mesh) {
    const StructuredLattice lat = StructuredLattice::build(mesh);
    std::vector<std::pair<double, double>> out;
    const int k_top = lat.nz() - 1;
    for (int i = 0; i < lat.nx(); ++i)
        out.emplace_back(lat.xs[static_cast<size_t>(i)],
                         T[static_cast<size_t>(lat.node(i, 0, k_top))]);
    return out;
}

// Per-run iteration statistics for the scheme comparison tables.
struct RunSummary {
    std::string case_name;
    std::string scheme;
    int n_elements = 0;
    double dt0 = 0.0;
    int converged_steps = 0;
    int failed_attempts = 0;
    long total_iterations = 0;      // over converged steps
    long total_iterations_all = 0;  // including failed attempts
    double avg_iterations_per_step = 0.0;
    bool completed = true;
};

inline RunSummary summarize_run(const SimulationResult& result, const std::string& case_name,
                                const std::string& scheme, int n_elements, double dt0) {
    RunSummary s;
    s.case_name = case_name;
    s.scheme = scheme;
    s.n_elements = n_elements;
    s.dt0 = dt0;
    s.completed = result.completed;
    for (const auto& rec : result.steps) {
        s.total_iterations_all += rec.newton_iterations;
        if (rec.converged) {
            ++s.converged_steps;
            s.total_iterations += rec.newton_iterations;
        } else {
            ++s.failed_attempts;
        }
    }
    if (s.converged_steps > 0)
        s.avg_iterations_per_step =
            static_cast<double>(s.total_iterations) / s.converged_steps;
    return s;
}

inline void sort_summaries(std::vector<RunSummary>& rows) {
    std::sort(rows.begin(), rows.end(), [](const RunSummary& a, const RunSummary& b) {
        return std::tie(a.case_name, a.scheme, a.n_elements, a.dt0) <
               std::tie(b.case_name, b.scheme, b.n_elements, b.dt0);
    });
}

inline void write_iteration_report_csv(std::ostream& os, std::vector<RunSummary> rows) {
    sort_summaries(rows);
    os << "case,scheme,n_elements,dt0_s,steps,failed_attempts,total_iters,avg_iters_per_step,"
          "completed\n";
    for (const auto& r : rows) {
        os << r.case_name << ',' << r.scheme << ',' << r.n_elements << ','
           << std::setprecision(17) << r.dt0 << ',' << r.converged_steps << ','
           << r.failed_attempts << ',' << r.total_iterations << ',' << std::setprecision(6)
           << r.avg_iterations_per_step << ',' << (r.completed ? 1 : 0) << '\n';
    }
}

inline void write_iteration_report_table(std::ostream& os, std::vector<RunSummary> rows) {
    sort_summaries(rows);
    os << std::left << std::setw(14) << "case" << std::setw(14) << "scheme" << std::right
       << std::setw(10) << "elements" << std::setw(10) << "dt0[s]" << std::setw(8) << "steps"
       << std::setw(8) << "failed" << std::setw(12) << "iters" << std::setw(12) << "avg/step"
       << std::setw(6) << "ok" << '\n';
    for (const auto& r : rows) {
        os << std::left << std::setw(14) << r.case_name << std::setw(14) << r.scheme
           << std::right << std::setw(10) << r.n_elements << std::setw(10)
           << std::setprecision(6) << r.dt0 << std::setw(8) << r.converged_steps << std::setw(8)
           << r.failed_attempts << std::setw(12) << r.total_iterations << std::setw(12)
           << std::fixed << std::setprecision(2) << r.avg_iterations_per_step << std::setw(6)
           << (r.completed ? "yes" : "no") << '\n';
        os.unsetf(std::ios::fixed);
    }
}

}  // namespace thermelt
