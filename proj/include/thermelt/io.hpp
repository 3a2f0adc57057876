#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "thermelt/mesh.hpp"
#include "thermelt/metrics.hpp"
#include "thermelt/solver.hpp"

namespace thermelt {

namespace detail {

// Shortest representation that round-trips a double exactly.
inline std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) cells.push_back(cell);
    return cells;
}

}  // namespace detail

inline void write_statistics_csv(std::ostream& os, const std::vector<StepRecord>& steps,
                                 const std::string& scheme) {
    os << "step,time_s,dt_s,newton_iters,scheme,converged\n";
    for (const auto& rec : steps)
        os << rec.step << ',' << detail::format_double(rec.time) << ','
           << detail::format_double(rec.dt) << ',' << rec.newton_iterations << ',' << scheme
           << ',' << (rec.converged ? 1 : 0) << '\n';
}

inline void write_snapshot_csv(std::ostream& os, const Mesh& mesh,
                               const std::vector<double>& T) {
    if (T.size() != mesh.nodes.size())
        throw std::invalid_argument("write_snapshot_csv: field size mismatch");
    os << "node_id,x,y,z,T\n";
    for (size_t i = 0; i < mesh.nodes.size(); ++i) {
        const auto& p = mesh.nodes[i];
        os << i << ',' << detail::format_double(p[0]) << ',' << detail::format_double(p[1])
           << ',' << detail::format_double(p[2]) << ',' << detail::format_double(T[i]) << '\n';
    }
}

// Legacy-ASCII structured grid snapshot, point ordering x fastest then y then z.
inline void write_vtk_structured(std::ostream& os, const Mesh& mesh,
                                 const std::vector<double>& T, double time) {
    if (T.size() != mesh.nodes.size())
        throw std::invalid_argument("write_vtk_structured: field size mismatch");
    const StructuredLattice lat = StructuredLattice::build(mesh);
    os << "# vtk DataFile Version 3.0\n";
    os << "temperature field at t = " << detail::format_double(time) << " s\n";
    os << "ASCII\nDATASET STRUCTURED_GRID\n";
    os << "DIMENSIONS " << lat.nx() << ' ' << lat.ny() << ' ' << lat.nz() << '\n';
    os << "POINTS " << mesh.nodes.size() << " double\n";
    for (int k = 0; k < lat.nz(); ++k)
        for (int j = 0; j < lat.ny(); ++j)
            for (int i = 0; i < lat.nx(); ++i) {
                const auto& p = mesh.nodes[static_cast<size_t>(lat.node(i, j, k))];
                os << detail::format_double(p[0]) << ' ' << detail::format_double(p[1]) << ' '
                   << detail::format_double(p[2]) << '\n';
            }
    os << "POINT_DATA " << mesh.nodes.size() << '\n';
    os << "SCALARS temperature double 1\nLOOKUP_TABLE default\n";
    for (int k = 0; k < lat.nz(); ++k)
        for (int j = 0; j < lat.ny(); ++j)
            for (int i = 0; i < lat.nx(); ++i)
                os << detail::format_double(T[static_cast<size_t>(lat.node(i, j, k))]) << '\n';
}

inline void write_melt_pool_metrics(std::ostream& os, const MeltPoolMetrics& m,
                                    double sample_time, bool steady_detected) {
    os << "pool_found = " << (m.pool_found ? 1 : 0) << '\n';
    os << "length_m = " << detail::format_double(m.length) << '\n';
    os << "width_m = " << detail::format_double(m.width) << '\n';
    os << "depth_m = " << detail::format_double(m.depth) << '\n';
    os << "peak_temperature_K = " << detail::format_double(m.peak_temperature) << '\n';
    os << "sample_time_s = " << detail::format_double(sample_time) << '\n';
    os << "steady_detected = " << (steady_detected ? 1 : 0) << '\n';
}

inline std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

// Parses rows produced by write_iteration_report_csv (one file may hold one
// run or a whole aggregation).
inline std::vector<RunSummary> read_run_summaries(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<RunSummary> rows;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const auto cells = detail::split_csv_row(line);
        if (cells.size() != 9)
            throw std::runtime_error("malformed summary row in " + path.string() + ": " + line);
        RunSummary s;
        s.case_name = cells[0];
        s.scheme = cells[1];
        s.n_elements = std::stoi(cells[2]);
        s.dt0 = std::stod(cells[3]);
        s.converged_steps = std::stoi(cells[4]);
        s.failed_attempts = std::stoi(cells[5]);
        s.total_iterations = std::stol(cells[6]);
        s.total_iterations_all = s.total_iterations;
        s.avg_iterations_per_step = std::stod(cells[7]);
        s.completed = cells[8] == "1";
        rows.push_back(std::move(s));
    }
    return rows;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failure on " + path.string());
}

}  // namespace thermelt
