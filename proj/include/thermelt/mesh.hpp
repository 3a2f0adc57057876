#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermelt/linalg.hpp"

namespace thermelt {

// Structured meshes of axis-aligned elements: 2-node segments in 1D and
// 8-node hexahedra in 3D, both with linear shape functions. Elements are
// boxes, so per-element geometry reduces to the three edge lengths.
struct Mesh {
    int dim = 1;
    std::vector<std::array<double, 3>> nodes;
    std::vector<int> connectivity;                   // nodes_per_element() entries per element
    std::vector<std::array<double, 3>> element_size; // (hx, hy, hz); unused axes are 1
    std::map<std::string, std::vector<int>> node_sets;
    std::map<std::string, std::vector<int>> element_sets;
    std::vector<double> node_pseudo_mass;            // integral of each shape function over the mesh

    int nodes_per_element() const { return dim == 1 ? 2 : 8; }
    int n_nodes() const { return static_cast<int>(nodes.size()); }
    int n_elements() const {
        return static_cast<int>(connectivity.size()) / nodes_per_element();
    }
    const int* element_nodes(int e) const {
        return connectivity.data() + static_cast<size_t>(e) * nodes_per_element();
    }
    double element_volume(int e) const {
        const auto& h = element_size[static_cast<size_t>(e)];
        return h[0] * h[1] * h[2];
    }
    const std::vector<int>& node_set(const std::string& tag) const {
        auto it = node_sets.find(tag);
        if (it == node_sets.end())
            throw std::invalid_argument("mesh: unknown node set '" + tag + "'");
        return it->second;
    }
    bool has_element_set(const std::string& tag) const {
        return element_sets.count(tag) > 0;
    }
};

// Tensor-product 2-point Gauss quadrature with precomputed shape function
// values and reference-space gradients. Exact for polynomials up to degree 3
// per axis, which covers every bilinear form the assembly needs.
struct ReferenceShapes {
    int dim = 1;
    int n_local = 2;
    int n_qp = 2;
    std::vector<std::array<double, 3>> xi;                    // [qp]
    std::vector<double> weight;                               // [qp], product weight
    std::vector<std::array<double, 8>> N;                     // [qp][a]
    std::vector<std::array<std::array<double, 3>, 8>> dN;     // [qp][a][axis], d/dxi

    static ReferenceShapes create(int dim) {
        if (dim != 1 && dim != 3)
            throw std::invalid_argument("ReferenceShapes: dim must be 1 or 3");
        ReferenceShapes s;
        s.dim = dim;
        s.n_local = dim == 1 ? 2 : 8;
        const double g = 1.0 / std::sqrt(3.0);
        // Local node corner signs, matching the connectivity orderings below.
        static constexpr int sign1[2][3] = {{-1, 0, 0}, {1, 0, 0}};
        static constexpr int sign3[8][3] = {{-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
                                            {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1}};
        const int nq_axis = 2;
        s.n_qp = dim == 1 ? 2 : 8;
        for (int qz = 0; qz < (dim == 3 ? nq_axis : 1); ++qz)
            for (int qy = 0; qy < (dim == 3 ? nq_axis : 1); ++qy)
                for (int qx = 0; qx < nq_axis; ++qx) {
                    std::array<double, 3> p{(qx == 0 ? -g : g), 0.0, 0.0};
                    if (dim == 3) {
                        p[1] = qy == 0 ? -g : g;
                        p[2] = qz == 0 ? -g : g;
                    }
                    s.xi.push_back(p);
                    s.weight.push_back(1.0);
                    std::array<double, 8> nv{};
                    std::array<std::array<double, 3>, 8> dv{};
                    for (int a = 0; a < s.n_local; ++a) {
                        const int* sg = dim == 1 ? sign1[a] : sign3[a];
                        double val = 1.0;
                        std::array<double, 3> fac{1.0, 1.0, 1.0};
                        for (int ax = 0; ax < dim; ++ax) {
                            fac[ax] = 0.5 * (1.0 + sg[ax] * p[ax]);
                            val *= fac[ax];
                        }
                        nv[static_cast<size_t>(a)] = val;
                        for (int ax = 0; ax < dim; ++ax) {
                            double d = 0.5 * sg[ax];
                            for (int other = 0; other < dim; ++other)
                                if (other != ax) d *= fac[other];
                            dv[static_cast<size_t>(a)][ax] = d;
                        }
                    }
                    s.N.push_back(nv);
                    s.dN.push_back(dv);
                }
        return s;
    }
};

namespace detail {

inline void compute_pseudo_mass(Mesh& mesh) {
    const ReferenceShapes shapes = ReferenceShapes::create(mesh.dim);
    mesh.node_pseudo_mass.assign(static_cast<size_t>(mesh.n_nodes()), 0.0);
    const double ref_cell = mesh.dim == 1 ? 2.0 : 8.0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const double jac = mesh.element_volume(e) / ref_cell;
        const int* conn = mesh.element_nodes(e);
        for (int q = 0; q < shapes.n_qp; ++q)
            for (int a = 0; a < shapes.n_local; ++a)
                mesh.node_pseudo_mass[static_cast<size_t>(conn[a])] +=
                    shapes.weight[static_cast<size_t>(q)] * shapes.N[static_cast<size_t>(q)][static_cast<size_t>(a)] * jac;
    }
}

inline int round_to_count(double ratio) {
    return static_cast<int>(std::llround(ratio));
}

}  // namespace detail

// Per-node integral of the shape functions, sum equals the mesh volume.
// The builders cache this on the mesh; this recomputes it for a given mesh.
inline std::vector<double> pseudo_mass(const Mesh& mesh) {
    Mesh tmp = mesh;
    detail::compute_pseudo_mass(tmp);
    return tmp.node_pseudo_mass;
}

// Consistent counterpart of pseudo_mass: M_jk = integral of N_j N_k. Row sums
// reproduce pseudo_mass because the shape functions partition unity.
inline CsrMatrix pseudo_mass_matrix(const Mesh& mesh) {
    std::vector<std::vector<int>> adj(static_cast<size_t>(mesh.n_nodes()));
    const int npe = mesh.nodes_per_element();
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const int* conn = mesh.element_nodes(e);
        for (int a = 0; a < npe; ++a)
            for (int b = 0; b < npe; ++b)
                adj[static_cast<size_t>(conn[a])].push_back(conn[b]);
    }
    CsrMatrix m = CsrMatrix::from_pattern(mesh.n_nodes(), adj);
    const ReferenceShapes shapes = ReferenceShapes::create(mesh.dim);
    const double ref_cell = mesh.dim == 1 ? 2.0 : 8.0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const double jac = mesh.element_volume(e) / ref_cell;
        const int* conn = mesh.element_nodes(e);
        for (int q = 0; q < shapes.n_qp; ++q) {
            const auto& nv = shapes.N[static_cast<size_t>(q)];
            for (int a = 0; a < npe; ++a)
                for (int b = 0; b < npe; ++b)
                    m.add(conn[a], conn[b],
                          shapes.weight[static_cast<size_t>(q)] * nv[static_cast<size_t>(a)] * nv[static_cast<size_t>(b)] * jac);
        }
    }
    return m;
}

// System matrix with the node-adjacency pattern of the mesh (values zero).
inline CsrMatrix make_system_matrix(const Mesh& mesh) {
    std::vector<std::vector<int>> adj(static_cast<size_t>(mesh.n_nodes()));
    const int npe = mesh.nodes_per_element();
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const int* conn = mesh.element_nodes(e);
        for (int a = 0; a < npe; ++a)
            for (int b = 0; b < npe; ++b)
                adj[static_cast<size_t>(conn[a])].push_back(conn[b]);
    }
    return CsrMatrix::from_pattern(mesh.n_nodes(), adj);
}

inline Mesh build_line_mesh(double length, int n_elements) {
    if (length <= 0.0 || n_elements < 1)
        throw std::invalid_argument("build_line_mesh: length and element count must be positive");
    Mesh mesh;
    mesh.dim = 1;
    const double h = length / n_elements;
    for (int i = 0; i <= n_elements; ++i)
        mesh.nodes.push_back({i * h, 0.0, 0.0});
    for (int e = 0; e < n_elements; ++e) {
        mesh.connectivity.push_back(e);
        mesh.connectivity.push_back(e + 1);
        mesh.element_size.push_back({h, 1.0, 1.0});
    }
    mesh.node_sets["left"] = {0};
    mesh.node_sets["right"] = {n_elements};
    detail::compute_pseudo_mass(mesh);
    return mesh;
}

// Hexahedral mesh for a box of the given extents, with a powder layer of
// `layer_thickness` at the top (z = extents[2]) meshed with cubes of edge
// `powder_element_size` in z, and the substrate below meshed with elements
// stretched in z by `substrate_z_factor`. The layer thickness must be an
// integer multiple of the element size; in-plane extents are rounded to the
// nearest whole element count.
inline Mesh build_layered_hex_mesh(const std::array<double, 3>& extents, double layer_thickness,
                                   double powder_element_size, double substrate_z_factor) {
    const double lx = extents[0], ly = extents[1], lz = extents[2];
    const double h = powder_element_size;
    if (lx <= 0 || ly <= 0 || lz <= 0 || h <= 0 || layer_thickness <= 0 || substrate_z_factor <= 0)
        throw std::invalid_argument("build_layered_hex_mesh: dimensions must be positive");
    if (layer_thickness > lz * (1.0 + 1e-12))
        throw std::invalid_argument("build_layered_hex_mesh: layer thicker than the domain");

    const double layer_ratio = layer_thickness / h;
    const int nz_layer = detail::round_to_count(layer_ratio);
    if (nz_layer < 1 || std::abs(layer_ratio - nz_layer) > 1e-6 * layer_ratio)
        throw std::invalid_argument(
            "build_layered_hex_mesh: layer thickness " + std::to_string(layer_thickness) +
            " is not divisible by element size " + std::to_string(h));

    const int nx = std::max(1, detail::round_to_count(lx / h));
    const int ny = std::max(1, detail::round_to_count(ly / h));
    const double hx = lx / nx;
    const double hy = ly / ny;
    const double hz_layer = layer_thickness / nz_layer;

    const double substrate = lz - layer_thickness;
    int nz_sub = 0;
    double hz_sub = 0.0;
    if (substrate > 1e-12 * lz) {
        nz_sub = std::max(1, detail::round_to_count(substrate / (substrate_z_factor * h)));
        hz_sub = substrate / nz_sub;
    }
    const int nz = nz_sub + nz_layer;

    Mesh mesh;
    mesh.dim = 3;
    std::vector<double> z_levels;
    z_levels.push_back(0.0);
    for (int k = 1; k <= nz_sub; ++k) z_levels.push_back(k * hz_sub);
    for (int k = 1; k <= nz_layer; ++k) z_levels.push_back(substrate + k * hz_layer);
    z_levels.back() = lz;  // guard against accumulated rounding at the top face

    for (int k = 0; k <= nz; ++k)
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i)
                mesh.nodes.push_back({i * hx, j * hy, z_levels[static_cast<size_t>(k)]});

    auto node_id = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int c[8] = {node_id(i, j, k),         node_id(i + 1, j, k),
                                  node_id(i + 1, j + 1, k), node_id(i, j + 1, k),
                                  node_id(i, j, k + 1),     node_id(i + 1, j, k + 1),
                                  node_id(i + 1, j + 1, k + 1), node_id(i, j + 1, k + 1)};
                mesh.connectivity.insert(mesh.connectivity.end(), c, c + 8);
                const double hz = k < nz_sub ? hz_sub : hz_layer;
                mesh.element_size.push_back({hx, hy, hz});
                const int e = mesh.n_elements() - 1;
                mesh.element_sets[k < nz_sub ? "substrate" : "powder"].push_back(e);
            }

    auto add_face = [&](const std::string& tag, auto&& pred) {
        std::vector<int> ids;
        for (int k = 0; k <= nz; ++k)
            for (int j = 0; j <= ny; ++j)
                for (int i = 0; i <= nx; ++i)
                    if (pred(i, j, k)) ids.push_back(node_id(i, j, k));
        mesh.node_sets[tag] = std::move(ids);
    };
    add_face("x0", [&](int i, int, int) { return i == 0; });
    add_face("x1", [&](int i, int, int) { return i == nx; });
    add_face("y0", [&](int, int j, int) { return j == 0; });
    add_face("y1", [&](int, int j, int) { return j == ny; });
    add_face("z0", [&](int, int, int k) { return k == 0; });
    add_face("z1", [&](int, int, int k) { return k == nz; });

    detail::compute_pseudo_mass(mesh);
    return mesh;
}

// Sanity checks shared by tests and by the experiment drivers after building.
inline void validate_mesh(const Mesh& mesh) {
    const int npe = mesh.nodes_per_element();
    if (static_cast<int>(mesh.connectivity.size()) != npe * mesh.n_elements())
        throw std::logic_error("mesh: connectivity size mismatch");
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const int* conn = mesh.element_nodes(e);
        for (int a = 0; a < npe; ++a) {
            if (conn[a] < 0 || conn[a] >= mesh.n_nodes())
                throw std::logic_error("mesh: node index out of range");
            for (int b = a + 1; b < npe; ++b)
                if (conn[a] == conn[b]) throw std::logic_error("mesh: repeated node in element");
        }
        for (int ax = 0; ax < mesh.dim; ++ax)
            if (mesh.element_size[static_cast<size_t>(e)][ax] <= 0.0)
                throw std::logic_error("mesh: non-positive element size");
    }
    if (mesh.node_pseudo_mass.size() != mesh.nodes.size())
        throw std::logic_error("mesh: pseudo mass not computed");
    for (double m : mesh.node_pseudo_mass)
        if (!(m > 0.0)) throw std::logic_error("mesh: non-positive pseudo mass");
}

// Recovers the structured lattice behind a mesh from node coordinates alone,
// so downstream consumers stay independent of node numbering.
struct StructuredLattice {
    std::vector<double> xs, ys, zs;  // sorted unique coordinates per axis
    std::vector<int> node_at;        // (k * ny + j) * nx + i -> node id

    int nx() const { return static_cast<int>(xs.size()); }
    int ny() const { return static_cast<int>(ys.size()); }
    int nz() const { return static_cast<int>(zs.size()); }
    int node(int i, int j, int k) const {
        return node_at[static_cast<size_t>((k * ny() + j) * nx() + i)];
    }

    static StructuredLattice build(const Mesh& mesh) {
        StructuredLattice lat;
        double scale = 0.0;
        for (const auto& p : mesh.nodes)
            for (int ax = 0; ax < 3; ++ax) scale = std::max(scale, std::abs(p[ax]));
        const double tol = scale > 0 ? 1e-9 * scale : 1e-12;
        auto collect = [&](int ax) {
            std::vector<double> v;
            for (const auto& p : mesh.nodes) v.push_back(p[ax]);
            std::sort(v.begin(), v.end());
            std::vector<double> u;
            for (double x : v)
                if (u.empty() || x - u.back() > tol) u.push_back(x);
            return u;
        };
        lat.xs = collect(0);
        lat.ys = collect(1);
        lat.zs = collect(2);
        auto index_of = [&](const std::vector<double>& u, double x) {
            auto it = std::lower_bound(u.begin(), u.end(), x - tol);
            if (it == u.end() || std::abs(*it - x) > tol)
                throw std::logic_error("StructuredLattice: coordinate off the lattice");
            return static_cast<int>(it - u.begin());
        };
        if (static_cast<size_t>(lat.nx()) * lat.ny() * lat.nz() != mesh.nodes.size())
            throw std::logic_error("StructuredLattice: mesh is not a complete lattice");
        lat.node_at.assign(mesh.nodes.size(), -1);
        for (int n = 0; n < mesh.n_nodes(); ++n) {
            const auto& p = mesh.nodes[static_cast<size_t>(n)];
            const int i = index_of(lat.xs, p[0]);
            const int j = index_of(lat.ys, p[1]);
            const int k = index_of(lat.zs, p[2]);
            int& slot = lat.node_at[static_cast<size_t>((k * lat.ny() + j) * lat.nx() + i)];
            if (slot != -1) throw std::logic_error("StructuredLattice: duplicate lattice site");
            slot = n;
        }
        return lat;
    }
};

}  // namespace thermelt
