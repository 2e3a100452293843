#pragma once

// Closed model manifolds with known spectra: the round sphere S^2 of radius
// r (Laplace eigenvalues l(l+1)/r^2, multiplicity 2l+1, real spherical
// harmonics) and the flat torus R^2/(aZ x bZ) (eigenvalues (2*pi*j/a)^2 +
// (2*pi*k/b)^2, trigonometric eigenfunctions). Provides geodesic distance,
// geodesic-triangulation generators with refinement (icosahedral subdivision
// and grid meshes), analytic spectra with multiplicities, and pointwise
// eigenfunction evaluation for restriction tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "geolap/metric.hpp"

namespace geolap {

struct ModelManifold {
    enum class Kind { Sphere, FlatTorus };

    Kind kind = Kind::Sphere;
    double radius = 1.0;    ///< sphere only
    double period_a = 0.0;  ///< torus only
    double period_b = 0.0;  ///< torus only

    static ModelManifold sphere(double radius) {
        if (!(radius > 0.0)) throw Error(ErrorCode::ValidationError, "sphere radius must be positive");
        ModelManifold m;
        m.kind = Kind::Sphere;
        m.radius = radius;
        return m;
    }

    static ModelManifold flat_torus(double a, double b) {
        if (!(a > 0.0) || !(b > 0.0))
            throw Error(ErrorCode::ValidationError, "torus periods must be positive");
        ModelManifold m;
        m.kind = Kind::FlatTorus;
        m.period_a = a;
        m.period_b = b;
        return m;
    }

    int dimension() const { return 2; }

    double diameter() const {
        if (kind == Kind::Sphere) return std::numbers::pi * radius;
        return 0.5 * std::hypot(period_a, period_b);
    }

    double injectivity_radius() const {
        if (kind == Kind::Sphere) return std::numbers::pi * radius;
        return 0.5 * std::min(period_a, period_b);
    }

    /// Sectional curvature bound: 1/r^2 for the sphere, 0 for the torus.
    double curvature_bound() const {
        return kind == Kind::Sphere ? 1.0 / (radius * radius) : 0.0;
    }
};

/// Geodesic distance between two points of the manifold. Sphere points are
/// 3-vectors of norm r; torus points are (x, y) in the fundamental domain
/// (any representatives work — the minimum over the 9 lattice translates of
/// the difference is taken).
inline double geodesic_distance(const ModelManifold& m, const Eigen::VectorXd& p,
                                const Eigen::VectorXd& q) {
    if (m.kind == ModelManifold::Kind::Sphere) {
        double c = p.dot(q) / (m.radius * m.radius);
        return m.radius * std::acos(std::clamp(c, -1.0, 1.0));
    }
    double best = std::numeric_limits<double>::infinity();
    double dx = p(0) - q(0), dy = p(1) - q(1);
    for (int s = -1; s <= 1; ++s)
        for (int t = -1; t <= 1; ++t)
            best = std::min(best, std::hypot(dx + s * m.period_a, dy + t * m.period_b));
    return best;
}

/// A metric complex whose vertices carry points on a manifold; every edge
/// length equals the geodesic distance of its endpoint positions.
struct VertexedMesh {
    MetricComplex metric_complex;
    std::vector<Eigen::VectorXd> positions;
};

namespace detail {

inline VertexedMesh finish_mesh(const ModelManifold& m, SimplicialComplex complex,
                                std::vector<Eigen::VectorXd> positions) {
    const FaceIndex faces = enumerate_faces(complex);
    std::vector<EdgeLengthEntry> entries;
    entries.reserve(faces.faces(1).size());
    for (const Simplex& e : faces.faces(1))
        entries.push_back({e[0], e[1],
                           geodesic_distance(m, positions[static_cast<size_t>(e[0])],
                                             positions[static_cast<size_t>(e[1])])});
    return VertexedMesh{MetricComplex(std::move(complex), entries), std::move(positions)};
}

}  // namespace detail

/// Icosahedral geodesic mesh: the regular icosahedron inscribed in the
/// sphere, subdivided `level` times (each triangle splits into four through
/// radially projected edge midpoints). N = 10 * 4^level + 2 vertices; edge
/// lengths are geodesic distances.
inline VertexedMesh generate_sphere_mesh(double radius, int level) {
    if (level < 0) throw Error(ErrorCode::ValidationError, "subdivision level must be >= 0");
    ModelManifold m = ModelManifold::sphere(radius);

    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> verts = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    for (auto& v : verts) v.normalize();
    std::vector<std::array<int, 3>> tris = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
        {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

    for (int lv = 0; lv < level; ++lv) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            std::pair<int, int> key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            Eigen::Vector3d p = (verts[static_cast<size_t>(a)] + verts[static_cast<size_t>(b)]).normalized();
            verts.push_back(p);
            int id = static_cast<int>(verts.size()) - 1;
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(tris.size() * 4);
        for (const auto& f : tris) {
            int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        tris = std::move(next);
    }

    std::vector<Simplex> top;
    top.reserve(tris.size());
    for (const auto& f : tris) top.push_back(Simplex{f[0], f[1], f[2]});
    std::vector<Eigen::VectorXd> positions;
    positions.reserve(verts.size());
    for (const auto& v : verts) positions.push_back(radius * v);

    SimplicialComplex complex = build_complex(2, static_cast<int>(verts.size()), std::move(top));
    return detail::finish_mesh(m, std::move(complex), std::move(positions));
}

/// Uniform grid mesh of the flat torus with periods (a, b): grid_m x grid_k
/// cells, each split along the lower-left to upper-right diagonal. Needs at
/// least 3 subdivisions per direction so that triangles have three distinct
/// vertices and no two triangles coincide.
inline VertexedMesh generate_torus_mesh(double a, double b, int grid_m, int grid_k) {
    if (grid_m < 3 || grid_k < 3)
        throw Error(ErrorCode::GridTooCoarse,
                    "torus grid must be at least 3x3, got " + std::to_string(grid_m) + "x" +
                        std::to_string(grid_k));
    ModelManifold m = ModelManifold::flat_torus(a, b);

    auto vid = [&](int i, int j) {
        return ((i % grid_m + grid_m) % grid_m) + grid_m * ((j % grid_k + grid_k) % grid_k);
    };
    std::vector<Eigen::VectorXd> positions(static_cast<size_t>(grid_m) * grid_k);
    for (int j = 0; j < grid_k; ++j)
        for (int i = 0; i < grid_m; ++i) {
            Eigen::VectorXd p(2);
            p << a * i / grid_m, b * j / grid_k;
            positions[static_cast<size_t>(vid(i, j))] = p;
        }
    std::vector<Simplex> top;
    top.reserve(static_cast<size_t>(grid_m) * grid_k * 2);
    for (int j = 0; j < grid_k; ++j)
        for (int i = 0; i < grid_m; ++i) {
            int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            top.push_back(Simplex{v00, v10, v11});
            top.push_back(Simplex{v00, v11, v01});
        }

    SimplicialComplex complex = build_complex(2, grid_m * grid_k, std::move(top));
    return detail::finish_mesh(m, std::move(complex), std::move(positions));
}

/// One eigenvalue together with its multiplicity.
struct SpectralCluster {
    double value = 0.0;
    int multiplicity = 0;
};

namespace detail {

/// Torus lattice modes (j, k) restricted to the half lattice j > 0 or
/// (j = 0, k >= 0); each mode with (j,k) != (0,0) stands for a cos/sin pair.
struct TorusCluster {
    double value = 0.0;
    int multiplicity = 0;
    std::vector<std::pair<int, int>> modes;  ///< lexicographically sorted
};

inline std::vector<TorusCluster> torus_clusters(const ModelManifold& m, int min_total) {
    const double a = m.period_a, b = m.period_b;
    double lambda_max = 16.0 * std::numbers::pi * std::max(min_total, 1) / (a * b) +
                        8.0 * std::pow(2.0 * std::numbers::pi / std::min(a, b), 2);
    for (;;) {
        int J = static_cast<int>(std::ceil(a * std::sqrt(lambda_max) / (2.0 * std::numbers::pi))) + 1;
        int K = static_cast<int>(std::ceil(b * std::sqrt(lambda_max) / (2.0 * std::numbers::pi))) + 1;
        struct Mode {
            double value;
            int j, k;
        };
        std::vector<Mode> modes;
        for (int j = 0; j <= J; ++j)
            for (int k = (j == 0 ? 0 : -K); k <= K; ++k) {
                double fj = 2.0 * std::numbers::pi * j / a;
                double fk = 2.0 * std::numbers::pi * k / b;
                double v = fj * fj + fk * fk;
                if (v <= lambda_max) modes.push_back({v, j, k});
            }
        std::sort(modes.begin(), modes.end(), [](const Mode& x, const Mode& y) {
            if (x.value != y.value) return x.value < y.value;
            if (x.j != y.j) return x.j < y.j;
            return x.k < y.k;
        });
        std::vector<TorusCluster> clusters;
        for (const Mode& md : modes) {
            bool fresh = clusters.empty() ||
                         md.value - clusters.back().value > 1e-9 * std::max(1.0, md.value);
            if (fresh) clusters.push_back(TorusCluster{md.value, 0, {}});
            clusters.back().multiplicity += (md.j == 0 && md.k == 0) ? 1 : 2;
            clusters.back().modes.emplace_back(md.j, md.k);
        }
        // Keep only clusters certain to be complete (strictly inside the cut).
        while (!clusters.empty() && clusters.back().value > 0.9 * lambda_max) clusters.pop_back();
        int total = 0;
        for (const auto& c : clusters) total += c.multiplicity;
        if (total >= min_total && !clusters.empty()) {
            for (auto& c : clusters) std::sort(c.modes.begin(), c.modes.end());
            return clusters;
        }
        lambda_max *= 2.0;
    }
}

}  // namespace detail

/// Ascending analytic spectrum grouped by multiplicity. Whole clusters are
/// emitted until at least `count` eigenvalues (with multiplicity) are
/// covered.
inline std::vector<SpectralCluster> analytic_spectrum(const ModelManifold& m, int count) {
    if (count < 1) throw Error(ErrorCode::ValidationError, "count must be >= 1");
    std::vector<SpectralCluster> out;
    if (m.kind == ModelManifold::Kind::Sphere) {
        int total = 0;
        for (int l = 0; total < count; ++l) {
            double value = static_cast<double>(l) * (l + 1) / (m.radius * m.radius);
            out.push_back(SpectralCluster{value, 2 * l + 1});
            total += 2 * l + 1;
        }
        return out;
    }
    auto clusters = detail::torus_clusters(m, count);
    int total = 0;
    for (const auto& c : clusters) {
        if (total >= count) break;
        out.push_back(SpectralCluster{c.value, c.multiplicity});
        total += c.multiplicity;
    }
    return out;
}

/// Evaluate the member_index-th eigenfunction of the cluster_index-th
/// eigenvalue cluster at a point of the manifold. The families are
/// L2-orthonormal over the manifold.
///
/// Sphere (cluster l, members 0..2l): member 0 is the zonal harmonic; member
/// 2m-1 / 2m are the cos(m phi) / sin(m phi) harmonics of order m.
/// Torus: members run over the lexicographically sorted half-lattice modes of
/// the cluster, cos before sin for each mode; the zero cluster has the single
/// constant member.
inline double eigenfunction(const ModelManifold& m, int cluster_index, int member_index,
                            const Eigen::VectorXd& point) {
    if (cluster_index < 0) throw Error(ErrorCode::IndexOutOfRange, "cluster index must be >= 0");
    if (m.kind == ModelManifold::Kind::Sphere) {
        const int l = cluster_index;
        if (member_index < 0 || member_index > 2 * l)
            throw Error(ErrorCode::IndexOutOfRange,
                        "sphere cluster " + std::to_string(l) + " has " + std::to_string(2 * l + 1) +
                            " members, got index " + std::to_string(member_index));
        Eigen::Vector3d u = point.head<3>() / m.radius;
        u.normalize();
        double ct = std::clamp(u.z(), -1.0, 1.0);
        double phi = std::atan2(u.y(), u.x());
        int order = member_index == 0 ? 0 : (member_index + 1) / 2;
        // Orthonormal real harmonic: N_lm * P_l^m(cos theta) * {1, sqrt2 cos, sqrt2 sin}.
        double ratio = 1.0;  // (l-m)! / (l+m)!
        for (int i = l - order + 1; i <= l + order; ++i) ratio /= i;
        double norm = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) * ratio);
        double val = norm * std::assoc_legendre(static_cast<unsigned>(l),
                                                static_cast<unsigned>(order), ct);
        if (order > 0) {
            val *= std::numbers::sqrt2;
            val *= (member_index % 2 == 1) ? std::cos(order * phi) : std::sin(order * phi);
        }
        return val / m.radius;  // rescale from the unit sphere to radius r
    }

    auto clusters = detail::torus_clusters(m, 1);
    // Enumerate further clusters until the requested one exists.
    for (int grow = 2; static_cast<int>(clusters.size()) <= cluster_index && grow < (1 << 24);
         grow *= 2)
        clusters = detail::torus_clusters(m, grow);
    if (static_cast<int>(clusters.size()) <= cluster_index)
        throw Error(ErrorCode::IndexOutOfRange, "torus cluster index too large");
    const auto& cluster = clusters[static_cast<size_t>(cluster_index)];
    if (member_index < 0 || member_index >= cluster.multiplicity)
        throw Error(ErrorCode::IndexOutOfRange,
                    "torus cluster " + std::to_string(cluster_index) + " has " +
                        std::to_string(cluster.multiplicity) + " members, got index " +
                        std::to_string(member_index));
    const double ab = m.period_a * m.period_b;
    if (cluster.value == 0.0) return 1.0 / std::sqrt(ab);
    auto [j, k] = cluster.modes[static_cast<size_t>(member_index / 2)];
    double arg = 2.0 * std::numbers::pi * (j * point(0) / m.period_a + k * point(1) / m.period_b);
    double amp = std::sqrt(2.0 / ab);
    return member_index % 2 == 0 ? amp * std::cos(arg) : amp * std::sin(arg);
}

}  // namespace geolap
