#pragma once

// Discrete-versus-continuous spectral comparison: restriction of analytic
// eigenfunctions to mesh vertices, cluster-aware eigenvalue comparison,
// projection residuals of restricted eigenfunctions onto discrete
// eigenspaces, the admissible-mesh and Cheng-type bound formulas (up to the
// unspecified dimensional constant, supplied by the caller), a min-max
// eigenvalue comparison utility for mapped form pairs, and the exact P1
// finite-element oracle assembled from coordinates.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "geolap/eig.hpp"
#include "geolap/manifolds.hpp"

namespace geolap {

/// Sample an analytic eigenfunction at every mesh vertex:
/// component i = f(positions[i]).
inline Eigen::VectorXd restrict_eigenfunction(const ModelManifold& m, const VertexedMesh& mesh,
                                              int cluster_index, int member_index) {
    const auto& pos = mesh.positions;
    Eigen::VectorXd v(static_cast<Eigen::Index>(pos.size()));
    for (size_t i = 0; i < pos.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = eigenfunction(m, cluster_index, member_index, pos[i]);
    return v;
}

/// One row of the eigenvalue comparison: discrete vs analytic value at a
/// global index. Index 0 (analytic value 0) is compared absolutely; all
/// others relatively.
struct ComparisonPair {
    int index = 0;
    double lambda_discrete = 0.0;
    double lambda_analytic = 0.0;
    double rel_error = 0.0;
};

/// Match of one analytic cluster against the discrete clustering.
struct ClusterMatch {
    double analytic_value = 0.0;
    int multiplicity = 0;     ///< analytic multiplicity
    int first_index = 0;      ///< first global eigenvalue index of the cluster
    int discrete_size = 0;    ///< size of the discrete cluster containing first_index
    bool multiplicity_ok = false;  ///< discrete cluster == exactly this index range
};

struct ComparisonReport {
    std::vector<ComparisonPair> pairs;
    std::vector<ClusterMatch> cluster_matches;
    double mesh = 0.0;       ///< m_T when stats were supplied
    double thinness = 0.0;   ///< Theta_T when stats were supplied
    int num_vertices = 0;

    double max_rel_error() const {
        double worst = 0.0;
        for (const auto& p : pairs) worst = std::max(worst, p.rel_error);
        return worst;
    }
};

/// Compare a computed spectrum against an analytic one, cluster by cluster.
/// Analytic clusters are matched to index ranges: cluster c with multiplicity
/// m_c occupies global indices [s_c, s_c + m_c). The discrete clustering
/// (recomputed at rel_gap) agrees when its cluster containing s_c is exactly
/// that range. Only analytic clusters fully covered by the computed
/// eigenvalues are compared.
inline ComparisonReport compare_spectra(const SpectralResult& result,
                                        const std::vector<SpectralCluster>& analytic,
                                        double rel_gap = kDefaultClusterGap,
                                        const MeshStats* stats = nullptr) {
    const int available = static_cast<int>(result.eigenvalues.size());
    int requested = 0;
    for (const auto& cluster : analytic) requested += cluster.multiplicity;
    if (available < requested)
        throw Error(ErrorCode::InsufficientEigenvalues,
                    "comparison needs " + std::to_string(requested) +
                        " eigenvalues to cover the analytic clusters, got " +
                        std::to_string(available));

    ComparisonReport report;
    report.num_vertices = static_cast<int>(result.eigenvectors.rows());
    if (stats) {
        report.mesh = stats->mesh;
        report.thinness = stats->thinness;
    }

    auto discrete_clusters = cluster_eigenvalues(result.eigenvalues, rel_gap);
    int start = 0;
    for (const auto& cluster : analytic) {
        if (start + cluster.multiplicity > available) break;
        ClusterMatch match;
        match.analytic_value = cluster.value;
        match.multiplicity = cluster.multiplicity;
        match.first_index = start;
        for (const auto& dc : discrete_clusters)
            if (!dc.empty() && dc.front() <= start && start <= dc.back()) {
                match.discrete_size = static_cast<int>(dc.size());
                match.multiplicity_ok =
                    dc.front() == start && static_cast<int>(dc.size()) == cluster.multiplicity;
                break;
            }
        report.cluster_matches.push_back(match);
        for (int i = 0; i < cluster.multiplicity; ++i) {
            ComparisonPair pair;
            pair.index = start + i;
            pair.lambda_discrete = result.eigenvalues[static_cast<size_t>(start + i)];
            pair.lambda_analytic = cluster.value;
            pair.rel_error = cluster.value > 0.0
                                 ? std::abs(pair.lambda_discrete - cluster.value) / cluster.value
                                 : std::abs(pair.lambda_discrete);
            report.pairs.push_back(pair);
        }
        start += cluster.multiplicity;
    }
    return report;
}

struct ResidualEntry {
    int function = 0;        ///< column index of the restricted vector
    double residual_ratio = 0.0;  ///< |v - P v|_M^2 / |v|_M^2
};

struct ResidualReport {
    std::vector<ResidualEntry> per_function;
    double eta = 0.0;  ///< spectral gap isolating the projection window

    double max_ratio() const {
        double worst = 0.0;
        for (const auto& e : per_function) worst = std::max(worst, e.residual_ratio);
        return worst;
    }
};

/// Residual of the M-orthogonal projection onto the span of discrete
/// eigenvectors p+1..q (inclusive): for each column v of `vectors`, the
/// ratio (|v|_M^2 - sum_i (v.M.v_i)^2) / |v|_M^2. eta reports the smaller of
/// the spectral gaps delimiting the window.
inline ResidualReport projection_residual(const FormPair& fp, const SpectralResult& result,
                                          const Eigen::MatrixXd& vectors, int p, int q) {
    const int available = static_cast<int>(result.eigenvalues.size());
    if (p < 0 || q <= p)
        throw Error(ErrorCode::EmptyCluster,
                    "projection window p+1..q is empty for p = " + std::to_string(p) +
                        ", q = " + std::to_string(q));
    if (q >= available)
        throw Error(ErrorCode::InsufficientEigenvalues,
                    "projection window needs eigenpair " + std::to_string(q) + " but only " +
                        std::to_string(available) + " were computed");

    ResidualReport report;
    report.eta = result.eigenvalues[static_cast<size_t>(p) + 1] - result.eigenvalues[static_cast<size_t>(p)];
    if (q + 1 < available)
        report.eta = std::min(report.eta, result.eigenvalues[static_cast<size_t>(q) + 1] -
                                              result.eigenvalues[static_cast<size_t>(q)]);

    for (int c = 0; c < vectors.cols(); ++c) {
        Eigen::VectorXd v = vectors.col(c);
        Eigen::VectorXd mv = fp.mass * v;
        double norm2 = v.dot(mv);
        if (!(norm2 > 0.0))
            throw Error(ErrorCode::ValidationError,
                        "restricted vector " + std::to_string(c) + " has zero discrete norm");
        double captured = 0.0;
        for (int i = p + 1; i <= q; ++i) {
            double coeff = result.eigenvectors.col(i).dot(mv);
            captured += coeff * coeff;
        }
        report.per_function.push_back(
            ResidualEntry{c, std::max(0.0, 1.0 - captured / norm2)});
    }
    return report;
}

/// Largest certified mesh size for eigenvalue accuracy epsilon at order p:
///
///   m_max = delta * C_n * (inj / (delta * thinness * e^{e^Lambda} * p))^{3n^3} * epsilon.
///
/// C_n is the caller's stand-in for the unspecified dimensional constant;
/// the result is meaningful up to that constant.
inline double theorem1_admissible_mesh(int n, double epsilon, double Lambda, double diameter,
                                       double injectivity, double thinness, double p,
                                       double C_n = 1.0) {
    double expo = 3.0 * n * n * n;
    double base = injectivity / (diameter * thinness * std::exp(std::exp(Lambda)) * p);
    return diameter * C_n * std::pow(base, expo) * epsilon;
}

/// Cheng-type eigenvalue upper bound (up to the dimensional constant):
///
///   lambda_k <= C_n * (diameter/injectivity)^2 * e^{n e^Lambda / 2} * k^2 / diameter^2.
inline double cheng_bound(int n, int k, double Lambda, double diameter, double injectivity,
                          double C_n = 1.0) {
    double ratio = diameter / injectivity;
    return C_n * ratio * ratio * std::exp(0.5 * n * std::exp(Lambda)) *
           static_cast<double>(k) * k / (diameter * diameter);
}

struct MinMaxReport {
    double alpha = 0.0;  ///< min generalized eigenvalue of (Phi^T M2 Phi, M1)
    double beta = 0.0;   ///< max generalized eigenvalue of (Phi^T Q2 Phi, Q1) off ker Q1
    int num_checked = 0;
    std::vector<int> violations;       ///< indices k with lambda_k(2) > (beta/alpha) lambda_k(1)
    std::vector<double> lambda_1;      ///< spectrum of pair 1
    std::vector<double> lambda_2;      ///< spectrum of pair 2 (first num_checked)
};

/// Verify the comparison principle for a linear map Phi from the first form
/// pair's space into the second's: with alpha the worst-case norm shrinkage
/// and beta the worst-case energy growth under Phi, every eigenvalue must
/// satisfy lambda_k(2) <= (beta/alpha) * lambda_k(1). Reported violations can
/// only come from numerical error.
inline MinMaxReport minmax_compare(const FormPair& fp1, const FormPair& fp2,
                                   const Eigen::MatrixXd& Phi) {
    const int n1 = static_cast<int>(fp1.mass.rows());
    const int n2 = static_cast<int>(fp2.mass.rows());
    if (Phi.rows() != n2 || Phi.cols() != n1)
        throw Error(ErrorCode::DegenerateMap,
                    "Phi must map the first space into the second: expected " +
                        std::to_string(n2) + "x" + std::to_string(n1));

    Eigen::MatrixXd M1 = Eigen::MatrixXd(fp1.mass);
    Eigen::MatrixXd Q1 = Eigen::MatrixXd(fp1.stiffness);
    Eigen::MatrixXd M2 = Eigen::MatrixXd(fp2.mass);
    Eigen::MatrixXd Q2 = Eigen::MatrixXd(fp2.stiffness);

    Eigen::MatrixXd GM = Phi.transpose() * M2 * Phi;
    GM = 0.5 * (GM + GM.transpose()).eval();
    if (Eigen::LLT<Eigen::MatrixXd>(GM).info() != Eigen::Success)
        throw Error(ErrorCode::DegenerateMap, "Phi^T M2 Phi is not positive definite");

    MinMaxReport report;
    {
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(GM, M1, Eigen::Ax_lBx);
        report.alpha = es.eigenvalues().minCoeff();
    }
    {
        // Restrict the energy comparison to the complement of ker Q1 (the
        // constants), where Q1 is positive definite.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q1);
        double lmax = es.eigenvalues().maxCoeff();
        double cut = 1e-10 * std::max(lmax, 0.0);
        int kernel = 0;
        while (kernel < n1 && es.eigenvalues()(kernel) <= cut) ++kernel;
        if (kernel == n1)
            throw Error(ErrorCode::DegenerateMap, "the first Dirichlet form vanishes identically");
        Eigen::MatrixXd Z = es.eigenvectors().rightCols(n1 - kernel);
        Eigen::MatrixXd GQ = Z.transpose() * Phi.transpose() * Q2 * Phi * Z;
        GQ = 0.5 * (GQ + GQ.transpose()).eval();
        Eigen::MatrixXd B1 = Z.transpose() * Q1 * Z;
        B1 = 0.5 * (B1 + B1.transpose()).eval();
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> gq(GQ, B1, Eigen::Ax_lBx);
        report.beta = gq.eigenvalues().maxCoeff();
    }

    SpectralResult r1 = solve_dense(fp1);
    SpectralResult r2 = solve_dense(fp2, n1 < n2 ? n1 : -1);
    report.lambda_1 = r1.eigenvalues;
    report.lambda_2 = r2.eigenvalues;
    report.num_checked = std::min(n1, static_cast<int>(r2.eigenvalues.size()));
    double scale = std::abs(r1.eigenvalues.back());
    double factor = report.beta / report.alpha;
    for (int k = 0; k < report.num_checked; ++k) {
        double lhs = r2.eigenvalues[static_cast<size_t>(k)];
        double rhs = factor * r1.eigenvalues[static_cast<size_t>(k)];
        if (lhs > rhs * (1.0 + 1e-9) + 1e-12 * factor * scale) report.violations.push_back(k);
    }
    return report;
}

/// Exact P1 finite-element forms from per-simplex corner coordinates.
/// corners[t] holds the n+1 vertex coordinates of top simplex t, ordered as
/// in the simplex tuple. This entry point exists for triangulations that are
/// only locally Euclidean (each simplex flattens, the whole complex does
/// not), e.g. periodic grids; p1_oracle supplies the global-coordinate case.
///
/// Mass uses the exact simplex quadrature (diagonal 2V/((n+1)(n+2)),
/// off-diagonal V/((n+1)(n+2))); stiffness uses gradients of barycentric
/// coordinates (rows of the inverse edge matrix).
inline FormPair p1_oracle_elements(const std::vector<std::vector<Eigen::VectorXd>>& corners,
                                   const SimplicialComplex& complex) {
    const int n = complex.dimension;
    const int num_top = static_cast<int>(complex.top_simplices.size());
    if (static_cast<int>(corners.size()) != num_top)
        throw Error(ErrorCode::ValidationError, "one corner set per top simplex required");

    detail::SymmetricAccumulator mass_acc(complex.num_vertices);
    detail::SymmetricAccumulator stiff_acc(complex.num_vertices);
    double mesh = 0.0, min_edge = std::numeric_limits<double>::infinity();
    double min_det = std::numeric_limits<double>::infinity();
    double det_term = 0.0;
    const double nfact = detail::factorial(n);

    for (int t = 0; t < num_top; ++t) {
        const Simplex& s = complex.top_simplices[static_cast<size_t>(t)];
        const auto& cs = corners[static_cast<size_t>(t)];
        if (static_cast<int>(cs.size()) != n + 1)
            throw Error(ErrorCode::ValidationError, "corner set size mismatch");

        double local_max = 0.0;
        for (int a = 0; a <= n; ++a)
            for (int b = a + 1; b <= n; ++b) {
                double len = (cs[static_cast<size_t>(a)] - cs[static_cast<size_t>(b)]).norm();
                local_max = std::max(local_max, len);
                mesh = std::max(mesh, len);
                min_edge = std::min(min_edge, len);
            }

        Eigen::MatrixXd E(n, n);
        for (int a = 1; a <= n; ++a) E.col(a - 1) = cs[static_cast<size_t>(a)] - cs[0];
        double detE = E.determinant();
        if (std::abs(detE) <= 1e-12 * std::pow(local_max, n)) {
            std::string verts;
            for (VertexId v : s) verts += (verts.empty() ? "" : " ") + std::to_string(v);
            throw Error(ErrorCode::DegenerateSimplex,
                        "simplex {" + verts + "} is degenerate in the given coordinates");
        }
        double volume = std::abs(detE) / nfact;

        // Thinness bookkeeping over every base vertex (Gram dets of all bases
        // coincide for flat simplices, but track them all for parity with
        // mesh_stats).
        for (int base = 0; base <= n; ++base) {
            Eigen::MatrixXd Eb(n, n);
            int col = 0;
            for (int a = 0; a <= n; ++a)
                if (a != base) Eb.col(col++) = cs[static_cast<size_t>(a)] - cs[static_cast<size_t>(base)];
            double det = (Eb.transpose() * Eb).determinant();
            min_det = std::min(min_det, det);
            det_term = std::max(det_term, std::pow(std::max(det, 0.0), -1.0 / (2.0 * n)));
        }

        double mass_off = volume / ((n + 1.0) * (n + 2.0));
        for (int a = 0; a <= n; ++a) {
            mass_acc.add(s[static_cast<size_t>(a)], s[static_cast<size_t>(a)], 2.0 * mass_off);
            for (int b = a + 1; b <= n; ++b) {
                mass_acc.add(s[static_cast<size_t>(a)], s[static_cast<size_t>(b)], mass_off);
                mass_acc.add(s[static_cast<size_t>(b)], s[static_cast<size_t>(a)], mass_off);
            }
        }

        // Gradients of the barycentric coordinates: rows of E^{-1} for
        // vertices 1..n, minus their sum for vertex 0.
        Eigen::MatrixXd R = E.inverse();
        Eigen::MatrixXd G(n + 1, n);
        G.row(0) = -R.colwise().sum();
        G.bottomRows(n) = R;
        Eigen::MatrixXd local = volume * (G * G.transpose());
        for (int a = 0; a <= n; ++a)
            for (int b = 0; b <= n; ++b)
                stiff_acc.add(s[static_cast<size_t>(a)], s[static_cast<size_t>(b)], local(a, b));
    }

    FormPair fp;
    fp.mass = mass_acc.build();
    fp.stiffness = stiff_acc.build();
    fp.stats.mesh = mesh;
    fp.stats.min_edge = min_edge;
    fp.stats.min_gram_det = min_det;
    fp.stats.thinness = std::max(mesh * det_term, mesh / min_edge);
    return fp;
}

/// Exact P1 finite-element forms from global vertex coordinates in R^n.
inline FormPair p1_oracle(const std::vector<Eigen::VectorXd>& coordinates,
                          const SimplicialComplex& complex) {
    if (static_cast<int>(coordinates.size()) != complex.num_vertices)
        throw Error(ErrorCode::ValidationError, "one coordinate per vertex required");
    std::vector<std::vector<Eigen::VectorXd>> corners;
    corners.reserve(complex.top_simplices.size());
    for (const Simplex& s : complex.top_simplices) {
        std::vector<Eigen::VectorXd> cs;
        cs.reserve(s.size());
        for (VertexId v : s) cs.push_back(coordinates[static_cast<size_t>(v)]);
        corners.push_back(std::move(cs));
    }
    return p1_oracle_elements(corners, complex);
}

/// Per-simplex corner coordinates of a torus grid mesh, each simplex
/// unwrapped to the plane by minimal-image displacements from its first
/// vertex. Feeding these to p1_oracle_elements yields the Euclidean FEM
/// matrices of the periodic triangulation.
inline std::vector<std::vector<Eigen::VectorXd>> unwrap_torus_corners(const ModelManifold& m,
                                                                      const VertexedMesh& mesh) {
    if (m.kind != ModelManifold::Kind::FlatTorus)
        throw Error(ErrorCode::ValidationError, "unwrap requires a flat torus");
    auto wrap_delta = [&](double d, double period) {
        while (d > 0.5 * period) d -= period;
        while (d < -0.5 * period) d += period;
        return d;
    };
    std::vector<std::vector<Eigen::VectorXd>> corners;
    const auto& complex = mesh.metric_complex.complex();
    corners.reserve(complex.top_simplices.size());
    for (const Simplex& s : complex.top_simplices) {
        const Eigen::VectorXd& origin = mesh.positions[static_cast<size_t>(s[0])];
        std::vector<Eigen::VectorXd> cs;
        cs.reserve(s.size());
        for (VertexId v : s) {
            const Eigen::VectorXd& p = mesh.positions[static_cast<size_t>(v)];
            Eigen::VectorXd q(2);
            q << origin(0) + wrap_delta(p(0) - origin(0), m.period_a),
                origin(1) + wrap_delta(p(1) - origin(1), m.period_b);
            cs.push_back(q);
        }
        corners.push_back(std::move(cs));
    }
    return corners;
}

/// Prolongation matrix embedding the P1 space of an m x k torus grid into
/// the 2m x 2k grid of the same periods (vertex injection plus edge-midpoint
/// averages; the diagonal orientation is preserved by the refinement, so the
/// embedding is exact on piecewise-linear functions).
inline SparseMatrix torus_grid_prolongation(int grid_m, int grid_k) {
    if (grid_m < 3 || grid_k < 3)
        throw Error(ErrorCode::GridTooCoarse, "prolongation needs a grid of at least 3x3");
    const int fm = 2 * grid_m, fk = 2 * grid_k;
    auto coarse_id = [&](int i, int j) {
        return ((i % grid_m + grid_m) % grid_m) + grid_m * ((j % grid_k + grid_k) % grid_k);
    };
    auto fine_id = [&](int i, int j) { return ((i % fm + fm) % fm) + fm * ((j % fk + fk) % fk); };
    std::vector<Eigen::Triplet<double>> triplets;
    for (int j = 0; j < grid_k; ++j)
        for (int i = 0; i < grid_m; ++i) {
            triplets.emplace_back(fine_id(2 * i, 2 * j), coarse_id(i, j), 1.0);
            // midpoint of the horizontal edge (i,j)-(i+1,j)
            triplets.emplace_back(fine_id(2 * i + 1, 2 * j), coarse_id(i, j), 0.5);
            triplets.emplace_back(fine_id(2 * i + 1, 2 * j), coarse_id(i + 1, j), 0.5);
            // midpoint of the vertical edge (i,j)-(i,j+1)
            triplets.emplace_back(fine_id(2 * i, 2 * j + 1), coarse_id(i, j), 0.5);
            triplets.emplace_back(fine_id(2 * i, 2 * j + 1), coarse_id(i, j + 1), 0.5);
            // midpoint of the cell diagonal (i,j)-(i+1,j+1)
            triplets.emplace_back(fine_id(2 * i + 1, 2 * j + 1), coarse_id(i, j), 0.5);
            triplets.emplace_back(fine_id(2 * i + 1, 2 * j + 1), coarse_id(i + 1, j + 1), 0.5);
        }
    SparseMatrix P(fm * fk, grid_m * grid_k);
    P.setFromTriplets(triplets.begin(), triplets.end());
    return P;
}

}  // namespace geolap
