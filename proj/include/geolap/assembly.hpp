#pragma once

// Assembly of the two discrete quadratic forms over vertex vectors y:
//
//   |y|^2  = 2/(n+2)! * sum_{i<=j} y_i y_j sum_{sigma in St_n([x_i,x_j])} sqrt(det A^sigma)
//   q(y)   = 1/n!     * sum_sigma sqrt(det A^sigma)
//                        * sum_{k,l>=1} (A^sigma)^{kl} (y_{s_k} - y_{s_0})(y_{s_l} - y_{s_0})
//
// stored as sparse symmetric matrices M (mass) and Q (stiffness) with
// y.M.y = |y|^2 and y.Q.y = q(y). A^sigma is the distance-based Gram matrix
// at the lowest-index vertex s_0 of sigma, (A^sigma)^{kl} its inverse.
// Off-diagonal matrix entries carry half of the i<j pair coefficient so that
// the matrix represents the form. On complexes realized in Euclidean space
// these are exactly the P1 finite-element mass and stiffness matrices.

#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "geolap/metric.hpp"

namespace geolap {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// The assembled mass/stiffness pair plus the mesh-quality snapshot taken at
/// assembly time.
struct FormPair {
    SparseMatrix mass;
    SparseMatrix stiffness;
    MeshStats stats;
};

namespace detail {

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

/// Deterministic accumulation: contributions are added per simplex in
/// lexicographic simplex order, keyed by (row, col), then emitted once.
class SymmetricAccumulator {
public:
    explicit SymmetricAccumulator(int size) : size_(size) {}

    void add(int i, int j, double v) { entries_[{i, j}] += v; }

    SparseMatrix build() const {
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(entries_.size());
        for (const auto& [key, v] : entries_)
            triplets.emplace_back(key.first, key.second, v);
        SparseMatrix m(size_, size_);
        m.setFromTriplets(triplets.begin(), triplets.end());
        return m;
    }

private:
    int size_;
    std::map<std::pair<int, int>, double> entries_;
};

}  // namespace detail

/// Mass matrix M: M_ii = 2/(n+2)! * sum of sqrt(det A) over simplices
/// containing i; M_ij = 1/(n+2)! * the same sum over simplices containing
/// the edge {i, j}.
inline SparseMatrix assemble_mass(const MetricComplex& mc) {
    const int n = mc.complex().dimension;
    const double inv_fact = 1.0 / detail::factorial(n + 2);
    detail::SymmetricAccumulator acc(mc.complex().num_vertices);
    for (int t = 0; t < static_cast<int>(mc.complex().top_simplices.size()); ++t) {
        const Simplex& s = mc.complex().top_simplices[static_cast<size_t>(t)];
        double w = simplex_volume_factor(mc, t);
        for (size_t a = 0; a < s.size(); ++a) {
            acc.add(s[a], s[a], 2.0 * inv_fact * w);
            for (size_t b = a + 1; b < s.size(); ++b) {
                acc.add(s[a], s[b], inv_fact * w);
                acc.add(s[b], s[a], inv_fact * w);
            }
        }
    }
    return acc.build();
}

/// Stiffness matrix Q from the per-simplex Dirichlet energies. Each simplex
/// needs an invertible Gram matrix at its lowest-index base vertex; a
/// determinant within the degeneracy tolerance raises SingularGram.
inline SparseMatrix assemble_stiffness(const MetricComplex& mc) {
    const int n = mc.complex().dimension;
    const double inv_fact = 1.0 / detail::factorial(n);
    const double tol = kDegenerateDetTol * std::pow(mc.max_edge(), 2.0 * n);
    detail::SymmetricAccumulator acc(mc.complex().num_vertices);
    for (int t = 0; t < static_cast<int>(mc.complex().top_simplices.size()); ++t) {
        const Simplex& s = mc.complex().top_simplices[static_cast<size_t>(t)];
        Eigen::MatrixXd A = gram_matrix(mc, t, s[0]);
        double det = A.determinant();
        if (det < -tol)
            throw Error(ErrorCode::NonRealizableSimplex,
                        "simplex " + std::to_string(t) + " has Gram determinant " +
                            std::to_string(det) + "; edge lengths are not Euclidean-realizable");
        if (det <= tol)
            throw Error(ErrorCode::SingularGram,
                        "simplex " + std::to_string(t) + " is degenerate (det " +
                            std::to_string(det) + "); Dirichlet form undefined");
        Eigen::MatrixXd B = A.inverse();
        double w = inv_fact * std::sqrt(det);
        // (y_k - y_0)(y_l - y_0) expands into the four index pairs below.
        for (int k = 1; k <= n; ++k) {
            for (int l = 1; l <= n; ++l) {
                double c = w * B(k - 1, l - 1);
                acc.add(s[static_cast<size_t>(k)], s[static_cast<size_t>(l)], c);
                acc.add(s[static_cast<size_t>(k)], s[0], -c);
                acc.add(s[0], s[static_cast<size_t>(l)], -c);
                acc.add(s[0], s[0], c);
            }
        }
    }
    return acc.build();
}

/// Assemble both forms plus mesh statistics.
inline FormPair assemble(const MetricComplex& mc) {
    FormPair fp;
    fp.mass = assemble_mass(mc);
    fp.stiffness = assemble_stiffness(mc);
    fp.stats = mesh_stats(mc);
    return fp;
}

/// Sum of Euclidean simplex volumes, sum_sigma sqrt(det A)/n! — equals
/// 1.M.1 by the pair-count identity (n+1)(n+2)/2 * 2/(n+2)! = 1/n!.
inline double total_volume(const MetricComplex& mc) {
    const double inv_fact = 1.0 / detail::factorial(mc.complex().dimension);
    double vol = 0.0;
    for (int t = 0; t < static_cast<int>(mc.complex().top_simplices.size()); ++t)
        vol += simplex_volume_factor(mc, t) * inv_fact;
    return vol;
}

}  // namespace geolap
