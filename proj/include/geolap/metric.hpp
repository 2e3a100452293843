#pragma once

// Edge-length geometry over an abstract complex: distance-based Gram
// matrices, simplex volume factors sqrt(det A), mesh size, thinness, and
// metric validity (Euclidean realizability of each simplex).
//
// For a simplex sigma with base vertex x_k and remaining vertices x_l, x_m
// (increasing vertex order), the Gram matrix reconstructed from pairwise
// distances via the law of cosines is
//
//   A[l,m] = (d(x_k,x_l)^2 + d(x_k,x_m)^2 - d(x_l,x_m)^2) / 2,
//
// which for points in Euclidean space equals <x_l - x_k, x_m - x_k>.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "geolap/complex.hpp"
#include "geolap/errors.hpp"

namespace geolap {

/// One symmetric edge-length datum; orientation of (i, j) is irrelevant but
/// listing a pair twice (in either orientation) is an error.
struct EdgeLengthEntry {
    VertexId i = 0;
    VertexId j = 0;
    double length = 0.0;
};

/// Relative determinant cutoff below which a simplex counts as degenerate:
/// det A < kDegenerateDetTol * mesh^(2n) fails validation. Scale-invariant
/// because det A carries units length^(2n).
inline constexpr double kDegenerateDetTol = 1e-12;

/// A simplicial complex together with a positive symmetric length per edge.
/// Construction validates coverage (exactly the 1-skeleton) and positivity;
/// realizability of each simplex is checked by validate_metric / the
/// volume-factor routines, not the constructor.
class MetricComplex {
public:
    MetricComplex(SimplicialComplex complex, const std::vector<EdgeLengthEntry>& entries)
        : complex_(std::move(complex)), faces_(enumerate_faces(complex_)) {
        const auto& edges = faces_.faces(1);
        lengths_.assign(edges.size(), -1.0);
        for (const auto& e : entries) {
            VertexId a = std::min(e.i, e.j), b = std::max(e.i, e.j);
            int r = faces_.face_rank(1, Simplex{a, b});
            if (r < 0)
                throw Error(ErrorCode::ValidationError,
                            "(" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                                ") is not an edge of the complex");
            if (e.i == e.j)
                throw Error(ErrorCode::ValidationError,
                            "degenerate edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) + ")");
            if (!(e.length > 0.0))
                throw Error(ErrorCode::NonPositiveEdgeLength,
                            "edge (" + std::to_string(a) + ", " + std::to_string(b) + ") has length " +
                                std::to_string(e.length));
            if (lengths_[static_cast<size_t>(r)] >= 0.0)
                throw Error(ErrorCode::DuplicateEdgeLength,
                            "edge (" + std::to_string(a) + ", " + std::to_string(b) +
                                ") listed more than once");
            lengths_[static_cast<size_t>(r)] = e.length;
        }
        for (size_t r = 0; r < edges.size(); ++r)
            if (lengths_[r] < 0.0)
                throw Error(ErrorCode::MissingEdgeLength,
                            "no length given for edge (" + std::to_string(edges[r][0]) + ", " +
                                std::to_string(edges[r][1]) + ")");

        max_edge_ = 0.0;
        min_edge_ = std::numeric_limits<double>::infinity();
        for (double l : lengths_) {
            max_edge_ = std::max(max_edge_, l);
            min_edge_ = std::min(min_edge_, l);
        }
        for (size_t r = 0; r < edges.size(); ++r)
            rank_of_pair_[pack(edges[r][0], edges[r][1])] = static_cast<int>(r);
    }

    const SimplicialComplex& complex() const { return complex_; }
    const FaceIndex& faces() const { return faces_; }
    const std::vector<double>& edge_lengths() const { return lengths_; }
    double max_edge() const { return max_edge_; }
    double min_edge() const { return min_edge_; }

    double edge_length(VertexId i, VertexId j) const {
        auto it = rank_of_pair_.find(pack(std::min(i, j), std::max(i, j)));
        if (it == rank_of_pair_.end())
            throw Error(ErrorCode::MissingEdgeLength,
                        "(" + std::to_string(i) + ", " + std::to_string(j) +
                            ") is not an edge of the complex");
        return lengths_[static_cast<size_t>(it->second)];
    }

private:
    static uint64_t pack(VertexId a, VertexId b) {
        return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) | static_cast<uint32_t>(b);
    }

    SimplicialComplex complex_;
    FaceIndex faces_;
    std::vector<double> lengths_;  // parallel to faces_.faces(1)
    std::unordered_map<uint64_t, int> rank_of_pair_;
    double max_edge_ = 0.0;
    double min_edge_ = 0.0;
};

inline MetricComplex make_metric_complex(SimplicialComplex complex,
                                         const std::vector<EdgeLengthEntry>& entries) {
    return MetricComplex(std::move(complex), entries);
}

/// Distance-based Gram matrix of top simplex `sigma_index` at `base_vertex`
/// (which must belong to the simplex). Rows/columns run over the non-base
/// vertices in increasing vertex order; the diagonal entry for vertex l is
/// d(base, l)^2.
inline Eigen::MatrixXd gram_matrix(const MetricComplex& mc, int sigma_index, VertexId base_vertex) {
    const auto& tops = mc.complex().top_simplices;
    if (sigma_index < 0 || sigma_index >= static_cast<int>(tops.size()))
        throw Error(ErrorCode::IndexOutOfRange,
                    "top simplex index " + std::to_string(sigma_index) + " out of range");
    const Simplex& s = tops[static_cast<size_t>(sigma_index)];

    std::vector<VertexId> rest;
    for (VertexId v : s)
        if (v != base_vertex) rest.push_back(v);
    if (rest.size() != s.size() - 1)
        throw Error(ErrorCode::IndexOutOfRange,
                    "vertex " + std::to_string(base_vertex) + " is not in the simplex");

    const int n = mc.complex().dimension;
    Eigen::MatrixXd A(n, n);
    for (int k = 0; k < n; ++k) {
        double dk = mc.edge_length(base_vertex, rest[static_cast<size_t>(k)]);
        A(k, k) = dk * dk;
        for (int l = k + 1; l < n; ++l) {
            double dl = mc.edge_length(base_vertex, rest[static_cast<size_t>(l)]);
            double dkl = mc.edge_length(rest[static_cast<size_t>(k)], rest[static_cast<size_t>(l)]);
            A(k, l) = A(l, k) = 0.5 * (dk * dk + dl * dl - dkl * dkl);
        }
    }
    return A;
}

namespace detail {

/// det of the Gram matrix at the lowest-index base vertex, with the
/// realizability tolerance applied: values in [-tol, 0] clamp to 0, values
/// below -tol throw NonRealizableSimplex.
inline double clamped_gram_det(const MetricComplex& mc, int sigma_index) {
    const int n = mc.complex().dimension;
    const Simplex& s = mc.complex().top_simplices[static_cast<size_t>(sigma_index)];
    double det = gram_matrix(mc, sigma_index, s[0]).determinant();
    double tol = kDegenerateDetTol * std::pow(mc.max_edge(), 2.0 * n);
    if (det < -tol) {
        std::string verts;
        for (VertexId v : s) verts += (verts.empty() ? "" : " ") + std::to_string(v);
        throw Error(ErrorCode::NonRealizableSimplex,
                    "simplex {" + verts + "} has Gram determinant " + std::to_string(det) +
                        " < -" + std::to_string(tol) + "; edge lengths are not Euclidean-realizable");
    }
    return std::max(det, 0.0);
}

}  // namespace detail

/// sqrt(det A) of the simplex at its lowest-index base vertex. The Euclidean
/// volume of the realized simplex is this value divided by n!.
inline double simplex_volume_factor(const MetricComplex& mc, int sigma_index) {
    return std::sqrt(detail::clamped_gram_det(mc, sigma_index));
}

/// Mesh-quality snapshot.
struct MeshStats {
    double mesh = 0.0;          ///< maximal edge length m_T
    double min_edge = 0.0;      ///< minimal edge length
    double thinness = 0.0;      ///< Theta_T, see mesh_stats
    double min_gram_det = 0.0;  ///< min over simplices and base vertices of det A
};

/// Compute mesh size and thinness:
///
///   Theta_T = max( max_{sigma, base k} m_T * det(A_k)^(-1/2n),
///                  max edge length / min edge length ).
///
/// The determinant max runs over every base vertex of every top simplex.
/// Degenerate simplices yield thinness = +inf; a determinant below the
/// negative tolerance throws NonRealizableSimplex.
inline MeshStats mesh_stats(const MetricComplex& mc) {
    const int n = mc.complex().dimension;
    MeshStats st;
    st.mesh = mc.max_edge();
    st.min_edge = mc.min_edge();
    double min_det = std::numeric_limits<double>::infinity();
    double det_term = 0.0;
    double tol = kDegenerateDetTol * std::pow(mc.max_edge(), 2.0 * n);
    for (int t = 0; t < static_cast<int>(mc.complex().top_simplices.size()); ++t) {
        const Simplex& s = mc.complex().top_simplices[static_cast<size_t>(t)];
        for (VertexId base : s) {
            double det = gram_matrix(mc, t, base).determinant();
            if (det < -tol)
                throw Error(ErrorCode::NonRealizableSimplex,
                            "simplex " + std::to_string(t) + " at base " + std::to_string(base) +
                                " has Gram determinant " + std::to_string(det));
            min_det = std::min(min_det, det);
            double clamped = std::max(det, 0.0);
            det_term = std::max(det_term, st.mesh * std::pow(clamped, -1.0 / (2.0 * n)));
        }
    }
    st.min_gram_det = min_det;
    st.thinness = std::max(det_term, st.mesh / st.min_edge);
    return st;
}

/// One entry of the validity report: simplex/base pair whose Gram
/// determinant falls below tolerance * mesh^(2n).
struct DegeneratePair {
    int sigma_index = 0;
    VertexId base_vertex = 0;
    double det = 0.0;
};

struct MetricReport {
    bool pass = false;
    std::vector<DegeneratePair> degenerate;  ///< det below the scaled tolerance
    double det_tolerance = 0.0;              ///< the absolute cutoff that was applied
};

/// Report-style realizability check of every simplex at every base vertex.
/// Never throws: negative determinants are reported, not raised.
inline MetricReport validate_metric(const MetricComplex& mc, double tolerance = kDegenerateDetTol) {
    const int n = mc.complex().dimension;
    MetricReport report;
    report.det_tolerance = tolerance * std::pow(mc.max_edge(), 2.0 * n);
    for (int t = 0; t < static_cast<int>(mc.complex().top_simplices.size()); ++t) {
        const Simplex& s = mc.complex().top_simplices[static_cast<size_t>(t)];
        for (VertexId base : s) {
            double det = gram_matrix(mc, t, base).determinant();
            if (det < report.det_tolerance)
                report.degenerate.push_back(DegeneratePair{t, base, det});
        }
    }
    report.pass = report.degenerate.empty();
    return report;
}

}  // namespace geolap
