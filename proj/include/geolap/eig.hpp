#pragma once

// Generalized symmetric eigenproblem Q v = lambda M v for the assembled
// form pairs: dense solver (Cholesky reduction of M) for moderate sizes and
// a shift-invert block subspace iteration with Rayleigh-Ritz extraction and
// full re-orthonormalization for the lowest part of the spectrum at larger
// sizes. Eigenvectors come back M-orthonormal with a deterministic sign.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "geolap/assembly.hpp"

namespace geolap {

/// Largest N accepted by solve_dense.
inline constexpr int kDenseThreshold = 3000;

/// Default relative gap for multiplicity clustering.
inline constexpr double kDefaultClusterGap = 0.05;

struct SolverInfo {
    std::string method;
    int iterations = 0;
    double max_residual = 0.0;  ///< max over pairs of |Qv - lambda*Mv| / ((|Q|+|lambda||M|)|v|)
};

struct SpectralResult {
    std::vector<double> eigenvalues;       ///< ascending
    Eigen::MatrixXd eigenvectors;          ///< columns, v_i . M . v_j = delta_ij
    std::vector<std::vector<int>> clusters;  ///< contiguous multiplicity clusters
    SolverInfo solver_info;
};

/// Partition an ascending list into multiplicity clusters: adjacent values
/// share a cluster iff lambda_{i+1} - lambda_i <= rel_gap * max(lambda_{i+1}, floor)
/// with floor = lambda_1 / 100, which keeps an exact-zero lowest eigenvalue a
/// singleton while tolerating its numerical jitter.
inline std::vector<std::vector<int>> cluster_eigenvalues(const std::vector<double>& eigenvalues,
                                                         double rel_gap = kDefaultClusterGap) {
    std::vector<std::vector<int>> clusters;
    if (eigenvalues.empty()) return clusters;
    double floor_val = eigenvalues.size() > 1 ? std::max(eigenvalues[1], 0.0) / 100.0 : 0.0;
    clusters.push_back({0});
    for (int i = 1; i < static_cast<int>(eigenvalues.size()); ++i) {
        double gap = eigenvalues[static_cast<size_t>(i)] - eigenvalues[static_cast<size_t>(i) - 1];
        if (gap <= rel_gap * std::max(eigenvalues[static_cast<size_t>(i)], floor_val))
            clusters.back().push_back(i);
        else
            clusters.push_back({i});
    }
    return clusters;
}

namespace detail {

/// Flip each column so its first component of largest magnitude is positive.
inline void fix_signs(Eigen::MatrixXd& vectors) {
    for (int c = 0; c < vectors.cols(); ++c) {
        int arg = 0;
        double best = 0.0;
        for (int r = 0; r < vectors.rows(); ++r) {
            double a = std::abs(vectors(r, c));
            if (a > best) {
                best = a;
                arg = r;
            }
        }
        if (vectors(arg, c) < 0.0) vectors.col(c) = -vectors.col(c);
    }
}

inline double scaled_residual(const SparseMatrix& Q, const SparseMatrix& M, double q_norm,
                              double m_norm, double lambda, const Eigen::VectorXd& v) {
    double num = (Q * v - lambda * (M * v)).norm();
    double den = (q_norm + std::abs(lambda) * m_norm) * v.norm();
    return den > 0.0 ? num / den : num;
}

inline double inf_norm(const SparseMatrix& A) {
    Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(A.rows());
    for (int k = 0; k < A.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(A, k); it; ++it)
            row_sums(it.row()) += std::abs(it.value());
    return A.rows() > 0 ? row_sums.maxCoeff() : 0.0;
}

inline SpectralResult finalize(const FormPair& fp, std::vector<double> eigenvalues,
                               Eigen::MatrixXd vectors, std::string method, int iterations) {
    fix_signs(vectors);
    SpectralResult res;
    res.eigenvalues = std::move(eigenvalues);
    res.eigenvectors = std::move(vectors);
    res.clusters = cluster_eigenvalues(res.eigenvalues);
    res.solver_info.method = std::move(method);
    res.solver_info.iterations = iterations;
    double qn = inf_norm(fp.stiffness), mn = inf_norm(fp.mass);
    double worst = 0.0;
    for (int i = 0; i < static_cast<int>(res.eigenvalues.size()); ++i)
        worst = std::max(worst, scaled_residual(fp.stiffness, fp.mass, qn, mn,
                                                res.eigenvalues[static_cast<size_t>(i)],
                                                res.eigenvectors.col(i)));
    res.solver_info.max_residual = worst;
    return res;
}

}  // namespace detail

/// Full dense solve: factors M = LL^T, reduces to the ordinary symmetric
/// problem on L^{-1} Q L^{-T}, and back-substitutes, which is what
/// Eigen's generalized self-adjoint solver does internally. Returns all
/// eigenpairs, or the lowest num_eigs when 0 < num_eigs < N.
inline SpectralResult solve_dense(const FormPair& fp, int num_eigs = -1) {
    const int N = static_cast<int>(fp.mass.rows());
    if (N > kDenseThreshold)
        throw Error(ErrorCode::ValidationError,
                    "dense solver limited to N <= " + std::to_string(kDenseThreshold) + ", got " +
                        std::to_string(N));
    Eigen::MatrixXd M = Eigen::MatrixXd(fp.mass);
    Eigen::MatrixXd Q = Eigen::MatrixXd(fp.stiffness);
    // Eigen's generalized solver does not reliably report a failed Cholesky
    // of M, so check positive definiteness up front.
    if (Eigen::LLT<Eigen::MatrixXd>(M).info() != Eigen::Success)
        throw Error(ErrorCode::MassNotPositiveDefinite,
                    "Cholesky factorization of the mass matrix failed");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(Q, M,
                                                                     Eigen::ComputeEigenvectors |
                                                                         Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorCode::ConvergenceFailure, "dense eigensolver did not converge");
    int k = (num_eigs <= 0 || num_eigs > N) ? N : num_eigs;
    std::vector<double> evals(solver.eigenvalues().data(), solver.eigenvalues().data() + k);
    Eigen::MatrixXd vecs = solver.eigenvectors().leftCols(k);
    return detail::finalize(fp, std::move(evals), std::move(vecs), "dense", N);
}

/// Shift-invert subspace iteration for the lowest num_eigs pairs.
///
/// Factors K = Q - sigma*M once with sigma = shift - 1e-8*trace(Q)/N (the
/// regularization keeps K positive definite for shift = 0, where Q itself is
/// only semidefinite), then iterates a block of num_eigs plus buffer vectors:
/// apply K^{-1}M, M-orthonormalize the whole block, extract Ritz pairs, rank
/// them by Rayleigh quotient, and repeat until every wanted pair meets the
/// residual target. The block dimension exceeds every expected multiplicity,
/// so clustered eigenvalues converge together. The shift is an acceleration
/// parameter: it must lie below or inside the wanted window for the lowest
/// pairs to dominate the iteration (the default 0 always qualifies since Q
/// is positive semidefinite). When the block would not be substantially
/// smaller than N the dense path is used instead.
inline SpectralResult solve_iterative(const FormPair& fp, int num_eigs, double shift = 0.0) {
    const int N = static_cast<int>(fp.mass.rows());
    if (num_eigs < 1)
        throw Error(ErrorCode::IndexOutOfRange, "num_eigs must be >= 1");
    if (num_eigs > N)
        throw Error(ErrorCode::IndexOutOfRange,
                    "num_eigs " + std::to_string(num_eigs) + " exceeds problem size " +
                        std::to_string(N));

    int buffer = std::max(8, num_eigs / 2);
    int block = std::min(N, num_eigs + buffer);
    if (block * 2 >= N) {
        // Subspace nearly fills the space; dense is both faster and exact.
        if (N > kDenseThreshold)
            throw Error(ErrorCode::ConvergenceFailure,
                        "num_eigs too close to N for the iterative solver and N exceeds the "
                        "dense threshold");
        SpectralResult res = solve_dense(fp, num_eigs);
        res.solver_info.method = "dense-fallback";
        return res;
    }

    {
        // M must be positive definite for the M-inner products below.
        Eigen::SimplicialLDLT<SparseMatrix> mass_chol(fp.mass);
        if (mass_chol.info() != Eigen::Success || mass_chol.vectorD().minCoeff() <= 0.0)
            throw Error(ErrorCode::MassNotPositiveDefinite,
                        "mass matrix is not positive definite");
    }

    double trace_q = 0.0;
    for (int i = 0; i < N; ++i) trace_q += fp.stiffness.coeff(i, i);
    const double sigma = shift - 1e-8 * trace_q / N;

    SparseMatrix K = fp.stiffness - sigma * fp.mass;
    Eigen::SimplicialLDLT<SparseMatrix> solver(K);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorCode::ConvergenceFailure,
                    "factorization of the shifted matrix failed; try a different shift");

    const double q_norm = detail::inf_norm(fp.stiffness);
    const double m_norm = detail::inf_norm(fp.mass);
    const double target = 1e-11;
    const int max_iterations = 500;

    std::mt19937_64 rng(0x5eed0123456789abULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd X(N, block);
    for (int c = 0; c < block; ++c)
        for (int r = 0; r < N; ++r) X(r, c) = gauss(rng);

    auto m_orthonormalize = [&](Eigen::MatrixXd& B) {
        for (int attempt = 0; attempt < 3; ++attempt) {
            Eigen::MatrixXd G = B.transpose() * (fp.mass * B);
            Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (G + G.transpose()));
            if (llt.info() == Eigen::Success) {
                B = llt.matrixL().solve(B.transpose()).transpose();
                return;
            }
            // Rank-deficient block: refresh with random directions and retry.
            for (int c = 0; c < B.cols(); ++c)
                for (int r = 0; r < N; ++r) B(r, c) += 1e-8 * gauss(rng);
        }
        throw Error(ErrorCode::ConvergenceFailure, "subspace lost rank during iteration");
    };

    std::vector<double> wanted_vals(static_cast<size_t>(num_eigs), 0.0);
    Eigen::MatrixXd wanted_vecs(N, num_eigs);
    double worst = std::numeric_limits<double>::infinity();
    int iter = 0;
    for (iter = 1; iter <= max_iterations; ++iter) {
        m_orthonormalize(X);
        Eigen::MatrixXd Z(N, block);
        Eigen::MatrixXd MX = fp.mass * X;
        for (int c = 0; c < block; ++c) Z.col(c) = solver.solve(MX.col(c));
        // Rayleigh-Ritz for the operator K^{-1}M in the M-inner product:
        // H = X^T M K^{-1} M X is symmetric up to roundoff.
        Eigen::MatrixXd H = MX.transpose() * Z;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(0.5 * (H + H.transpose()));
        X = Z * ritz.eigenvectors();  // next subspace, rotated to Ritz directions
        m_orthonormalize(X);

        // Rank the Ritz vectors by their Rayleigh quotient in the original
        // pencil. Quotients of unconverged mixtures overshoot but never
        // undershoot the spectrum, so the leading num_eigs columns are the
        // candidates for the lowest eigenpairs even with a nonzero shift.
        std::vector<std::pair<double, int>> ranked(static_cast<size_t>(block));
        for (int c = 0; c < block; ++c) {
            Eigen::VectorXd v = X.col(c);
            ranked[static_cast<size_t>(c)] = {v.dot(fp.stiffness * v) / v.dot(fp.mass * v), c};
        }
        std::sort(ranked.begin(), ranked.end());
        Eigen::MatrixXd sorted(N, block);
        for (int c = 0; c < block; ++c) sorted.col(c) = X.col(ranked[static_cast<size_t>(c)].second);
        X = std::move(sorted);

        worst = 0.0;
        for (int i = 0; i < num_eigs; ++i) {
            double lambda = ranked[static_cast<size_t>(i)].first;
            wanted_vals[static_cast<size_t>(i)] = lambda;
            wanted_vecs.col(i) = X.col(i);
            worst = std::max(worst, detail::scaled_residual(fp.stiffness, fp.mass, q_norm, m_norm,
                                                            lambda, X.col(i)));
        }
        if (worst <= target) break;
    }
    if (worst > 1e-8)
        throw Error(ErrorCode::ConvergenceFailure,
                    "no convergence after " + std::to_string(max_iterations) +
                        " iterations; worst scaled residual " + std::to_string(worst));

    // Ritz values can come out infinitesimally out of order; sort pairs.
    std::vector<int> order(static_cast<size_t>(num_eigs));
    for (int i = 0; i < num_eigs; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return wanted_vals[static_cast<size_t>(a)] < wanted_vals[static_cast<size_t>(b)]; });
    std::vector<double> evals(static_cast<size_t>(num_eigs));
    Eigen::MatrixXd vecs(N, num_eigs);
    for (int i = 0; i < num_eigs; ++i) {
        evals[static_cast<size_t>(i)] = wanted_vals[static_cast<size_t>(order[static_cast<size_t>(i)])];
        vecs.col(i) = wanted_vecs.col(order[static_cast<size_t>(i)]);
    }
    return detail::finalize(fp, std::move(evals), std::move(vecs), "shift-invert-subspace", iter);
}

}  // namespace geolap
