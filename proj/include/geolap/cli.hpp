#pragma once

// Command-line pipeline: mesh generation, validity checking, spectrum
// computation, analytic comparison, projection residuals, and the bound
// formulas. Every path is a pure function of its inputs; identical inputs
// produce byte-identical output files. Failures print a machine-readable
// JSON error object on stderr and exit nonzero.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geolap/io.hpp"

namespace geolap {

namespace detail {

inline std::pair<int, int> parse_grid(const std::string& text) {
    auto x = text.find('x');
    if (x == std::string::npos || x == 0 || x + 1 == text.size())
        throw Error(ErrorCode::ValidationError, "--grid expects MxK, got '" + text + "'");
    try {
        return {std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
    } catch (const std::exception&) {
        throw Error(ErrorCode::ValidationError, "--grid expects MxK, got '" + text + "'");
    }
}

inline std::pair<double, double> parse_periods(const std::string& text) {
    auto c = text.find(',');
    if (c == std::string::npos || c == 0 || c + 1 == text.size())
        throw Error(ErrorCode::ValidationError, "--periods expects a,b, got '" + text + "'");
    try {
        return {std::stod(text.substr(0, c)), std::stod(text.substr(c + 1))};
    } catch (const std::exception&) {
        throw Error(ErrorCode::ValidationError, "--periods expects a,b, got '" + text + "'");
    }
}

inline std::pair<int, int> parse_window(const std::string& text) {
    auto d = text.find("..");
    if (d == std::string::npos)
        throw Error(ErrorCode::ValidationError, "--clusters expects p..q, got '" + text + "'");
    try {
        return {std::stoi(text.substr(0, d)), std::stoi(text.substr(d + 2))};
    } catch (const std::exception&) {
        throw Error(ErrorCode::ValidationError, "--clusters expects p..q, got '" + text + "'");
    }
}

inline int count_distinct_lengths(std::vector<double> lengths) {
    if (lengths.empty()) return 0;
    std::sort(lengths.begin(), lengths.end());
    double tol = 1e-12 * lengths.back();
    int groups = 1;
    for (size_t i = 1; i < lengths.size(); ++i)
        if (lengths[i] - lengths[i - 1] > tol) ++groups;
    return groups;
}

/// First `num_clusters` analytic clusters of the manifold.
inline std::vector<SpectralCluster> analytic_clusters(const ModelManifold& m, int num_clusters) {
    int count = num_clusters;  // lower bound: every cluster has >= 1 member
    for (;;) {
        auto spec = analytic_spectrum(m, count);
        if (static_cast<int>(spec.size()) >= num_clusters) {
            spec.resize(static_cast<size_t>(num_clusters));
            return spec;
        }
        count *= 2;
    }
}

inline const ModelManifold& require_manifold(const LoadedMesh& loaded) {
    if (!loaded.manifold)
        throw Error(ErrorCode::ValidationError,
                    "the mesh file carries no manifold tag; analytic comparison impossible");
    return *loaded.manifold;
}

}  // namespace detail

/// Run the command-line interface. Returns the process exit code.
inline int cli_run(int argc, const char* const* argv) {
    CLI::App app{"discrete Laplace spectra of geodesic triangulations"};
    app.require_subcommand(1);

    // --- gen ---------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a model-manifold mesh");
    std::string gen_manifold, gen_grid = "8x8", gen_periods, gen_out;
    int gen_level = 1;
    double gen_radius = 1.0;
    gen->add_option("--manifold", gen_manifold, "sphere | torus")->required();
    gen->add_option("--level", gen_level, "sphere subdivision level");
    gen->add_option("--radius", gen_radius, "sphere radius (default 1)");
    gen->add_option("--grid", gen_grid, "torus grid MxK (default 8x8)");
    gen->add_option("--periods", gen_periods, "torus periods a,b (default 2pi,2pi)");
    gen->add_option("-o,--output", gen_out, "output mesh file")->required();

    // --- check -------------------------------------------------------------
    auto* check = app.add_subcommand("check", "validate a mesh file and print its stats");
    std::string check_path;
    check->add_option("mesh", check_path, "mesh file")->required();

    // --- spectrum ----------------------------------------------------------
    auto* spectrum = app.add_subcommand("spectrum", "solve the generalized eigenproblem");
    std::string spec_path, spec_solver = "dense", spec_out;
    int spec_num = -1;
    bool spec_vecs = false;
    spectrum->add_option("mesh", spec_path, "mesh file")->required();
    spectrum->add_option("--num-eigs", spec_num, "number of eigenpairs (default: all, dense only)");
    spectrum->add_option("--solver", spec_solver, "dense | iterative (default dense)");
    spectrum->add_flag("--eigvecs", spec_vecs, "include eigenvectors in the output");
    spectrum->add_option("-o,--output", spec_out, "output spectrum file")->required();

    // --- compare -----------------------------------------------------------
    auto* compare = app.add_subcommand("compare", "compare a spectrum against the analytic one");
    std::string cmp_spec, cmp_mesh, cmp_out, cmp_csv;
    int cmp_clusters = 0;
    compare->add_option("spectrum", cmp_spec, "spectrum file")->required();
    compare->add_option("--mesh", cmp_mesh, "mesh file (must carry a manifold tag)")->required();
    compare->add_option("--clusters", cmp_clusters,
                        "number of analytic clusters (default: as many as covered)");
    compare->add_option("-o,--output", cmp_out, "output report file");
    compare->add_option("--csv", cmp_csv, "also write a CSV table");

    // --- residuals ---------------------------------------------------------
    auto* residuals = app.add_subcommand("residuals",
                                         "projection residuals of restricted eigenfunctions");
    std::string res_spec, res_mesh, res_window, res_out;
    residuals->add_option("spectrum", res_spec, "spectrum file with eigenvectors")->required();
    residuals->add_option("--mesh", res_mesh, "mesh file with positions and manifold")->required();
    residuals->add_option("--clusters", res_window, "projection window p..q")->required();
    residuals->add_option("-o,--output", res_out, "output residual file")->required();

    // --- bound -------------------------------------------------------------
    auto* bound = app.add_subcommand("bound", "evaluate the admissibility / eigenvalue bounds");
    bound->require_subcommand(1);
    auto* thm1 = bound->add_subcommand("thm1", "largest certified mesh size");
    auto* cheng = bound->add_subcommand("cheng", "eigenvalue upper bound");
    int b_n = 2, b_k = 0;
    double b_eps = 0.0, b_lambda = 0.0, b_diam = 0.0, b_inj = 0.0, b_thin = 1.0, b_order = 1.0,
           b_cn = 1.0;
    thm1->add_option("--n", b_n, "dimension")->required();
    thm1->add_option("--eps", b_eps, "target eigenvalue accuracy")->required();
    thm1->add_option("--lambda", b_lambda, "curvature bound")->required();
    thm1->add_option("--diam", b_diam, "diameter")->required();
    thm1->add_option("--inj", b_inj, "injectivity radius")->required();
    thm1->add_option("--thinness", b_thin, "triangulation thinness")->required();
    thm1->add_option("--order", b_order, "eigenvalue order p")->required();
    thm1->add_option("--cn", b_cn, "dimensional constant (default 1)");
    cheng->add_option("--n", b_n, "dimension")->required();
    cheng->add_option("--k", b_k, "eigenvalue index")->required();
    cheng->add_option("--lambda", b_lambda, "curvature bound")->required();
    cheng->add_option("--diam", b_diam, "diameter")->required();
    cheng->add_option("--inj", b_inj, "injectivity radius")->required();
    cheng->add_option("--cn", b_cn, "dimensional constant (default 1)");

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        OrderedJson err{{"error", {{"code", "UsageError"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 2;
    }

    try {
        if (gen->parsed()) {
            VertexedMesh mesh = [&] {
                if (gen_manifold == "sphere") return generate_sphere_mesh(gen_radius, gen_level);
                if (gen_manifold == "torus") {
                    auto [m, k] = detail::parse_grid(gen_grid);
                    double a = 2.0 * std::numbers::pi, b = 2.0 * std::numbers::pi;
                    if (!gen_periods.empty()) std::tie(a, b) = detail::parse_periods(gen_periods);
                    return generate_torus_mesh(a, b, m, k);
                }
                throw Error(ErrorCode::ValidationError,
                            "--manifold must be sphere or torus, got '" + gen_manifold + "'");
            }();
            ModelManifold manifold =
                gen_manifold == "sphere"
                    ? ModelManifold::sphere(gen_radius)
                    : [&] {
                          double a = 2.0 * std::numbers::pi, b = 2.0 * std::numbers::pi;
                          if (!gen_periods.empty()) std::tie(a, b) = detail::parse_periods(gen_periods);
                          return ModelManifold::flat_torus(a, b);
                      }();
            save_mesh(gen_out, mesh_file_from(mesh, manifold));
            return 0;
        }

        if (check->parsed()) {
            LoadedMesh loaded = load_mesh(check_path);
            PseudomanifoldReport pseudo = check_closed_pseudomanifold(loaded.metric.complex());
            MetricReport metric = validate_metric(loaded.metric);
            MeshStats stats = mesh_stats(loaded.metric);
            OrderedJson out;
            out["closed"] = pseudo.closed;
            out["boundary_faces"] = pseudo.boundary_faces.size();
            out["overused_faces"] = pseudo.overused_faces.size();
            out["bad_link_vertices"] = pseudo.bad_link_vertices;
            out["metric_pass"] = metric.pass;
            out["degenerate_pairs"] = metric.degenerate.size();
            out["num_vertices"] = loaded.metric.complex().num_vertices;
            out["num_edges"] = loaded.metric.faces().faces(1).size();
            out["num_top_simplices"] = loaded.metric.complex().top_simplices.size();
            out["euler_characteristic"] = euler_characteristic(loaded.metric.complex());
            out["distinct_edge_lengths"] =
                detail::count_distinct_lengths(loaded.metric.edge_lengths());
            out["stats"] = OrderedJson{{"mesh", stats.mesh},
                                       {"min_edge", stats.min_edge},
                                       {"thinness", stats.thinness},
                                       {"min_gram_det", stats.min_gram_det}};
            std::cout << out.dump(2) << "\n";
            return pseudo.closed && metric.pass ? 0 : 1;
        }

        if (spectrum->parsed()) {
            LoadedMesh loaded = load_mesh(spec_path);
            FormPair fp = assemble(loaded.metric);
            SpectralResult result = [&] {
                if (spec_solver == "dense") return solve_dense(fp, spec_num);
                if (spec_solver == "iterative") {
                    if (spec_num < 1)
                        throw Error(ErrorCode::ValidationError,
                                    "--solver iterative requires --num-eigs");
                    return solve_iterative(fp, spec_num);
                }
                throw Error(ErrorCode::ValidationError,
                            "--solver must be dense or iterative, got '" + spec_solver + "'");
            }();
            write_text_file(spec_out, spectral_json(result, spec_vecs).dump(2) + "\n");
            return 0;
        }

        if (compare->parsed()) {
            LoadedMesh loaded = load_mesh(cmp_mesh);
            const ModelManifold& manifold = detail::require_manifold(loaded);
            SpectralResult result = spectral_from_json(
                OrderedJson::parse(read_text_file(cmp_spec), nullptr, true));
            int available = static_cast<int>(result.eigenvalues.size());
            std::vector<SpectralCluster> analytic;
            if (cmp_clusters > 0) {
                analytic = detail::analytic_clusters(manifold, cmp_clusters);
            } else {
                // Largest analytic prefix the computed spectrum covers.
                auto spec = analytic_spectrum(manifold, available);
                int total = 0;
                for (const auto& c : spec) {
                    if (total + c.multiplicity > available) break;
                    analytic.push_back(c);
                    total += c.multiplicity;
                }
            }
            MeshStats stats = mesh_stats(loaded.metric);
            ComparisonReport report =
                compare_spectra(result, analytic, kDefaultClusterGap, &stats);
            if (report.num_vertices == 0)
                report.num_vertices = loaded.metric.complex().num_vertices;
            std::string text = comparison_json(report).dump(2) + "\n";
            if (cmp_out.empty())
                std::cout << text;
            else
                write_text_file(cmp_out, text);
            if (!cmp_csv.empty()) write_text_file(cmp_csv, comparison_csv(report));
            return 0;
        }

        if (residuals->parsed()) {
            LoadedMesh loaded = load_mesh(res_mesh);
            const ModelManifold& manifold = detail::require_manifold(loaded);
            if (!loaded.vertexed)
                throw Error(ErrorCode::ValidationError,
                            "residuals need vertex positions in the mesh file");
            SpectralResult result = spectral_from_json(
                OrderedJson::parse(read_text_file(res_spec), nullptr, true));
            if (result.eigenvectors.cols() == 0)
                throw Error(ErrorCode::ValidationError,
                            "spectrum file lacks eigenvectors; rerun spectrum with --eigvecs");
            auto [p, q] = detail::parse_window(res_window);
            // Restrict the analytic eigenfunctions with global indices p+1..q.
            auto analytic = analytic_spectrum(manifold, q + 1);
            Eigen::MatrixXd vectors(loaded.vertexed->positions.size(), std::max(0, q - p));
            int col = 0, start = 0;
            for (size_t c = 0; c < analytic.size() && start <= q; ++c)
                for (int member = 0; member < analytic[c].multiplicity; ++member, ++start)
                    if (start >= p + 1 && start <= q)
                        vectors.col(col++) = restrict_eigenfunction(manifold, *loaded.vertexed,
                                                                    static_cast<int>(c), member);
            FormPair fp = assemble(loaded.metric);
            ResidualReport report = projection_residual(fp, result, vectors, p, q);
            write_text_file(res_out, residual_json(report).dump(2) + "\n");
            return 0;
        }

        if (thm1->parsed()) {
            std::cout << detail::format_double(theorem1_admissible_mesh(
                              b_n, b_eps, b_lambda, b_diam, b_inj, b_thin, b_order, b_cn))
                      << "\n";
            return 0;
        }
        if (cheng->parsed()) {
            std::cout << detail::format_double(cheng_bound(b_n, b_k, b_lambda, b_diam, b_inj, b_cn))
                      << "\n";
            return 0;
        }
    } catch (const Error& e) {
        OrderedJson err{{"error", {{"code", error_code_name(e.code())}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        OrderedJson err{{"error", {{"code", "InternalError"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace geolap
