#pragma once

// Mesh file format and report serialization.
//
// Mesh JSON schema (format_version "1"):
// {
//   "format_version": "1",
//   "dimension": n,
//   "num_vertices": N,
//   "top_simplices": [[v0, ..., vn], ...],
//   "edge_lengths": [{"i": i, "j": j, "length": l}, ...],   // exactly the 1-skeleton
//   "positions": [[x, y, ...], ...],                        // optional
//   "manifold": {"kind": "sphere", "radius": r}             // optional
//             | {"kind": "flat_torus", "periods": [a, b]}
// }
//
// All output is deterministic: fixed key order, floats in shortest
// round-trip form, so identical inputs produce byte-identical files.

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geolap/analysis.hpp"

namespace geolap {

using OrderedJson = nlohmann::ordered_json;

namespace detail {

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace detail

struct MeshFile {
    std::string format_version = "1";
    int dimension = 0;
    int num_vertices = 0;
    std::vector<Simplex> top_simplices;
    std::vector<EdgeLengthEntry> edge_lengths;
    std::optional<std::vector<Eigen::VectorXd>> positions;
    std::optional<ModelManifold> manifold;
};

/// A fully validated mesh: the metric complex always, plus positions and the
/// manifold tag when the file carried them.
struct LoadedMesh {
    MetricComplex metric;
    std::optional<VertexedMesh> vertexed;
    std::optional<ModelManifold> manifold;
};

inline MeshFile mesh_file_from(const VertexedMesh& mesh, const ModelManifold& manifold) {
    MeshFile f;
    const MetricComplex& mc = mesh.metric_complex;
    f.dimension = mc.complex().dimension;
    f.num_vertices = mc.complex().num_vertices;
    f.top_simplices = mc.complex().top_simplices;
    const auto& edges = mc.faces().faces(1);
    for (size_t r = 0; r < edges.size(); ++r)
        f.edge_lengths.push_back({edges[r][0], edges[r][1], mc.edge_lengths()[r]});
    f.positions = mesh.positions;
    f.manifold = manifold;
    return f;
}

inline MeshFile mesh_file_from(const MetricComplex& mc) {
    MeshFile f;
    f.dimension = mc.complex().dimension;
    f.num_vertices = mc.complex().num_vertices;
    f.top_simplices = mc.complex().top_simplices;
    const auto& edges = mc.faces().faces(1);
    for (size_t r = 0; r < edges.size(); ++r)
        f.edge_lengths.push_back({edges[r][0], edges[r][1], mc.edge_lengths()[r]});
    return f;
}

inline std::string serialize_mesh(const MeshFile& f) {
    OrderedJson j;
    j["format_version"] = f.format_version;
    j["dimension"] = f.dimension;
    j["num_vertices"] = f.num_vertices;
    j["top_simplices"] = f.top_simplices;
    j["edge_lengths"] = OrderedJson::array();
    for (const auto& e : f.edge_lengths)
        j["edge_lengths"].push_back(OrderedJson{{"i", e.i}, {"j", e.j}, {"length", e.length}});
    if (f.positions) {
        j["positions"] = OrderedJson::array();
        for (const auto& p : *f.positions) {
            OrderedJson row = OrderedJson::array();
            for (Eigen::Index k = 0; k < p.size(); ++k) row.push_back(p(k));
            j["positions"].push_back(row);
        }
    }
    if (f.manifold) {
        if (f.manifold->kind == ModelManifold::Kind::Sphere)
            j["manifold"] = OrderedJson{{"kind", "sphere"}, {"radius", f.manifold->radius}};
        else
            j["manifold"] = OrderedJson{{"kind", "flat_torus"},
                                        {"periods", {f.manifold->period_a, f.manifold->period_b}}};
    }
    return j.dump(2) + "\n";
}

inline MeshFile parse_mesh(const std::string& text) {
    OrderedJson j;
    try {
        j = OrderedJson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    try {
        MeshFile f;
        f.format_version = j.at("format_version").get<std::string>();
        if (f.format_version != "1")
            throw Error(ErrorCode::ValidationError,
                        "unsupported format_version '" + f.format_version + "'");
        f.dimension = j.at("dimension").get<int>();
        f.num_vertices = j.at("num_vertices").get<int>();
        for (const auto& row : j.at("top_simplices")) f.top_simplices.push_back(row.get<Simplex>());
        for (const auto& e : j.at("edge_lengths"))
            f.edge_lengths.push_back({e.at("i").get<int>(), e.at("j").get<int>(),
                                      e.at("length").get<double>()});
        if (j.contains("positions")) {
            std::vector<Eigen::VectorXd> positions;
            for (const auto& row : j.at("positions")) {
                Eigen::VectorXd p(row.size());
                for (size_t k = 0; k < row.size(); ++k)
                    p(static_cast<Eigen::Index>(k)) = row[k].get<double>();
                positions.push_back(std::move(p));
            }
            f.positions = std::move(positions);
        }
        if (j.contains("manifold")) {
            const auto& m = j.at("manifold");
            std::string kind = m.at("kind").get<std::string>();
            if (kind == "sphere")
                f.manifold = ModelManifold::sphere(m.at("radius").get<double>());
            else if (kind == "flat_torus")
                f.manifold = ModelManifold::flat_torus(m.at("periods").at(0).get<double>(),
                                                       m.at("periods").at(1).get<double>());
            else
                throw Error(ErrorCode::ValidationError, "unknown manifold kind '" + kind + "'");
        }
        return f;
    } catch (const Error&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ValidationError, std::string("malformed mesh file: ") + e.what());
    }
}

/// Build and fully validate the in-memory objects described by a mesh file.
/// Complex and metric construction errors surface as ValidationError; when
/// positions and a manifold tag are present, every edge length must equal
/// the geodesic distance of its endpoints to 1e-12 relative.
inline LoadedMesh validate_mesh(const MeshFile& f) {
    try {
        SimplicialComplex complex = build_complex(f.dimension, f.num_vertices, f.top_simplices);
        MetricComplex metric(std::move(complex), f.edge_lengths);
        LoadedMesh loaded{std::move(metric), std::nullopt, f.manifold};
        if (f.positions) {
            if (static_cast<int>(f.positions->size()) != f.num_vertices)
                throw Error(ErrorCode::ValidationError, "one position per vertex required");
            if (f.manifold) {
                const auto& edges = loaded.metric.faces().faces(1);
                for (size_t r = 0; r < edges.size(); ++r) {
                    double len = loaded.metric.edge_lengths()[r];
                    double geo = geodesic_distance(*f.manifold,
                                                   (*f.positions)[static_cast<size_t>(edges[r][0])],
                                                   (*f.positions)[static_cast<size_t>(edges[r][1])]);
                    if (std::abs(len - geo) > 1e-12 * std::max(len, geo))
                        throw Error(ErrorCode::ValidationError,
                                    "edge (" + std::to_string(edges[r][0]) + ", " +
                                        std::to_string(edges[r][1]) +
                                        ") length disagrees with the geodesic distance of its "
                                        "endpoint positions");
                }
                loaded.vertexed = VertexedMesh{loaded.metric, *f.positions};
            }
        }
        return loaded;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ValidationError || e.code() == ErrorCode::ParseError) throw;
        throw Error(ErrorCode::ValidationError, e.what());
    }
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::ValidationError, "cannot write '" + path + "'");
    out << text;
}

inline LoadedMesh load_mesh(const std::string& path) {
    return validate_mesh(parse_mesh(read_text_file(path)));
}

inline void save_mesh(const std::string& path, const MeshFile& f) {
    write_text_file(path, serialize_mesh(f));
}

/// Matrix Market "coordinate real symmetric" text: lower triangle, 1-based
/// indices, entries sorted by (column, row).
inline std::string matrix_market_string(const SparseMatrix& A) {
    std::string out = "%%MatrixMarket matrix coordinate real symmetric\n";
    std::vector<std::tuple<int, int, double>> entries;
    for (int k = 0; k < A.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(A, k); it; ++it)
            if (it.row() >= it.col())
                entries.emplace_back(static_cast<int>(it.col()), static_cast<int>(it.row()),
                                     it.value());
    std::sort(entries.begin(), entries.end());
    out += std::to_string(A.rows()) + " " + std::to_string(A.cols()) + " " +
           std::to_string(entries.size()) + "\n";
    for (const auto& [c, r, v] : entries)
        out += std::to_string(r + 1) + " " + std::to_string(c + 1) + " " +
               detail::format_double(v) + "\n";
    return out;
}

/// Full stored entries as JSON triplets sorted by (row, col).
inline OrderedJson matrix_json(const SparseMatrix& A) {
    std::vector<std::tuple<int, int, double>> entries;
    for (int k = 0; k < A.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(A, k); it; ++it)
            entries.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    std::sort(entries.begin(), entries.end());
    OrderedJson j;
    j["rows"] = A.rows();
    j["cols"] = A.cols();
    j["entries"] = OrderedJson::array();
    for (const auto& [r, c, v] : entries) j["entries"].push_back(OrderedJson::array({r, c, v}));
    return j;
}

inline OrderedJson spectral_json(const SpectralResult& result, bool include_vectors = false) {
    OrderedJson j;
    j["eigenvalues"] = result.eigenvalues;
    j["clusters"] = result.clusters;
    j["solver_info"] = OrderedJson{{"method", result.solver_info.method},
                                   {"iterations", result.solver_info.iterations},
                                   {"max_residual", result.solver_info.max_residual}};
    if (include_vectors) {
        j["eigenvectors"] = OrderedJson::array();
        for (int c = 0; c < result.eigenvectors.cols(); ++c) {
            OrderedJson col = OrderedJson::array();
            for (int r = 0; r < result.eigenvectors.rows(); ++r)
                col.push_back(result.eigenvectors(r, c));
            j["eigenvectors"].push_back(col);
        }
    }
    return j;
}

inline SpectralResult spectral_from_json(const OrderedJson& j) {
    SpectralResult result;
    try {
        result.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
        result.clusters = j.at("clusters").get<std::vector<std::vector<int>>>();
        result.solver_info.method = j.at("solver_info").at("method").get<std::string>();
        result.solver_info.iterations = j.at("solver_info").at("iterations").get<int>();
        result.solver_info.max_residual = j.at("solver_info").at("max_residual").get<double>();
        if (j.contains("eigenvectors")) {
            const auto& cols = j.at("eigenvectors");
            if (!cols.empty()) {
                result.eigenvectors.resize(cols.at(0).size(), cols.size());
                for (size_t c = 0; c < cols.size(); ++c)
                    for (size_t r = 0; r < cols.at(c).size(); ++r)
                        result.eigenvectors(static_cast<Eigen::Index>(r),
                                            static_cast<Eigen::Index>(c)) =
                            cols.at(c).at(r).get<double>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ValidationError, std::string("malformed spectrum file: ") + e.what());
    }
    return result;
}

inline OrderedJson comparison_json(const ComparisonReport& report) {
    OrderedJson j;
    j["mesh"] = OrderedJson{{"m_T", report.mesh},
                            {"thinness", report.thinness},
                            {"num_vertices", report.num_vertices}};
    j["max_rel_error"] = report.max_rel_error();
    j["clusters"] = OrderedJson::array();
    for (const auto& c : report.cluster_matches)
        j["clusters"].push_back(OrderedJson{{"analytic_value", c.analytic_value},
                                            {"multiplicity", c.multiplicity},
                                            {"first_index", c.first_index},
                                            {"discrete_size", c.discrete_size},
                                            {"multiplicity_ok", c.multiplicity_ok}});
    j["pairs"] = OrderedJson::array();
    for (const auto& p : report.pairs)
        j["pairs"].push_back(OrderedJson{{"index", p.index},
                                         {"lambda_T", p.lambda_discrete},
                                         {"lambda_M", p.lambda_analytic},
                                         {"rel_err", p.rel_error}});
    return j;
}

inline std::string comparison_csv(const ComparisonReport& report) {
    std::string out = "index,lambda_T,lambda_M,rel_err\n";
    for (const auto& p : report.pairs)
        out += std::to_string(p.index) + "," + detail::format_double(p.lambda_discrete) + "," +
               detail::format_double(p.lambda_analytic) + "," + detail::format_double(p.rel_error) +
               "\n";
    return out;
}

inline OrderedJson residual_json(const ResidualReport& report) {
    OrderedJson j;
    j["eta"] = report.eta;
    j["per_function"] = OrderedJson::array();
    for (const auto& e : report.per_function)
        j["per_function"].push_back(
            OrderedJson{{"function", e.function}, {"residual_ratio", e.residual_ratio}});
    return j;
}

}  // namespace geolap
