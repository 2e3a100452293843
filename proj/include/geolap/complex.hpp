#pragma once

// Abstract simplicial complexes: canonical storage of top-dimensional
// simplices, face/star enumeration, and the combinatorial validity checks
// (closed pseudomanifold, vertex links) used to vet triangulations before
// any geometry is attached.

#include <algorithm>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "geolap/errors.hpp"

namespace geolap {

using VertexId = int;

/// A face or simplex, stored as a strictly increasing tuple of vertex ids.
using Simplex = std::vector<VertexId>;

/// Pure n-dimensional abstract simplicial complex. Only the top simplices
/// are stored; lower faces are derived on demand (see enumerate_faces).
/// Immutable after construction via build_complex.
struct SimplicialComplex {
    int dimension = 0;     ///< n >= 1
    int num_vertices = 0;  ///< N; vertex ids are 0..N-1
    std::vector<Simplex> top_simplices;  ///< sorted tuples, lexicographic order, no duplicates
};

/// Derived face tables: for each p in [0, n] the deduplicated, lexicographically
/// sorted list of p-faces, plus the star map St_n(sigma) giving, for every face,
/// the indices (into top_simplices) of the top simplices containing it.
class FaceIndex {
public:
    FaceIndex() = default;
    FaceIndex(std::vector<std::vector<Simplex>> faces,
              std::vector<std::map<Simplex, int>> rank,
              std::vector<std::vector<std::vector<int>>> stars)
        : faces_by_dim_(std::move(faces)), rank_(std::move(rank)), star_n_(std::move(stars)) {}

    int max_dim() const { return static_cast<int>(faces_by_dim_.size()) - 1; }

    const std::vector<Simplex>& faces(int p) const { return faces_by_dim_.at(p); }

    /// Position of `face` within faces(p), or -1 when absent.
    int face_rank(int p, const Simplex& face) const {
        const auto& m = rank_.at(p);
        auto it = m.find(face);
        return it == m.end() ? -1 : it->second;
    }

    /// St_n of the face at position `r` in faces(p): ascending top-simplex indices.
    const std::vector<int>& star(int p, int r) const { return star_n_.at(p).at(r); }

    const std::vector<int>& star(int p, const Simplex& face) const {
        int r = face_rank(p, face);
        if (r < 0) throw Error(ErrorCode::IndexOutOfRange, "face not present in complex");
        return star(p, r);
    }

private:
    std::vector<std::vector<Simplex>> faces_by_dim_;
    std::vector<std::map<Simplex, int>> rank_;
    std::vector<std::vector<std::vector<int>>> star_n_;
};

/// Validate and canonicalize a complex: every tuple must have dimension+1
/// distinct vertices in [0, num_vertices); tuples are sorted, the list is
/// sorted lexicographically and deduplicated; every vertex must appear in
/// at least one top simplex (the complex is pure by construction).
inline SimplicialComplex build_complex(int dimension, int num_vertices,
                                       std::vector<Simplex> top_simplices) {
    if (dimension < 1)
        throw Error(ErrorCode::WrongArity, "dimension must be >= 1, got " + std::to_string(dimension));
    if (num_vertices < dimension + 1)
        throw Error(ErrorCode::OutOfRangeVertex,
                    "need at least dimension+1 vertices, got " + std::to_string(num_vertices));

    const size_t arity = static_cast<size_t>(dimension) + 1;
    for (auto& s : top_simplices) {
        if (s.size() != arity)
            throw Error(ErrorCode::WrongArity,
                        "top simplex has " + std::to_string(s.size()) + " vertices, expected " +
                            std::to_string(arity));
        std::sort(s.begin(), s.end());
        for (size_t i = 0; i < s.size(); ++i) {
            if (s[i] < 0 || s[i] >= num_vertices)
                throw Error(ErrorCode::OutOfRangeVertex,
                            "vertex " + std::to_string(s[i]) + " outside [0, " +
                                std::to_string(num_vertices) + ")");
            if (i > 0 && s[i] == s[i - 1])
                throw Error(ErrorCode::DuplicateVertexInSimplex,
                            "vertex " + std::to_string(s[i]) + " repeated in a top simplex");
        }
    }
    std::sort(top_simplices.begin(), top_simplices.end());
    top_simplices.erase(std::unique(top_simplices.begin(), top_simplices.end()),
                        top_simplices.end());

    std::vector<char> seen(static_cast<size_t>(num_vertices), 0);
    for (const auto& s : top_simplices)
        for (VertexId v : s) seen[static_cast<size_t>(v)] = 1;
    for (int v = 0; v < num_vertices; ++v)
        if (!seen[static_cast<size_t>(v)])
            throw Error(ErrorCode::IsolatedVertex,
                        "vertex " + std::to_string(v) + " lies in no top simplex");

    return SimplicialComplex{dimension, num_vertices, std::move(top_simplices)};
}

/// Enumerate all faces of all dimensions p in [0, n] together with their
/// n-stars. Deterministic: faces come out lexicographically sorted and the
/// star lists hold ascending top-simplex indices.
inline FaceIndex enumerate_faces(const SimplicialComplex& complex) {
    const int n = complex.dimension;
    std::vector<std::map<Simplex, std::vector<int>>> acc(static_cast<size_t>(n) + 1);

    // Subsets of each (n+1)-tuple by bitmask; n is small so this is cheap.
    const int tuple_size = n + 1;
    for (int t = 0; t < static_cast<int>(complex.top_simplices.size()); ++t) {
        const Simplex& s = complex.top_simplices[static_cast<size_t>(t)];
        for (unsigned mask = 1; mask < (1u << tuple_size); ++mask) {
            Simplex face;
            for (int b = 0; b < tuple_size; ++b)
                if (mask & (1u << b)) face.push_back(s[static_cast<size_t>(b)]);
            acc[face.size() - 1][std::move(face)].push_back(t);
        }
    }

    std::vector<std::vector<Simplex>> faces(static_cast<size_t>(n) + 1);
    std::vector<std::map<Simplex, int>> rank(static_cast<size_t>(n) + 1);
    std::vector<std::vector<std::vector<int>>> stars(static_cast<size_t>(n) + 1);
    for (int p = 0; p <= n; ++p) {
        faces[static_cast<size_t>(p)].reserve(acc[static_cast<size_t>(p)].size());
        for (auto& [face, star] : acc[static_cast<size_t>(p)]) {
            rank[static_cast<size_t>(p)][face] = static_cast<int>(faces[static_cast<size_t>(p)].size());
            faces[static_cast<size_t>(p)].push_back(face);
            stars[static_cast<size_t>(p)].push_back(std::move(star));
        }
    }
    return FaceIndex(std::move(faces), std::move(rank), std::move(stars));
}

/// Result of check_closed_pseudomanifold. `closed` is true iff every
/// (n-1)-face lies in exactly two top simplices and, for n = 2, the link of
/// every vertex is a single cycle.
struct PseudomanifoldReport {
    bool closed = false;
    std::vector<Simplex> boundary_faces;   ///< (n-1)-faces with star size 1
    std::vector<Simplex> overused_faces;   ///< (n-1)-faces with star size > 2
    std::vector<VertexId> bad_link_vertices;  ///< n = 2 only: link is not one cycle
};

/// Check pseudomanifold closedness: each (n-1)-face must belong to exactly
/// two top simplices. For surfaces (n = 2) additionally require the link of
/// each vertex to be a single closed cycle, which rejects complexes glued
/// at a vertex. Report-style: never throws on a valid complex.
inline PseudomanifoldReport check_closed_pseudomanifold(const SimplicialComplex& complex) {
    const int n = complex.dimension;
    FaceIndex faces = enumerate_faces(complex);
    PseudomanifoldReport report;

    const auto& ridges = faces.faces(n - 1);
    for (int r = 0; r < static_cast<int>(ridges.size()); ++r) {
        size_t deg = faces.star(n - 1, r).size();
        if (deg == 1) report.boundary_faces.push_back(ridges[static_cast<size_t>(r)]);
        else if (deg > 2) report.overused_faces.push_back(ridges[static_cast<size_t>(r)]);
    }

    if (n == 2) {
        // Link of vertex v: the edges opposite v in the triangles containing v.
        // A closed surface needs this graph to be one cycle: every link vertex
        // of degree 2, connected, and #edges == #vertices.
        for (VertexId v = 0; v < complex.num_vertices; ++v) {
            std::map<VertexId, std::vector<VertexId>> adj;
            int link_edges = 0;
            for (int t : faces.star(0, Simplex{v})) {
                const Simplex& tri = complex.top_simplices[static_cast<size_t>(t)];
                std::vector<VertexId> opp;
                for (VertexId w : tri)
                    if (w != v) opp.push_back(w);
                adj[opp[0]].push_back(opp[1]);
                adj[opp[1]].push_back(opp[0]);
                ++link_edges;
            }
            bool ok = !adj.empty() && link_edges == static_cast<int>(adj.size());
            for (const auto& [w, nb] : adj)
                if (nb.size() != 2) ok = false;
            if (ok) {
                // connectivity sweep over the link graph
                std::map<VertexId, char> visited;
                std::queue<VertexId> q;
                q.push(adj.begin()->first);
                visited[adj.begin()->first] = 1;
                while (!q.empty()) {
                    VertexId w = q.front();
                    q.pop();
                    for (VertexId u : adj[w])
                        if (!visited.count(u)) {
                            visited[u] = 1;
                            q.push(u);
                        }
                }
                ok = visited.size() == adj.size();
            }
            if (!ok) report.bad_link_vertices.push_back(v);
        }
    }

    report.closed = report.boundary_faces.empty() && report.overused_faces.empty() &&
                    report.bad_link_vertices.empty();
    return report;
}

/// V - E + F for 2-complexes (faces of dimension 0, 1, 2); general alternating
/// sum of face counts otherwise.
inline long euler_characteristic(const FaceIndex& faces) {
    long chi = 0;
    for (int p = 0; p <= faces.max_dim(); ++p)
        chi += (p % 2 == 0 ? 1L : -1L) * static_cast<long>(faces.faces(p).size());
    return chi;
}

inline long euler_characteristic(const SimplicialComplex& complex) {
    return euler_characteristic(enumerate_faces(complex));
}

}  // namespace geolap
