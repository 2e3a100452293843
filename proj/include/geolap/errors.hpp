#pragma once

#include <stdexcept>
#include <string>

namespace geolap {

enum class ErrorCode {
    OutOfRangeVertex,
    DuplicateVertexInSimplex,
    WrongArity,
    IsolatedVertex,
    MissingEdgeLength,
    DuplicateEdgeLength,
    NonPositiveEdgeLength,
    NonRealizableSimplex,
    SingularGram,
    MassNotPositiveDefinite,
    ConvergenceFailure,
    InsufficientEigenvalues,
    EmptyCluster,
    DegenerateMap,
    DegenerateSimplex,
    GridTooCoarse,
    IndexOutOfRange,
    ParseError,
    ValidationError,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::OutOfRangeVertex: return "OutOfRangeVertex";
        case ErrorCode::DuplicateVertexInSimplex: return "DuplicateVertexInSimplex";
        case ErrorCode::WrongArity: return "WrongArity";
        case ErrorCode::IsolatedVertex: return "IsolatedVertex";
        case ErrorCode::MissingEdgeLength: return "MissingEdgeLength";
        case ErrorCode::DuplicateEdgeLength: return "DuplicateEdgeLength";
        case ErrorCode::NonPositiveEdgeLength: return "NonPositiveEdgeLength";
        case ErrorCode::NonRealizableSimplex: return "NonRealizableSimplex";
        case ErrorCode::SingularGram: return "SingularGram";
        case ErrorCode::MassNotPositiveDefinite: return "MassNotPositiveDefinite";
        case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
        case ErrorCode::InsufficientEigenvalues: return "InsufficientEigenvalues";
        case ErrorCode::EmptyCluster: return "EmptyCluster";
        case ErrorCode::DegenerateMap: return "DegenerateMap";
        case ErrorCode::DegenerateSimplex: return "DegenerateSimplex";
        case ErrorCode::GridTooCoarse: return "GridTooCoarse";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
    }
    return "UnknownError";
}

/// All library failures are reported through this exception type; code()
/// identifies the failure class for machine consumption (CLI error JSON).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace geolap
