#include "mlm/error.hpp"

namespace mlm {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::DuplicateNode: return "DuplicateNode";
    case ErrorKind::DuplicateArrow: return "DuplicateArrow";
    case ErrorKind::DanglingArrow: return "DanglingArrow";
    case ErrorKind::GraphMismatch: return "GraphMismatch";
    case ErrorKind::InvalidMorphism: return "InvalidMorphism";
    case ErrorKind::NotInclusion: return "NotInclusion";
    case ErrorKind::NotSubgraph: return "NotSubgraph";
    case ErrorKind::DanglingDeletion: return "DanglingDeletion";
    case ErrorKind::IdentificationConflict: return "IdentificationConflict";
    case ErrorKind::NonTotalRootTyping: return "NonTotalRootTyping";
    case ErrorKind::UniquenessViolation: return "UniquenessViolation";
    case ErrorKind::RootMismatch: return "RootMismatch";
    case ErrorKind::CompatibilityViolation: return "CompatibilityViolation";
    case ErrorKind::DepthMismatch: return "DepthMismatch";
    case ErrorKind::NotInclusionChain: return "NotInclusionChain";
    case ErrorKind::InheritanceCycle: return "InheritanceCycle";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnresolvedReference: return "UnresolvedReference";
    case ErrorKind::DuplicateDeclaration: return "DuplicateDeclaration";
    case ErrorKind::TypeMismatch: return "TypeMismatch";
    case ErrorKind::IncompatibleMatch: return "IncompatibleMatch";
    case ErrorKind::ValidationFailed: return "ValidationFailed";
    case ErrorKind::NotFound: return "NotFound";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message, int line, int column)
    : std::runtime_error(message), kind_(kind), line_(line), column_(column) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

} // namespace mlm
