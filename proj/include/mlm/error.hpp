#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mlm {

enum class ErrorKind {
    DuplicateNode,
    DuplicateArrow,
    DanglingArrow,
    GraphMismatch,
    InvalidMorphism,
    NotInclusion,
    NotSubgraph,
    DanglingDeletion,
    IdentificationConflict,
    NonTotalRootTyping,
    UniquenessViolation,
    RootMismatch,
    CompatibilityViolation,
    DepthMismatch,
    NotInclusionChain,
    InheritanceCycle,
    ParseError,
    SchemaError,
    SyntaxError,
    UnresolvedReference,
    DuplicateDeclaration,
    TypeMismatch,
    IncompatibleMatch,
    ValidationFailed,
    NotFound,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers can branch
// on it; line/column are set for parser errors only (1-based, 0 = unknown).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, int line = 0, int column = 0);

    ErrorKind kind() const noexcept { return kind_; }
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    ErrorKind kind_;
    int line_;
    int column_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

} // namespace mlm
