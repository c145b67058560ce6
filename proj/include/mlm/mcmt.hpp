#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mlm/chain.hpp"
#include "mlm/graph.hpp"
#include "mlm/hierarchy.hpp"

namespace mlm {

// ---- syntax ---------------------------------------------------------------

struct SourcePos {
    int line = 0;
    int column = 0;
};

struct TypeExpr {
    std::string name;
    bool constant = false;
    std::optional<int> level;
    std::optional<Potency> potency;
    std::optional<Multiplicity> multiplicity;
    friend bool operator==(const TypeExpr&, const TypeExpr&) = default;
};

struct Declaration {
    std::string name;
    TypeExpr type;
    SourcePos pos;
    friend bool operator==(const Declaration& a, const Declaration& b) {
        return a.name == b.name && a.type == b.type;
    }
};

struct Assignment {
    std::string arrow;
    std::string source;
    std::string target;
    SourcePos pos;
    friend bool operator==(const Assignment& a, const Assignment& b) {
        return a.arrow == b.arrow && a.source == b.source && a.target == b.target;
    }
};

using BlockItem = std::variant<Declaration, Assignment>;

struct RuleSyntax {
    std::string name;
    std::vector<BlockItem> meta;
    std::vector<BlockItem> from;
    std::vector<BlockItem> to;
    SourcePos pos;
    friend bool operator==(const RuleSyntax& a, const RuleSyntax& b) {
        return a.name == b.name && a.meta == b.meta && a.from == b.from && a.to == b.to;
    }
};

struct ModuleSyntax {
    std::string name;
    std::vector<RuleSyntax> rules;
    friend bool operator==(const ModuleSyntax&, const ModuleSyntax&) = default;
};

// Throws SyntaxError with line and column.
ModuleSyntax parse_module_syntax(std::string_view text);
std::string print_module(const ModuleSyntax& m);

// ---- resolved rules -------------------------------------------------------

struct MetaElement {
    std::string name;
    int level = 1;
    bool arrow = false;
    bool constant = false;
    bool implicit = false; // introduced by a `T mmk` reference without a declaration
    std::string type;      // meta element at type_level, or a root element when type_level == 0
    int type_level = 0;
    std::string source;    // arrows: meta element names at the same level
    std::string target;
    std::optional<Potency> potency;
    std::optional<Multiplicity> multiplicity;
    SourcePos pos;
};

struct PatternElement {
    std::string name;
    bool arrow = false;
    std::string source;
    std::string target;
    std::string type;       // meta element name
    int type_level = 0;
    std::optional<Potency> potency;
    SourcePos pos;

    Element element() const {
        return arrow ? Element{Arrow{source, name, target}} : Element{name};
    }
};

struct McmtRule {
    std::string name;
    int depth = 0; // number of META levels below the root
    std::vector<MetaElement> meta;
    std::vector<PatternElement> from;
    std::vector<PatternElement> to;
    RuleSyntax syntax;

    const MetaElement* find_meta(int level, const std::string& name) const;
    const MetaElement& meta_at(int level, const std::string& name) const;
    // Arrow triple of a meta element in its level graph.
    Element meta_element(const MetaElement& m) const;

    // Level graphs of the META chain; level 0 is the given root.
    Graph meta_graph(int level) const;
    GraphChain meta_chain(const Graph& root) const;

    Graph lhs() const;
    Graph rhs() const;
    Graph interface() const;

    // The pattern element declared for e in FROM or TO.
    const PatternElement& pattern(const Element& e) const;

    // Types of an element with the given direct type, from that type up to the root.
    std::vector<std::pair<int, Element>> type_chain(bool arrow, const std::string& type, int type_level,
                                                    const Graph& root) const;

    // σ_i of the rule's graphs over the META chain (i = 0 .. depth).
    MultilevelTyping typing_of(const Graph& g, const Graph& root) const;
};

struct RuleModule {
    std::string name;
    std::vector<McmtRule> rules;
};

// Resolves references against the given root graph. Throws SyntaxError,
// UnresolvedReference or DuplicateDeclaration.
RuleModule parse_rule_module(std::string_view text, const Graph& root);
RuleModule load_rule_module(const std::string& path, const Graph& root);
McmtRule resolve_rule(const RuleSyntax& syntax, const Graph& root);

enum class RuleCheck {
    MetaEmpty,
    UnknownRootType,
    KindMismatch,
    TypingIncompatibility,
    FromToMismatch,
    PotencyOnCreated,
};

std::string_view to_string(RuleCheck c);

struct RuleViolation {
    std::string rule;
    std::string element;
    RuleCheck check;
    std::string message;
};

std::vector<RuleViolation> validate_rule(const McmtRule& rule, const Graph& root);

} // namespace mlm
