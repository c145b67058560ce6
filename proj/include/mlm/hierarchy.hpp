#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlm/chain.hpp"
#include "mlm/graph.hpp"

namespace mlm {

// Interval of admissible level jumps; an empty max means unbounded ("*").
struct Potency {
    unsigned min = 1;
    std::optional<unsigned> max = 1u;

    bool contains(unsigned d) const { return d >= min && (!max || d <= *max); }
    bool contains(const Potency& p) const;
    friend bool operator==(const Potency&, const Potency&) = default;
};

// Arrow multiplicity; an empty upper bound means unbounded ("n").
struct Multiplicity {
    unsigned lower = 0;
    std::optional<unsigned> upper;

    bool contains(const Multiplicity& m) const;
    bool bounded() const { return upper.has_value(); }
    friend bool operator==(const Multiplicity&, const Multiplicity&) = default;
};

std::string to_string(const Potency& p);
std::string to_string(const Multiplicity& m);
// "2", "1-2", "1-*". Throws SchemaError.
Potency parse_potency(const std::string& text);
// "0..n", "1..1", "3..*". Throws SchemaError.
Multiplicity parse_multiplicity(const std::string& text);

struct TypeRef {
    std::string model;
    Element element;
    friend bool operator==(const TypeRef&, const TypeRef&) = default;
};

struct ElementInfo {
    std::optional<TypeRef> type;
    Potency potency;
    Multiplicity multiplicity;         // arrows only
    std::vector<std::string> supertypes; // nodes only, same model
    friend bool operator==(const ElementInfo&, const ElementInfo&) = default;
};

struct Model {
    std::string name;
    std::optional<std::string> parent;
    Graph graph;
    std::map<Element, ElementInfo> info;
    int level = 0;

    const ElementInfo& at(const Element& e) const;
    friend bool operator==(const Model&, const Model&) = default;
};

// A tree of models with a single root. Models are kept in insertion order,
// parents before children.
class Hierarchy {
public:
    Hierarchy() = default;

    // Computes levels from the tree shape. Throws SchemaError for unknown
    // parents or type references, several roots, or cycles.
    static Hierarchy from_models(std::vector<Model> models);

    const std::vector<Model>& models() const { return models_; }
    const Model& root() const { return models_.front(); }
    const Model& model(const std::string& name) const;
    const Model* find(const std::string& name) const;
    // Accepts a plain name or a dotted root-to-model path.
    const Model& resolve(const std::string& path) const;

    // Root first, `name` last.
    std::vector<const Model*> branch(const std::string& name) const;
    std::vector<const Model*> children(const std::string& name) const;
    std::string path_of(const std::string& name) const;

    // Copy with one model replaced (same name, same parent).
    Hierarchy with_model(Model m) const;

    friend bool operator==(const Hierarchy&, const Hierarchy&) = default;

private:
    std::vector<Model> models_;
    std::map<std::string, std::size_t> index_;
};

// Root model with node Node and loop arrow Arrow, both typed by themselves.
Model canonical_root(const std::string& name = "root");

// Chain of types starting at the direct type and ending in the root.
// Each entry is (level, element).
std::vector<std::pair<int, Element>> transitive_types(const Hierarchy& h, const Model& m, const Element& e);
std::optional<Element> type_at_level(const Hierarchy& h, const Model& m, const Element& e, int level);

enum class Rule {
    RootNotSelfDefining,
    MissingType,
    TypeNotInBranch,
    KindMismatch,
    DanglingTyping,
    PotencyViolation,
    MultiplicityOnNode,
    InheritanceCycle,
    InheritanceMismatch,
};

std::string_view to_string(Rule r);

struct Violation {
    std::string model;
    std::string element;
    Rule rule;
    std::string message;
};

std::vector<Violation> validate_hierarchy(const Hierarchy& h);

struct DerivedTyping {
    GraphChain chain;        // root .. model
    MultilevelTyping typing; // the model over root .. parent
};

// Throws ValidationFailed when the branch does not validate.
DerivedTyping derive_typing_chain(const Hierarchy& h, const std::string& model);

// Replicates supertypes' type, potency and incident arrows into each child and
// drops inheritance edges. Throws InheritanceCycle.
Hierarchy flatten_inheritance(const Hierarchy& h);

// Throws ParseError (with line/column) or SchemaError.
Hierarchy parse_hierarchy(const std::string& text);
Hierarchy load_hierarchy(const std::string& path);
std::string dump_hierarchy(const Hierarchy& h);
void save_hierarchy(const Hierarchy& h, const std::string& path);

// "Model.Element" for nodes, "Model.label" for arrows; the four-part form
// "Model.source.label.target" when the label alone is ambiguous.
std::string type_name(const Hierarchy& h, const TypeRef& ref);

} // namespace mlm
