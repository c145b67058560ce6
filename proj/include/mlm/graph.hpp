#pragma once

#include <compare>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace mlm {

// An arrow is identified by its full triple; two arrows may share a label as
// long as their endpoints differ.
struct Arrow {
    std::string source;
    std::string label;
    std::string target;

    friend auto operator<=>(const Arrow&, const Arrow&) = default;
    friend bool operator==(const Arrow&, const Arrow&) = default;
};

// A graph element: a node name or an arrow triple.
using Element = std::variant<std::string, Arrow>;

inline bool is_node(const Element& e) { return e.index() == 0; }
inline bool is_arrow(const Element& e) { return e.index() == 1; }
inline const std::string& as_node(const Element& e) { return std::get<std::string>(e); }
inline const Arrow& as_arrow(const Element& e) { return std::get<Arrow>(e); }

std::string to_string(const Arrow& a);
std::ostream& operator<<(std::ostream& os, const Arrow& a);
std::string to_string(const Element& e);

class Graph {
public:
    Graph() = default;
    explicit Graph(std::string name) : name_(std::move(name)) {}

    // Throws DuplicateNode, DuplicateArrow or DanglingArrow.
    static Graph build(std::string name, const std::vector<std::string>& nodes,
                       const std::vector<Arrow>& arrows);

    const std::string& name() const { return name_; }
    void rename(std::string name) { name_ = std::move(name); }

    const std::vector<std::string>& nodes() const { return nodes_; }
    const std::vector<Arrow>& arrows() const { return arrows_; }
    std::vector<Element> elements() const;

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t arrow_count() const { return arrows_.size(); }
    bool empty() const { return nodes_.empty() && arrows_.empty(); }

    bool has_node(const std::string& n) const { return node_set_.count(n) != 0; }
    bool has_arrow(const Arrow& a) const { return arrow_set_.count(a) != 0; }
    bool contains(const Element& e) const;

    void add_node(const std::string& n);
    void add_arrow(const Arrow& a);
    void add(const Element& e);

    std::vector<Arrow> outgoing(const std::string& n) const;
    std::vector<Arrow> incoming(const std::string& n) const;

    // Element-set equality, ignoring the name and insertion order.
    bool same_elements(const Graph& other) const;

    friend bool operator==(const Graph& a, const Graph& b) {
        return a.name_ == b.name_ && a.same_elements(b);
    }

private:
    std::string name_;
    std::vector<std::string> nodes_;
    std::vector<Arrow> arrows_;
    std::set<std::string> node_set_;
    std::set<Arrow> arrow_set_;
};

bool is_subgraph(const Graph& sub, const Graph& host);

// Subgraph of `host` made of the elements accepted by `keep`; arrows whose
// endpoints are dropped are dropped too.
Graph restrict_graph(const Graph& host, const std::function<bool(const Element&)>& keep,
                     std::string name = {});
Graph intersect(const Graph& a, const Graph& b, std::string name = {});

struct Morphism {
    Graph from;
    Graph to;
    std::map<std::string, std::string> nodes;
    std::map<Arrow, Arrow> arrows;

    std::optional<Element> image(const Element& e) const;
    const std::string& node(const std::string& n) const;
    const Arrow& arrow(const Arrow& a) const;

    // Empty when the morphism is total on `from` and structure preserving;
    // otherwise a description of the first defect.
    std::optional<std::string> defect() const;
    bool is_injective() const;
    bool is_inclusion() const;
};

// Throws InvalidMorphism when the maps are not a total homomorphism.
Morphism make_morphism(Graph from, Graph to, std::map<std::string, std::string> nodes,
                       std::map<Arrow, Arrow> arrows);
Morphism identity(const Graph& g);
// Throws NotSubgraph.
Morphism inclusion(const Graph& sub, const Graph& host);

// Diagrammatic order: compose(f, g) = f;g, first f then g.
Morphism compose(const Morphism& f, const Morphism& g);

// Same graphs (by elements) and the same maps.
bool same_morphism(const Morphism& f, const Morphism& g);

// Preimage of a subgraph of f.to; always a subgraph of f.from.
Graph preimage(const Morphism& f, const Graph& sub);

// τ: from ⇀ to, given by a total morphism out of its domain of definition.
struct PartialMorphism {
    Graph from;
    Morphism total;

    const Graph& to() const { return total.to; }
    const Graph& domain() const { return total.from; }
    bool is_total() const { return total.from.same_elements(from); }
    bool defined(const Element& e) const { return total.from.contains(e); }
    std::optional<Element> image(const Element& e) const { return total.image(e); }
};

PartialMorphism make_partial(Graph from, Morphism total);
PartialMorphism to_partial(const Morphism& total);
PartialMorphism empty_partial(const Graph& from, const Graph& to);

// g;h with domain g⁻¹(D(h)). Throws GraphMismatch when g.to differs from h.from.
PartialMorphism compose_partial(const PartialMorphism& g, const PartialMorphism& h);

// f ⪯ g: D(f) ⊆ D(g) and both agree on D(f).
bool precedes(const PartialMorphism& f, const PartialMorphism& g);
bool same_partial(const PartialMorphism& f, const PartialMorphism& g);

struct PushoutResult {
    Graph object;
    Morphism s; // S ↪ D
    Morphism d; // I → D
};

// Pushout of an inclusion l: L ↪ I along m: L → S. Copies of I∖L are named
// `<name>$k` with the smallest k that avoids a collision in D.
PushoutResult pushout(const Morphism& l, const Morphism& m);

struct PullbackComplementResult {
    Graph object;
    Morphism t_in;  // R → T
    Morphism t_sub; // T ↪ D
};

// Removes d(I∖R) from D. Throws DanglingDeletion when a surviving arrow would
// lose an endpoint, IdentificationConflict when d glues a kept and a deleted
// element together.
PullbackComplementResult pullback_complement(const Morphism& r, const Morphism& d);

struct MatchFilter {
    std::function<bool(const std::string& pattern, const std::string& target)> node;
    std::function<bool(const Arrow& pattern, const Arrow& target)> arrow;
};

// Calls `visit` for every homomorphism pattern → target accepted by the
// filter; stop early by returning false.
void for_each_homomorphism(const Graph& pattern, const Graph& target, bool injective,
                           const MatchFilter& filter,
                           const std::function<bool(const Morphism&)>& visit);

std::vector<Morphism> find_homomorphisms(const Graph& pattern, const Graph& target,
                                         bool injective, const MatchFilter& filter = {});

} // namespace mlm
