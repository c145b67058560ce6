#include "mlm/graph.hpp"

#include <algorithm>
#include <ostream>

#include "mlm/error.hpp"

namespace mlm {

std::string to_string(const Arrow& a) { return "(" + a.source + "," + a.label + "," + a.target + ")"; }

std::ostream& operator<<(std::ostream& os, const Arrow& a) { return os << to_string(a); }

std::string to_string(const Element& e) { return is_node(e) ? as_node(e) : to_string(as_arrow(e)); }

Graph Graph::build(std::string name, const std::vector<std::string>& nodes,
                   const std::vector<Arrow>& arrows) {
    Graph g(std::move(name));
    for (const auto& n : nodes) g.add_node(n);
    for (const auto& a : arrows) g.add_arrow(a);
    return g;
}

std::vector<Element> Graph::elements() const {
    std::vector<Element> out(nodes_.begin(), nodes_.end());
    out.insert(out.end(), arrows_.begin(), arrows_.end());
    return out;
}

bool Graph::contains(const Element& e) const {
    return is_node(e) ? has_node(as_node(e)) : has_arrow(as_arrow(e));
}

void Graph::add_node(const std::string& n) {
    if (!node_set_.insert(n).second)
        throw Error(ErrorKind::DuplicateNode, "duplicate node '" + n + "' in graph '" + name_ + "'");
    nodes_.push_back(n);
}

void Graph::add_arrow(const Arrow& a) {
    if (!has_node(a.source) || !has_node(a.target))
        throw Error(ErrorKind::DanglingArrow,
                    "arrow " + to_string(a) + " has an undeclared endpoint in graph '" + name_ + "'");
    if (!arrow_set_.insert(a).second)
        throw Error(ErrorKind::DuplicateArrow, "duplicate arrow " + to_string(a) + " in graph '" + name_ + "'");
    arrows_.push_back(a);
}

void Graph::add(const Element& e) {
    if (is_node(e))
        add_node(as_node(e));
    else
        add_arrow(as_arrow(e));
}

std::vector<Arrow> Graph::outgoing(const std::string& n) const {
    std::vector<Arrow> out;
    for (const auto& a : arrows_)
        if (a.source == n) out.push_back(a);
    return out;
}

std::vector<Arrow> Graph::incoming(const std::string& n) const {
    std::vector<Arrow> out;
    for (const auto& a : arrows_)
        if (a.target == n) out.push_back(a);
    return out;
}

bool Graph::same_elements(const Graph& other) const {
    return node_set_ == other.node_set_ && arrow_set_ == other.arrow_set_;
}

bool is_subgraph(const Graph& sub, const Graph& host) {
    for (const auto& n : sub.nodes())
        if (!host.has_node(n)) return false;
    for (const auto& a : sub.arrows())
        if (!host.has_arrow(a)) return false;
    return true;
}

Graph restrict_graph(const Graph& host, const std::function<bool(const Element&)>& keep, std::string name) {
    Graph g(name.empty() ? host.name() : std::move(name));
    for (const auto& n : host.nodes())
        if (keep(n)) g.add_node(n);
    for (const auto& a : host.arrows())
        if (g.has_node(a.source) && g.has_node(a.target) && keep(a)) g.add_arrow(a);
    return g;
}

Graph intersect(const Graph& a, const Graph& b, std::string name) {
    return restrict_graph(a, [&](const Element& e) { return b.contains(e); }, std::move(name));
}

std::optional<Element> Morphism::image(const Element& e) const {
    if (is_node(e)) {
        auto it = nodes.find(as_node(e));
        if (it == nodes.end()) return std::nullopt;
        return Element{it->second};
    }
    auto it = arrows.find(as_arrow(e));
    if (it == arrows.end()) return std::nullopt;
    return Element{it->second};
}

const std::string& Morphism::node(const std::string& n) const {
    auto it = nodes.find(n);
    if (it == nodes.end()) throw Error(ErrorKind::NotFound, "node '" + n + "' not in morphism domain");
    return it->second;
}

const Arrow& Morphism::arrow(const Arrow& a) const {
    auto it = arrows.find(a);
    if (it == arrows.end()) throw Error(ErrorKind::NotFound, "arrow " + to_string(a) + " not in morphism domain");
    return it->second;
}

std::optional<std::string> Morphism::defect() const {
    if (nodes.size() != from.node_count() || arrows.size() != from.arrow_count())
        return "maps are not total on '" + from.name() + "' or mention foreign elements";
    for (const auto& n : from.nodes()) {
        auto it = nodes.find(n);
        if (it == nodes.end()) return "node '" + n + "' is unmapped";
        if (!to.has_node(it->second)) return "node '" + n + "' maps outside '" + to.name() + "'";
    }
    for (const auto& a : from.arrows()) {
        auto it = arrows.find(a);
        if (it == arrows.end()) return "arrow " + to_string(a) + " is unmapped";
        const Arrow& b = it->second;
        if (!to.has_arrow(b)) return "arrow " + to_string(a) + " maps outside '" + to.name() + "'";
        if (nodes.at(a.source) != b.source || nodes.at(a.target) != b.target)
            return "arrow " + to_string(a) + " is mapped incompatibly with its endpoints";
    }
    return std::nullopt;
}

bool Morphism::is_injective() const {
    std::set<std::string> ns;
    for (const auto& [k, v] : nodes)
        if (!ns.insert(v).second) return false;
    std::set<Arrow> as;
    for (const auto& [k, v] : arrows)
        if (!as.insert(v).second) return false;
    return true;
}

bool Morphism::is_inclusion() const {
    if (!is_subgraph(from, to)) return false;
    for (const auto& [k, v] : nodes)
        if (k != v) return false;
    for (const auto& [k, v] : arrows)
        if (k != v) return false;
    return nodes.size() == from.node_count() && arrows.size() == from.arrow_count();
}

Morphism make_morphism(Graph from, Graph to, std::map<std::string, std::string> nodes,
                       std::map<Arrow, Arrow> arrows) {
    Morphism m{std::move(from), std::move(to), std::move(nodes), std::move(arrows)};
    if (auto d = m.defect()) throw Error(ErrorKind::InvalidMorphism, *d);
    return m;
}

Morphism identity(const Graph& g) { return inclusion(g, g); }

Morphism inclusion(const Graph& sub, const Graph& host) {
    if (!is_subgraph(sub, host))
        throw Error(ErrorKind::NotSubgraph, "'" + sub.name() + "' is not a subgraph of '" + host.name() + "'");
    Morphism m{sub, host, {}, {}};
    for (const auto& n : sub.nodes()) m.nodes.emplace(n, n);
    for (const auto& a : sub.arrows()) m.arrows.emplace(a, a);
    return m;
}

Morphism compose(const Morphism& f, const Morphism& g) {
    if (!f.to.same_elements(g.from))
        throw Error(ErrorKind::GraphMismatch,
                    "cannot compose: '" + f.to.name() + "' differs from '" + g.from.name() + "'");
    Morphism r{f.from, g.to, {}, {}};
    for (const auto& [k, v] : f.nodes) r.nodes.emplace(k, g.node(v));
    for (const auto& [k, v] : f.arrows) r.arrows.emplace(k, g.arrow(v));
    return r;
}

bool same_morphism(const Morphism& f, const Morphism& g) {
    return f.from.same_elements(g.from) && f.to.same_elements(g.to) && f.nodes == g.nodes &&
           f.arrows == g.arrows;
}

Graph preimage(const Morphism& f, const Graph& sub) {
    return restrict_graph(f.from, [&](const Element& e) {
        auto img = f.image(e);
        return img && sub.contains(*img);
    });
}

PartialMorphism make_partial(Graph from, Morphism total) {
    if (!is_subgraph(total.from, from))
        throw Error(ErrorKind::NotSubgraph, "domain of definition is not a subgraph of '" + from.name() + "'");
    if (auto d = total.defect()) throw Error(ErrorKind::InvalidMorphism, *d);
    return PartialMorphism{std::move(from), std::move(total)};
}

PartialMorphism to_partial(const Morphism& total) { return PartialMorphism{total.from, total}; }

PartialMorphism empty_partial(const Graph& from, const Graph& to) {
    return PartialMorphism{from, Morphism{Graph(from.name()), to, {}, {}}};
}

PartialMorphism compose_partial(const PartialMorphism& g, const PartialMorphism& h) {
    if (!g.to().same_elements(h.from))
        throw Error(ErrorKind::GraphMismatch,
                    "cannot compose partial morphisms: '" + g.to().name() + "' differs from '" + h.from.name() + "'");
    Graph dom = preimage(g.total, h.domain());
    Morphism t{dom, h.to(), {}, {}};
    for (const auto& n : dom.nodes()) t.nodes.emplace(n, h.total.node(g.total.node(n)));
    for (const auto& a : dom.arrows()) t.arrows.emplace(a, h.total.arrow(g.total.arrow(a)));
    return PartialMorphism{g.from, std::move(t)};
}

bool precedes(const PartialMorphism& f, const PartialMorphism& g) {
    for (const auto& [k, v] : f.total.nodes) {
        auto it = g.total.nodes.find(k);
        if (it == g.total.nodes.end() || it->second != v) return false;
    }
    for (const auto& [k, v] : f.total.arrows) {
        auto it = g.total.arrows.find(k);
        if (it == g.total.arrows.end() || it->second != v) return false;
    }
    return true;
}

bool same_partial(const PartialMorphism& f, const PartialMorphism& g) {
    return f.from.same_elements(g.from) && same_morphism(f.total, g.total);
}

namespace {

void require_inclusion(const Morphism& l, const char* what) {
    if (!l.is_inclusion())
        throw Error(ErrorKind::NotInclusion, std::string(what) + " must be an inclusion of '" + l.from.name() +
                                                 "' into '" + l.to.name() + "'");
}

std::string fresh(const std::string& base, const std::function<bool(const std::string&)>& taken) {
    for (std::size_t k = 0;; ++k) {
        std::string candidate = base + "$" + std::to_string(k);
        if (!taken(candidate)) return candidate;
    }
}

} // namespace

PushoutResult pushout(const Morphism& l, const Morphism& m) {
    require_inclusion(l, "l");
    if (!m.from.same_elements(l.from))
        throw Error(ErrorKind::GraphMismatch, "pushout span has different sources");
    if (auto d = m.defect()) throw Error(ErrorKind::InvalidMorphism, *d);

    const Graph& I = l.to;
    PushoutResult r{m.to, {}, Morphism{I, {}, {}, {}}};
    Graph& D = r.object;
    for (const auto& n : I.nodes()) {
        if (l.from.has_node(n)) {
            r.d.nodes.emplace(n, m.node(n));
            continue;
        }
        std::string copy = fresh(n, [&](const std::string& c) { return D.has_node(c); });
        D.add_node(copy);
        r.d.nodes.emplace(n, copy);
    }
    for (const auto& a : I.arrows()) {
        if (l.from.has_arrow(a)) {
            r.d.arrows.emplace(a, m.arrow(a));
            continue;
        }
        const std::string& s = r.d.nodes.at(a.source);
        const std::string& t = r.d.nodes.at(a.target);
        std::string label = fresh(a.label, [&](const std::string& c) { return D.has_arrow(Arrow{s, c, t}); });
        Arrow copy{s, label, t};
        D.add_arrow(copy);
        r.d.arrows.emplace(a, copy);
    }
    r.s = inclusion(m.to, D);
    r.d.to = D;
    return r;
}

PullbackComplementResult pullback_complement(const Morphism& r, const Morphism& d) {
    require_inclusion(r, "r");
    if (!d.from.same_elements(r.to))
        throw Error(ErrorKind::GraphMismatch, "pullback complement: d does not start at the codomain of r");
    if (auto defect = d.defect()) throw Error(ErrorKind::InvalidMorphism, *defect);

    const Graph& I = r.to;
    const Graph& D = d.to;
    std::set<std::string> gone_nodes;
    std::set<Arrow> gone_arrows;
    for (const auto& n : I.nodes())
        if (!r.from.has_node(n)) gone_nodes.insert(d.node(n));
    for (const auto& a : I.arrows())
        if (!r.from.has_arrow(a)) gone_arrows.insert(d.arrow(a));

    for (const auto& n : r.from.nodes())
        if (gone_nodes.count(d.node(n)))
            throw Error(ErrorKind::IdentificationConflict,
                        "node '" + d.node(n) + "' is both kept and deleted by the match");
    for (const auto& a : r.from.arrows())
        if (gone_arrows.count(d.arrow(a)))
            throw Error(ErrorKind::IdentificationConflict,
                        "arrow " + to_string(d.arrow(a)) + " is both kept and deleted by the match");
    for (const auto& a : D.arrows()) {
        if (gone_arrows.count(a)) continue;
        if (gone_nodes.count(a.source) || gone_nodes.count(a.target))
            throw Error(ErrorKind::DanglingDeletion,
                        "deleting a node would leave arrow " + to_string(a) + " dangling");
    }

    PullbackComplementResult out;
    out.object = restrict_graph(D, [&](const Element& e) {
        return is_node(e) ? gone_nodes.count(as_node(e)) == 0 : gone_arrows.count(as_arrow(e)) == 0;
    });
    out.t_in = Morphism{r.from, out.object, {}, {}};
    for (const auto& n : r.from.nodes()) out.t_in.nodes.emplace(n, d.node(n));
    for (const auto& a : r.from.arrows()) out.t_in.arrows.emplace(a, d.arrow(a));
    out.t_sub = inclusion(out.object, D);
    return out;
}

namespace {

struct HomSearch {
    const Graph& pattern;
    const Graph& target;
    bool injective;
    const MatchFilter& filter;
    const std::function<bool(const Morphism&)>& visit;

    std::vector<std::string> order;
    std::vector<std::vector<std::string>> candidates;
    std::map<std::pair<std::string, std::string>, std::vector<Arrow>> between;
    Morphism current;
    std::set<std::string> used_nodes;
    std::set<Arrow> used_arrows;
    bool stopped = false;

    HomSearch(const Graph& p, const Graph& t, bool inj, const MatchFilter& f,
              const std::function<bool(const Morphism&)>& v)
        : pattern(p), target(t), injective(inj), filter(f), visit(v), current{p, t, {}, {}} {
        for (const auto& a : target.arrows()) between[{a.source, a.target}].push_back(a);
        plan();
    }

    bool arrow_ok(const Arrow& p, const Arrow& t) const { return !filter.arrow || filter.arrow(p, t); }

    // Connected nodes first so that arrow constraints prune early.
    void plan() {
        std::vector<std::string> rest = pattern.nodes();
        std::set<std::string> chosen;
        while (!rest.empty()) {
            std::size_t best = 0;
            int best_links = -1;
            for (std::size_t i = 0; i < rest.size(); ++i) {
                int links = 0;
                for (const auto& a : pattern.arrows())
                    if ((a.source == rest[i] && chosen.count(a.target)) || (a.target == rest[i] && chosen.count(a.source)))
                        ++links;
                if (links > best_links) best = i, best_links = links;
            }
            chosen.insert(rest[best]);
            order.push_back(rest[best]);
            rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(best));
        }
        for (const auto& p : order) {
            std::vector<std::string> c;
            for (const auto& t : target.nodes())
                if (!filter.node || filter.node(p, t)) c.push_back(t);
            candidates.push_back(std::move(c));
        }
    }

    bool arrows_feasible(const std::string& p) const {
        for (const auto& a : pattern.arrows()) {
            if (a.source != p && a.target != p) continue;
            auto s = current.nodes.find(a.source);
            auto t = current.nodes.find(a.target);
            if (s == current.nodes.end() || t == current.nodes.end()) continue;
            auto it = between.find({s->second, t->second});
            if (it == between.end()) return false;
            bool any = std::any_of(it->second.begin(), it->second.end(),
                                   [&](const Arrow& b) { return arrow_ok(a, b); });
            if (!any) return false;
        }
        return true;
    }

    void nodes_from(std::size_t i) {
        if (stopped) return;
        if (i == order.size()) {
            arrows_from(0);
            return;
        }
        const std::string& p = order[i];
        for (const auto& t : candidates[i]) {
            if (injective && used_nodes.count(t)) continue;
            current.nodes[p] = t;
            if (arrows_feasible(p)) {
                used_nodes.insert(t);
                nodes_from(i + 1);
                used_nodes.erase(t);
            }
            current.nodes.erase(p);
            if (stopped) return;
        }
    }

    void arrows_from(std::size_t i) {
        if (stopped) return;
        const auto& arrows = pattern.arrows();
        if (i == arrows.size()) {
            if (!visit(current)) stopped = true;
            return;
        }
        const Arrow& a = arrows[i];
        auto it = between.find({current.nodes.at(a.source), current.nodes.at(a.target)});
        if (it == between.end()) return;
        for (const auto& b : it->second) {
            if (injective && used_arrows.count(b)) continue;
            if (!arrow_ok(a, b)) continue;
            current.arrows[a] = b;
            used_arrows.insert(b);
            arrows_from(i + 1);
            used_arrows.erase(b);
            current.arrows.erase(a);
            if (stopped) return;
        }
    }
};

} // namespace

void for_each_homomorphism(const Graph& pattern, const Graph& target, bool injective, const MatchFilter& filter,
                           const std::function<bool(const Morphism&)>& visit) {
    HomSearch search(pattern, target, injective, filter, visit);
    search.nodes_from(0);
}

std::vector<Morphism> find_homomorphisms(const Graph& pattern, const Graph& target, bool injective,
                                         const MatchFilter& filter) {
    std::vector<Morphism> out;
    for_each_homomorphism(pattern, target, injective, filter, [&](const Morphism& m) {
        out.push_back(m);
        return true;
    });
    return out;
}

} // namespace mlm
