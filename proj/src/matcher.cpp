#include "mlm/matcher.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "mlm/error.hpp"

namespace mlm {

Stack::Stack(const Hierarchy& h, const std::string& target) {
    auto branch = h.branch(h.resolve(target).name);
    if (branch.size() < 2) throw Error(ErrorKind::DepthMismatch, "the root model has no stack above it");
    for (std::size_t i = 0; i + 1 < branch.size(); ++i) models_.push_back(*branch[i]);
    target_ = *branch.back();
    for (const Model* m : branch) {
        std::map<Element, std::vector<std::pair<int, Element>>> types;
        for (const auto& e : m->graph.elements()) types.emplace(e, transitive_types(h, *m, e));
        types_.push_back(std::move(types));
    }
}

std::optional<Element> Stack::type_at(int level, const Element& e, int at_level) const {
    const auto& table = types_.at(static_cast<std::size_t>(level));
    auto it = table.find(e);
    if (it == table.end()) return std::nullopt;
    if (level == 0) return at_level == 0 && !it->second.empty() ? std::optional<Element>(it->second.front().second)
                                                                 : std::nullopt;
    for (const auto& [l, t] : it->second)
        if (l == at_level) return t;
    return std::nullopt;
}

GraphChain Stack::chain() const {
    std::vector<Graph> graphs;
    for (const auto& m : models_) graphs.push_back(m.graph);
    TypingFamily typings;
    for (int j = 1; j <= depth(); ++j)
        for (int i = 0; i < j; ++i) {
            const Graph& gj = graphs[static_cast<std::size_t>(j)];
            Morphism t{Graph(gj.name()), graphs[static_cast<std::size_t>(i)], {}, {}};
            for (const auto& n : gj.nodes())
                if (auto ty = type_at(j, Element{n}, i)) {
                    t.from.add_node(n);
                    t.nodes.emplace(n, as_node(*ty));
                }
            for (const auto& a : gj.arrows())
                if (auto ty = type_at(j, Element{a}, i)) {
                    t.from.add_arrow(a);
                    t.arrows.emplace(a, as_arrow(*ty));
                }
            typings.emplace(std::make_pair(j, i), make_partial(gj, std::move(t)));
        }
    return GraphChain::build(graphs, typings);
}

namespace {

std::string element_key(const Element& e) { return is_node(e) ? as_node(e) : as_arrow(e).label; }

Binding root_binding(const Graph& root) {
    Binding b;
    for (const auto& e : root.elements()) b.emplace(element_key(e), e);
    return b;
}

} // namespace

std::vector<Binding> graph_match(const McmtRule& rule, int k, const Stack& stack, int t, const MetaMatch& partial) {
    const Graph& root = stack.model(0).graph;
    const Model& target = stack.model(t);
    Graph pattern = rule.meta_graph(k);

    // Types of each pattern element at the upper META levels.
    std::map<Element, std::vector<std::pair<int, Element>>> pattern_types;
    for (const auto& m : rule.meta)
        if (m.level == k) pattern_types.emplace(rule.meta_element(m), rule.type_chain(m.arrow, m.type, m.type_level, root));

    auto unary = [&](const Element& x, const Element& y) {
        const MetaElement& m = rule.meta_at(k, element_key(x));
        if (m.constant && element_key(x) != element_key(y)) return false;
        const auto& xt = pattern_types.at(x);
        for (int i = 0; i < k; ++i) {
            std::optional<Element> mt;
            for (const auto& [l, e] : xt)
                if (l == i) mt = e;
            const int fi = partial.level_map.at(static_cast<std::size_t>(i));
            std::optional<Element> yt = stack.type_at(t, y, fi);
            if (mt.has_value() != yt.has_value()) return false;
            if (!mt) continue;
            if (i == 0) {
                if (*mt != *yt) return false;
                continue;
            }
            const Binding& b = partial.bindings.at(static_cast<std::size_t>(i));
            auto it = b.find(element_key(*mt));
            if (it == b.end() || it->second != *yt) return false;
        }
        const ElementInfo& info = target.at(y);
        if (m.potency && !info.potency.contains(*m.potency)) return false;
        if (m.multiplicity && !info.multiplicity.contains(*m.multiplicity)) return false;
        return true;
    };

    // Candidate refinement: a node stays a candidate only while every
    // incident pattern arrow still has a compatible image.
    std::map<std::string, std::set<std::string>> cand;
    for (const auto& p : pattern.nodes()) {
        auto& c = cand[p];
        for (const auto& n : target.graph.nodes())
            if (unary(Element{p}, Element{n})) c.insert(n);
    }
    std::map<Arrow, std::vector<Arrow>> arrow_cand;
    for (const auto& a : pattern.arrows())
        for (const auto& b : target.graph.arrows())
            if (unary(Element{a}, Element{b})) arrow_cand[a].push_back(b);
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto& [p, c] : cand)
            for (auto it = c.begin(); it != c.end();) {
                bool ok = true;
                for (const auto& a : pattern.arrows()) {
                    if (a.source != p && a.target != p) continue;
                    bool any = false;
                    for (const auto& b : arrow_cand[a]) {
                        if (a.source == p && b.source != *it) continue;
                        if (a.target == p && b.target != *it) continue;
                        if (cand[a.source].count(b.source) && cand[a.target].count(b.target)) {
                            any = true;
                            break;
                        }
                    }
                    if (!any) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    ++it;
                } else {
                    it = c.erase(it);
                    changed = true;
                }
            }
    }

    MatchFilter filter;
    filter.node = [&](const std::string& p, const std::string& n) { return cand[p].count(n) != 0; };
    filter.arrow = [&](const Arrow& a, const Arrow& b) {
        const auto& c = arrow_cand[a];
        return std::find(c.begin(), c.end(), b) != c.end();
    };
    std::vector<Binding> out;
    for_each_homomorphism(pattern, target.graph, true, filter, [&](const Morphism& m) {
        Binding b;
        for (const auto& [p, n] : m.nodes) b.emplace(p, n);
        for (const auto& [a, x] : m.arrows) b.emplace(a.label, x);
        out.push_back(std::move(b));
        return true;
    });
    return out;
}

namespace {

bool match_from(const McmtRule& rule, const Stack& stack, int k, int t, const MetaMatch& current,
                std::vector<MetaMatch>& out) {
    if (k > rule.depth) {
        out.push_back(current);
        return true;
    }
    bool found = false;
    for (; t <= stack.depth(); ++t) {
        for (auto& b : graph_match(rule, k, stack, t, current)) {
            MetaMatch next = current;
            next.level_map.push_back(t);
            next.bindings.push_back(std::move(b));
            found = match_from(rule, stack, k + 1, t + 1, next, out) || found;
        }
    }
    return found;
}

} // namespace

bool match(const McmtRule& rule, const Stack& stack, std::vector<MetaMatch>& matches) {
    MetaMatch start;
    start.level_map.push_back(0);
    start.bindings.push_back(root_binding(stack.model(0).graph));
    return match_from(rule, stack, 1, 1, start, matches);
}

std::vector<MetaMatch> match_all(const McmtRule& rule, const Stack& stack) {
    std::vector<MetaMatch> out;
    match(rule, stack, out);
    return out;
}

ChainMorphism to_chain_morphism(const McmtRule& rule, const Graph& root, const Stack& stack, const MetaMatch& mm) {
    ChainMorphism cm{rule.meta_chain(root), stack.chain(), mm.level_map, {}};
    for (int k = 0; k <= rule.depth; ++k) {
        const Graph& from = cm.from.graph(k);
        const Graph& to = cm.to.graph(mm.level_map.at(static_cast<std::size_t>(k)));
        Morphism m{from, to, {}, {}};
        const Binding& b = mm.bindings.at(static_cast<std::size_t>(k));
        for (const auto& n : from.nodes())
            if (auto it = b.find(n); it != b.end() && is_node(it->second)) m.nodes.emplace(n, as_node(it->second));
        for (const auto& a : from.arrows())
            if (auto it = b.find(a.label); it != b.end() && is_arrow(it->second)) m.arrows.emplace(a, as_arrow(it->second));
        cm.components.push_back(std::move(m));
    }
    return cm;
}

std::vector<McmtRule> expand_cardinalities(const McmtRule& rule, const MetaMatch& mm, const Stack& stack) {
    struct Bounded {
        const MetaElement* meta;
        unsigned lower;
        unsigned upper;
    };
    std::vector<Bounded> bounded;
    for (const auto& m : rule.meta) {
        if (!m.arrow || m.level < 1) continue;
        bool used = false;
        for (const auto* block : {&rule.from, &rule.to})
            for (const auto& p : *block)
                if (p.arrow && p.type == m.name && p.type_level == m.level) used = true;
        if (!used) continue;
        const int level = mm.level_map.at(static_cast<std::size_t>(m.level));
        const Element& y = mm.bindings.at(static_cast<std::size_t>(m.level)).at(m.name);
        const Multiplicity& mu = stack.model(level).at(y).multiplicity;
        if (mu.upper) bounded.push_back({&m, mu.lower, *mu.upper});
    }
    if (bounded.empty()) return {rule};

    std::vector<McmtRule> out;
    std::vector<unsigned> values;
    for (const auto& b : bounded) values.push_back(b.lower);
    while (true) {
        McmtRule r = rule;
        for (std::size_t i = 0; i < bounded.size(); ++i) {
            const MetaElement& m = *bounded[i].meta;
            const unsigned v = values[i];
            std::vector<std::string> ends;
            for (const auto* block : {&r.from, &r.to})
                for (const auto& p : *block)
                    if (p.arrow && p.type == m.name && p.type_level == m.level &&
                        std::find(ends.begin(), ends.end(), p.target) == ends.end())
                        ends.push_back(p.target);
            for (const auto& n : ends) {
                for (auto* block : {&r.from, &r.to}) {
                    std::vector<PatternElement> next;
                    std::vector<PatternElement> copies;
                    for (const auto& p : *block) {
                        const bool touches = p.name == n || (p.arrow && (p.source == n || p.target == n));
                        if (!touches) {
                            next.push_back(p);
                            continue;
                        }
                        if (v >= 1) next.push_back(p);
                        for (unsigned c = 1; c < v; ++c) {
                            PatternElement q = p;
                            const std::string copy = n + "$" + std::to_string(c);
                            if (!q.arrow) q.name = copy;
                            if (q.arrow && q.source == n) q.source = copy;
                            if (q.arrow && q.target == n) q.target = copy;
                            copies.push_back(std::move(q));
                        }
                    }
                    next.insert(next.end(), copies.begin(), copies.end());
                    std::stable_partition(next.begin(), next.end(), [](const PatternElement& p) { return !p.arrow; });
                    *block = std::move(next);
                }
            }
        }
        out.push_back(std::move(r));
        std::size_t i = 0;
        while (i < bounded.size() && values[i] == bounded[i].upper) {
            values[i] = bounded[i].lower;
            ++i;
        }
        if (i == bounded.size()) break;
        ++values[i];
    }
    return out;
}

std::vector<TwoLevelRule> proliferate(const McmtRule& rule, const Hierarchy& h, const std::string& target,
                                      ProliferationReport* report) {
    Stack stack(h, target);
    std::vector<MetaMatch> matches = match_all(rule, stack);
    std::vector<TwoLevelRule> out;
    for (std::size_t i = 0; i < matches.size(); ++i) {
        const MetaMatch& mm = matches[i];
        std::vector<McmtRule> expansions = expand_cardinalities(rule, mm, stack);
        for (std::size_t j = 0; j < expansions.size(); ++j) {
            TwoLevelRule t;
            t.source_rule = rule.name;
            t.match_index = i;
            t.expansion_index = j;
            t.name = rule.name + "_" + std::to_string(i + 1);
            if (expansions.size() > 1) t.name += "_" + std::to_string(j + 1);
            t.match = mm;
            t.expanded = expansions[j];
            t.lhs = t.expanded.lhs();
            t.interface = t.expanded.interface();
            t.rhs = t.expanded.rhs();
            for (const auto& e : t.interface.elements()) {
                const PatternElement& p = t.expanded.pattern(e);
                if (p.type_level == 0) {
                    auto types = t.expanded.type_chain(p.arrow, p.type, 0, stack.model(0).graph);
                    t.types.emplace(e, TypeRef{stack.model(0).name, types.front().second});
                    t.type_levels.emplace(e, 0);
                } else {
                    const int level = mm.level_map.at(static_cast<std::size_t>(p.type_level));
                    t.types.emplace(e, TypeRef{stack.model(level).name,
                                               mm.bindings.at(static_cast<std::size_t>(p.type_level)).at(p.type)});
                    t.type_levels.emplace(e, level);
                }
            }
            for (const auto& p : t.expanded.from)
                if (p.potency) t.potencies.emplace(p.element(), *p.potency);
            t.target = stack.target().name;
            for (int l = 0; l <= stack.depth(); ++l) t.stack.push_back(stack.model(l).name);
            out.push_back(std::move(t));
        }
    }
    if (report) *report = ProliferationReport{rule.name, matches.size(), out.size()};
    return out;
}

Proliferation proliferate_all(const std::vector<McmtRule>& rules, const Hierarchy& h, const std::string& target) {
    Proliferation p;
    for (const auto& r : rules) {
        ProliferationReport rep;
        auto two = proliferate(r, h, target, &rep);
        p.breakdown.push_back(rep);
        for (auto& t : two) p.rules.push_back(std::move(t));
    }
    return p;
}

namespace {

nlohmann::ordered_json graph_json(const Hierarchy& h, const Graph& g, const TwoLevelRule& r) {
    nlohmann::ordered_json j;
    j["nodes"] = nlohmann::ordered_json::array();
    for (const auto& n : g.nodes())
        j["nodes"].push_back({{"name", n}, {"type", type_name(h, r.types.at(Element{n}))}});
    j["arrows"] = nlohmann::ordered_json::array();
    for (const auto& a : g.arrows())
        j["arrows"].push_back({{"name", a.label},
                               {"source", a.source},
                               {"target", a.target},
                               {"type", type_name(h, r.types.at(Element{a}))}});
    return j;
}

} // namespace

std::string rules_to_json(const Hierarchy& h, const Proliferation& p) {
    nlohmann::ordered_json doc;
    doc["rules"] = nlohmann::ordered_json::array();
    for (const auto& r : p.rules) {
        nlohmann::ordered_json j;
        j["name"] = r.name;
        j["source"] = r.source_rule;
        j["target"] = r.target;
        j["levels"] = r.match.level_map;
        nlohmann::ordered_json bindings = nlohmann::ordered_json::array();
        for (std::size_t k = 1; k < r.match.bindings.size(); ++k) {
            nlohmann::ordered_json b = nlohmann::ordered_json::object();
            for (const auto& [name, e] : r.match.bindings[k]) b[name] = to_string(e);
            bindings.push_back(std::move(b));
        }
        j["bindings"] = std::move(bindings);
        j["lhs"] = graph_json(h, r.lhs, r);
        j["interface"] = graph_json(h, r.interface, r);
        j["rhs"] = graph_json(h, r.rhs, r);
        doc["rules"].push_back(std::move(j));
    }
    doc["breakdown"] = nlohmann::ordered_json::array();
    for (const auto& b : p.breakdown)
        doc["breakdown"].push_back({{"rule", b.rule}, {"matches", b.matches}, {"rules", b.rules}});
    return doc.dump(2) + "\n";
}

} // namespace mlm
