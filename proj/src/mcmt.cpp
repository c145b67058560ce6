#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "mlm/error.hpp"
#include "mlm/mcmt.hpp"

namespace mlm {

namespace {

[[noreturn]] void unresolved(const SourcePos& pos, const std::string& message) {
    throw Error(ErrorKind::UnresolvedReference,
                std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message, pos.line, pos.column);
}

[[noreturn]] void duplicate(const SourcePos& pos, const std::string& message) {
    throw Error(ErrorKind::DuplicateDeclaration,
                std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message, pos.line, pos.column);
}

std::optional<Element> root_element(const Graph& root, const std::string& name, bool arrow) {
    if (!arrow) {
        if (root.has_node(name)) return Element{name};
        return std::nullopt;
    }
    for (const auto& a : root.arrows())
        if (a.label == name) return Element{a};
    return std::nullopt;
}

bool root_has(const Graph& root, const std::string& name) {
    return root_element(root, name, false) || root_element(root, name, true);
}

struct BlockIndex {
    std::map<std::string, const Declaration*> decls;
    std::vector<std::string> order;
    std::map<std::string, const Assignment*> assigns;
};

BlockIndex index_block(const std::vector<BlockItem>& items, const std::string& block) {
    BlockIndex b;
    for (const auto& item : items)
        if (const auto* d = std::get_if<Declaration>(&item)) {
            if (!b.decls.emplace(d->name, d).second)
                duplicate(d->pos, "'" + d->name + "' is declared twice in " + block);
            b.order.push_back(d->name);
        }
    for (const auto& item : items)
        if (const auto* a = std::get_if<Assignment>(&item)) {
            if (!b.decls.count(a->arrow)) unresolved(a->pos, "'" + a->arrow + "' is not declared in " + block);
            for (const auto* end : {&a->source, &a->target})
                if (!b.decls.count(*end)) unresolved(a->pos, "'" + *end + "' is not declared in " + block);
            if (!b.assigns.emplace(a->arrow, a).second)
                duplicate(a->pos, "endpoints of '" + a->arrow + "' are assigned twice in " + block);
        }
    for (const auto& [name, a] : b.assigns)
        for (const auto* end : {&a->source, &a->target})
            if (b.assigns.count(*end)) unresolved(a->pos, "endpoint '" + *end + "' of '" + name + "' is an arrow");
    return b;
}

std::vector<PatternElement> resolve_pattern(const std::vector<BlockItem>& items, const char* block,
                                            const std::vector<MetaElement>& meta, const Graph& root) {
    BlockIndex b = index_block(items, block);
    std::vector<PatternElement> out;
    for (const auto& name : b.order) {
        const Declaration& d = *b.decls.at(name);
        if (d.type.constant) throw Error(ErrorKind::SyntaxError, std::to_string(d.pos.line) + ":" +
                                                                     std::to_string(d.pos.column) +
                                                                     ": constants are only allowed in meta",
                                         d.pos.line, d.pos.column);
        if (d.type.multiplicity)
            throw Error(ErrorKind::SyntaxError, std::to_string(d.pos.line) + ":" + std::to_string(d.pos.column) +
                                                    ": multiplicities are only allowed in meta",
                        d.pos.line, d.pos.column);
        PatternElement p;
        p.name = name;
        p.pos = d.pos;
        p.potency = d.type.potency;
        if (auto it = b.assigns.find(name); it != b.assigns.end()) {
            p.arrow = true;
            p.source = it->second->source;
            p.target = it->second->target;
        }
        std::vector<const MetaElement*> candidates;
        for (const auto& m : meta)
            if (m.name == d.type.name && (!d.type.level || *d.type.level == m.level)) candidates.push_back(&m);
        if (candidates.size() == 1) {
            p.type = candidates.front()->name;
            p.type_level = candidates.front()->level;
        } else if (candidates.size() > 1) {
            unresolved(d.pos, "type '" + d.type.name + "' of '" + name + "' is ambiguous; add its mm level");
        } else if ((!d.type.level || *d.type.level == 0) && root_has(root, d.type.name)) {
            p.type = d.type.name;
            p.type_level = 0;
        } else {
            unresolved(d.pos, "type '" + d.type.name + "' of '" + name + "' is not declared in meta");
        }
        out.push_back(std::move(p));
    }
    // Nodes before arrows keeps graph construction simple.
    std::stable_partition(out.begin(), out.end(), [](const PatternElement& p) { return !p.arrow; });
    return out;
}

} // namespace

McmtRule resolve_rule(const RuleSyntax& syn, const Graph& root) {
    McmtRule rule;
    rule.name = syn.name;
    rule.syntax = syn;

    BlockIndex b = index_block(syn.meta, "meta");
    struct Resolved {
        int type_level = 0;
        int level = 1;
        bool done = false;
        bool visiting = false;
    };
    std::map<std::string, Resolved> res;
    std::map<std::pair<int, std::string>, MetaElement> implicit;
    std::vector<std::pair<int, std::string>> implicit_order;

    std::function<int(const std::string&)> level_of = [&](const std::string& name) -> int {
        Resolved& r = res[name];
        const Declaration& d = *b.decls.at(name);
        if (r.done) return r.level;
        if (r.visiting) unresolved(d.pos, "typing of '" + name + "' is cyclic");
        r.visiting = true;
        const std::string& t = d.type.name;
        const bool declared = b.decls.count(t) && t != name;
        int tl = 0;
        int level = 0;
        if (d.type.level && *d.type.level == 0) {
            if (!root_has(root, t)) unresolved(d.pos, "'" + t + "' is not an element of the root");
        } else if (d.type.level) {
            tl = *d.type.level;
            if (declared) {
                int actual = level_of(t);
                if (actual != tl)
                    unresolved(d.pos, "'" + t + "' is declared at level " + std::to_string(actual) + ", not " +
                                          std::to_string(tl));
            } else {
                auto key = std::make_pair(tl, t);
                const bool arrow = b.assigns.count(name) != 0;
                auto it = implicit.find(key);
                if (it == implicit.end()) {
                    MetaElement m;
                    m.name = t;
                    m.level = tl;
                    m.arrow = arrow;
                    m.constant = true;
                    m.implicit = true;
                    m.pos = d.pos;
                    implicit.emplace(key, m);
                    implicit_order.push_back(key);
                } else if (it->second.arrow != arrow) {
                    unresolved(d.pos, "'" + t + "' is used both as a node and as an arrow");
                }
            }
        } else if (declared) {
            tl = level_of(t);
        } else if (!root_has(root, t)) {
            unresolved(d.pos, "type '" + t + "' of '" + name + "' is neither declared nor a root element");
        } else if (auto a = b.assigns.find(name); a != b.assigns.end()) {
            // A root-typed arrow without mm lives with its endpoints.
            for (const auto* end : {&a->second->source, &a->second->target})
                if (b.decls.count(*end) && *end != name) level = std::max(level, level_of(*end));
        }
        Resolved& r2 = res[name];
        r2.type_level = tl;
        r2.level = std::max(tl + 1, level);
        r2.visiting = false;
        r2.done = true;
        return r2.level;
    };
    for (const auto& name : b.order) level_of(name);

    std::vector<MetaElement> explicit_elements;
    for (const auto& name : b.order) {
        const Declaration& d = *b.decls.at(name);
        MetaElement m;
        m.name = name;
        m.type = d.type.name;
        m.type_level = res.at(name).type_level;
        m.level = res.at(name).level;
        m.constant = d.type.constant;
        m.potency = d.type.potency;
        m.multiplicity = d.type.multiplicity;
        m.pos = d.pos;
        if (auto it = b.assigns.find(name); it != b.assigns.end()) {
            m.arrow = true;
            m.source = it->second->source;
            m.target = it->second->target;
        }
        explicit_elements.push_back(std::move(m));
    }
    for (const auto& key : implicit_order) {
        MetaElement& im = implicit.at(key);
        bool root_kind_exists = im.arrow ? !root.arrows().empty() : !root.nodes().empty();
        if (!root_kind_exists) unresolved(im.pos, "the root offers no type for implicit '" + im.name + "'");
        im.type = im.arrow ? root.arrows().front().label : root.nodes().front();
        im.type_level = 0;
    }

    auto level_name_of = [&](const std::string& name) -> std::pair<int, std::string> {
        const auto& d = *b.decls.at(name);
        return {res.at(name).type_level, d.type.name};
    };
    for (const auto& m : explicit_elements) {
        if (!m.arrow) continue;
        for (const auto* end : {&m.source, &m.target}) {
            const int end_level = res.at(*end).level;
            if (end_level != m.level)
                unresolved(m.pos, "endpoint '" + *end + "' of '" + m.name + "' sits at level " +
                                      std::to_string(end_level) + ", not " + std::to_string(m.level));
        }
        auto key = std::make_pair(m.type_level, m.type);
        auto it = implicit.find(key);
        if (it == implicit.end() || !it->second.arrow) continue;
        MetaElement& im = it->second;
        auto [sl, sn] = level_name_of(m.source);
        auto [tl, tn] = level_name_of(m.target);
        if (sl != im.level || tl != im.level)
            unresolved(m.pos, "cannot infer the endpoints of '" + im.name + "' from '" + m.name + "'");
        if (im.source.empty()) {
            im.source = sn;
            im.target = tn;
        } else if (im.source != sn || im.target != tn) {
            unresolved(m.pos, "'" + m.name + "' disagrees with earlier uses on the endpoints of '" + im.name + "'");
        }
    }
    for (const auto& key : implicit_order) {
        const MetaElement& im = implicit.at(key);
        if (!im.arrow) continue;
        for (const auto* end : {&im.source, &im.target}) {
            const bool exists = implicit.count({im.level, *end}) ||
                                std::any_of(explicit_elements.begin(), explicit_elements.end(), [&](const MetaElement& e) {
                                    return e.name == *end && e.level == im.level && !e.arrow;
                                });
            if (!exists) unresolved(im.pos, "endpoint '" + *end + "' of '" + im.name + "' is unknown at its level");
        }
    }

    for (const auto& key : implicit_order) rule.meta.push_back(implicit.at(key));
    for (auto& m : explicit_elements) rule.meta.push_back(std::move(m));
    std::stable_sort(rule.meta.begin(), rule.meta.end(), [](const MetaElement& a, const MetaElement& c) {
        if (a.level != c.level) return a.level < c.level;
        return a.implicit && !c.implicit;
    });
    for (const auto& m : rule.meta) rule.depth = std::max(rule.depth, m.level);

    rule.from = resolve_pattern(syn.from, "from", rule.meta, root);
    rule.to = resolve_pattern(syn.to, "to", rule.meta, root);
    return rule;
}

RuleModule parse_rule_module(std::string_view text, const Graph& root) {
    ModuleSyntax syn = parse_module_syntax(text);
    RuleModule out;
    out.name = syn.name;
    std::set<std::string> names;
    for (const auto& r : syn.rules) {
        if (!names.insert(r.name).second) duplicate(r.pos, "rule '" + r.name + "' is defined twice");
        out.rules.push_back(resolve_rule(r, root));
    }
    return out;
}

RuleModule load_rule_module(const std::string& path, const Graph& root) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::NotFound, "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_rule_module(ss.str(), root);
}

const MetaElement* McmtRule::find_meta(int level, const std::string& n) const {
    for (const auto& m : meta)
        if (m.level == level && m.name == n) return &m;
    return nullptr;
}

const MetaElement& McmtRule::meta_at(int level, const std::string& n) const {
    if (const auto* m = find_meta(level, n)) return *m;
    throw Error(ErrorKind::NotFound, "rule '" + name + "' has no meta element '" + n + "' at level " +
                                         std::to_string(level));
}

Element McmtRule::meta_element(const MetaElement& m) const {
    if (m.arrow) return Arrow{m.source, m.name, m.target};
    return m.name;
}

Graph McmtRule::meta_graph(int level) const {
    Graph g(name + "_MM" + std::to_string(level));
    for (const auto& m : meta)
        if (m.level == level && !m.arrow) g.add_node(m.name);
    for (const auto& m : meta)
        if (m.level == level && m.arrow) g.add_arrow(Arrow{m.source, m.name, m.target});
    return g;
}

namespace {

// Types of a meta or pattern element, from its direct type up to the root.
std::vector<std::pair<int, Element>> types_upwards(const McmtRule& rule, const Graph& root, bool arrow,
                                                const std::string& type, int type_level) {
    std::vector<std::pair<int, Element>> out;
    std::string t = type;
    int tl = type_level;
    while (true) {
        if (tl == 0) {
            if (auto e = root_element(root, t, arrow)) out.emplace_back(0, *e);
            break;
        }
        const MetaElement* m = rule.find_meta(tl, t);
        if (!m) break;
        out.emplace_back(tl, rule.meta_element(*m));
        t = m->type;
        tl = m->type_level;
        arrow = m->arrow;
    }
    return out;
}

} // namespace

std::vector<std::pair<int, Element>> McmtRule::type_chain(bool arrow, const std::string& type, int type_level,
                                                          const Graph& root) const {
    return types_upwards(*this, root, arrow, type, type_level);
}

namespace {

PartialMorphism partial_from_types(const Graph& from, const Graph& to,
                                   const std::function<std::optional<Element>(const Element&)>& type_of) {
    Morphism t{Graph(from.name()), to, {}, {}};
    for (const auto& n : from.nodes())
        if (auto ty = type_of(Element{n}); ty && is_node(*ty) && to.contains(*ty)) {
            t.from.add_node(n);
            t.nodes.emplace(n, as_node(*ty));
        }
    for (const auto& a : from.arrows())
        if (auto ty = type_of(Element{a}); ty && is_arrow(*ty) && to.contains(*ty) && t.from.has_node(a.source) &&
                                           t.from.has_node(a.target)) {
            t.from.add_arrow(a);
            t.arrows.emplace(a, as_arrow(*ty));
        }
    return make_partial(from, std::move(t));
}

} // namespace

GraphChain McmtRule::meta_chain(const Graph& root) const {
    std::vector<Graph> graphs{root};
    for (int k = 1; k <= depth; ++k) graphs.push_back(meta_graph(k));
    TypingFamily typings;
    for (int j = 1; j <= depth; ++j)
        for (int i = 0; i < j; ++i)
            typings.emplace(std::make_pair(j, i),
                            partial_from_types(graphs[static_cast<std::size_t>(j)], graphs[static_cast<std::size_t>(i)],
                                               [&](const Element& e) -> std::optional<Element> {
                                                   const std::string& n = is_node(e) ? as_node(e) : as_arrow(e).label;
                                                   const MetaElement& m = meta_at(j, n);
                                                   for (auto& [l, t] : types_upwards(*this, root, m.arrow, m.type, m.type_level))
                                                       if (l == i) return t;
                                                   return std::nullopt;
                                               }));
    return GraphChain::build(graphs, typings);
}

Graph McmtRule::lhs() const {
    Graph g(name + "_L");
    for (const auto& p : from) g.add(p.element());
    return g;
}

Graph McmtRule::rhs() const {
    Graph g(name + "_R");
    for (const auto& p : to) g.add(p.element());
    return g;
}

Graph McmtRule::interface() const {
    Graph g(name + "_I");
    for (const auto& p : from)
        if (!p.arrow) g.add_node(p.name);
    for (const auto& p : to)
        if (!p.arrow && !g.has_node(p.name)) g.add_node(p.name);
    for (const auto* block : {&from, &to})
        for (const auto& p : *block)
            if (p.arrow && !g.contains(p.element())) g.add(p.element());
    return g;
}

const PatternElement& McmtRule::pattern(const Element& e) const {
    for (const auto* block : {&from, &to})
        for (const auto& p : *block)
            if (p.element() == e) return p;
    throw Error(ErrorKind::NotFound, "rule '" + name + "' has no pattern element " + to_string(e));
}

MultilevelTyping McmtRule::typing_of(const Graph& g, const Graph& root) const {
    MultilevelTyping mt;
    mt.subject = g;
    mt.chain = meta_chain(root);
    for (int i = 0; i <= depth; ++i)
        mt.sigmas.push_back(partial_from_types(g, mt.chain.graph(i), [&](const Element& e) -> std::optional<Element> {
            const PatternElement& p = pattern(e);
            for (auto& [l, t] : types_upwards(*this, root, p.arrow, p.type, p.type_level))
                if (l == i) return t;
            return std::nullopt;
        }));
    return mt;
}

std::string_view to_string(RuleCheck c) {
    switch (c) {
    case RuleCheck::MetaEmpty: return "MetaEmpty";
    case RuleCheck::UnknownRootType: return "UnknownRootType";
    case RuleCheck::KindMismatch: return "KindMismatch";
    case RuleCheck::TypingIncompatibility: return "TypingIncompatibility";
    case RuleCheck::FromToMismatch: return "FromToMismatch";
    case RuleCheck::PotencyOnCreated: return "PotencyOnCreated";
    }
    return "Unknown";
}

std::vector<RuleViolation> validate_rule(const McmtRule& rule, const Graph& root) {
    std::vector<RuleViolation> out;
    auto report = [&](const std::string& element, RuleCheck c, const std::string& message) {
        out.push_back({rule.name, element, c, message});
    };
    if (std::none_of(rule.meta.begin(), rule.meta.end(), [](const MetaElement& m) { return !m.implicit; }))
        report("", RuleCheck::MetaEmpty, "the meta block declares no pattern");

    // Resolves the type of (arrow?, type, level) and checks kind and existence.
    auto type_kind = [&](const std::string& who, bool arrow, const std::string& type, int level) -> bool {
        if (level == 0) {
            if (!root_has(root, type)) {
                report(who, RuleCheck::UnknownRootType, "'" + type + "' is not an element of the root");
                return false;
            }
            if (!root_element(root, type, arrow)) {
                report(who, RuleCheck::KindMismatch, "'" + who + "' and its type '" + type + "' differ in kind");
                return false;
            }
            return true;
        }
        const MetaElement* t = rule.find_meta(level, type);
        if (!t) return false;
        if (t->arrow != arrow) {
            report(who, RuleCheck::KindMismatch, "'" + who + "' and its type '" + type + "' differ in kind");
            return false;
        }
        return true;
    };

    // The endpoint `end` (at some level) must be typed at `level` by `expected`.
    auto endpoint_ok = [&](bool meta, int own_level, const std::string& end, const std::string& expected, int level) {
        std::string type;
        int tl = 0;
        if (meta) {
            const MetaElement* e = rule.find_meta(own_level, end);
            if (!e) return false;
            type = e->type;
            tl = e->type_level;
        } else {
            const PatternElement* p = nullptr;
            for (const auto* block : {&rule.from, &rule.to})
                for (const auto& q : *block)
                    if (q.name == end && !q.arrow && !p) p = &q;
            if (!p) return false;
            type = p->type;
            tl = p->type_level;
        }
        for (auto& [l, t] : types_upwards(rule, root, false, type, tl))
            if (l == level) return is_node(t) && as_node(t) == expected;
        return false;
    };

    auto check_arrow_typing = [&](bool meta, int own_level, const std::string& who, const std::string& src,
                                  const std::string& tgt, const std::string& type, int level) {
        std::string ts, tt;
        if (level == 0) {
            auto e = root_element(root, type, true);
            if (!e) return;
            ts = as_arrow(*e).source;
            tt = as_arrow(*e).target;
        } else {
            const MetaElement* t = rule.find_meta(level, type);
            if (!t || !t->arrow) return;
            ts = t->source;
            tt = t->target;
        }
        if (!endpoint_ok(meta, own_level, src, ts, level))
            report(who, RuleCheck::TypingIncompatibility,
                   "source '" + src + "' of '" + who + "' is not typed by '" + ts + "', the source of '" + type + "'");
        if (!endpoint_ok(meta, own_level, tgt, tt, level))
            report(who, RuleCheck::TypingIncompatibility,
                   "target '" + tgt + "' of '" + who + "' is not typed by '" + tt + "', the target of '" + type + "'");
    };

    for (const auto& m : rule.meta) {
        if (!type_kind(m.name, m.arrow, m.type, m.type_level)) continue;
        if (m.arrow && !(m.implicit && m.source.empty()))
            check_arrow_typing(true, m.level, m.name, m.source, m.target, m.type, m.type_level);
    }
    for (const auto* block : {&rule.from, &rule.to})
        for (const auto& p : *block) {
            if (!type_kind(p.name, p.arrow, p.type, p.type_level)) continue;
            if (p.arrow) check_arrow_typing(false, rule.depth + 1, p.name, p.source, p.target, p.type, p.type_level);
        }

    for (const auto& f : rule.from)
        for (const auto& t : rule.to) {
            if (f.name != t.name) continue;
            if (f.arrow != t.arrow || f.type != t.type || f.type_level != t.type_level || f.source != t.source ||
                f.target != t.target)
                report(f.name, RuleCheck::FromToMismatch, "'" + f.name + "' is declared differently in from and to");
        }
    for (const auto& t : rule.to) {
        bool in_from = std::any_of(rule.from.begin(), rule.from.end(), [&](const PatternElement& f) { return f.name == t.name; });
        if (!in_from && t.potency)
            report(t.name, RuleCheck::PotencyOnCreated, "created element '" + t.name + "' carries a potency constraint");
    }
    return out;
}

} // namespace mlm
