#include "mlm/hierarchy.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "mlm/error.hpp"

namespace mlm {

bool Potency::contains(const Potency& p) const {
    if (p.min < min) return false;
    if (!max) return true;
    return p.max && *p.max <= *max;
}

bool Multiplicity::contains(const Multiplicity& m) const {
    if (m.lower < lower) return false;
    if (!upper) return true;
    return m.upper && *m.upper <= *upper;
}

std::string to_string(const Potency& p) {
    if (!p.max) return std::to_string(p.min) + "-*";
    if (*p.max == p.min) return std::to_string(p.min);
    return std::to_string(p.min) + "-" + std::to_string(*p.max);
}

std::string to_string(const Multiplicity& m) {
    return std::to_string(m.lower) + ".." + (m.upper ? std::to_string(*m.upper) : std::string("n"));
}

namespace {

std::optional<unsigned> parse_natural(const std::string& s) {
    if (s.empty() || s.size() > 9 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
        return std::nullopt;
    return static_cast<unsigned>(std::stoul(s));
}

} // namespace

Potency parse_potency(const std::string& text) {
    auto dash = text.find('-');
    auto lo = parse_natural(text.substr(0, dash));
    if (!lo) throw Error(ErrorKind::SchemaError, "malformed potency '" + text + "'");
    if (dash == std::string::npos) return Potency{*lo, *lo};
    std::string hi_text = text.substr(dash + 1);
    if (hi_text == "*") return Potency{*lo, std::nullopt};
    auto hi = parse_natural(hi_text);
    if (!hi || *hi < *lo) throw Error(ErrorKind::SchemaError, "malformed potency '" + text + "'");
    return Potency{*lo, *hi};
}

Multiplicity parse_multiplicity(const std::string& text) {
    auto dots = text.find("..");
    if (dots == std::string::npos) throw Error(ErrorKind::SchemaError, "malformed multiplicity '" + text + "'");
    auto lo = parse_natural(text.substr(0, dots));
    std::string hi_text = text.substr(dots + 2);
    if (!lo) throw Error(ErrorKind::SchemaError, "malformed multiplicity '" + text + "'");
    if (hi_text == "n" || hi_text == "*") return Multiplicity{*lo, std::nullopt};
    auto hi = parse_natural(hi_text);
    if (!hi || *hi < *lo) throw Error(ErrorKind::SchemaError, "malformed multiplicity '" + text + "'");
    return Multiplicity{*lo, *hi};
}

const ElementInfo& Model::at(const Element& e) const {
    auto it = info.find(e);
    if (it == info.end())
        throw Error(ErrorKind::NotFound, "no element " + to_string(e) + " in model '" + name + "'");
    return it->second;
}

Hierarchy Hierarchy::from_models(std::vector<Model> models) {
    std::map<std::string, std::size_t> by_name;
    for (std::size_t i = 0; i < models.size(); ++i)
        if (!by_name.emplace(models[i].name, i).second)
            throw Error(ErrorKind::SchemaError, "duplicate model '" + models[i].name + "'");
    std::size_t roots = 0;
    for (const auto& m : models) {
        if (!m.parent) {
            ++roots;
            continue;
        }
        if (!by_name.count(*m.parent))
            throw Error(ErrorKind::SchemaError, "model '" + m.name + "' has unknown parent '" + *m.parent + "'");
    }
    if (roots != 1) throw Error(ErrorKind::SchemaError, "a hierarchy needs exactly one root model");

    Hierarchy h;
    std::vector<bool> placed(models.size(), false);
    bool progress = true;
    while (h.models_.size() < models.size() && progress) {
        progress = false;
        for (std::size_t i = 0; i < models.size(); ++i) {
            if (placed[i]) continue;
            Model& m = models[i];
            int level = 0;
            if (m.parent) {
                auto it = h.index_.find(*m.parent);
                if (it == h.index_.end()) continue;
                level = h.models_[it->second].level + 1;
            }
            m.level = level;
            for (const auto& e : m.graph.elements()) m.info.try_emplace(e);
            for (const auto& [e, _] : m.info)
                if (!m.graph.contains(e))
                    throw Error(ErrorKind::SchemaError,
                                "model '" + m.name + "' describes unknown element " + to_string(e));
            h.index_.emplace(m.name, h.models_.size());
            h.models_.push_back(std::move(m));
            placed[i] = true;
            progress = true;
        }
    }
    if (h.models_.size() < models.size()) throw Error(ErrorKind::SchemaError, "parent relation has a cycle");

    for (const auto& m : h.models_)
        for (const auto& [e, info] : m.info) {
            for (const auto& s : info.supertypes)
                if (!is_node(e) || !m.graph.has_node(s))
                    throw Error(ErrorKind::SchemaError,
                                "supertype '" + s + "' of " + to_string(e) + " is not a node of '" + m.name + "'");
            if (!info.type) continue;
            const Model* tm = h.find(info.type->model);
            if (!tm)
                throw Error(ErrorKind::SchemaError, "type of " + to_string(e) + " in '" + m.name +
                                                        "' refers to unknown model '" + info.type->model + "'");
            if (!tm->graph.contains(info.type->element))
                throw Error(ErrorKind::SchemaError, "type of " + to_string(e) + " in '" + m.name + "' refers to " +
                                                        to_string(info.type->element) + ", absent from '" +
                                                        tm->name + "'");
        }
    return h;
}

const Model* Hierarchy::find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &models_[it->second];
}

const Model& Hierarchy::model(const std::string& name) const {
    if (const Model* m = find(name)) return *m;
    throw Error(ErrorKind::NotFound, "no model named '" + name + "'");
}

const Model& Hierarchy::resolve(const std::string& path) const {
    auto dot = path.rfind('.');
    if (dot == std::string::npos) return model(path);
    const Model& m = model(path.substr(dot + 1));
    if (path_of(m.name) != path) throw Error(ErrorKind::NotFound, "no model at path '" + path + "'");
    return m;
}

std::vector<const Model*> Hierarchy::branch(const std::string& name) const {
    std::vector<const Model*> out;
    for (const Model* m = &model(name); m; m = m->parent ? &model(*m->parent) : nullptr) out.push_back(m);
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<const Model*> Hierarchy::children(const std::string& name) const {
    std::vector<const Model*> out;
    for (const auto& m : models_)
        if (m.parent && *m.parent == name) out.push_back(&m);
    return out;
}

std::string Hierarchy::path_of(const std::string& name) const {
    std::string out;
    for (const Model* m : branch(name)) out += (out.empty() ? "" : ".") + m->name;
    return out;
}

Hierarchy Hierarchy::with_model(Model m) const {
    const Model& old = model(m.name);
    if (old.parent != m.parent)
        throw Error(ErrorKind::SchemaError, "replacement for '" + m.name + "' changes its parent");
    std::vector<Model> models = models_;
    models[index_.at(m.name)] = std::move(m);
    return from_models(std::move(models));
}

Model canonical_root(const std::string& name) {
    Model root;
    root.name = name;
    root.graph = Graph::build(name, {"Node"}, {Arrow{"Node", "Arrow", "Node"}});
    root.info[Element{std::string("Node")}] = ElementInfo{TypeRef{name, std::string("Node")}, Potency{1, std::nullopt}, {}, {}};
    Arrow a{"Node", "Arrow", "Node"};
    root.info[Element{a}] = ElementInfo{TypeRef{name, a}, Potency{1, std::nullopt}, {}, {}};
    return root;
}

std::vector<std::pair<int, Element>> transitive_types(const Hierarchy& h, const Model& m, const Element& e) {
    std::vector<std::pair<int, Element>> out;
    const Model* cur = &m;
    Element x = e;
    while (true) {
        auto it = cur->info.find(x);
        if (it == cur->info.end() || !it->second.type) break;
        const Model* tm = h.find(it->second.type->model);
        if (!tm) break;
        if (tm->level >= cur->level && cur->level != 0) break; // not a jump upwards
        out.emplace_back(tm->level, it->second.type->element);
        if (tm->level == 0) break;
        cur = tm;
        x = it->second.type->element;
    }
    return out;
}

std::optional<Element> type_at_level(const Hierarchy& h, const Model& m, const Element& e, int level) {
    for (auto& [l, t] : transitive_types(h, m, e))
        if (l == level) return t;
    return std::nullopt;
}

std::string_view to_string(Rule r) {
    switch (r) {
    case Rule::RootNotSelfDefining: return "RootNotSelfDefining";
    case Rule::MissingType: return "MissingType";
    case Rule::TypeNotInBranch: return "TypeNotInBranch";
    case Rule::KindMismatch: return "KindMismatch";
    case Rule::DanglingTyping: return "DanglingTyping";
    case Rule::PotencyViolation: return "PotencyViolation";
    case Rule::MultiplicityOnNode: return "MultiplicityOnNode";
    case Rule::InheritanceCycle: return "InheritanceCycle";
    case Rule::InheritanceMismatch: return "InheritanceMismatch";
    }
    return "Unknown";
}

namespace {

bool is_ancestor(const Hierarchy& h, const Model& m, const std::string& candidate) {
    for (const Model* p = &m; p->parent;) {
        p = &h.model(*p->parent);
        if (p->name == candidate) return true;
    }
    return false;
}

// Supertype order with supertypes before subtypes; empty when cyclic.
std::optional<std::vector<std::string>> inheritance_order(const Model& m, std::string* cycle_at = nullptr) {
    std::vector<std::string> order;
    std::map<std::string, int> state; // 1 = visiting, 2 = done
    std::function<bool(const std::string&)> visit = [&](const std::string& n) {
        int& s = state[n];
        if (s == 2) return true;
        if (s == 1) {
            if (cycle_at) *cycle_at = n;
            return false;
        }
        s = 1;
        auto it = m.info.find(Element{n});
        if (it != m.info.end())
            for (const auto& p : it->second.supertypes)
                if (!visit(p)) return false;
        state[n] = 2;
        order.push_back(n);
        return true;
    };
    for (const auto& n : m.graph.nodes())
        if (!visit(n)) return std::nullopt;
    return order;
}

} // namespace

namespace {

void validate_model(const Hierarchy& h, const Model& m, std::vector<Violation>& out) {
    for (const auto& e : m.graph.elements()) {
        const ElementInfo& info = m.at(e);
        const std::string en = to_string(e);
        if (!info.type) {
            out.push_back({m.name, en, Rule::MissingType, en + " has no type"});
            continue;
        }
        const Model& tm = h.model(info.type->model);
        const Element& t = info.type->element;
        if (m.level == 0) {
            if (tm.name != m.name)
                out.push_back({m.name, en, Rule::RootNotSelfDefining, en + " is typed outside the root"});
        } else if (!is_ancestor(h, m, tm.name)) {
            out.push_back({m.name, en, Rule::TypeNotInBranch,
                           en + " is typed by '" + tm.name + "', which is not above '" + m.name + "'"});
            continue;
        }
        if (is_node(e) != is_node(t)) {
            out.push_back({m.name, en, Rule::KindMismatch, en + " and its type " + to_string(t) + " differ in kind"});
            continue;
        }
        if (is_arrow(e)) {
            const Arrow& a = as_arrow(e);
            const Arrow& ta = as_arrow(t);
            auto check_end = [&](const std::string& end, const std::string& expected, const char* which) {
                std::optional<Element> et;
                if (m.level == 0)
                    et = m.at(Element{end}).type ? std::optional<Element>(m.at(Element{end}).type->element) : std::nullopt;
                else
                    et = type_at_level(h, m, Element{end}, tm.level);
                if (!et || *et != Element{expected})
                    out.push_back({m.name, en, Rule::DanglingTyping,
                                   std::string(which) + " '" + end + "' of " + en + " is not typed by '" +
                                       expected + "' in '" + tm.name + "'"});
            };
            check_end(a.source, ta.source, "source");
            check_end(a.target, ta.target, "target");
        }
        if (m.level > 0) {
            const unsigned jump = static_cast<unsigned>(m.level - tm.level);
            const Potency& p = tm.at(t).potency;
            if (!p.contains(jump))
                out.push_back({m.name, en, Rule::PotencyViolation,
                               en + " jumps " + std::to_string(jump) + " levels but " + to_string(t) +
                                   " has potency " + to_string(p)});
        }
    }
    std::string cycle_at;
    if (!inheritance_order(m, &cycle_at)) {
        out.push_back({m.name, cycle_at, Rule::InheritanceCycle, "inheritance cycle through '" + cycle_at + "'"});
        return;
    }
    for (const auto& n : m.graph.nodes()) {
        const ElementInfo& info = m.at(Element{n});
        for (const auto& s : info.supertypes) {
            const auto& st = m.at(Element{s}).type;
            if (info.type && st && *info.type != *st)
                out.push_back({m.name, n, Rule::InheritanceMismatch,
                               "'" + n + "' is typed differently from its supertype '" + s + "'"});
        }
    }
}

} // namespace

std::vector<Violation> validate_hierarchy(const Hierarchy& h) {
    std::vector<Violation> out;
    for (const auto& m : h.models()) validate_model(h, m, out);
    return out;
}

DerivedTyping derive_typing_chain(const Hierarchy& h, const std::string& name) {
    auto branch = h.branch(name);
    std::vector<Violation> violations;
    for (const Model* m : branch) validate_model(h, *m, violations);
    if (!violations.empty()) {
        const Violation& v = violations.front();
        throw Error(ErrorKind::ValidationFailed,
                    "model '" + v.model + "' fails " + std::string(to_string(v.rule)) + ": " + v.message);
    }

    std::vector<Graph> graphs;
    for (const Model* m : branch) graphs.push_back(m->graph);
    TypingFamily typings;
    for (int j = 1; j < static_cast<int>(branch.size()); ++j) {
        const Model& mj = *branch[static_cast<std::size_t>(j)];
        for (int i = 0; i < j; ++i) {
            Morphism t{Graph(mj.graph.name()), graphs[static_cast<std::size_t>(i)], {}, {}};
            for (const auto& n : mj.graph.nodes())
                if (auto ty = type_at_level(h, mj, Element{n}, i)) {
                    t.from.add_node(n);
                    t.nodes.emplace(n, as_node(*ty));
                }
            for (const auto& a : mj.graph.arrows())
                if (auto ty = type_at_level(h, mj, Element{a}, i)) {
                    t.from.add_arrow(a);
                    t.arrows.emplace(a, as_arrow(*ty));
                }
            typings.emplace(std::make_pair(j, i), make_partial(mj.graph, std::move(t)));
        }
    }
    DerivedTyping out;
    out.chain = GraphChain::build(graphs, typings);
    const int k = out.chain.depth();
    out.typing.subject = graphs.back();
    if (k == 0) {
        const Model& root = *branch.front();
        Morphism self{root.graph, root.graph, {}, {}};
        for (const auto& n : root.graph.nodes()) self.nodes.emplace(n, as_node(root.at(Element{n}).type->element));
        for (const auto& a : root.graph.arrows()) self.arrows.emplace(a, as_arrow(root.at(Element{a}).type->element));
        out.typing.chain = out.chain;
        out.typing.sigmas.push_back(to_partial(self));
        return out;
    }
    out.typing.chain = out.chain.prefix(k - 1);
    for (int i = 0; i < k; ++i) out.typing.sigmas.push_back(out.chain.typing(k, i));
    return out;
}

Hierarchy flatten_inheritance(const Hierarchy& h) {
    std::vector<Model> models = h.models();
    for (auto& m : models) {
        std::string cycle_at;
        auto order = inheritance_order(m, &cycle_at);
        if (!order)
            throw Error(ErrorKind::InheritanceCycle,
                        "inheritance cycle through '" + cycle_at + "' in model '" + m.name + "'");
        for (const auto& n : *order) {
            ElementInfo& child = m.info.at(Element{n});
            const std::vector<std::string> supers = child.supertypes;
            for (const auto& s : supers) {
                const ElementInfo parent = m.info.at(Element{s});
                if (!child.type) {
                    child.type = parent.type;
                    child.potency = parent.potency;
                } else if (parent.type && *parent.type != *child.type) {
                    throw Error(ErrorKind::SchemaError,
                                "'" + n + "' is typed differently from its supertype '" + s + "'");
                } else {
                    child.potency = parent.potency;
                }
                const std::vector<Arrow> arrows = m.graph.arrows();
                for (const auto& a : arrows) {
                    if (a.source != s && a.target != s) continue;
                    // A loop on s yields n->s, s->n and n->n.
                    std::vector<Arrow> copies;
                    for (const auto& src : a.source == s ? std::vector<std::string>{s, n} : std::vector<std::string>{a.source})
                        for (const auto& tgt : a.target == s ? std::vector<std::string>{s, n} : std::vector<std::string>{a.target})
                            copies.push_back(Arrow{src, a.label, tgt});
                    for (const auto& copy : copies) {
                        if (m.graph.has_arrow(copy)) continue;
                        m.graph.add_arrow(copy);
                        m.info[Element{copy}] = m.info.at(Element{a});
                    }
                }
            }
            m.info.at(Element{n}).supertypes.clear();
        }
    }
    return Hierarchy::from_models(std::move(models));
}

} // namespace mlm
