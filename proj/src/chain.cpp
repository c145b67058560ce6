#include "mlm/chain.hpp"

#include <set>

namespace mlm {

namespace {

std::string level_pair(int j, int i) { return "(" + std::to_string(j) + "," + std::to_string(i) + ")"; }

// First element on which f ⪯ g fails, if any.
std::optional<Element> precedes_witness(const PartialMorphism& f, const PartialMorphism& g) {
    for (const auto& e : f.domain().elements()) {
        auto gi = g.image(e);
        if (!gi || *gi != *f.image(e)) return e;
    }
    return std::nullopt;
}

std::optional<Element> first_difference(const Graph& a, const Graph& b) {
    for (const auto& e : a.elements())
        if (!b.contains(e)) return e;
    for (const auto& e : b.elements())
        if (!a.contains(e)) return e;
    return std::nullopt;
}

Morphism restrict_to(const Morphism& m, const Graph& sub, const Graph& codomain) {
    Morphism r{sub, codomain, {}, {}};
    for (const auto& n : sub.nodes()) r.nodes.emplace(n, m.node(n));
    for (const auto& a : sub.arrows()) r.arrows.emplace(a, m.arrow(a));
    if (auto d = r.defect()) throw Error(ErrorKind::InvalidMorphism, *d);
    return r;
}

void require_inclusion_chain(const GraphChain& c, const char* what) {
    if (!c.is_inclusion_chain())
        throw Error(ErrorKind::NotInclusionChain, std::string(what) + " is not an inclusion chain");
}

void require_same_depth_inclusion(const ChainMorphism& l, const char* what) {
    if (l.from.depth() != l.to.depth())
        throw Error(ErrorKind::DepthMismatch, std::string(what) + " must relate chains of equal depth");
    for (int i = 0; i <= l.from.depth(); ++i) {
        if (l.level_map.at(static_cast<std::size_t>(i)) != i || !l.components.at(static_cast<std::size_t>(i)).is_inclusion())
            throw Error(ErrorKind::NotInclusion, std::string(what) + " must be a level-wise inclusion");
    }
}

} // namespace

std::vector<ChainViolation> GraphChain::check(const std::vector<Graph>& graphs, const TypingFamily& typings) {
    std::vector<ChainViolation> out;
    const int n = static_cast<int>(graphs.size()) - 1;
    std::map<std::pair<int, int>, PartialMorphism> empties;
    auto typing = [&](int j, int i) -> const PartialMorphism& {
        if (auto it = typings.find({j, i}); it != typings.end()) return it->second;
        auto [it, _] = empties.try_emplace({j, i}, empty_partial(graphs[static_cast<std::size_t>(j)],
                                                                 graphs[static_cast<std::size_t>(i)]));
        return it->second;
    };
    for (int j = 1; j <= n; ++j) {
        const PartialMorphism& t = typing(j, 0);
        if (t.is_total()) continue;
        for (const auto& e : graphs[static_cast<std::size_t>(j)].elements()) {
            if (!t.defined(e)) {
                out.push_back({ErrorKind::NonTotalRootTyping, -1, j, 0, to_string(e),
                               "element " + to_string(e) + " of level " + std::to_string(j) + " has no root type"});
                break;
            }
        }
    }
    for (int k = 2; k <= n; ++k)
        for (int j = 1; j < k; ++j)
            for (int i = 0; i < j; ++i) {
                PartialMorphism composed = compose_partial(typing(k, j), typing(j, i));
                if (auto w = precedes_witness(composed, typing(k, i)))
                    out.push_back({ErrorKind::UniquenessViolation, k, j, i, to_string(*w),
                                   "transitive type of " + to_string(*w) + " via level " + std::to_string(j) +
                                       " disagrees with its typing " + level_pair(k, i)});
            }
    return out;
}

GraphChain GraphChain::build(std::vector<Graph> graphs, TypingFamily typings) {
    if (graphs.empty()) throw Error(ErrorKind::DepthMismatch, "a chain needs at least its root graph");
    const int n = static_cast<int>(graphs.size()) - 1;
    for (const auto& [key, t] : typings) {
        auto [j, i] = key;
        if (i < 0 || j > n || i >= j)
            throw Error(ErrorKind::DepthMismatch, "typing " + level_pair(j, i) + " is outside the chain");
        if (!t.from.same_elements(graphs[static_cast<std::size_t>(j)]) ||
            !t.to().same_elements(graphs[static_cast<std::size_t>(i)]))
            throw Error(ErrorKind::GraphMismatch, "typing " + level_pair(j, i) + " does not connect its levels");
        if (auto d = t.total.defect()) throw Error(ErrorKind::InvalidMorphism, *d);
    }
    auto violations = check(graphs, typings);
    if (!violations.empty()) throw Error(violations.front().kind, violations.front().message);

    GraphChain c;
    for (int j = 1; j <= n; ++j)
        for (int i = 0; i < j; ++i) {
            auto it = typings.find({j, i});
            if (it != typings.end())
                c.typings_.emplace(std::make_pair(j, i), std::move(it->second));
            else
                c.typings_.emplace(std::make_pair(j, i),
                                   empty_partial(graphs[static_cast<std::size_t>(j)], graphs[static_cast<std::size_t>(i)]));
        }
    c.graphs_ = std::move(graphs);
    return c;
}

const PartialMorphism& GraphChain::typing(int j, int i) const {
    auto it = typings_.find({j, i});
    if (it == typings_.end()) throw Error(ErrorKind::NotFound, "no typing " + level_pair(j, i) + " in chain");
    return it->second;
}

GraphChain GraphChain::prefix(int n) const {
    if (n < 0 || n > depth()) throw Error(ErrorKind::DepthMismatch, "prefix beyond chain depth");
    GraphChain c;
    c.graphs_.assign(graphs_.begin(), graphs_.begin() + n + 1);
    for (const auto& [key, t] : typings_)
        if (key.first <= n) c.typings_.emplace(key, t);
    return c;
}

bool GraphChain::is_inclusion_chain() const {
    if (graphs_.empty()) return false;
    for (int j = 1; j <= depth(); ++j) {
        if (!is_subgraph(graph(j), graph(0))) return false;
        for (int i = 0; i < j; ++i) {
            const PartialMorphism& t = typing(j, i);
            if (!t.domain().same_elements(intersect(graph(j), graph(i)))) return false;
            for (const auto& [k, v] : t.total.nodes)
                if (k != v) return false;
            for (const auto& [k, v] : t.total.arrows)
                if (k != v) return false;
        }
    }
    return true;
}

bool same_chain(const GraphChain& a, const GraphChain& b) {
    if (a.depth() != b.depth()) return false;
    for (int j = 0; j <= a.depth(); ++j) {
        if (!a.graph(j).same_elements(b.graph(j))) return false;
        for (int i = 0; i < j; ++i)
            if (!same_partial(a.typing(j, i), b.typing(j, i))) return false;
    }
    return true;
}

bool operator==(const GraphChain& a, const GraphChain& b) { return same_chain(a, b); }

ChainMorphismReport validate_chain_morphism(const ChainMorphism& cm) {
    using K = SquareFailure::Kind;
    ChainMorphismReport report;
    auto& out = report.failures;
    const int n = cm.from.depth();
    const int m = cm.to.depth();
    if (static_cast<int>(cm.level_map.size()) != n + 1 || static_cast<int>(cm.components.size()) != n + 1) {
        out.push_back({K::Shape, -1, -1, "", "level map and components must have one entry per source level"});
        return report;
    }
    const auto& f = cm.level_map;
    if (f[0] != 0) out.push_back({K::RootNotFixed, -1, 0, "", "the root level must map to the root"});
    for (int i = 0; i <= n; ++i) {
        const auto fi = f[static_cast<std::size_t>(i)];
        if (fi < 0 || fi > m) {
            out.push_back({K::Shape, -1, i, "", "level " + std::to_string(i) + " maps outside the target chain"});
            return report;
        }
        if (i > 0 && f[static_cast<std::size_t>(i - 1)] >= fi)
            out.push_back({K::NotMonotone, i, i - 1, "", "level map is not strictly monotone"});
    }
    bool components_ok = true;
    for (int i = 0; i <= n; ++i) {
        const Morphism& phi = cm.components[static_cast<std::size_t>(i)];
        const int fi = f[static_cast<std::size_t>(i)];
        std::optional<std::string> problem;
        if (!phi.from.same_elements(cm.from.graph(i)) || !phi.to.same_elements(cm.to.graph(fi)))
            problem = "component " + std::to_string(i) + " does not connect level " + std::to_string(i) +
                      " to level " + std::to_string(fi);
        else
            problem = phi.defect();
        if (problem) {
            out.push_back({K::BadComponent, -1, i, "", *problem});
            components_ok = false;
        }
    }
    if (!components_ok) return report;

    for (int j = 1; j <= n; ++j)
        for (int i = 0; i < j; ++i) {
            const Morphism& phi_j = cm.components[static_cast<std::size_t>(j)];
            const Morphism& phi_i = cm.components[static_cast<std::size_t>(i)];
            const PartialMorphism& tg = cm.from.typing(j, i);
            const PartialMorphism& th = cm.to.typing(f[static_cast<std::size_t>(j)], f[static_cast<std::size_t>(i)]);
            Graph reflected = preimage(phi_j, th.domain());
            if (auto e = first_difference(tg.domain(), reflected)) {
                bool typed = tg.defined(*e);
                out.push_back({K::NotReflecting, j, i, to_string(*e),
                               to_string(*e) + (typed ? " is typed but its image is not" : " is untyped but its image is typed") +
                                   " at " + level_pair(j, i)});
                continue;
            }
            for (const auto& e : tg.domain().elements()) {
                auto lhs = phi_i.image(*tg.image(e));
                auto rhs = th.image(*phi_j.image(e));
                if (lhs != rhs) {
                    out.push_back({K::NotCommuting, j, i, to_string(e),
                                   "typing square " + level_pair(j, i) + " does not commute on " + to_string(e)});
                    break;
                }
            }
        }
    return report;
}

ChainMorphism chain_identity(const GraphChain& c) {
    ChainMorphism cm{c, c, {}, {}};
    for (int i = 0; i <= c.depth(); ++i) {
        cm.level_map.push_back(i);
        cm.components.push_back(identity(c.graph(i)));
    }
    return cm;
}

GraphChain refactor_inclusion_chain(const Graph& s, const std::vector<Graph>& subgraphs) {
    if (subgraphs.empty() || !subgraphs.front().same_elements(s))
        throw Error(ErrorKind::RootMismatch, "the root of an inclusion chain must be '" + s.name() + "' itself");
    for (const auto& g : subgraphs)
        if (!is_subgraph(g, s))
            throw Error(ErrorKind::NotSubgraph, "'" + g.name() + "' is not a subgraph of '" + s.name() + "'");
    TypingFamily typings;
    const int n = static_cast<int>(subgraphs.size()) - 1;
    for (int j = 1; j <= n; ++j)
        for (int i = 0; i < j; ++i) {
            const Graph& gj = subgraphs[static_cast<std::size_t>(j)];
            const Graph& gi = subgraphs[static_cast<std::size_t>(i)];
            Graph dom = intersect(gj, gi);
            typings.emplace(std::make_pair(j, i), PartialMorphism{gj, inclusion(dom, gi)});
        }
    return GraphChain::build(subgraphs, std::move(typings));
}

std::vector<TypingViolation> check_multilevel_typing(const MultilevelTyping& mt) {
    std::vector<TypingViolation> out;
    const int m = mt.chain.depth();
    if (static_cast<int>(mt.sigmas.size()) != m + 1) {
        out.push_back({-1, -1, "", "expected one typing morphism per chain level"});
        return out;
    }
    for (int i = 0; i <= m; ++i) {
        const PartialMorphism& s = mt.sigmas[static_cast<std::size_t>(i)];
        if (!s.from.same_elements(mt.subject) || !s.to().same_elements(mt.chain.graph(i))) {
            out.push_back({i, i, "", "typing " + std::to_string(i) + " does not connect the subject to its level"});
            return out;
        }
        if (auto d = s.total.defect()) {
            out.push_back({i, i, "", *d});
            return out;
        }
    }
    for (const auto& e : mt.subject.elements())
        if (!mt.sigmas[0].defined(e)) {
            out.push_back({0, 0, to_string(e), to_string(e) + " has no root type"});
            break;
        }
    for (int j = 1; j <= m; ++j)
        for (int i = 0; i < j; ++i) {
            const PartialMorphism& sj = mt.sigmas[static_cast<std::size_t>(j)];
            const PartialMorphism& si = mt.sigmas[static_cast<std::size_t>(i)];
            const PartialMorphism& tau = mt.chain.typing(j, i);
            Graph lhs = preimage(sj.total, tau.domain());
            Graph rhs = intersect(sj.domain(), si.domain());
            if (auto e = first_difference(lhs, rhs)) {
                out.push_back({j, i, to_string(*e),
                               "typing of " + to_string(*e) + " at " + level_pair(j, i) + " is not compatible"});
                continue;
            }
            for (const auto& e : lhs.elements())
                if (tau.image(*sj.image(e)) != si.image(e)) {
                    out.push_back({j, i, to_string(e),
                                   "types of " + to_string(e) + " at " + level_pair(j, i) + " disagree"});
                    break;
                }
        }
    return out;
}

ChainTyping typing_to_chain(const MultilevelTyping& mt) {
    auto violations = check_multilevel_typing(mt);
    if (!violations.empty()) throw Error(ErrorKind::CompatibilityViolation, violations.front().message);
    std::vector<Graph> levels;
    for (const auto& s : mt.sigmas) levels.push_back(s.domain());
    levels[0] = mt.subject;
    ChainTyping out;
    out.chain = refactor_inclusion_chain(mt.subject, levels);
    out.typing = ChainMorphism{out.chain, mt.chain, {}, {}};
    for (int i = 0; i <= mt.chain.depth(); ++i) {
        out.typing.level_map.push_back(i);
        Morphism c = mt.sigmas[static_cast<std::size_t>(i)].total;
        c.from = out.chain.graph(i);
        out.typing.components.push_back(std::move(c));
    }
    return out;
}

ChainPushoutResult chain_pushout(const ChainMorphism& l, const ChainMorphism& m) {
    require_same_depth_inclusion(l, "l");
    if (m.from.depth() != l.from.depth())
        throw Error(ErrorKind::DepthMismatch, "l and m must start at the same chain");
    require_inclusion_chain(l.from, "L");
    require_inclusion_chain(l.to, "I");
    require_inclusion_chain(m.to, "S");
    const int n = l.from.depth();
    const int depth = m.to.depth();
    if (static_cast<int>(m.level_map.size()) != n + 1 || static_cast<int>(m.components.size()) != n + 1)
        throw Error(ErrorKind::DepthMismatch, "m must have one component per level");

    PushoutResult base = pushout(l.components[0], m.components[0]);
    const Graph& d0 = base.object;

    std::vector<Graph> levels(static_cast<std::size_t>(depth + 1));
    levels[0] = d0;
    std::vector<bool> hit(static_cast<std::size_t>(depth + 1), false);
    hit[0] = true;
    for (int i = 1; i <= n; ++i) {
        const int fi = m.level_map[static_cast<std::size_t>(i)];
        const Graph& s = m.to.graph(fi);
        const Graph& ii = l.to.graph(i);
        std::set<Element> image;
        for (const auto& e : ii.elements()) image.insert(*base.d.image(e));
        levels[static_cast<std::size_t>(fi)] =
            restrict_graph(d0, [&](const Element& e) { return s.contains(e) || image.count(e); }, s.name());
        hit[static_cast<std::size_t>(fi)] = true;
    }
    for (int j = 1; j <= depth; ++j)
        if (!hit[static_cast<std::size_t>(j)]) levels[static_cast<std::size_t>(j)] = m.to.graph(j);

    ChainPushoutResult out;
    out.object = refactor_inclusion_chain(d0, levels);
    out.s = ChainMorphism{m.to, out.object, {}, {}};
    for (int j = 0; j <= depth; ++j) {
        out.s.level_map.push_back(j);
        out.s.components.push_back(inclusion(m.to.graph(j), out.object.graph(j)));
    }
    out.d = ChainMorphism{l.to, out.object, m.level_map, {}};
    for (int i = 0; i <= n; ++i)
        out.d.components.push_back(
            restrict_to(base.d, l.to.graph(i), out.object.graph(m.level_map[static_cast<std::size_t>(i)])));
    return out;
}

ChainPullbackComplementResult chain_pullback_complement(const ChainMorphism& r, const ChainMorphism& d) {
    require_same_depth_inclusion(r, "r");
    if (d.from.depth() != r.to.depth())
        throw Error(ErrorKind::DepthMismatch, "d must start at the codomain of r");
    require_inclusion_chain(r.to, "I");
    require_inclusion_chain(d.to, "D");
    const int n = r.from.depth();
    const int depth = d.to.depth();

    PullbackComplementResult base = pullback_complement(r.components[0], d.components[0]);
    const Graph& t0 = base.object;
    std::vector<Graph> levels;
    for (int j = 0; j <= depth; ++j) levels.push_back(intersect(d.to.graph(j), t0, d.to.graph(j).name()));
    levels[0] = t0;

    ChainPullbackComplementResult out;
    out.object = refactor_inclusion_chain(t0, levels);
    out.t_in = ChainMorphism{r.from, out.object, d.level_map, {}};
    for (int i = 0; i <= n; ++i)
        out.t_in.components.push_back(
            restrict_to(base.t_in, r.from.graph(i), out.object.graph(d.level_map[static_cast<std::size_t>(i)])));
    out.t_sub = ChainMorphism{out.object, d.to, {}, {}};
    for (int j = 0; j <= depth; ++j) {
        out.t_sub.level_map.push_back(j);
        out.t_sub.components.push_back(inclusion(out.object.graph(j), d.to.graph(j)));
    }
    return out;
}

} // namespace mlm
