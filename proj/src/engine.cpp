#include "mlm/engine.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <set>

#include <json.hpp>

#include "mlm/error.hpp"

namespace mlm {

namespace {

void require_stack(const TwoLevelRule& rule, const Hierarchy& h) {
    const Model* target = h.find(rule.target);
    if (!target) throw Error(ErrorKind::TypeMismatch, "rule '" + rule.name + "' targets unknown model '" + rule.target + "'");
    auto branch = h.branch(target->name);
    std::vector<std::string> names;
    for (std::size_t i = 0; i + 1 < branch.size(); ++i) names.push_back(branch[i]->name);
    if (names != rule.stack)
        throw Error(ErrorKind::TypeMismatch, "rule '" + rule.name + "' is typed over a different stack");
}

std::vector<Element> difference(const Graph& a, const Graph& b) {
    std::vector<Element> out;
    for (const auto& e : a.elements())
        if (!b.contains(e)) out.push_back(e);
    return out;
}

Model rebuild_model(const Model& source, Graph result, const std::map<Element, TypeRef>& fresh_types) {
    Model out;
    out.name = source.name;
    out.parent = source.parent;
    out.level = source.level;
    result.rename(source.name);
    for (const auto& e : result.elements()) {
        auto it = source.info.find(e);
        if (it != source.info.end() && source.graph.contains(e)) {
            out.info.emplace(e, it->second);
            continue;
        }
        ElementInfo info;
        info.type = fresh_types.at(e);
        out.info.emplace(e, info);
    }
    out.graph = std::move(result);
    return out;
}

} // namespace

std::vector<Morphism> find_rule_matches(const TwoLevelRule& rule, const Hierarchy& h) {
    require_stack(rule, h);
    Stack stack(h, rule.target);
    const Model& s = stack.target();
    const int level = stack.depth() + 1;
    auto compatible = [&](const Element& x, const Element& y) {
        auto ty = stack.type_at(level, y, rule.type_levels.at(x));
        if (!ty || *ty != rule.types.at(x).element) return false;
        if (auto p = rule.potencies.find(x); p != rule.potencies.end() && !s.at(y).potency.contains(p->second))
            return false;
        return true;
    };
    MatchFilter filter;
    filter.node = [&](const std::string& p, const std::string& n) { return compatible(Element{p}, Element{n}); };
    filter.arrow = [&](const Arrow& a, const Arrow& b) { return compatible(Element{a}, Element{b}); };
    return find_homomorphisms(rule.lhs, s.graph, true, filter);
}

ApplyResult apply_two_level_rule(const TwoLevelRule& rule, const Hierarchy& h, const std::optional<Morphism>& at) {
    std::vector<Morphism> matches = find_rule_matches(rule, h);
    if (at) {
        bool valid = std::any_of(matches.begin(), matches.end(), [&](const Morphism& m) { return same_morphism(m, *at); });
        if (!valid) throw Error(ErrorKind::IncompatibleMatch, "the given match is not a type-compatible match of '" + rule.name + "'");
        matches = {*at};
    }
    const Model& source = h.model(rule.target);
    Morphism l = inclusion(rule.lhs, rule.interface);
    Morphism r = inclusion(rule.rhs, rule.interface);
    ApplyResult out;
    for (const auto& m : matches) {
        try {
            PushoutResult po = pushout(l, m);
            PullbackComplementResult pbc = pullback_complement(r, po.d);
            std::map<Element, TypeRef> fresh;
            for (const auto& x : rule.interface.elements())
                if (!rule.lhs.contains(x)) fresh.emplace(*po.d.image(x), rule.types.at(x));
            Successor succ{rebuild_model(source, pbc.object, fresh), m, difference(pbc.object, source.graph),
                           difference(source.graph, pbc.object)};
            out.successors.push_back(std::move(succ));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DanglingDeletion && e.kind() != ErrorKind::IdentificationConflict) throw;
            out.rejected.push_back({m, e.what()});
        }
    }
    return out;
}

namespace {

ChainMorphism level_inclusions(const GraphChain& sub, const GraphChain& host) {
    ChainMorphism cm{sub, host, {}, {}};
    for (int i = 0; i <= sub.depth(); ++i) {
        cm.level_map.push_back(i);
        cm.components.push_back(inclusion(sub.graph(i), host.graph(i)));
    }
    return cm;
}

Morphism restrict_morphism(const Morphism& m, const Graph& sub, const Graph& to) {
    Morphism r{sub, to, {}, {}};
    for (const auto& n : sub.nodes()) r.nodes.emplace(n, m.node(n));
    for (const auto& a : sub.arrows()) r.arrows.emplace(a, m.arrow(a));
    return r;
}

} // namespace

DirectResult apply_mcmt(const McmtRule& rule, const Hierarchy& h, const std::string& target, const MetaMatch& mm,
                        const Morphism& m) {
    const Graph& root = h.root().graph;
    Stack stack(h, target);
    const Model& source = stack.target();

    DirectResult out;
    out.binding = to_chain_morphism(rule, root, stack, mm);
    ChainMorphismReport report = validate_chain_morphism(out.binding);
    if (!report.ok()) {
        const auto& f = report.failures.front();
        throw Error(ErrorKind::IncompatibleMatch, "meta match is not a chain morphism at (" + std::to_string(f.j) +
                                                      "," + std::to_string(f.i) + "): " + f.message);
    }

    const Graph L = rule.lhs();
    const Graph I = rule.interface();
    const Graph R = rule.rhs();
    if (!m.from.same_elements(L) || !m.to.same_elements(source.graph) || m.defect())
        throw Error(ErrorKind::IncompatibleMatch, "m is not a homomorphism from the rule's left side into '" + target + "'");
    ChainTyping lt = typing_to_chain(rule.typing_of(L, root));
    ChainTyping it = typing_to_chain(rule.typing_of(I, root));
    ChainTyping rt = typing_to_chain(rule.typing_of(R, root));
    out.sigma_i = it.typing;

    DerivedTyping derived = derive_typing_chain(h, source.name);
    ChainTyping st = typing_to_chain(derived.typing);
    out.sigma_s = st.typing;

    const auto& f = mm.level_map;
    for (int i = 0; i <= rule.depth; ++i) {
        const Morphism& sl = lt.typing.components[static_cast<std::size_t>(i)];
        const Morphism& b = out.binding.components[static_cast<std::size_t>(i)];
        const Morphism& ss = st.typing.components[static_cast<std::size_t>(f[static_cast<std::size_t>(i)])];
        for (const auto& x : sl.from.elements()) {
            auto y = m.image(x);
            auto via_s = ss.image(*y);
            auto via_b = b.image(*sl.image(x));
            if (!via_s || via_s != via_b)
                throw Error(ErrorKind::IncompatibleMatch,
                            "typing of " + to_string(x) + " at level " + std::to_string(i) + " is not preserved by the match");
        }
    }

    ChainMorphism l = level_inclusions(lt.chain, it.chain);
    ChainMorphism r = level_inclusions(rt.chain, it.chain);
    ChainMorphism mc{lt.chain, st.chain, f, {}};
    for (int i = 0; i <= rule.depth; ++i)
        mc.components.push_back(restrict_morphism(m, lt.chain.graph(i), st.chain.graph(f[static_cast<std::size_t>(i)])));

    ChainPushoutResult po = chain_pushout(l, mc);
    ChainPullbackComplementResult pbc = chain_pullback_complement(r, po.d);
    out.d_chain = po.object;
    out.t_chain = pbc.object;
    out.s = po.s;
    out.d = po.d;

    // σ^D agrees with σ^S on S and sends fresh copies of I elements to the
    // bound types of their interface typing.
    const GraphChain& tg = out.sigma_s.to;
    out.sigma_d = ChainMorphism{po.object, tg, {}, {}};
    const Morphism& d0 = po.d.components[0];
    std::map<Element, Element> origin; // fresh D element → interface element
    for (const auto& x : I.elements())
        if (!L.contains(x)) origin.emplace(*d0.image(x), x);
    std::vector<int> inverse(static_cast<std::size_t>(tg.depth() + 1), -1);
    for (int i = 0; i <= rule.depth; ++i) inverse[static_cast<std::size_t>(f[static_cast<std::size_t>(i)])] = i;
    for (int j = 0; j <= tg.depth(); ++j) {
        const Graph& dj = po.object.graph(j);
        const Morphism& sj = st.typing.components[static_cast<std::size_t>(j)];
        Morphism c{dj, tg.graph(j), {}, {}};
        auto assign = [&](const Element& y) -> std::optional<Element> {
            if (source.graph.contains(y)) return sj.image(y);
            const int i = inverse[static_cast<std::size_t>(j)];
            if (i < 0) return std::nullopt;
            const Element& x = origin.at(y);
            auto sx = it.typing.components[static_cast<std::size_t>(i)].image(x);
            if (!sx) return std::nullopt;
            return out.binding.components[static_cast<std::size_t>(i)].image(*sx);
        };
        for (const auto& n : dj.nodes())
            if (auto t = assign(Element{n})) c.nodes.emplace(n, as_node(*t));
        for (const auto& a : dj.arrows())
            if (auto t = assign(Element{a})) c.arrows.emplace(a, as_arrow(*t));
        if (auto defect = c.defect())
            throw Error(ErrorKind::IncompatibleMatch, "induced typing of level " + std::to_string(j) + " fails: " + *defect);
        out.sigma_d.level_map.push_back(j);
        out.sigma_d.components.push_back(std::move(c));
    }

    // The direct type of a new element is its type at the deepest typed level.
    const Graph& t0 = pbc.object.graph(0);
    std::map<Element, TypeRef> fresh;
    for (const auto& y : t0.elements()) {
        if (source.graph.contains(y)) continue;
        for (int j = tg.depth(); j >= 0; --j) {
            if (!pbc.object.graph(j).contains(y)) continue;
            if (auto t = out.sigma_d.components[static_cast<std::size_t>(j)].image(y)) {
                fresh.emplace(y, TypeRef{stack.model(j).name, *t});
                break;
            }
        }
    }
    Model result = rebuild_model(source, t0, fresh);
    out.created = difference(t0, source.graph);
    out.deleted = difference(source.graph, t0);
    out.hierarchy = h.with_model(std::move(result));
    return out;
}

namespace {

// Unbiased draw from [0, n) that does not depend on the standard library's
// distribution implementation.
std::size_t draw(std::mt19937_64& rng, std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

} // namespace

ExecutionTrace run(const std::vector<McmtRule>& rules, const Hierarchy& h, const std::string& target,
                   std::size_t max_steps, std::uint64_t seed, const StepObserver& observe) {
    ExecutionTrace trace;
    trace.final_state = h;
    if (rules.empty()) return trace;
    const std::string name = h.resolve(target).name;
    Proliferation p = proliferate_all(rules, h, name);
    std::mt19937_64 rng(seed);
    for (std::size_t step = 1; step <= max_steps; ++step) {
        std::vector<std::pair<const TwoLevelRule*, Successor>> options;
        for (const auto& r : p.rules) {
            ApplyResult res = apply_two_level_rule(r, trace.final_state);
            for (auto& s : res.successors) options.emplace_back(&r, std::move(s));
        }
        if (options.empty()) break;
        auto& [rule, succ] = options[draw(rng, options.size())];
        TraceStep ts;
        ts.step = step;
        ts.rule = rule->name;
        for (const auto& [k, v] : succ.match.nodes) ts.match.emplace(k, v);
        for (const auto& [k, v] : succ.match.arrows) ts.match.emplace(to_string(k), to_string(v));
        ts.created = succ.created;
        ts.deleted = succ.deleted;
        trace.final_state = trace.final_state.with_model(std::move(succ.model));
        if (observe) observe(trace.final_state, ts);
        trace.steps.push_back(std::move(ts));
    }
    return trace;
}

std::string trace_line(const TraceStep& step) {
    nlohmann::ordered_json j;
    j["step"] = step.step;
    j["rule"] = step.rule;
    j["match"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : step.match) j["match"][k] = v;
    j["created"] = nlohmann::ordered_json::array();
    for (const auto& e : step.created) j["created"].push_back(to_string(e));
    j["deleted"] = nlohmann::ordered_json::array();
    for (const auto& e : step.deleted) j["deleted"].push_back(to_string(e));
    return j.dump();
}

} // namespace mlm
