// Plant fixture loaders and the hand-written two-level CreatePart rules.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "mlm/hierarchy.hpp"
#include "mlm/matcher.hpp"
#include "mlm/mcmt.hpp"

namespace fixture {

inline std::string data(const std::string& file) { return std::string(MLM_DATA_DIR) + "/" + file; }

inline const mlm::Hierarchy& plant() {
    static const mlm::Hierarchy h = mlm::load_hierarchy(data("pls.json"));
    return h;
}

inline const std::vector<mlm::McmtRule>& plant_rules() {
    static const std::vector<mlm::McmtRule> rules = mlm::load_rule_module(data("pls.mcmt"), plant().root().graph).rules;
    return rules;
}

inline const mlm::McmtRule& plant_rule(const std::string& name) {
    for (const auto& r : plant_rules())
        if (r.name == name) return r;
    throw std::runtime_error("no rule " + name);
}

// Rule shape up to renaming: typed node and arrow multisets of each side.
struct Shape {
    std::multiset<std::string> lhs, interface, rhs;
    friend bool operator==(const Shape&, const Shape&) = default;
};

inline std::string signature(const mlm::Hierarchy& h, const std::map<mlm::Element, mlm::TypeRef>& types,
                             const mlm::Element& e) {
    const std::string t = mlm::type_name(h, types.at(e));
    if (mlm::is_node(e)) return t;
    const auto& a = mlm::as_arrow(e);
    return mlm::type_name(h, types.at(mlm::Element{a.source})) + " -[" + t + "]-> " +
           mlm::type_name(h, types.at(mlm::Element{a.target}));
}

inline Shape shape_of(const mlm::Hierarchy& h, const mlm::TwoLevelRule& r) {
    Shape s;
    for (const auto& e : r.lhs.elements()) s.lhs.insert(signature(h, r.types, e));
    for (const auto& e : r.interface.elements()) s.interface.insert(signature(h, r.types, e));
    for (const auto& e : r.rhs.elements()) s.rhs.insert(signature(h, r.types, e));
    return s;
}

// A generator for `part` appears in FROM; TO adds the part and the creates
// arrow of hammer_plant between them.
inline Shape hand_written_create(const std::string& machine, const std::string& part) {
    const std::string m = "hammer_plant." + machine;
    const std::string p = "hammer_plant." + part;
    const std::string creates = m + " -[hammer_plant." + machine + ".creates." + part + "]-> " + p;
    Shape s;
    s.lhs = {m};
    s.interface = {m, p, creates};
    s.rhs = {m, p, creates};
    return s;
}

} // namespace fixture
