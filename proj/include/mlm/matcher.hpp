#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlm/chain.hpp"
#include "mlm/hierarchy.hpp"
#include "mlm/mcmt.hpp"

namespace mlm {

// The models above a target model: level 0 is the root, level depth() the
// target's parent. Sibling branches are not visible.
class Stack {
public:
    Stack(const Hierarchy& h, const std::string& target);

    int depth() const { return static_cast<int>(models_.size()) - 1; }
    const Model& model(int level) const { return models_.at(static_cast<std::size_t>(level)); }
    const Model& target() const { return target_; }

    // Type of an element of model(level) at a strictly higher level, or of an
    // element of the target when level == depth() + 1.
    std::optional<Element> type_at(int level, const Element& e, int at_level) const;

    // τ chain over levels 0..depth().
    GraphChain chain() const;

private:
    std::vector<Model> models_;
    Model target_;
    // types_[level][e]: transitive types of e, target at depth() + 1.
    std::vector<std::map<Element, std::vector<std::pair<int, Element>>>> types_;
};

using Binding = std::map<std::string, Element>;

struct MetaMatch {
    std::vector<int> level_map; // level_map[k] = stack level of META level k
    std::vector<Binding> bindings; // bindings[k]: META element name → stack element

    friend bool operator==(const MetaMatch&, const MetaMatch&) = default;
};

// All injective, structure- and type-consistent bindings of META level
// `meta_level` into stack level `stack_level`, given the upper levels of
// `partial`.
std::vector<Binding> graph_match(const McmtRule& rule, int meta_level, const Stack& stack, int stack_level,
                                 const MetaMatch& partial);

// Every complete META match with a strictly monotone level map, in discovery
// order. Returns whether any exists.
bool match(const McmtRule& rule, const Stack& stack, std::vector<MetaMatch>& matches);
std::vector<MetaMatch> match_all(const McmtRule& rule, const Stack& stack);

// (b, f) as a chain morphism from the META chain into the stack chain.
ChainMorphism to_chain_morphism(const McmtRule& rule, const Graph& root, const Stack& stack, const MetaMatch& mm);

// One rule per combination of values of the bounded multiplicities that
// META arrows bind to. Replicated nodes are named `<name>$<i>`.
std::vector<McmtRule> expand_cardinalities(const McmtRule& rule, const MetaMatch& mm, const Stack& stack);

struct TwoLevelRule {
    std::string name;
    std::string source_rule;
    std::size_t match_index = 0;
    std::size_t expansion_index = 0;
    MetaMatch match;
    McmtRule expanded; // the rule after cardinality expansion
    Graph lhs;
    Graph interface;
    Graph rhs;
    std::map<Element, TypeRef> types;        // interface element → concrete type
    std::map<Element, int> type_levels;      // stack level of that type
    std::map<Element, Potency> potencies;    // matcher constraints on lhs elements
    std::string target;                      // model the rule was proliferated for
    std::vector<std::string> stack;          // model names, root first
};

struct ProliferationReport {
    std::string rule;
    std::size_t matches = 0;
    std::size_t rules = 0;
    bool no_matches() const { return matches == 0; }
};

struct Proliferation {
    std::vector<TwoLevelRule> rules;
    std::vector<ProliferationReport> breakdown;
};

std::vector<TwoLevelRule> proliferate(const McmtRule& rule, const Hierarchy& h, const std::string& target,
                                      ProliferationReport* report = nullptr);
Proliferation proliferate_all(const std::vector<McmtRule>& rules, const Hierarchy& h, const std::string& target);

std::string rules_to_json(const Hierarchy& h, const Proliferation& p);

} // namespace mlm
