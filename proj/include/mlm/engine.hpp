#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mlm/hierarchy.hpp"
#include "mlm/matcher.hpp"
#include "mlm/mcmt.hpp"

namespace mlm {

// Injective matches of the rule's left side into the target model whose
// element types agree with the rule's concrete types.
std::vector<Morphism> find_rule_matches(const TwoLevelRule& rule, const Hierarchy& h);

struct Successor {
    Model model;
    Morphism match;
    std::vector<Element> created;
    std::vector<Element> deleted;
};

struct Rejection {
    Morphism match;
    std::string reason;
};

struct ApplyResult {
    std::vector<Successor> successors;
    std::vector<Rejection> rejected;
};

// Applies the rule at every valid match, or only at `at`. Throws TypeMismatch
// when the hierarchy does not carry the rule's stack.
ApplyResult apply_two_level_rule(const TwoLevelRule& rule, const Hierarchy& h,
                                 const std::optional<Morphism>& at = std::nullopt);

// Direct application through the chain pushout and pullback complement.
// Throws IncompatibleMatch, DanglingDeletion or IdentificationConflict.
struct DirectResult {
    Hierarchy hierarchy;
    GraphChain d_chain;           // 𝒟
    GraphChain t_chain;           // 𝒯
    ChainMorphism sigma_s;        // (σ^S, id)
    ChainMorphism sigma_d;        // (σ^D, id)
    ChainMorphism sigma_i;        // (σ^I, id) into the META chain
    ChainMorphism binding;        // (b, f)
    ChainMorphism s;              // 𝒮 ↪ 𝒟
    ChainMorphism d;              // ℐ → 𝒟
    std::vector<Element> created;
    std::vector<Element> deleted;
};

DirectResult apply_mcmt(const McmtRule& rule, const Hierarchy& h, const std::string& target, const MetaMatch& mm,
                        const Morphism& m);

struct TraceStep {
    std::size_t step = 0;
    std::string rule;
    std::map<std::string, std::string> match; // rule element → model element
    std::vector<Element> created;
    std::vector<Element> deleted;
};

struct ExecutionTrace {
    std::vector<TraceStep> steps;
    Hierarchy final_state;
};

using StepObserver = std::function<void(const Hierarchy&, const TraceStep&)>;

// Proliferates once, then repeatedly applies one (rule, match) pair drawn
// uniformly with a seeded generator until nothing applies or max_steps.
ExecutionTrace run(const std::vector<McmtRule>& rules, const Hierarchy& h, const std::string& target,
                   std::size_t max_steps, std::uint64_t seed, const StepObserver& observe = {});

std::string trace_line(const TraceStep& step);

} // namespace mlm
