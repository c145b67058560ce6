#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mlm/error.hpp"
#include "mlm/graph.hpp"

namespace mlm {

// τ_{j,i}: G_j ⇀ G_i keyed by (j, i) with i < j.
using TypingFamily = std::map<std::pair<int, int>, PartialMorphism>;

struct ChainViolation {
    ErrorKind kind;
    int k = -1; // -1 when the check involves only (j, i)
    int j = -1;
    int i = -1;
    std::string element;
    std::string message;
};

// A sequence of graphs G_0 (the root) .. G_n with typing morphisms between
// every pair of levels. Indexed by level, so graph(0) is the root.
class GraphChain {
public:
    GraphChain() = default;

    // Missing (j, i) pairs default to the empty partial morphism.
    // Throws NonTotalRootTyping or UniquenessViolation.
    static GraphChain build(std::vector<Graph> graphs, TypingFamily typings);
    static std::vector<ChainViolation> check(const std::vector<Graph>& graphs, const TypingFamily& typings);

    int depth() const { return static_cast<int>(graphs_.size()) - 1; }
    const Graph& graph(int level) const { return graphs_.at(static_cast<std::size_t>(level)); }
    const std::vector<Graph>& graphs() const { return graphs_; }
    const PartialMorphism& typing(int j, int i) const;
    const TypingFamily& typings() const { return typings_; }

    // Levels 0..n only.
    GraphChain prefix(int n) const;
    // Every G_i is a subgraph of G_0 and every τ_{j,i} is the identity on G_j ∩ G_i.
    bool is_inclusion_chain() const;

    friend bool operator==(const GraphChain& a, const GraphChain& b);

private:
    std::vector<Graph> graphs_;
    TypingFamily typings_;
};

bool same_chain(const GraphChain& a, const GraphChain& b);

struct ChainMorphism {
    GraphChain from;
    GraphChain to;
    std::vector<int> level_map;        // f: [n] → [m]
    std::vector<Morphism> components;  // φ_i: G_i → H_{f(i)}
};

struct SquareFailure {
    enum class Kind { Shape, RootNotFixed, NotMonotone, BadComponent, NotReflecting, NotCommuting };
    Kind kind;
    int j = -1;
    int i = -1;
    std::string element;
    std::string message;
};

struct ChainMorphismReport {
    std::vector<SquareFailure> failures;
    bool ok() const { return failures.empty(); }
};

ChainMorphismReport validate_chain_morphism(const ChainMorphism& cm);
ChainMorphism chain_identity(const GraphChain& c);

// Inclusion chain whose levels are the given subgraphs of S (subgraphs[0] = S).
// Throws RootMismatch or NotSubgraph.
GraphChain refactor_inclusion_chain(const Graph& s, const std::vector<Graph>& subgraphs);

// A graph typed over a chain: sigmas[i] : subject ⇀ chain.graph(i).
struct MultilevelTyping {
    Graph subject;
    GraphChain chain;
    std::vector<PartialMorphism> sigmas;
};

struct TypingViolation {
    int j = -1;
    int i = -1;
    std::string element;
    std::string message;
};

std::vector<TypingViolation> check_multilevel_typing(const MultilevelTyping& mt);

struct ChainTyping {
    GraphChain chain;      // inclusion chain over [D(σ_0) .. D(σ_m)]
    ChainMorphism typing;  // (σ, id) into mt.chain
};

// Throws CompatibilityViolation.
ChainTyping typing_to_chain(const MultilevelTyping& mt);

struct ChainPushoutResult {
    GraphChain object;
    ChainMorphism s; // 𝒮 ↪ 𝒟
    ChainMorphism d; // ℐ → 𝒟
};

// l: ℒ ↪ ℐ (same depth, identity level map), m: ℒ → 𝒮.
// Throws DepthMismatch or NotInclusionChain.
ChainPushoutResult chain_pushout(const ChainMorphism& l, const ChainMorphism& m);

struct ChainPullbackComplementResult {
    GraphChain object;
    ChainMorphism t_in;  // ℛ → 𝒯
    ChainMorphism t_sub; // 𝒯 ↪ 𝒟
};

// r: ℛ ↪ ℐ, d: ℐ → 𝒟. Throws DanglingDeletion, IdentificationConflict,
// DepthMismatch or NotInclusionChain.
ChainPullbackComplementResult chain_pullback_complement(const ChainMorphism& r, const ChainMorphism& d);

} // namespace mlm
