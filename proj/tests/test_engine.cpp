#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mlm/engine.hpp"
#include "mlm/error.hpp"
#include "pipeline.hpp"

using namespace mlm;
using fixture::plant;
using fixture::plant_rule;
using fixture::plant_rules;

namespace {

const std::string kHammer = "hammer_config";

TwoLevelRule two_level(const std::string& rule, std::size_t index, const Hierarchy& h = plant()) {
    return proliferate(plant_rule(rule), h, kHammer).at(index);
}

// The two-level rule whose match binds `name` at level 2 to `value`.
TwoLevelRule bound(const std::string& rule, const std::string& name, const std::string& value,
                   const Hierarchy& h = plant()) {
    for (auto& r : proliferate(plant_rule(rule), h, kHammer))
        if (r.match.bindings.at(2).at(name) == Element{value}) return r;
    throw std::runtime_error("no binding");
}

TypeRef type_of(const Model& m, const Element& e) { return *m.at(e).type; }

// hammer_config with a Hammer part held by c2 (which cout links to t1).
Hierarchy with_part_on_conveyor() {
    Model cfg = plant().model(kHammer);
    cfg.graph.add_node("p");
    cfg.info[Element{"p"}] = ElementInfo{TypeRef{"hammer_plant", Element{"Hammer"}}, {}, {}, {}};
    Arrow k{"c2", "k", "p"};
    cfg.graph.add_arrow(k);
    cfg.info[Element{k}] = ElementInfo{TypeRef{"generic_plant", Element{Arrow{"Container", "contains", "Part"}}}, {}, {}, {}};
    return plant().with_model(cfg);
}

} // namespace

TEST(Apply, CreatePartAddsAHandleAndItsCreatesArrow) {
    auto rule = bound("CreatePart", "M1", "GenHandle");
    auto res = apply_two_level_rule(rule, plant());
    ASSERT_EQ(res.successors.size(), 1u);
    const Successor& s = res.successors[0];
    EXPECT_EQ(s.match.node("m1"), "ghandle");
    EXPECT_EQ(s.created.size(), 2u);
    EXPECT_TRUE(s.deleted.empty());
    const Model& before = plant().model(kHammer);
    EXPECT_EQ(s.model.graph.node_count(), before.graph.node_count() + 1);
    ASSERT_TRUE(s.model.graph.has_node("p1$0"));
    EXPECT_EQ(type_of(s.model, Element{"p1$0"}), (TypeRef{"hammer_plant", Element{"Handle"}}));
    Arrow c{"ghandle", "c1$0", "p1$0"};
    ASSERT_TRUE(s.model.graph.has_arrow(c));
    EXPECT_EQ(type_of(s.model, Element{c}), (TypeRef{"hammer_plant", Element{Arrow{"GenHandle", "creates", "Handle"}}}));
    EXPECT_TRUE(validate_hierarchy(plant().with_model(s.model)).empty());
}

TEST(Apply, IdentityRuleLeavesModelUnchanged) {
    auto r = parse_rule_module(R"(rules M { rule Keep {
      meta { M1 : Machine mm1 }
      from { m1 : M1 }
      to { m1 : M1 }
    } })", plant().root().graph).rules;
    auto p = proliferate_all(r, plant(), kHammer);
    ASSERT_EQ(p.rules.size(), 3u);
    for (const auto& rule : p.rules) {
        auto res = apply_two_level_rule(rule, plant());
        ASSERT_EQ(res.successors.size(), 1u) << rule.name;
        EXPECT_EQ(res.successors[0].model, plant().model(kHammer));
    }
}

TEST(Apply, SendPartOutMovesThePartIntoTheContainer) {
    auto created = apply_two_level_rule(bound("CreatePart", "M1", "GenHead"), plant()).successors.at(0);
    auto h = plant().with_model(created.model);
    auto rule = bound("SendPartOut", "M1", "GenHead");
    const std::ptrdiff_t delta = static_cast<std::ptrdiff_t>(rule.rhs.arrow_count()) -
                                 static_cast<std::ptrdiff_t>(rule.lhs.arrow_count());
    auto res = apply_two_level_rule(rule, h);
    ASSERT_EQ(res.successors.size(), 1u);
    const Model& after = res.successors[0].model;
    const Model& before = h.model(kHammer);
    EXPECT_EQ(static_cast<std::ptrdiff_t>(after.graph.arrow_count()),
              static_cast<std::ptrdiff_t>(before.graph.arrow_count()) + delta);
    EXPECT_EQ(delta, 0);
    EXPECT_FALSE(after.graph.has_arrow({"ghead", "c1$0", "p1$0"}));
    EXPECT_TRUE(after.graph.has_arrow({"c1", "ct$0", "p1$0"}));
    EXPECT_EQ(after.graph.node_count(), before.graph.node_count());
}

TEST(Apply, TransferPartRetargetsContainment) {
    auto h = with_part_on_conveyor();
    ASSERT_TRUE(validate_hierarchy(h).empty());
    auto p = proliferate(plant_rule("TransferPart"), h, kHammer);
    std::size_t applied = 0;
    for (const auto& rule : p) {
        for (const auto& s : apply_two_level_rule(rule, h).successors) {
            ++applied;
            EXPECT_EQ(s.match.node("c1"), "c2");
            EXPECT_EQ(s.match.node("c2"), "t1");
            EXPECT_EQ(s.match.node("m1"), "assembler");
            EXPECT_FALSE(s.model.graph.has_arrow({"c2", "k", "p"}));
            EXPECT_TRUE(s.model.graph.has_arrow({"t1", "k2$0", "p"}));
            EXPECT_TRUE(validate_hierarchy(h.with_model(s.model)).empty());
        }
    }
    EXPECT_EQ(applied, 1u);
}

TEST(Apply, ForeignStackIsATypeMismatch) {
    auto rule = two_level("CreatePart", 0);
    Hierarchy h = plant();
    rule.stack = {"root", "generic_plant", "stool_plant"};
    try {
        apply_two_level_rule(rule, h);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::TypeMismatch);
    }
}

TEST(Apply, DanglingDeletionIsRejectedNotApplied) {
    // Deleting a machine that still has arrows attached.
    auto r = parse_rule_module(R"(rules M { rule Drop {
      meta { M1 : Machine mm1 }
      from { m1 : M1 }
      to {}
    } })", plant().root().graph).rules;
    for (const auto& rule : proliferate_all(r, plant(), kHammer).rules) {
        auto res = apply_two_level_rule(rule, plant());
        EXPECT_TRUE(res.successors.empty());
        EXPECT_EQ(res.rejected.size(), 1u);
    }
}

TEST(Direct, CreatePartAgreesWithTwoLevelApplication) {
    auto rule = bound("CreatePart", "M1", "GenHandle");
    auto m = find_rule_matches(rule, plant()).at(0);
    auto direct = apply_mcmt(rule.expanded, plant(), kHammer, rule.match, m);
    auto two = apply_two_level_rule(rule, plant(), m);
    EXPECT_EQ(direct.hierarchy.model(kHammer), two.successors.at(0).model);
    EXPECT_TRUE(validate_chain_morphism(direct.sigma_d).ok());
    EXPECT_TRUE(validate_chain_morphism(direct.binding).ok());
    EXPECT_EQ(direct.hierarchy.model("hammer_plant"), plant().model("hammer_plant"));
}

TEST(Direct, IncompatibleBottomMatchIsReported) {
    auto rule = bound("CreatePart", "M1", "GenHandle");
    Graph l = rule.lhs;
    auto m = make_morphism(l, plant().model(kHammer).graph, {{"m1", "ghead"}}, {});
    try {
        apply_mcmt(rule.expanded, plant(), kHammer, rule.match, m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IncompatibleMatch);
    }
}

TEST(Direct, EmptyFromCreatesAtTheBottom) {
    auto r = parse_rule_module(R"(rules M { rule Spawn {
      meta { Tray : Container$ mm1 }
      from {}
      to { t : Tray }
    } })", plant().root().graph).rules.at(0);
    Stack stack(plant(), kHammer);
    auto mm = match_all(r, stack).at(0);
    Graph empty("L");
    auto m = make_morphism(empty, plant().model(kHammer).graph, {}, {});
    auto d = apply_mcmt(r, plant(), kHammer, mm, m);
    const Model& after = d.hierarchy.model(kHammer);
    EXPECT_TRUE(after.graph.has_node("t$0"));
    EXPECT_EQ(type_of(after, Element{"t$0"}), (TypeRef{"hammer_plant", Element{"Tray"}}));
}

TEST(Pipeline, DirectAndProliferatedApplicationAgreeOnReachableStates) {
    auto states = pipeline::reachable_states({1, 2, 3}, 20);
    auto eq = pipeline::compare_pipelines(states, kHammer);
    EXPECT_GT(states.size(), 20u);
    EXPECT_GT(eq.triples, 100u);
    EXPECT_EQ(eq.mismatches, 0u) << eq.first;
}

TEST(Pipeline, StoolBranchAgreesToo) {
    // The stool plant is only exercised from its initial state.
    auto eq = pipeline::compare_pipelines({plant()}, "stool_config");
    EXPECT_EQ(eq.mismatches, 0u) << eq.first;
    EXPECT_GT(eq.triples, 0u);
}

TEST(Run, EmptyRuleSetDoesNothing) {
    auto t = run({}, plant(), kHammer, 10, 1);
    EXPECT_TRUE(t.steps.empty());
    EXPECT_EQ(t.final_state, plant());
}

TEST(Run, SameSeedSameTrace) {
    auto a = run(plant_rules(), plant(), kHammer, 30, 7);
    auto b = run(plant_rules(), plant(), kHammer, 30, 7);
    ASSERT_EQ(a.steps.size(), b.steps.size());
    for (std::size_t i = 0; i < a.steps.size(); ++i) EXPECT_EQ(trace_line(a.steps[i]), trace_line(b.steps[i]));
    EXPECT_EQ(a.final_state, b.final_state);
}

TEST(Run, StepsPreserveTypingAndTouchOnlyTheMatch) {
    Hierarchy prev = plant();
    std::size_t steps = 0;
    run(plant_rules(), plant(), kHammer, 40, 3, [&](const Hierarchy& h, const TraceStep& step) {
        ++steps;
        EXPECT_TRUE(validate_hierarchy(h).empty()) << "step " << step.step;
        const Model& before = prev.model(kHammer);
        const Model& after = h.model(kHammer);
        // Conservation of elements.
        EXPECT_EQ(after.graph.elements().size() + step.deleted.size(),
                  before.graph.elements().size() + step.created.size());
        std::set<std::string> matched;
        for (const auto& [k, v] : step.match) matched.insert(v);
        for (const auto& e : step.deleted) {
            EXPECT_TRUE(before.graph.contains(e));
            EXPECT_FALSE(after.graph.contains(e));
            EXPECT_TRUE(matched.count(is_node(e) ? as_node(e) : to_string(e))) << to_string(e);
        }
        for (const auto& e : step.created) EXPECT_FALSE(before.graph.contains(e));
        // Frame: everything not deleted survives with its typing.
        for (const auto& e : before.graph.elements()) {
            if (std::find(step.deleted.begin(), step.deleted.end(), e) != step.deleted.end()) continue;
            ASSERT_TRUE(after.graph.contains(e)) << to_string(e);
            EXPECT_EQ(after.at(e), before.at(e));
        }
        for (const auto& m : h.models())
            if (m.name != kHammer) EXPECT_EQ(m, prev.model(m.name));
        prev = h;
    });
    EXPECT_GT(steps, 10u);
}

TEST(Run, SeedsReachAHammer) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto g = pipeline::run_to_hammer(seed, 50);
        EXPECT_TRUE(g.reached) << "seed " << seed;
        EXPECT_EQ(g.invalid_steps, 0u) << "seed " << seed << ": " << g.first_violation;
    }
}

TEST(Run, TraceLinesAreJson) {
    auto t = run(plant_rules(), plant(), kHammer, 1, 5);
    ASSERT_EQ(t.steps.size(), 1u);
    const std::string line = trace_line(t.steps[0]);
    EXPECT_EQ(line.rfind("{\"step\":1,\"rule\":\"", 0), 0u) << line;
    EXPECT_EQ(line.find('\n'), std::string::npos);
}
