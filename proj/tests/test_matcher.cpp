#include <gtest/gtest.h>

#include <json.hpp>

#include "fixtures.hpp"
#include "mlm/error.hpp"
#include "mlm/matcher.hpp"
#include "oracles.hpp"

using namespace mlm;
using fixture::plant;
using fixture::plant_rule;
using fixture::plant_rules;

namespace {

const std::string kHammer = "hammer_config";

McmtRule one_rule(const std::string& text, const Hierarchy& h = plant()) {
    return parse_rule_module(text, h.root().graph).rules.at(0);
}

Hierarchy with_multiplicity(const std::string& arrow_label, const std::string& target, const std::string& mult) {
    Model hp = plant().model("hammer_plant");
    hp.info.at(Element{Arrow{"Hammer", arrow_label, target}}).multiplicity = parse_multiplicity(mult);
    return plant().with_model(hp);
}

const char* kBoundedArrow = R"(rules M { rule R {
  meta {
    Part : Node$
    X : Part
    Y : Part
    h : Arrow [1..2]
    h = X -> Y
  }
  from { x : X }
  to { x : X }
} })";

} // namespace

TEST(Stack, HoldsTheModelsAboveTheTarget) {
    Stack s(plant(), kHammer);
    ASSERT_EQ(s.depth(), 2);
    EXPECT_EQ(s.model(0).name, "root");
    EXPECT_EQ(s.model(2).name, "hammer_plant");
    EXPECT_EQ(s.target().name, kHammer);
    EXPECT_EQ(s.type_at(3, Element{"ghandle"}, 1), Element{"Machine"});
    EXPECT_EQ(s.type_at(2, Element{"Handle"}, 0), Element{"Node"});
    EXPECT_FALSE(s.type_at(3, Element{Arrow{"c2", "cout", "t1"}}, 1));
    EXPECT_TRUE(GraphChain::check(s.chain().graphs(), s.chain().typings()).empty());
}

TEST(Matcher, CreatePartFindsBothGenerators) {
    Stack s(plant(), kHammer);
    const McmtRule& r = plant_rule("CreatePart");
    auto all = match_all(r, s);
    ASSERT_EQ(all.size(), 2u);
    std::set<std::pair<Element, Element>> pairs;
    for (const auto& mm : all) {
        EXPECT_EQ(mm.level_map, (std::vector<int>{0, 1, 2}));
        EXPECT_EQ(mm.bindings.at(1).at("Machine"), Element{"Machine"});
        pairs.emplace(mm.bindings.at(2).at("M1"), mm.bindings.at(2).at("P1"));
        EXPECT_TRUE(validate_chain_morphism(to_chain_morphism(r, s.model(0).graph, s, mm)).ok());
    }
    EXPECT_EQ(pairs, (std::set<std::pair<Element, Element>>{{Element{"GenHandle"}, Element{"Handle"}},
                                                            {Element{"GenHead"}, Element{"Head"}}}));
}

TEST(Matcher, GraphMatchOnOneLevelGivesTheBindings) {
    Stack s(plant(), kHammer);
    const McmtRule& r = plant_rule("CreatePart");
    MetaMatch partial = match_all(r, s).at(0);
    partial.level_map.resize(2);
    partial.bindings.resize(2);
    auto bs = graph_match(r, 2, s, 2, partial);
    ASSERT_EQ(bs.size(), 2u);
    for (const auto& b : bs) EXPECT_EQ(b.size(), 3u); // M1, P1, cr
    // generic_plant has creates but no instance-level machines with parts.
    EXPECT_TRUE(graph_match(r, 2, s, 1, MetaMatch{{0, 0}, partial.bindings}).empty());
}

TEST(Matcher, MissingConstantMeansNoMatch) {
    auto r = one_rule(R"(rules M { rule R {
      meta { Widget : Node$
             W1 : Widget }
      from { w : W1 }
      to { w : W1 }
    } })");
    std::vector<MetaMatch> out;
    EXPECT_FALSE(match(r, Stack(plant(), kHammer), out));
    EXPECT_TRUE(out.empty());
}

TEST(Matcher, MultiplicityMustContainTheMetaBounds) {
    auto r = one_rule(kBoundedArrow);
    // hasHandle 0..3 contains 1..2; hasHead 1..1 does not.
    auto h = with_multiplicity("hasHandle", "Handle", "0..3");
    auto all = match_all(r, Stack(h, kHammer));
    ASSERT_EQ(all.size(), 1u);
    EXPECT_EQ(all[0].bindings.at(2).at("Y"), Element{"Handle"});
    EXPECT_TRUE(match_all(r, Stack(plant(), kHammer)).empty());
}

TEST(Matcher, MetaDeeperThanStackFails) {
    auto r = one_rule(R"(rules M { rule R {
      meta { A : Node
             B : A
             C : B }
      from {} to {}
    } })");
    EXPECT_EQ(r.depth, 3);
    std::vector<MetaMatch> out;
    EXPECT_FALSE(match(r, Stack(plant(), kHammer), out));
    EXPECT_TRUE(out.empty());
}

TEST(Matcher, NodeVariableMatchesOnEveryLevel) {
    Model a{"A", "root", Graph::build("A", {"a"}, {}), {}, 0};
    a.info[Element{"a"}] = ElementInfo{TypeRef{"root", Element{"Node"}}, Potency{1, std::nullopt}, {}, {}};
    Model b{"B", "A", Graph::build("B", {"b"}, {}), {}, 0};
    b.info[Element{"b"}] = ElementInfo{TypeRef{"A", Element{"a"}}, {}, {}, {}};
    Model c{"C", "B", Graph("C"), {}, 0};
    auto h = Hierarchy::from_models({canonical_root(), a, b, c});
    ASSERT_TRUE(validate_hierarchy(h).empty());
    auto r = one_rule("rules M { rule R { meta { X : Node } from {} to {} } }", h);
    auto all = match_all(r, Stack(h, "C"));
    ASSERT_EQ(all.size(), 2u);
    EXPECT_EQ(all[0].level_map, (std::vector<int>{0, 1}));
    EXPECT_EQ(all[0].bindings.at(1).at("X"), Element{"a"});
    EXPECT_EQ(all[1].level_map, (std::vector<int>{0, 2}));
    EXPECT_EQ(all[1].bindings.at(1).at("X"), Element{"b"});
}

TEST(Matcher, FixtureMatchesAgreeWithEnumeration) {
    for (const std::string target : {"hammer_config", "stool_config"}) {
        Stack s(plant(), target);
        for (const auto& r : plant_rules()) {
            std::set<oracle::MatchKey> got;
            auto all = match_all(r, s);
            for (const auto& mm : all) got.emplace(mm.level_map, mm.bindings);
            EXPECT_EQ(got.size(), all.size()) << r.name;
            EXPECT_EQ(got, oracle::brute_force_matches(r, plant(), target)) << r.name << " on " << target;
            EXPECT_EQ(all, oracle::literal_match_all(r, s)) << r.name << " on " << target;
        }
    }
}

TEST(Proliferation, HammerConfigYieldsTwentyOneRules) {
    auto p = proliferate_all(plant_rules(), plant(), kHammer);
    EXPECT_EQ(p.rules.size(), 21u);
    std::map<std::string, std::size_t> counts;
    for (const auto& b : p.breakdown) {
        counts[b.rule] = b.rules;
        EXPECT_EQ(b.matches, b.rules) << b.rule; // hammer multiplicities are all 1..1
    }
    EXPECT_EQ(counts, (std::map<std::string, std::size_t>{
                          {"CreatePart", 2}, {"SendPartOut", 4}, {"Assemble", 6}, {"TransferPart", 9}}));
}

TEST(Proliferation, CreatePartEqualsTheHandWrittenRules) {
    auto rules = proliferate(plant_rule("CreatePart"), plant(), kHammer);
    ASSERT_EQ(rules.size(), 2u);
    std::vector<fixture::Shape> got, expected{fixture::hand_written_create("GenHandle", "Handle"),
                                             fixture::hand_written_create("GenHead", "Head")};
    for (const auto& r : rules) got.push_back(fixture::shape_of(plant(), r));
    auto key = [](const fixture::Shape& s) { return *s.lhs.begin(); };
    std::sort(got.begin(), got.end(), [&](const auto& x, const auto& y) { return key(x) < key(y); });
    EXPECT_EQ(got, expected);
    EXPECT_EQ(rules[0].name, "CreatePart_1");
}

TEST(Proliferation, TypesAreConcreteStackElements) {
    for (const std::string target : {"hammer_config", "stool_config"}) {
        auto p = proliferate_all(plant_rules(), plant(), target);
        Stack s(plant(), target);
        for (const auto& r : p.rules) {
            EXPECT_EQ(r.types.size(), r.interface.elements().size()) << r.name;
            for (const auto& [e, t] : r.types) {
                const int level = r.type_levels.at(e);
                EXPECT_EQ(t.model, s.model(level).name) << r.name;
                EXPECT_TRUE(s.model(level).graph.contains(t.element)) << r.name << " " << to_string(e);
            }
        }
    }
}

TEST(Proliferation, StoolExpansionNamesRulesPerExpansion) {
    Model sp = plant().model("stool_plant");
    sp.info.at(Element{Arrow{"Stool", "hasLeg", "Leg"}}).multiplicity = parse_multiplicity("3..4");
    auto h = plant().with_model(sp);
    ProliferationReport rep;
    auto rules = proliferate(plant_rule("Assemble"), h, "stool_config", &rep);
    EXPECT_EQ(rep.matches, 6u);
    EXPECT_EQ(rep.rules, 12u);
    EXPECT_EQ(rules.size(), 12u);
    EXPECT_EQ(rules[0].name, "Assemble_1_1");
    EXPECT_EQ(rules[1].name, "Assemble_1_2");
}

TEST(Proliferation, IsDeterministic) {
    auto a = proliferate_all(plant_rules(), plant(), kHammer);
    auto b = proliferate_all(plant_rules(), plant(), kHammer);
    EXPECT_EQ(rules_to_json(plant(), a), rules_to_json(plant(), b));
}

TEST(Proliferation, JsonListsRulesAndBreakdown) {
    auto p = proliferate_all(plant_rules(), plant(), kHammer);
    auto doc = nlohmann::json::parse(rules_to_json(plant(), p));
    ASSERT_EQ(doc["rules"].size(), 21u);
    EXPECT_EQ(doc["rules"][0]["name"], "CreatePart_1");
    EXPECT_EQ(doc["rules"][0]["target"], kHammer);
    EXPECT_EQ(doc["breakdown"].size(), 4u);
    EXPECT_EQ(doc["breakdown"][3]["rule"], "TransferPart");
    EXPECT_EQ(doc["breakdown"][3]["rules"], 9);
}

TEST(Proliferation, StoolTransferHasNoLink) {
    ProliferationReport rep;
    auto rules = proliferate(plant_rule("TransferPart"), plant(), "stool_config", &rep);
    EXPECT_TRUE(rules.empty());
    EXPECT_TRUE(rep.no_matches());
}
