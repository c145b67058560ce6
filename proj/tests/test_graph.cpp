#include <gtest/gtest.h>

#include "mlm/error.hpp"
#include "mlm/graph.hpp"
#include "oracles.hpp"

using namespace mlm;

namespace {

Graph g(const std::string& name, std::vector<std::string> nodes, std::vector<Arrow> arrows = {}) {
    return Graph::build(name, nodes, arrows);
}

template <class F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::NotFound;
}

} // namespace

TEST(Graph, RejectsDuplicatesAndDanglingArrows) {
    EXPECT_EQ(kind_of([] { g("G", {"a", "a"}); }), ErrorKind::DuplicateNode);
    EXPECT_EQ(kind_of([] { g("G", {"a"}, {{"a", "e", "a"}, {"a", "e", "a"}}); }), ErrorKind::DuplicateArrow);
    EXPECT_EQ(kind_of([] { g("G", {"a"}, {{"a", "e", "b"}}); }), ErrorKind::DanglingArrow);
}

TEST(Graph, ArrowsWithSameLabelDifferByEndpoints) {
    Graph x = g("G", {"a", "b"}, {{"a", "e", "b"}, {"b", "e", "a"}, {"a", "e", "a"}});
    EXPECT_EQ(x.arrow_count(), 3u);
    EXPECT_TRUE(x.has_arrow({"b", "e", "a"}));
    EXPECT_EQ(x.outgoing("a").size(), 2u);
    EXPECT_EQ(x.incoming("a").size(), 2u);
}

TEST(Graph, MorphismChecksStructure) {
    Graph a = g("A", {"x", "y"}, {{"x", "e", "y"}});
    Graph b = g("B", {"p"}, {{"p", "f", "p"}});
    auto m = make_morphism(a, b, {{"x", "p"}, {"y", "p"}}, {{Arrow{"x", "e", "y"}, Arrow{"p", "f", "p"}}});
    EXPECT_FALSE(m.defect());
    EXPECT_FALSE(m.is_injective());
    EXPECT_EQ(kind_of([&] { make_morphism(a, b, {{"x", "p"}}, {}); }), ErrorKind::InvalidMorphism);
}

TEST(Graph, InclusionRequiresSubgraph) {
    Graph a = g("A", {"x"});
    Graph b = g("B", {"x", "y"});
    EXPECT_TRUE(inclusion(a, b).is_inclusion());
    EXPECT_EQ(kind_of([&] { inclusion(b, a); }), ErrorKind::NotSubgraph);
}

TEST(PartialComposition, TotalComposesToTotal) {
    Graph a = g("A", {"x", "y"});
    Graph b = g("B", {"p", "q"});
    Graph c = g("C", {"r"});
    auto f = to_partial(make_morphism(a, b, {{"x", "p"}, {"y", "q"}}, {}));
    auto h = to_partial(make_morphism(b, c, {{"p", "r"}, {"q", "r"}}, {}));
    auto fh = compose_partial(f, h);
    EXPECT_TRUE(fh.is_total());
    EXPECT_EQ(fh.image(Element{"y"}), Element{"r"});
}

TEST(PartialComposition, EmptyDomainStaysEmpty) {
    Graph a = g("A", {"x"});
    Graph b = g("B", {"p"});
    auto f = empty_partial(a, b);
    auto h = to_partial(identity(b));
    EXPECT_TRUE(compose_partial(f, h).domain().empty());
}

TEST(PartialComposition, DomainIsPreimage) {
    Graph a = g("A", {"x", "y"});
    Graph b = g("B", {"p", "q"});
    Graph c = g("C", {"r"});
    auto f = make_partial(a, make_morphism(g("A", {"x"}), b, {{"x", "p"}}, {}));
    auto h = make_partial(b, make_morphism(g("B", {"p"}), c, {{"p", "r"}}, {}));
    auto fh = compose_partial(f, h);
    EXPECT_TRUE(fh.defined(Element{"x"}));
    EXPECT_FALSE(fh.defined(Element{"y"}));
    EXPECT_EQ(fh.domain().node_count(), 1u);
}

TEST(PartialComposition, MismatchedGraphsAreRejected) {
    Graph a = g("A", {"x"});
    Graph b = g("B", {"p"});
    auto f = to_partial(identity(a));
    auto h = to_partial(identity(b));
    EXPECT_EQ(kind_of([&] { compose_partial(f, h); }), ErrorKind::GraphMismatch);
}

TEST(PartialComposition, PrecedesIsDomainInclusionWithAgreement) {
    Graph a = g("A", {"x", "y"});
    Graph b = g("B", {"p", "q"});
    auto small = make_partial(a, make_morphism(g("A", {"x"}), b, {{"x", "p"}}, {}));
    auto big = to_partial(make_morphism(a, b, {{"x", "p"}, {"y", "q"}}, {}));
    auto other = to_partial(make_morphism(a, b, {{"x", "q"}, {"y", "q"}}, {}));
    EXPECT_TRUE(precedes(small, big));
    EXPECT_FALSE(precedes(big, small));
    EXPECT_FALSE(precedes(small, other));
}

TEST(Pushout, IdentityRuleLeavesHostUnchanged) {
    Graph l = g("L", {"x"});
    Graph s = g("S", {"s1", "s2"}, {{"s1", "e", "s2"}});
    auto m = make_morphism(l, s, {{"x", "s1"}}, {});
    auto po = pushout(identity(l), m);
    EXPECT_TRUE(po.object.same_elements(s));
    EXPECT_EQ(po.d.nodes, m.nodes);
}

TEST(Pushout, AddsFreshCopyOfTheNewPart) {
    Graph l = g("L", {"x"});
    Graph i = g("I", {"x", "y"}, {{"x", "e", "y"}});
    Graph s = g("S", {"s1"});
    auto po = pushout(inclusion(l, i), make_morphism(l, s, {{"x", "s1"}}, {}));
    EXPECT_TRUE(po.object.same_elements(g("D", {"s1", "y$0"}, {{"s1", "e$0", "y$0"}})));
    EXPECT_EQ(po.d.node("y"), "y$0");
    EXPECT_EQ(po.d.arrow({"x", "e", "y"}), (Arrow{"s1", "e$0", "y$0"}));
}

TEST(Pushout, FreshNamesAvoidCollisions) {
    Graph l = g("L", {});
    Graph i = g("I", {"y"});
    Graph s = g("S", {"y$0", "y$1"});
    auto po = pushout(inclusion(l, i), make_morphism(l, s, {}, {}));
    EXPECT_TRUE(po.object.has_node("y$2"));
}

TEST(Pushout, RejectsNonInclusion) {
    Graph l = g("L", {"x"});
    Graph i = g("I", {"z"});
    auto notinc = make_morphism(l, i, {{"x", "z"}}, {});
    EXPECT_EQ(kind_of([&] { pushout(notinc, identity(l)); }), ErrorKind::NotInclusion);
}

TEST(Pushout, UniversalOnSmallExampleAgainstAllCospans) {
    Graph l = g("L", {"x"});
    Graph i = g("I", {"x", "y"}, {{"x", "e", "y"}});
    Graph s = g("S", {"s1"});
    auto m = make_morphism(l, s, {{"x", "s1"}}, {});
    auto po = pushout(inclusion(l, i), m);
    Graph x = g("X", {"u", "v"}, {{"u", "e", "v"}, {"u", "e", "u"}});
    std::size_t cospans = 0;
    for (const auto& s2 : oracle::all_homs(s, x, false))
        for (const auto& d2 : oracle::all_homs(i, x, false)) {
            if (d2.at(Element{"x"}) != s2.at(Element{"s1"})) continue;
            ++cospans;
            std::size_t mediators = 0;
            for (const auto& u : oracle::all_homs(po.object, x, false)) {
                bool ok = true;
                for (const auto& [k, v] : s2)
                    if (u.at(*po.s.image(k)) != v) ok = false;
                for (const auto& [k, v] : d2)
                    if (u.at(*po.d.image(k)) != v) ok = false;
                if (ok) ++mediators;
            }
            EXPECT_EQ(mediators, 1u);
        }
    EXPECT_GT(cospans, 0u);
}

TEST(PullbackComplement, NothingDeletedKeepsHost) {
    Graph i = g("I", {"x"});
    Graph d = g("D", {"a", "b"}, {{"a", "e", "b"}});
    auto pc = pullback_complement(identity(i), make_morphism(i, d, {{"x", "a"}}, {}));
    EXPECT_TRUE(pc.object.same_elements(d));
}

TEST(PullbackComplement, DeletesMatchedArrow) {
    Graph i = g("I", {"x", "y"}, {{"x", "e", "y"}});
    Graph r = g("R", {"x", "y"});
    Graph d = g("D", {"a", "b"}, {{"a", "e", "b"}});
    auto pc = pullback_complement(inclusion(r, i),
                                  make_morphism(i, d, {{"x", "a"}, {"y", "b"}}, {{Arrow{"x", "e", "y"}, Arrow{"a", "e", "b"}}}));
    EXPECT_TRUE(pc.object.same_elements(g("T", {"a", "b"})));
}

TEST(PullbackComplement, DanglingDeletionIsRejected) {
    Graph i = g("I", {"x"});
    Graph r = g("R", {});
    Graph d = g("D", {"a", "b"}, {{"a", "e", "b"}});
    EXPECT_EQ(kind_of([&] { pullback_complement(inclusion(r, i), make_morphism(i, d, {{"x", "a"}}, {})); }),
              ErrorKind::DanglingDeletion);
}

TEST(PullbackComplement, GluingKeptAndDeletedIsRejected) {
    Graph i = g("I", {"x", "y"});
    Graph r = g("R", {"x"});
    Graph d = g("D", {"a"});
    EXPECT_EQ(kind_of([&] {
                  pullback_complement(inclusion(r, i), make_morphism(i, d, {{"x", "a"}, {"y", "a"}}, {}));
              }),
              ErrorKind::IdentificationConflict);
}

TEST(Homomorphisms, EmptyPatternHasOneMatch) {
    EXPECT_EQ(find_homomorphisms(Graph("P"), g("T", {"a", "b"}), false).size(), 1u);
}

TEST(Homomorphisms, SingleNodeMatchesEveryNode) {
    EXPECT_EQ(find_homomorphisms(g("P", {"x"}), g("T", {"a", "b", "c"}), false).size(), 3u);
}

TEST(Homomorphisms, LoopHasNoImageInLooplessTriangle) {
    Graph p = g("P", {"x"}, {{"x", "e", "x"}});
    Graph t = g("T", {"a", "b", "c"}, {{"a", "e", "b"}, {"b", "e", "c"}, {"c", "e", "a"}});
    EXPECT_TRUE(find_homomorphisms(p, t, false).empty());
    EXPECT_TRUE(oracle::all_homs(p, t, false).empty());
}

TEST(Homomorphisms, InjectiveSearchSkipsCollapsingMaps) {
    Graph p = g("P", {"x", "y"});
    Graph t = g("T", {"a", "b"});
    EXPECT_EQ(find_homomorphisms(p, t, false).size(), 4u);
    EXPECT_EQ(find_homomorphisms(p, t, true).size(), 2u);
}

TEST(Homomorphisms, FilterRestrictsCandidates) {
    Graph p = g("P", {"x"});
    Graph t = g("T", {"a", "b"});
    MatchFilter f;
    f.node = [](const std::string&, const std::string& n) { return n == "b"; };
    auto hs = find_homomorphisms(p, t, false, f);
    ASSERT_EQ(hs.size(), 1u);
    EXPECT_EQ(hs[0].node("x"), "b");
}
