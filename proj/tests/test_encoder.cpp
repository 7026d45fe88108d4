#include <gtest/gtest.h>

#include <set>

#include "confree/generator.hpp"
#include "confree/semantics.hpp"
#include "support.hpp"

using namespace confree;
using namespace confree::testing;

namespace {

/// Reachable bags of a flat net with activation places projected away.
std::set<Bag> projected_bags(const PNet& net) {
  auto g = explore(net);
  std::set<Bag> out;
  for (const auto& s : g.states) {
    Bag b, full = net.to_bag(s.bag);
    for (const auto& [p, c] : full.entries())
      if (!is_act(p)) b.set(p, c);
    out.insert(b);
  }
  return out;
}

/// Transitions enabled in at least one reachable state.
NameSet fireable(const PNet& net) {
  auto g = explore(net);
  NameSet out;
  for (const auto& s : g.states)
    for (const auto& t : enabled_names(net, s)) out.insert(t);
  return out;
}

}  // namespace

TEST(Encoder, NetBMatchesTheFigure) {
  EXPECT_EQ(figure_mismatch(encode(load_net("net_b.net"))), "");
}

TEST(Encoder, FigureComparisonNoticesChanges) {
  auto enc = encode(load_net("net_b.net"));
  auto names = net_b_names();
  for (auto& t : enc.net.transitions)
    if (t->name == names.at("t_a")) t = make_dyn_transition(t->name, {"1"}, DynamicPNet{{}, Bag{{"3", 1}}});
  EXPECT_NE(figure_mismatch(enc), "");
}

TEST(Encoder, OriginsDescribeEachTransition) {
  auto enc = encode(load_net("net_b.net"));
  auto names = net_b_names();
  const auto& bg = enc.origin.at(names.at("t_bg"));
  EXPECT_TRUE(bg.positive);
  EXPECT_EQ(bg.theta, (std::vector<Name>{"b", "g"}));
  EXPECT_EQ(bg.cell, (std::vector<Name>{"b", "c", "g"}));
  const auto& t3 = enc.origin.at(names.at("t_3"));
  EXPECT_FALSE(t3.positive);
  EXPECT_EQ(t3.removed, "3");
  EXPECT_EQ(enc.cells.size(), 5u);
}

TEST(Encoder, NetATransactionForC) {
  auto enc = encode(load_net("net_a.net"));
  auto all = all_transitions(enc.net);
  const auto& t = *all.at("tx:2,3/c/b,c");
  EXPECT_EQ(t.preset, (NameSet{"2", "3"}));
  EXPECT_EQ(t.post.bag, (Bag{{"5", 1}, {"neg:4", kInf}}));
  EXPECT_TRUE(t.post.transitions.empty());
}

TEST(Flatten, NetBSizesAndPruning) {
  auto c = compile(load_net("net_b.net"), true);
  EXPECT_EQ(c.flat.num_transitions(), 15);
  EXPECT_EQ(c.net.num_transitions(), 11);
  auto names = net_b_names();
  NameSet gone{names.at("t_1"), names.at("t_7"), names.at("t_2"), names.at("t'_2")};
  for (const auto& t : c.net.transitions()) EXPECT_FALSE(gone.count(t)) << t;
  for (const auto& t : gone) EXPECT_EQ(c.net.place_index(act(t)), -1) << t;
}

TEST(Flatten, ActivationPlacesArePersistentAndMarkedForTopLevel) {
  auto c = compile(load_net("net_b.net"), false);
  auto names = net_b_names();
  int a = c.flat.place_index(act(names.at("t_a")));
  int b = c.flat.place_index(act(names.at("t_b")));
  ASSERT_GE(a, 0);
  ASSERT_GE(b, 0);
  EXPECT_TRUE(c.flat.persistent(a));
  EXPECT_EQ(c.flat.initial_counts()[a], kInf);
  EXPECT_EQ(c.flat.initial_counts()[b], 0u);
  int t3 = c.flat.transition_index(names.at("t_3"));
  EXPECT_TRUE(c.flat.names_of(c.flat.post(t3)).count(act(names.at("t_b"))));
}

TEST(Flatten, NetAPrunedTransitions) {
  auto c = compile(load_net("net_a.net"), true);
  NameSet want{"tx:1/a/a,d", "tx:1/d/a,d", "tx:2,3/b/b,c", "tx:2,3/c/b,c", "prop:2,3/3/b,c", "tx:2/b/b"};
  NameSet got(c.net.transitions().begin(), c.net.transitions().end());
  EXPECT_EQ(got, want);
}

TEST(Flatten, PruningKeepsBehaviour) {
  for (const char* f : {"net_a.net", "net_b.net", "net_c.net", "net_d.net", "leftover.net"}) {
    auto c = compile(load_net(f), true);
    EXPECT_EQ(projected_bags(c.flat), projected_bags(c.net)) << f;
    auto live = fireable(c.flat);
    NameSet kept(c.net.transitions().begin(), c.net.transitions().end());
    EXPECT_EQ(kept, live) << f;
  }
}

TEST(Flatten, PruningKeepsBehaviourOnRandomNets) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto c = compile(random_occurrence_net(seed, {7, 3}), true);
    EXPECT_EQ(projected_bags(c.flat), projected_bags(c.net)) << "seed " << seed;
  }
}

TEST(Flatten, RejectsBadPostsetCounts) {
  auto t = make_dyn_transition("t", {"p"}, DynamicPNet{{}, Bag{{"q", 2}}});
  DynamicPNet n{{t}, Bag{{"p", 1}}};
  EXPECT_THROW(flatten(n, {}), std::invalid_argument);
}

TEST(Expansion, NetDLetsOtherEventsInterleave) {
  auto c = compile(load_net("net_d.net"), true, true);
  const Name tx = "tx:1,2/b,c/a,b,c";
  ASSERT_GE(c.net.transition_index(tx), 0);
  ASSERT_GE(c.net.transition_index("b@" + tx), 0);
  ASSERT_GE(c.net.transition_index("c@" + tx), 0);
  auto s = initial_state(c.net);
  s = fire(c.net, s, tx);
  s = fire(c.net, s, "b@" + tx);
  auto en = enabled_names(c.net, s);
  EXPECT_TRUE(en.count("c@" + tx));
  EXPECT_TRUE(en.count("tx:3/d/d"));
  s = fire(c.net, s, "tx:3/d/d");
  s = fire(c.net, s, "c@" + tx);
  auto bag = c.net.to_bag(s.bag);
  EXPECT_EQ(bag.get("7"), 1u);
  EXPECT_EQ(bag.get("5"), 1u);
  EXPECT_EQ(bag.get("neg:6"), kInf);
}

TEST(Expansion, AtomicTransactionsAreUntouched) {
  auto c = compile(load_net("net_a.net"), true);
  auto e = compile(load_net("net_a.net"), true, true);
  EXPECT_EQ(c.net, e.net);
}

TEST(Encoder, NamesAreInjectiveOnRandomNets) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto net = random_occurrence_net(seed, {10, 3});
    Encoding enc;
    ASSERT_NO_THROW(enc = encode(net)) << "seed " << seed;
    auto all = all_transitions(enc.net);
    EXPECT_EQ(all.size(), enc.origin.size()) << "seed " << seed;
    for (const auto& [n, t] : all) EXPECT_TRUE(enc.origin.count(n)) << n;
    EXPECT_EQ(flatten(enc).num_transitions(), static_cast<int>(all.size()));
  }
}
