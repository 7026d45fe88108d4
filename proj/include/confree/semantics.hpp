#pragma once

#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "confree/encoder.hpp"
#include "confree/net_model.hpp"
#include "confree/report.hpp"
#include "confree/structure.hpp"

namespace confree {

inline constexpr std::size_t kDefaultBudget = 1'000'000;

struct ExploreOptions {
  std::size_t budget = kDefaultBudget;
  bool non_stuttering = true;
};

class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(std::size_t budget, std::size_t frontier)
      : std::runtime_error("state budget of " + std::to_string(budget) +
                           " exceeded with frontier size " + std::to_string(frontier)),
        frontier_size(frontier) {}
  std::size_t frontier_size;
};

class NotEnabled : public std::runtime_error {
 public:
  NotEnabled(const Name& t, NameSet missing_places)
      : std::runtime_error("transition " + t + " is not enabled; missing " +
                           (missing_places.empty() ? std::string("nothing (already fired)")
                                                   : join(missing_places))),
        missing(std::move(missing_places)) {}
  NameSet missing;
};

/// Bag of a flat net plus the persistent transitions fired so far in the run.
struct PState {
  std::vector<Count> bag;
  std::vector<bool> fired;
  friend bool operator==(const PState&, const PState&) = default;
  friend auto operator<=>(const PState&, const PState&) = default;
};

inline PState initial_state(const PNet& net) {
  return PState{net.initial_counts(), std::vector<bool>(net.num_transitions(), false)};
}

inline PState state_of(const PNet& net, const Bag& b) {
  return PState{net.from_bag(b), std::vector<bool>(net.num_transitions(), false)};
}

inline bool is_enabled(const PNet& net, const PState& s, int t, bool non_stuttering = true) {
  if (non_stuttering && net.persistent_transition(t) && s.fired[t]) return false;
  for (int p : net.pre(t))
    if (s.bag[p] == 0) return false;
  return true;
}

inline std::vector<int> enabled(const PNet& net, const PState& s, bool non_stuttering = true) {
  std::vector<int> out;
  for (int t = 0; t < net.num_transitions(); ++t)
    if (is_enabled(net, s, t, non_stuttering)) out.push_back(t);
  return out;
}

inline NameSet enabled_names(const PNet& net, const PState& s, bool non_stuttering = true) {
  NameSet out;
  for (int t : enabled(net, s, non_stuttering)) out.insert(net.transition(t));
  return out;
}

inline PState fire(const PNet& net, const PState& s, int t, bool non_stuttering = true) {
  if (!is_enabled(net, s, t, non_stuttering)) {
    NameSet missing;
    for (int p : net.pre(t))
      if (s.bag[p] == 0) missing.insert(net.place(p));
    throw NotEnabled(net.transition(t), missing);
  }
  PState r = s;
  for (int p : net.pre(t)) r.bag[p] = count_sub(r.bag[p], 1);
  for (int p : net.post(t)) r.bag[p] = net.persistent(p) ? kInf : count_add(r.bag[p], 1);
  if (net.persistent_transition(t)) r.fired[t] = true;
  return r;
}

inline PState fire(const PNet& net, const PState& s, const Name& t, bool non_stuttering = true) {
  int i = net.transition_index(t);
  if (i < 0) throw std::invalid_argument("unknown transition " + t);
  return fire(net, s, i, non_stuttering);
}

struct StateGraph {
  std::vector<PState> states;
  std::vector<std::vector<std::pair<int, int>>> edges;  // (transition, target)
  std::vector<bool> maximal;
  int initial = 0;
  std::size_t num_maximal() const {
    return static_cast<std::size_t>(std::count(maximal.begin(), maximal.end(), true));
  }
};

inline StateGraph explore(const PNet& net, const ExploreOptions& opt = {}) {
  StateGraph g;
  std::map<PState, int> index;
  std::deque<int> queue;
  auto add = [&](const PState& s) {
    auto [it, fresh] = index.emplace(s, static_cast<int>(g.states.size()));
    if (fresh) {
      if (g.states.size() >= opt.budget) throw BudgetExceeded(opt.budget, queue.size());
      g.states.push_back(s);
      g.edges.emplace_back();
      g.maximal.push_back(false);
      queue.push_back(it->second);
    }
    return it->second;
  };
  add(initial_state(net));
  while (!queue.empty()) {
    int i = queue.front();
    queue.pop_front();
    auto en = enabled(net, g.states[i], opt.non_stuttering);
    g.maximal[i] = en.empty();
    for (int t : en) {
      PState next = fire(net, g.states[i], t, opt.non_stuttering);
      int j = add(next);
      g.edges[i].emplace_back(t, j);
    }
  }
  return g;
}

inline StateGraph explore(const OccurrenceNet& net, const ExploreOptions& opt = {}) {
  return explore(as_pnet(net), opt);
}

inline CertReport check_safety(const PNet& net, const ExploreOptions& opt = {}) {
  Stopwatch sw;
  CertReport r;
  r.check = "safety";
  auto g = explore(net, opt);
  r.states_explored = g.states.size();
  r.pass = true;
  for (const auto& s : g.states) {
    for (int p = 0; p < net.num_places(); ++p) {
      Count c = s.bag[p];
      bool bad = net.persistent(p) ? (c != 0 && c != kInf) : (c > 1);
      if (bad) {
        r.pass = false;
        r.witness = Json{{"bag", bag_json(net.to_bag(s.bag))}, {"place", net.place(p)}};
        break;
      }
    }
    if (!r.pass) break;
  }
  r.elapsed_ms = sw.ms();
  return r;
}

namespace detail {

inline bool intersects(const std::vector<int>& a, const std::vector<int>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j)
      ++i;
    else
      ++j;
  }
  return false;
}

}  // namespace detail

inline constexpr std::size_t kWitnessCap = 64;

/// Searches every reachable state for symmetric and asymmetric confusion, judging
/// direct conflict on regular places, and checks that enabled transitions have equal
/// or disjoint regular presets.
inline CertReport check_confusion_free(const PNet& net, const ExploreOptions& opt = {}) {
  Stopwatch sw;
  CertReport r;
  r.check = "confusion-freeness";
  auto g = explore(net, opt);
  r.states_explored = g.states.size();
  std::vector<std::vector<int>> rpre(net.num_transitions());
  for (int t = 0; t < net.num_transitions(); ++t) rpre[t] = net.regular_pre(t);
  Json witnesses = Json::array();
  auto push = [&](Json w) {
    if (witnesses.size() < kWitnessCap) witnesses.push_back(std::move(w));
  };
  for (std::size_t si = 0; si < g.states.size(); ++si) {
    const auto& s = g.states[si];
    std::vector<int> en;
    std::map<int, int> succ;
    for (auto [t, j] : g.edges[si]) {
      en.push_back(t);
      succ[t] = j;
    }
    auto marking = [&]() { return bag_json(net.to_bag(s.bag)); };
    std::set<int> enset(en.begin(), en.end());
    for (std::size_t a = 0; a < en.size(); ++a)
      for (std::size_t b = a + 1; b < en.size(); ++b) {
        int t = en[a], u = en[b];
        if (rpre[t] != rpre[u] && detail::intersects(rpre[t], rpre[u]))
          push(Json{{"kind", "preset"}, {"marking", marking()}, {"t", net.transition(t)},
                    {"u", net.transition(u)}});
      }
    for (int u : en)
      for (int t : en) {
        if (t == u || !detail::intersects(rpre[t], rpre[u])) continue;
        for (int v : en) {
          if (v == u || v <= t || !detail::intersects(rpre[u], rpre[v])) continue;
          if (detail::intersects(rpre[t], rpre[v])) continue;
          push(Json{{"kind", "symmetric"}, {"marking", marking()}, {"t", net.transition(t)},
                    {"u", net.transition(u)}, {"v", net.transition(v)}});
        }
      }
    for (int t : en) {
      const auto& after = g.states[succ[t]];
      for (int u = 0; u < net.num_transitions(); ++u) {
        if (enset.count(u) || !is_enabled(net, after, u, opt.non_stuttering)) continue;
        for (int v : en) {
          if (v == t || v == u) continue;
          if (detail::intersects(rpre[t], rpre[v]) || !detail::intersects(rpre[v], rpre[u]))
            continue;
          push(Json{{"kind", "asymmetric"}, {"marking", marking()}, {"t", net.transition(t)},
                    {"u", net.transition(u)}, {"v", net.transition(v)}});
        }
      }
    }
  }
  r.pass = witnesses.empty();
  if (!r.pass) r.witness = witnesses;
  r.elapsed_ms = sw.ms();
  return r;
}

/// Negative/positive exclusion. With the encoding at hand, also checks the four
/// clauses of the auxiliary invariant in every reachable state.
inline CertReport check_exclusion(const PNet& net, const Encoding* enc = nullptr,
                                  const ExploreOptions& opt = {}) {
  Stopwatch sw;
  CertReport r;
  r.check = "exclusion";
  auto g = explore(net, opt);
  r.states_explored = g.states.size();
  // pairs (p, neg:p) present in the net
  std::vector<std::pair<int, int>> pairs;
  for (int q = 0; q < net.num_places(); ++q) {
    const auto& qn = net.place(q);
    if (!is_neg(qn)) continue;
    int p = net.place_index(qn.substr(4));
    if (p >= 0) pairs.emplace_back(p, q);
  }
  std::vector<std::string> clauses{"1", "temporal"};
  if (enc != nullptr) clauses.insert(clauses.end(), {"2", "3", "4"});
  std::map<std::string, Json> first;  // clause -> first witness
  auto fail = [&](const std::string& clause, const PState& s, Json extra) {
    if (first.count(clause)) return;
    extra["clause"] = clause;
    extra["bag"] = bag_json(net.to_bag(s.bag));
    first[clause] = extra;
  };
  for (std::size_t si = 0; si < g.states.size(); ++si) {
    const auto& s = g.states[si];
    for (auto [p, q] : pairs)
      if (s.bag[p] > 0 && s.bag[q] > 0) fail("1", s, Json{{"place", net.place(p)}});
    for (auto [t, j] : g.edges[si])
      for (auto [p, q] : pairs)
        if (s.bag[q] > 0 && g.states[j].bag[p] > 0)
          fail("temporal", s, Json{{"place", net.place(p)}, {"fired", net.transition(t)}});
  }
  if (enc != nullptr) {
    const auto& src = enc->source;
    auto cs = compute_relations(src);
    const int SP = src.num_places();
    auto marked = [&](const PState& s, const Name& n) {
      int i = net.place_index(n);
      return i >= 0 && s.bag[i] > 0;
    };
    std::map<std::vector<int>, std::vector<const CellInfo*>> by_min;
    for (const auto& [k, c] : enc->cells) {
      std::vector<int> ids;
      for (const auto& p : c.min) ids.push_back(net.place_index(p));
      std::sort(ids.begin(), ids.end());
      if (std::find(ids.begin(), ids.end(), -1) == ids.end()) by_min[ids].push_back(&c);
    }
    for (std::size_t si = 0; si < g.states.size(); ++si) {
      const auto& s = g.states[si];
      for (int p = 0; p < SP; ++p) {
        const auto& pn = src.place(p);
        bool pos_p = marked(s, pn);
        bool neg_p = marked(s, neg(pn));
        for (int q = 0; q < SP; ++q) {
          if (!cs.causality.get(p, q)) continue;
          const auto& qn = src.place(q);
          if (neg_p && marked(s, qn)) fail("2", s, Json{{"p", pn}, {"q", qn}});
          if (pos_p && marked(s, neg(qn))) {
            bool found = false;
            for (int rr = 0; rr < SP && !found; ++rr)
              found = rr != q && cs.causality.get(rr, q) && marked(s, neg(src.place(rr)));
            if (!found) fail("3", s, Json{{"p", pn}, {"q", qn}});
          }
        }
      }
      for (auto [t, j] : g.edges[si]) {
        auto it = by_min.find(net.regular_pre(t));
        if (it == by_min.end()) continue;
        for (const CellInfo* c : it->second)
          for (const auto& m : c->max)
            if (marked(s, m) || marked(s, neg(m)))
              fail("4", s, Json{{"transition", net.transition(t)}, {"place", m}});
      }
    }
  }
  r.pass = first.empty();
  Json verdicts = Json::object();
  for (const auto& c : clauses) verdicts[c] = first.count(c) ? "fail" : "pass";
  r.details = Json{{"clauses", verdicts}};
  if (!r.pass) {
    Json w = Json::array();
    for (const auto& c : clauses)
      if (first.count(c)) w.push_back(first[c]);
    r.witness = w;
  }
  r.elapsed_ms = sw.ms();
  return r;
}

/// State of a dynamic p-net: available transitions (by name) and the bag.
struct DynState {
  std::set<Name> transitions;
  Bag bag;
  friend bool operator==(const DynState&, const DynState&) = default;
  friend auto operator<=>(const DynState&, const DynState&) = default;
};

class DynamicSemantics {
 public:
  explicit DynamicSemantics(const DynamicPNet& net) : table_(all_transitions(net)) {
    for (const auto& t : net.transitions) initial_.transitions.insert(t->name);
    initial_.bag = net.bag;
  }
  const DynState& initial() const { return initial_; }
  const DynTransition& transition(const Name& n) const { return *table_.at(n); }

  std::vector<Name> enabled(const DynState& s) const {
    std::vector<Name> out;
    for (const auto& n : s.transitions)
      if (s.bag.contains(table_.at(n)->preset)) out.push_back(n);
    return out;
  }
  DynState fire(const DynState& s, const Name& n) const {
    if (!s.transitions.count(n)) throw NotEnabled(n, {});
    const auto& t = *table_.at(n);
    if (!s.bag.contains(t.preset)) {
      NameSet missing;
      for (const auto& p : t.preset)
        if (s.bag.get(p) == 0) missing.insert(p);
      throw NotEnabled(n, missing);
    }
    DynState r;
    r.transitions = s.transitions;
    for (const auto& u : t.post.transitions) r.transitions.insert(u->name);
    r.bag = s.bag.minus(t.preset).plus(t.post.bag);
    return r;
  }

 private:
  std::map<Name, DynTransitionPtr> table_;
  DynState initial_;
};

/// Step-for-step correspondence between a dynamic net and its flattening: the map
/// (T, b) ↦ b ∪ act(T) must commute with firing and preserve enabledness.
inline CertReport check_dyn_flat_bisim(const DynamicPNet& dnet, const NameSet& persistent,
                                       const NameSet& regular = {},
                                       std::size_t budget = kDefaultBudget) {
  Stopwatch sw;
  CertReport r;
  r.check = "dyn-flat-bisimulation";
  PNet flat = flatten(dnet, persistent, regular);
  DynamicSemantics dyn(dnet);
  auto image = [&](const DynState& s) {
    Bag b = s.bag;
    for (const auto& t : s.transitions) b.set(act(t), kInf);
    return PState{flat.from_bag(b), std::vector<bool>(flat.num_transitions(), false)};
  };
  r.pass = true;
  if (image(dyn.initial()).bag != initial_state(flat).bag) {
    r.pass = false;
    r.witness = Json{{"reason", "initial states differ"}};
  }
  std::set<DynState> seen{dyn.initial()};
  std::deque<DynState> queue{dyn.initial()};
  while (!queue.empty() && r.pass) {
    DynState s = queue.front();
    queue.pop_front();
    PState f = image(s);
    auto den = dyn.enabled(s);
    NameSet dset(den.begin(), den.end());
    NameSet fset = enabled_names(flat, f, false);
    if (dset != fset) {
      r.pass = false;
      r.witness = Json{{"reason", "enabled sets differ"},
                       {"bag", bag_json(s.bag)},
                       {"dynamic", names_json(dset)},
                       {"flat", names_json(fset)}};
      break;
    }
    for (const auto& t : den) {
      DynState s2 = dyn.fire(s, t);
      PState f2 = fire(flat, f, t, false);
      if (image(s2).bag != f2.bag) {
        r.pass = false;
        r.witness = Json{{"reason", "successor mismatch"}, {"bag", bag_json(s.bag)}, {"fired", t}};
        break;
      }
      if (seen.insert(s2).second) {
        if (seen.size() > budget) throw BudgetExceeded(budget, queue.size());
        queue.push_back(std::move(s2));
      }
    }
  }
  r.states_explored = seen.size();
  r.elapsed_ms = sw.ms();
  return r;
}

inline CertReport check_dyn_flat_bisim(const Encoding& enc, std::size_t budget = kDefaultBudget) {
  return check_dyn_flat_bisim(enc.net, enc.persistent, enc.regular, budget);
}

/// On every reachable state of ⟦N⟧: enabled transitions have equal or disjoint presets,
/// and available transitions with unequal presets overlapping on P are separated by a
/// negative token on one of their regular preset places.
inline CertReport check_dynamic_invariants(const Encoding& enc, std::size_t budget = kDefaultBudget) {
  Stopwatch sw;
  CertReport r;
  r.check = "dynamic-invariants";
  DynamicSemantics dyn(enc.net);
  std::set<DynState> seen{dyn.initial()};
  std::deque<DynState> queue{dyn.initial()};
  r.pass = true;
  auto regular_part = [&](const NameSet& s) {
    NameSet out;
    for (const auto& p : s)
      if (enc.regular.count(p)) out.insert(p);
    return out;
  };
  while (!queue.empty() && r.pass) {
    DynState s = queue.front();
    queue.pop_front();
    auto en = dyn.enabled(s);
    for (std::size_t i = 0; i < en.size() && r.pass; ++i)
      for (std::size_t j = i + 1; j < en.size() && r.pass; ++j) {
        const auto& a = dyn.transition(en[i]).preset;
        const auto& b = dyn.transition(en[j]).preset;
        NameSet common;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                              std::inserter(common, common.end()));
        if (a != b && !common.empty()) {
          r.pass = false;
          r.witness = Json{{"reason", "enabled presets overlap"}, {"t", en[i]}, {"u", en[j]},
                           {"bag", bag_json(s.bag)}};
        }
      }
    std::vector<Name> avail(s.transitions.begin(), s.transitions.end());
    for (std::size_t i = 0; i < avail.size() && r.pass; ++i)
      for (std::size_t j = i + 1; j < avail.size() && r.pass; ++j) {
        const auto& a = dyn.transition(avail[i]).preset;
        const auto& b = dyn.transition(avail[j]).preset;
        if (a == b) continue;
        NameSet ra = regular_part(a), rb = regular_part(b), common, both;
        std::set_intersection(ra.begin(), ra.end(), rb.begin(), rb.end(),
                              std::inserter(common, common.end()));
        if (common.empty()) continue;
        std::set_union(ra.begin(), ra.end(), rb.begin(), rb.end(), std::inserter(both, both.end()));
        bool separated = std::any_of(both.begin(), both.end(),
                                     [&](const Name& p) { return s.bag.get(neg(p)) > 0; });
        if (!separated) {
          r.pass = false;
          r.witness = Json{{"reason", "nested rules collide"}, {"t", avail[i]}, {"u", avail[j]},
                           {"bag", bag_json(s.bag)}};
        }
      }
    for (const auto& t : en) {
      DynState s2 = dyn.fire(s, t);
      if (seen.insert(s2).second) {
        if (seen.size() > budget) throw BudgetExceeded(budget, queue.size());
        queue.push_back(std::move(s2));
      }
    }
  }
  r.states_explored = seen.size();
  r.elapsed_ms = sw.ms();
  return r;
}

}  // namespace confree
