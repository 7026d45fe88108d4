#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "confree/net_model.hpp"

namespace confree {

/// Dense boolean relation over n elements.
class BitMatrix {
 public:
  BitMatrix() = default;
  explicit BitMatrix(int n) : n_(n), bits_(static_cast<std::size_t>(n) * n, 0) {}
  int size() const { return n_; }
  bool get(int i, int j) const { return bits_[static_cast<std::size_t>(i) * n_ + j] != 0; }
  void set(int i, int j, bool v = true) { bits_[static_cast<std::size_t>(i) * n_ + j] = v; }
  void close_transitively() {
    for (int k = 0; k < n_; ++k)
      for (int i = 0; i < n_; ++i)
        if (get(i, k))
          for (int j = 0; j < n_; ++j)
            if (get(k, j)) set(i, j);
  }
  void close_reflexively() {
    for (int i = 0; i < n_; ++i) set(i, i);
  }
  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  int n_ = 0;
  std::vector<char> bits_;
};

/// Relations of an occurrence net. Nodes are indexed places first, then transitions.
struct CausalStructure {
  int num_places = 0;
  int num_transitions = 0;
  std::vector<Name> node_names;
  BitMatrix causality;           // ≼ = F*
  BitMatrix strict_causality;    // F+
  BitMatrix immediate_conflict;  // #0, over transitions only
  BitMatrix conflict;            // #
  BitMatrix cell_preorder;       // ⊑ = (≼ ∪ Pre⁻¹)*
  BitMatrix cell_equiv;          // ↔

  int node_of_place(int p) const { return p; }
  int node_of_transition(int t) const { return num_places + t; }
  int node(const Name& n) const {
    for (int i = 0; i < static_cast<int>(node_names.size()); ++i)
      if (node_names[i] == n) return i;
    throw std::invalid_argument("unknown node " + n);
  }
  bool precedes(const Name& x, const Name& y) const { return causality.get(node(x), node(y)); }
  bool in_conflict(const Name& x, const Name& y) const { return conflict.get(node(x), node(y)); }
  bool in_immediate_conflict(const Name& t, const Name& u) const {
    return immediate_conflict.get(node(t) - num_places, node(u) - num_places);
  }
  bool below_in_cell_order(const Name& x, const Name& y) const {
    return cell_preorder.get(node(x), node(y));
  }
  bool cell_equivalent(const Name& x, const Name& y) const {
    return cell_equiv.get(node(x), node(y));
  }
};

inline CausalStructure compute_relations(const OccurrenceNet& net) {
  CausalStructure cs;
  const int P = net.num_places();
  const int T = net.num_transitions();
  const int N = P + T;
  cs.num_places = P;
  cs.num_transitions = T;
  cs.node_names = net.places();
  cs.node_names.insert(cs.node_names.end(), net.transitions().begin(), net.transitions().end());

  BitMatrix flow(N);
  BitMatrix cellrel(N);
  for (int t = 0; t < T; ++t) {
    for (int p : net.pre(t)) {
      flow.set(p, P + t);
      cellrel.set(p, P + t);
      cellrel.set(P + t, p);
    }
    for (int p : net.post(t)) {
      flow.set(P + t, p);
      cellrel.set(P + t, p);
    }
  }
  flow.close_transitively();
  cs.strict_causality = flow;
  cs.causality = flow;
  cs.causality.close_reflexively();

  cs.immediate_conflict = BitMatrix(T);
  for (int p = 0; p < P; ++p)
    for (int t : net.consumers(p))
      for (int u : net.consumers(p))
        if (t != u) cs.immediate_conflict.set(t, u);

  cs.conflict = BitMatrix(N);
  for (int t1 = 0; t1 < T; ++t1)
    for (int t2 = 0; t2 < T; ++t2) {
      if (!cs.immediate_conflict.get(t1, t2)) continue;
      for (int x = 0; x < N; ++x) {
        if (!cs.causality.get(P + t1, x)) continue;
        for (int y = 0; y < N; ++y)
          if (cs.causality.get(P + t2, y)) cs.conflict.set(x, y);
      }
    }

  cellrel.close_transitively();
  cellrel.close_reflexively();
  cs.cell_preorder = cellrel;
  cs.cell_equiv = BitMatrix(N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (cellrel.get(i, j) && cellrel.get(j, i)) cs.cell_equiv.set(i, j);
  return cs;
}

/// Structural branching cell.
struct SCell {
  std::vector<Name> transitions;  // sorted
  NameSet places;                 // presets of member transitions
  NameSet min;
  NameSet max;
  OccurrenceNet subnet;  // N_C: members, their presets and postsets
};

struct Transaction {
  std::vector<Name> transitions;  // sorted
  NameSet min_places;
  NameSet max_places;
  friend bool operator==(const Transaction& a, const Transaction& b) {
    return a.transitions == b.transitions;
  }
};

/// Subnet spanned by the given transitions with their presets and postsets.
inline OccurrenceNet transition_closure_subnet(const OccurrenceNet& net,
                                              const std::vector<Name>& transitions) {
  NameSet places;
  for (const auto& t : transitions) {
    auto pre = net.preset(t);
    auto post = net.postset(t);
    places.insert(pre.begin(), pre.end());
    places.insert(post.begin(), post.end());
  }
  return net.subnet(places, NameSet(transitions.begin(), transitions.end()));
}

inline std::vector<SCell> scell_decomposition(const OccurrenceNet& net) {
  auto cs = compute_relations(net);
  const int P = net.num_places();
  std::vector<int> cls(net.num_transitions(), -1);
  std::vector<SCell> cells;
  for (int t = 0; t < net.num_transitions(); ++t) {
    if (cls[t] >= 0) continue;
    SCell c;
    for (int u = t; u < net.num_transitions(); ++u)
      if (cs.cell_equiv.get(P + t, P + u)) {
        cls[u] = static_cast<int>(cells.size());
        c.transitions.push_back(net.transition(u));
      }
    for (const auto& u : c.transitions) {
      auto pre = net.preset(u);
      c.places.insert(pre.begin(), pre.end());
    }
    c.subnet = transition_closure_subnet(net, c.transitions);
    c.min = minimal_places(c.subnet);
    c.max = maximal_places(c.subnet);
    cells.push_back(std::move(c));
  }
  std::sort(cells.begin(), cells.end(),
            [](const SCell& a, const SCell& b) { return a.transitions < b.transitions; });
  return cells;
}

/// N ⊖ p: removes the minimal place p and everything that causally depends on it.
inline OccurrenceNet ominus(const OccurrenceNet& net, const Name& p) {
  auto mins = minimal_places(net);
  if (!mins.count(p)) throw std::invalid_argument("ominus: place " + p + " is not minimal");
  NameSet places, transitions;
  for (const auto& q : mins)
    if (q != p) places.insert(q);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int t = 0; t < net.num_transitions(); ++t) {
      const auto& tn = net.transition(t);
      if (transitions.count(tn)) continue;
      bool ready = std::all_of(net.pre(t).begin(), net.pre(t).end(),
                               [&](int q) { return places.count(net.place(q)) > 0; });
      if (!ready) continue;
      transitions.insert(tn);
      for (int q : net.post(t)) places.insert(net.place(q));
      changed = true;
    }
  }
  return net.subnet(places, transitions);
}

namespace detail {

inline std::vector<Name> sorted_names(const OccurrenceNet& net, const std::vector<bool>& fired) {
  std::vector<Name> out;
  for (int t = 0; t < net.num_transitions(); ++t)
    if (fired[t]) out.push_back(net.transition(t));
  return out;
}

}  // namespace detail

/// Maximal deterministic processes of a net started from its minimal places, found by
/// depth-first firing with memoized fired sets.
inline std::vector<Transaction> maximal_runs(const OccurrenceNet& net) {
  const int T = net.num_transitions();
  std::vector<bool> start_marking(net.num_places(), false);
  for (int p = 0; p < net.num_places(); ++p) start_marking[p] = net.producers(p).empty();
  std::set<std::vector<bool>> seen;
  std::set<std::vector<Name>> results;
  std::function<void(std::vector<bool>&, std::vector<bool>&)> dfs = [&](std::vector<bool>& fired,
                                                                         std::vector<bool>& mark) {
    if (!seen.insert(fired).second) return;
    bool any = false;
    for (int t = 0; t < T; ++t) {
      if (fired[t]) continue;
      bool en = std::all_of(net.pre(t).begin(), net.pre(t).end(), [&](int p) { return mark[p]; });
      if (!en) continue;
      any = true;
      fired[t] = true;
      for (int p : net.pre(t)) mark[p] = false;
      for (int p : net.post(t)) mark[p] = true;
      dfs(fired, mark);
      for (int p : net.post(t)) mark[p] = false;
      for (int p : net.pre(t)) mark[p] = true;
      fired[t] = false;
    }
    if (!any) results.insert(detail::sorted_names(net, fired));
  };
  std::vector<bool> fired(T, false);
  dfs(fired, start_marking);
  std::vector<Transaction> out;
  for (const auto& ts : results) {
    Transaction th;
    th.transitions = ts;
    auto sub = transition_closure_subnet(net, ts);
    th.min_places = minimal_places(sub);
    th.max_places = maximal_places(sub);
    out.push_back(std::move(th));
  }
  return out;
}

inline std::vector<Transaction> transactions(const SCell& cell) { return maximal_runs(cell.subnet); }

/// Prime event structure over named events.
struct PES {
  std::vector<Name> events;
  BitMatrix causality;  // reflexive
  BitMatrix conflict;
  BitMatrix shared_preset;  // events competing for a place of the net; empty without a net

  int size() const { return static_cast<int>(events.size()); }
  int index(const Name& e) const {
    for (int i = 0; i < size(); ++i)
      if (events[i] == e) return i;
    throw std::invalid_argument("unknown event " + e);
  }
  bool leq(const Name& a, const Name& b) const { return causality.get(index(a), index(b)); }
  bool in_conflict(const Name& a, const Name& b) const {
    return conflict.get(index(a), index(b));
  }
};

inline PES to_pes(const OccurrenceNet& net) {
  auto cs = compute_relations(net);
  const int P = net.num_places();
  const int T = net.num_transitions();
  PES pes;
  pes.events = net.transitions();
  pes.causality = BitMatrix(T);
  pes.conflict = BitMatrix(T);
  pes.shared_preset = cs.immediate_conflict;
  for (int i = 0; i < T; ++i)
    for (int j = 0; j < T; ++j) {
      pes.causality.set(i, j, cs.causality.get(P + i, P + j));
      pes.conflict.set(i, j, cs.conflict.get(P + i, P + j));
    }
  return pes;
}

/// e1 # e2 ≼ e3 implies e1 # e3.
inline bool conflict_inherited(const PES& pes) {
  const int n = pes.size();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (!pes.conflict.get(a, b)) continue;
      for (int c = 0; c < n; ++c)
        if (pes.causality.get(b, c) && !pes.conflict.get(a, c)) return false;
    }
  return true;
}

inline ValidationReport validate_occurrence_net(const OccurrenceNet& net) {
  ValidationReport rep;
  auto cs = compute_relations(net);
  const int P = net.num_places();
  const int N = P + net.num_transitions();
  std::vector<Name> on_cycle;
  for (int x = 0; x < N; ++x)
    if (cs.strict_causality.get(x, x)) on_cycle.push_back(cs.node_names[x]);
  if (!on_cycle.empty()) rep.violations.push_back({"acyclic", on_cycle});
  for (int p = 0; p < P; ++p)
    if (net.producers(p).size() > 1) {
      std::vector<Name> nodes{net.place(p)};
      for (int t : net.producers(p)) nodes.push_back(net.transition(t));
      rep.violations.push_back({"backward conflict", nodes});
    }
  for (int t = 0; t < net.num_transitions(); ++t)
    if (cs.conflict.get(P + t, P + t)) rep.violations.push_back({"self-conflict", {net.transition(t)}});
  for (int t = 0; t < net.num_transitions(); ++t) {
    if (net.pre(t).empty()) rep.violations.push_back({"empty preset", {net.transition(t)}});
    if (net.post(t).empty()) rep.violations.push_back({"empty postset", {net.transition(t)}});
  }
  auto mins = minimal_places(net);
  auto init = net.initial();
  if (mins != init) {
    std::vector<Name> diff;
    std::set_symmetric_difference(mins.begin(), mins.end(), init.begin(), init.end(),
                                  std::back_inserter(diff));
    rep.violations.push_back({"marking", diff});
  }
  return rep;
}

}  // namespace confree
