#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "confree/net_model.hpp"
#include "confree/structure.hpp"

namespace confree {

inline Name neg(const Name& p) { return "neg:" + p; }
inline Name act(const Name& t) { return "act:" + t; }
inline bool is_neg(const Name& p) { return p.rfind("neg:", 0) == 0; }
inline bool is_act(const Name& p) { return p.rfind("act:", 0) == 0; }

struct DynTransition;
using DynTransitionPtr = std::shared_ptr<const DynTransition>;

/// Dynamic p-net (T, b). Transitions are kept sorted by name and unique.
struct DynamicPNet {
  std::vector<DynTransitionPtr> transitions;
  Bag bag;
};

/// t = (S, N): consumes S, then adds the bag of N and releases its transitions.
struct DynTransition {
  Name name;
  NameSet preset;
  DynamicPNet post;
};

bool operator==(const DynamicPNet& a, const DynamicPNet& b);

inline bool operator==(const DynTransition& a, const DynTransition& b) {
  return a.name == b.name && a.preset == b.preset && a.post == b.post;
}

inline bool operator==(const DynamicPNet& a, const DynamicPNet& b) {
  if (a.bag != b.bag || a.transitions.size() != b.transitions.size()) return false;
  for (std::size_t i = 0; i < a.transitions.size(); ++i)
    if (a.transitions[i] != b.transitions[i] && !(*a.transitions[i] == *b.transitions[i]))
      return false;
  return true;
}

inline DynTransitionPtr make_dyn_transition(Name name, NameSet preset, DynamicPNet post) {
  return std::make_shared<const DynTransition>(
      DynTransition{std::move(name), std::move(preset), std::move(post)});
}

/// Sorts by name and merges duplicates; throws if one name carries two different values.
inline void normalize_transitions(std::vector<DynTransitionPtr>& ts) {
  std::sort(ts.begin(), ts.end(),
            [](const DynTransitionPtr& a, const DynTransitionPtr& b) { return a->name < b->name; });
  std::vector<DynTransitionPtr> out;
  for (auto& t : ts) {
    if (!out.empty() && out.back()->name == t->name) {
      if (!(*out.back() == *t))
        throw std::logic_error("two different transitions share the name " + t->name);
      continue;
    }
    out.push_back(t);
  }
  ts = std::move(out);
}

/// All transitions reachable through postsets, keyed by name.
inline std::map<Name, DynTransitionPtr> all_transitions(const DynamicPNet& net) {
  std::map<Name, DynTransitionPtr> out;
  std::vector<DynTransitionPtr> stack(net.transitions.begin(), net.transitions.end());
  while (!stack.empty()) {
    auto t = stack.back();
    stack.pop_back();
    auto [it, fresh] = out.emplace(t->name, t);
    if (!fresh) {
      if (it->second != t && !(*it->second == *t))
        throw std::logic_error("two different transitions share the name " + t->name);
      continue;
    }
    for (const auto& u : t->post.transitions) stack.push_back(u);
  }
  return out;
}

/// Where a generated transition comes from.
struct TransitionOrigin {
  bool positive = true;            // T_pos (transaction) or T_neg (propagation)
  std::vector<Name> cell;          // transitions of the cell C
  std::vector<Name> theta;         // transaction transitions, empty for T_neg
  Name removed;                    // p for T_neg members
  friend bool operator==(const TransitionOrigin&, const TransitionOrigin&) = default;
};

struct CellInfo {
  std::vector<Name> transitions;
  NameSet min;
  NameSet max;
  std::vector<Transaction> transactions;
};

/// ⟦N⟧ plus the bookkeeping needed by later passes.
struct Encoding {
  OccurrenceNet source;
  NameSet regular;     // P
  NameSet persistent;  // neg(P)
  DynamicPNet net;
  std::map<Name, TransitionOrigin> origin;
  std::map<std::vector<Name>, CellInfo> cells;  // every cell met, top-level or nested
};

inline Name transaction_name(const NameSet& min, const std::vector<Name>& theta,
                             const std::vector<Name>& cell) {
  return "tx:" + join(min) + "/" + join(theta) + "/" + join(cell);
}

inline Name propagation_name(const NameSet& min, const Name& p, const std::vector<Name>& cell) {
  return "prop:" + join(min) + "/" + p + "/" + join(cell);
}

namespace detail {

struct EncodeMemo {
  std::map<std::pair<NameSet, NameSet>, std::vector<DynTransitionPtr>> residues;
};

inline std::vector<DynTransitionPtr> encode_rec(const OccurrenceNet& n, Encoding& enc,
                                                EncodeMemo& memo) {
  auto key = std::make_pair(n.place_set(), n.transition_set());
  if (auto it = memo.residues.find(key); it != memo.residues.end()) return it->second;
  std::vector<DynTransitionPtr> out;
  for (const auto& cell : scell_decomposition(n)) {
    auto ths = transactions(cell);
    enc.cells[cell.transitions] = CellInfo{cell.transitions, cell.min, cell.max, ths};
    for (const auto& th : ths) {
      DynamicPNet post;
      for (const auto& q : th.max_places) post.bag.set(q, 1);
      for (const auto& q : cell.max)
        if (!th.max_places.count(q)) post.bag.set(neg(q), kInf);
      auto name = transaction_name(cell.min, th.transitions, cell.transitions);
      enc.origin[name] = TransitionOrigin{true, cell.transitions, th.transitions, ""};
      out.push_back(make_dyn_transition(name, cell.min, std::move(post)));
    }
    for (const auto& p : cell.min) {
      auto residue = ominus(cell.subnet, p);
      DynamicPNet post;
      post.transitions = encode_rec(residue, enc, memo);
      auto rmax = maximal_places(residue);
      for (const auto& q : cell.max)
        if (!rmax.count(q)) post.bag.set(neg(q), kInf);
      auto name = propagation_name(cell.min, p, cell.transitions);
      enc.origin[name] = TransitionOrigin{false, cell.transitions, {}, p};
      out.push_back(make_dyn_transition(name, {neg(p)}, std::move(post)));
    }
  }
  normalize_transitions(out);
  memo.residues.emplace(key, out);
  return out;
}

}  // namespace detail

/// ⟦N⟧: one transaction transition per θ:C and one propagation transition per C and p ∈ min(C).
inline Encoding encode(const OccurrenceNet& net) {
  Encoding enc;
  enc.source = net;
  for (const auto& p : net.places()) {
    enc.regular.insert(p);
    enc.persistent.insert(neg(p));
  }
  detail::EncodeMemo memo;
  enc.net.transitions = detail::encode_rec(net, enc, memo);
  for (const auto& p : net.initial()) enc.net.bag.set(p, 1);
  return enc;
}

/// ⌊N⌋. Places not listed as persistent are regular; activation places are persistent.
inline PNet flatten(const DynamicPNet& dnet, const NameSet& persistent, const NameSet& regular = {}) {
  auto all = all_transitions(dnet);
  std::map<Name, bool> places;
  for (const auto& p : regular) places[p] = false;
  for (const auto& p : persistent) places[p] = true;
  auto note = [&](const Name& p) {
    if (!places.count(p)) places[p] = persistent.count(p) > 0;
  };
  for (const auto& [p, c] : dnet.bag.entries()) note(p);
  std::map<Name, PNet::TransitionSpec> ts;
  for (const auto& [name, t] : all) {
    places[act(name)] = true;
    PNet::TransitionSpec spec;
    for (const auto& p : t->preset) {
      note(p);
      spec.preset.insert(p);
    }
    spec.preset.insert(act(name));
    for (const auto& [p, c] : t->post.bag.entries()) {
      note(p);
      spec.postset.insert(p);
    }
    for (const auto& u : t->post.transitions) spec.postset.insert(act(u->name));
    ts[name] = spec;
  }
  for (const auto& [name, t] : all)
    for (const auto& [p, c] : t->post.bag.entries()) {
      bool pers = places.at(p);
      if ((pers && c != kInf) || (!pers && c != 1))
        throw std::invalid_argument("postset of " + name + " puts " + count_string(c) +
                                    " tokens on " + p);
    }
  Bag init = dnet.bag;
  for (const auto& t : dnet.transitions) init.set(act(t->name), kInf);
  return PNet(places, ts, init);
}

inline PNet flatten(const Encoding& enc) { return flatten(enc.net, enc.persistent, enc.regular); }

/// Drops never-markable places, the transitions that need them, activation places of
/// dropped transitions, and unmarked places left without arcs.
inline PNet prune(const PNet& net) {
  const int P = net.num_places();
  const int T = net.num_transitions();
  std::vector<bool> markable(P, false);
  for (int p = 0; p < P; ++p) markable[p] = net.initial_counts()[p] > 0;
  std::vector<bool> live(T, false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int t = 0; t < T; ++t) {
      if (live[t]) continue;
      if (!std::all_of(net.pre(t).begin(), net.pre(t).end(), [&](int p) { return markable[p]; }))
        continue;
      live[t] = true;
      changed = true;
      for (int p : net.post(t)) markable[p] = true;
    }
  }
  NameSet dropped_transitions;
  for (int t = 0; t < T; ++t)
    if (!live[t]) dropped_transitions.insert(net.transition(t));
  std::map<Name, PNet::TransitionSpec> ts;
  std::vector<bool> touched(P, false);
  for (int t = 0; t < T; ++t) {
    if (!live[t]) continue;
    PNet::TransitionSpec spec;
    for (int p : net.pre(t)) {
      spec.preset.insert(net.place(p));
      touched[p] = true;
    }
    for (int p : net.post(t)) {
      const auto& pn = net.place(p);
      if (is_act(pn) && dropped_transitions.count(pn.substr(4))) continue;
      spec.postset.insert(pn);
      touched[p] = true;
    }
    ts[net.transition(t)] = spec;
  }
  std::map<Name, bool> places;
  Bag init;
  for (int p = 0; p < P; ++p) {
    const auto& pn = net.place(p);
    if (!markable[p]) continue;
    if (is_act(pn) && dropped_transitions.count(pn.substr(4))) continue;
    if (!touched[p] && net.initial_counts()[p] == 0) continue;
    places[pn] = net.persistent(p);
    init.set(pn, net.initial_counts()[p]);
  }
  return PNet(places, ts, init);
}

/// ⌊⟦N⟧⌋_conc: each transaction transition with several events becomes a choice
/// transition followed by a private copy of the transaction's process.
inline PNet expand_transactions(const PNet& net, const Encoding& enc) {
  auto places = net.place_kinds();
  auto ts = net.transition_specs();
  const auto& src = enc.source;
  for (int t = 0; t < net.num_transitions(); ++t) {
    const auto& tn = net.transition(t);
    auto it = enc.origin.find(tn);
    if (it == enc.origin.end() || !it->second.positive || it->second.theta.size() < 2) continue;
    const auto& theta = it->second.theta;
    auto proc = transition_closure_subnet(src, theta);
    auto finals = maximal_places(proc);
    auto rename = [&](const Name& n) { return finals.count(n) ? n : n + "@" + tn; };
    PNet::TransitionSpec choice;
    choice.preset = ts[tn].preset;
    for (const auto& q : minimal_places(proc)) choice.postset.insert(rename(q));
    for (const auto& q : ts[tn].postset)
      if (net.persistent(net.place_index(q))) choice.postset.insert(q);
    ts[tn] = choice;
    for (const auto& q : proc.places()) {
      auto r = rename(q);
      if (!places.count(r)) places[r] = false;
    }
    for (const auto& u : theta) {
      PNet::TransitionSpec spec;
      for (const auto& q : src.preset(u)) spec.preset.insert(rename(q));
      for (const auto& q : src.postset(u)) spec.postset.insert(rename(q));
      ts[u + "@" + tn] = spec;
    }
  }
  return PNet(places, ts, net.initial());
}

inline PNet uniformed(const OccurrenceNet& net, bool pruned = false) {
  auto flat = flatten(encode(net));
  return pruned ? prune(flat) : flat;
}

/// Everything one compilation produces.
struct Compilation {
  Encoding encoding;
  PNet flat;
  PNet net;  // pruned and/or expanded as requested
};

inline Compilation compile(const OccurrenceNet& source, bool pruned = true, bool expanded = false) {
  Compilation c;
  c.encoding = encode(source);
  c.flat = flatten(c.encoding);
  c.net = pruned ? prune(c.flat) : c.flat;
  if (expanded) c.net = expand_transactions(c.net, c.encoding);
  return c;
}

}  // namespace confree
