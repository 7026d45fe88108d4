#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace confree {

using Name = std::string;
using NameSet = std::set<Name>;
using Arc = std::pair<Name, Name>;

// Extended natural: finite counts for regular places, kInf for marked persistent places.
using Count = std::uint32_t;
inline constexpr Count kInf = std::numeric_limits<Count>::max();

inline std::string count_string(Count c) { return c == kInf ? "inf" : std::to_string(c); }

inline Count count_add(Count a, Count b) {
  if (a == kInf || b == kInf) return kInf;
  return a + b;
}

inline Count count_sub(Count a, Count b) {
  if (a == kInf) return kInf;
  if (b > a) throw std::domain_error("bag difference would go negative");
  return a - b;
}

inline std::string join(const std::vector<Name>& xs, const char* sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += xs[i];
  }
  return out;
}

inline std::string join(const NameSet& xs, const char* sep = ",") {
  return join(std::vector<Name>(xs.begin(), xs.end()), sep);
}

/// Bag over named places. Zero entries are never stored.
class Bag {
 public:
  Bag() = default;
  Bag(std::initializer_list<std::pair<const Name, Count>> init) {
    for (const auto& [k, v] : init) set(k, v);
  }

  Count get(const Name& p) const {
    auto it = counts_.find(p);
    return it == counts_.end() ? 0 : it->second;
  }
  void set(const Name& p, Count c) {
    if (c == 0)
      counts_.erase(p);
    else
      counts_[p] = c;
  }
  bool contains(const NameSet& s) const {
    return std::all_of(s.begin(), s.end(), [&](const Name& p) { return get(p) > 0; });
  }
  /// b ∖ S for a set S: one token per element, ∞ absorbs.
  Bag minus(const NameSet& s) const {
    Bag out = *this;
    for (const auto& p : s) out.set(p, count_sub(get(p), 1));
    return out;
  }
  /// b ∪ m as multiset sum, ∞ absorbs.
  Bag plus(const Bag& m) const {
    Bag out = *this;
    for (const auto& [p, c] : m.counts_) out.set(p, count_add(get(p), c));
    return out;
  }
  NameSet support() const {
    NameSet s;
    for (const auto& [p, c] : counts_) s.insert(p);
    return s;
  }
  bool empty() const { return counts_.empty(); }
  const std::map<Name, Count>& entries() const { return counts_; }

  friend bool operator==(const Bag&, const Bag&) = default;
  friend auto operator<=>(const Bag&, const Bag&) = default;

 private:
  std::map<Name, Count> counts_;
};

inline std::string to_string(const Bag& b) {
  std::string out = "{";
  bool first = true;
  for (const auto& [p, c] : b.entries()) {
    if (!first) out += ",";
    first = false;
    out += p;
    if (c != 1) out += "^" + count_string(c);
  }
  return out + "}";
}

/// Names of source nets may not use the separators of generated names.
inline bool valid_source_name(const Name& n) {
  if (n.empty()) return false;
  return std::none_of(n.begin(), n.end(), [](char c) {
    return c == ',' || c == '/' || c == ':' || c == '@' || c == ' ' || c == '\t' || c == '\n' ||
           c == '\r';
  });
}

inline bool valid_node_name(const Name& n) {
  if (n.empty()) return false;
  return std::none_of(n.begin(), n.end(),
                      [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; });
}

/// Finite net with set-valued flow and a 1-safe initial marking.
/// Places and transitions are stored in lexicographic order of their names.
class OccurrenceNet {
 public:
  OccurrenceNet() = default;

  OccurrenceNet(const NameSet& places, const NameSet& transitions, const std::vector<Arc>& flow,
                const NameSet& initial, bool check_names = true) {
    places_.assign(places.begin(), places.end());
    transitions_.assign(transitions.begin(), transitions.end());
    for (int i = 0; i < static_cast<int>(places_.size()); ++i) {
      if (check_names && !valid_source_name(places_[i]))
        throw std::invalid_argument("invalid place name '" + places_[i] + "'");
      pindex_[places_[i]] = i;
    }
    for (int i = 0; i < static_cast<int>(transitions_.size()); ++i) {
      if (check_names && !valid_source_name(transitions_[i]))
        throw std::invalid_argument("invalid transition name '" + transitions_[i] + "'");
      if (pindex_.count(transitions_[i]))
        throw std::invalid_argument("name used for both a place and a transition: " +
                                    transitions_[i]);
      tindex_[transitions_[i]] = i;
    }
    pre_.assign(transitions_.size(), {});
    post_.assign(transitions_.size(), {});
    producers_.assign(places_.size(), {});
    consumers_.assign(places_.size(), {});
    for (const auto& [from, to] : flow) {
      if (pindex_.count(from) && tindex_.count(to)) {
        pre_[tindex_[to]].push_back(pindex_[from]);
        consumers_[pindex_[from]].push_back(tindex_[to]);
      } else if (tindex_.count(from) && pindex_.count(to)) {
        post_[tindex_[from]].push_back(pindex_[to]);
        producers_[pindex_[to]].push_back(tindex_[from]);
      } else {
        throw std::invalid_argument("arc " + from + " -> " + to +
                                    " must join a place and a transition of the net");
      }
    }
    auto normalize = [](std::vector<std::vector<int>>& v) {
      for (auto& xs : v) {
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
      }
    };
    normalize(pre_);
    normalize(post_);
    normalize(producers_);
    normalize(consumers_);
    marked_.assign(places_.size(), false);
    for (const auto& p : initial) {
      auto it = pindex_.find(p);
      if (it == pindex_.end()) throw std::invalid_argument("marked place not in net: " + p);
      marked_[it->second] = true;
    }
  }

  int num_places() const { return static_cast<int>(places_.size()); }
  int num_transitions() const { return static_cast<int>(transitions_.size()); }
  bool empty() const { return places_.empty() && transitions_.empty(); }

  const Name& place(int i) const { return places_[i]; }
  const Name& transition(int i) const { return transitions_[i]; }
  const std::vector<Name>& places() const { return places_; }
  const std::vector<Name>& transitions() const { return transitions_; }

  int place_index(const Name& n) const {
    auto it = pindex_.find(n);
    return it == pindex_.end() ? -1 : it->second;
  }
  int transition_index(const Name& n) const {
    auto it = tindex_.find(n);
    return it == tindex_.end() ? -1 : it->second;
  }
  bool has_place(const Name& n) const { return pindex_.count(n) > 0; }
  bool has_transition(const Name& n) const { return tindex_.count(n) > 0; }

  const std::vector<int>& pre(int t) const { return pre_[t]; }
  const std::vector<int>& post(int t) const { return post_[t]; }
  const std::vector<int>& producers(int p) const { return producers_[p]; }
  const std::vector<int>& consumers(int p) const { return consumers_[p]; }
  bool marked(int p) const { return marked_[p]; }

  NameSet preset(const Name& t) const { return names_of(pre_.at(transition_index_checked(t))); }
  NameSet postset(const Name& t) const { return names_of(post_.at(transition_index_checked(t))); }

  NameSet place_set() const { return NameSet(places_.begin(), places_.end()); }
  NameSet transition_set() const { return NameSet(transitions_.begin(), transitions_.end()); }
  NameSet initial() const {
    NameSet s;
    for (int i = 0; i < num_places(); ++i)
      if (marked_[i]) s.insert(places_[i]);
    return s;
  }
  std::vector<Arc> flow() const {
    std::vector<Arc> out;
    for (int t = 0; t < num_transitions(); ++t) {
      for (int p : pre_[t]) out.emplace_back(places_[p], transitions_[t]);
      for (int p : post_[t]) out.emplace_back(transitions_[t], places_[p]);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  NameSet names_of(const std::vector<int>& place_ids) const {
    NameSet s;
    for (int p : place_ids) s.insert(places_[p]);
    return s;
  }

  /// Induced subnet on the given nodes; arcs between kept nodes are kept.
  OccurrenceNet subnet(const NameSet& places, const NameSet& transitions) const {
    std::vector<Arc> arcs;
    for (const auto& t : transitions) {
      int ti = transition_index_checked(t);
      for (int p : pre_[ti])
        if (places.count(places_[p])) arcs.emplace_back(places_[p], t);
      for (int p : post_[ti])
        if (places.count(places_[p])) arcs.emplace_back(t, places_[p]);
    }
    NameSet init;
    for (const auto& p : places) {
      int pi = place_index(p);
      if (pi < 0) throw std::invalid_argument("unknown place " + p);
      if (marked_[pi]) init.insert(p);
    }
    return OccurrenceNet(places, transitions, arcs, init, false);
  }

  friend bool operator==(const OccurrenceNet& a, const OccurrenceNet& b) {
    return a.places_ == b.places_ && a.transitions_ == b.transitions_ && a.pre_ == b.pre_ &&
           a.post_ == b.post_ && a.marked_ == b.marked_;
  }

 private:
  int transition_index_checked(const Name& t) const {
    int i = transition_index(t);
    if (i < 0) throw std::invalid_argument("unknown transition " + t);
    return i;
  }

  std::vector<Name> places_, transitions_;
  std::map<Name, int> pindex_, tindex_;
  std::vector<std::vector<int>> pre_, post_, producers_, consumers_;
  std::vector<bool> marked_;
};

inline NameSet minimal_places(const OccurrenceNet& n) {
  NameSet s;
  for (int p = 0; p < n.num_places(); ++p)
    if (n.producers(p).empty()) s.insert(n.place(p));
  return s;
}

inline NameSet maximal_places(const OccurrenceNet& n) {
  NameSet s;
  for (int p = 0; p < n.num_places(); ++p)
    if (n.consumers(p).empty()) s.insert(n.place(p));
  return s;
}

/// Flat net with regular and persistent places. Postsets put one token on regular
/// places and ∞ on persistent ones. Places and transitions are kept in name order.
class PNet {
 public:
  struct TransitionSpec {
    NameSet preset;
    NameSet postset;
  };

  PNet() = default;

  PNet(const std::map<Name, bool>& places, const std::map<Name, TransitionSpec>& transitions,
       const Bag& initial) {
    for (const auto& [name, persistent] : places) {
      if (!valid_node_name(name)) throw std::invalid_argument("invalid place name '" + name + "'");
      pindex_[name] = static_cast<int>(places_.size());
      places_.push_back(name);
      persistent_.push_back(persistent);
    }
    for (const auto& [name, spec] : transitions) {
      if (!valid_node_name(name))
        throw std::invalid_argument("invalid transition name '" + name + "'");
      if (pindex_.count(name))
        throw std::invalid_argument("name used for both a place and a transition: " + name);
      tindex_[name] = static_cast<int>(transitions_.size());
      transitions_.push_back(name);
      pre_.push_back(indices(spec.preset));
      post_.push_back(indices(spec.postset));
    }
    initial_.assign(places_.size(), 0);
    for (const auto& [p, c] : initial.entries()) {
      int i = place_index(p);
      if (i < 0) throw std::invalid_argument("initial bag mentions unknown place " + p);
      if (persistent_[i] && c != kInf)
        throw std::invalid_argument("persistent place " + p + " must hold 0 or inf tokens");
      initial_[i] = c;
    }
    persistent_transition_.assign(transitions_.size(), false);
    producers_.assign(places_.size(), {});
    consumers_.assign(places_.size(), {});
    for (int t = 0; t < num_transitions(); ++t) {
      bool all = true;
      for (int p : pre_[t]) {
        all = all && persistent_[p];
        consumers_[p].push_back(t);
      }
      for (int p : post_[t]) {
        all = all && persistent_[p];
        producers_[p].push_back(t);
      }
      persistent_transition_[t] = all;
    }
  }

  int num_places() const { return static_cast<int>(places_.size()); }
  int num_transitions() const { return static_cast<int>(transitions_.size()); }
  const Name& place(int i) const { return places_[i]; }
  const Name& transition(int i) const { return transitions_[i]; }
  const std::vector<Name>& places() const { return places_; }
  const std::vector<Name>& transitions() const { return transitions_; }
  bool persistent(int p) const { return persistent_[p]; }
  bool persistent_transition(int t) const { return persistent_transition_[t]; }
  const std::vector<int>& pre(int t) const { return pre_[t]; }
  const std::vector<int>& post(int t) const { return post_[t]; }
  const std::vector<int>& producers(int p) const { return producers_[p]; }
  const std::vector<int>& consumers(int p) const { return consumers_[p]; }
  const std::vector<Count>& initial_counts() const { return initial_; }

  int place_index(const Name& n) const {
    auto it = pindex_.find(n);
    return it == pindex_.end() ? -1 : it->second;
  }
  int transition_index(const Name& n) const {
    auto it = tindex_.find(n);
    return it == tindex_.end() ? -1 : it->second;
  }

  NameSet regular_places() const { return select(false); }
  NameSet persistent_places() const { return select(true); }
  NameSet names_of(const std::vector<int>& ids) const {
    NameSet s;
    for (int p : ids) s.insert(places_[p]);
    return s;
  }
  NameSet preset(const Name& t) const { return names_of(pre_.at(checked_t(t))); }
  NameSet postset(const Name& t) const { return names_of(post_.at(checked_t(t))); }
  /// Preset restricted to regular places.
  std::vector<int> regular_pre(int t) const {
    std::vector<int> out;
    for (int p : pre_[t])
      if (!persistent_[p]) out.push_back(p);
    return out;
  }

  Bag initial() const { return to_bag(initial_); }
  Bag to_bag(const std::vector<Count>& counts) const {
    Bag b;
    for (int i = 0; i < num_places(); ++i) b.set(places_[i], counts[i]);
    return b;
  }
  std::vector<Count> from_bag(const Bag& b) const {
    std::vector<Count> out(places_.size(), 0);
    for (const auto& [p, c] : b.entries()) {
      int i = place_index(p);
      if (i < 0) throw std::invalid_argument("bag mentions unknown place " + p);
      out[i] = c;
    }
    return out;
  }

  std::map<Name, bool> place_kinds() const {
    std::map<Name, bool> m;
    for (int i = 0; i < num_places(); ++i) m[places_[i]] = persistent_[i];
    return m;
  }
  std::map<Name, TransitionSpec> transition_specs() const {
    std::map<Name, TransitionSpec> m;
    for (int t = 0; t < num_transitions(); ++t)
      m[transitions_[t]] = {names_of(pre_[t]), names_of(post_[t])};
    return m;
  }

  friend bool operator==(const PNet& a, const PNet& b) {
    return a.places_ == b.places_ && a.persistent_ == b.persistent_ &&
           a.transitions_ == b.transitions_ && a.pre_ == b.pre_ && a.post_ == b.post_ &&
           a.initial_ == b.initial_;
  }

 private:
  std::vector<int> indices(const NameSet& s) const {
    std::vector<int> out;
    for (const auto& p : s) {
      int i = place_index(p);
      if (i < 0) throw std::invalid_argument("transition refers to unknown place " + p);
      out.push_back(i);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  int checked_t(const Name& t) const {
    int i = transition_index(t);
    if (i < 0) throw std::invalid_argument("unknown transition " + t);
    return i;
  }
  NameSet select(bool persistent) const {
    NameSet s;
    for (int i = 0; i < num_places(); ++i)
      if (persistent_[i] == persistent) s.insert(places_[i]);
    return s;
  }

  std::vector<Name> places_;
  std::vector<bool> persistent_;
  std::vector<Name> transitions_;
  std::map<Name, int> pindex_, tindex_;
  std::vector<std::vector<int>> pre_, post_, producers_, consumers_;
  std::vector<Count> initial_;
  std::vector<bool> persistent_transition_;
};

/// An occurrence net read as a p-net without persistent places.
inline PNet as_pnet(const OccurrenceNet& n) {
  std::map<Name, bool> places;
  for (const auto& p : n.places()) places[p] = false;
  std::map<Name, PNet::TransitionSpec> ts;
  for (const auto& t : n.transitions()) ts[t] = {n.preset(t), n.postset(t)};
  Bag init;
  for (const auto& p : n.initial()) init.set(p, 1);
  return PNet(places, ts, init);
}

struct Violation {
  std::string kind;  // acyclic | backward conflict | self-conflict | empty preset | empty postset | marking
  std::vector<Name> nodes;
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(const std::string& kind) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.kind == kind; });
  }
};

}  // namespace confree
