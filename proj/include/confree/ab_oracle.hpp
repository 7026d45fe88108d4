#pragma once

#include <bit>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "confree/encoder.hpp"
#include "confree/processes.hpp"
#include "confree/report.hpp"
#include "confree/semantics.hpp"
#include "confree/structure.hpp"

namespace confree {

using EventSet = std::uint64_t;

inline bool subset(EventSet a, EventSet b) { return (a & ~b) == 0; }

/// Which relation closes stopping prefixes: the immediate conflict of the event
/// structure, or the direct conflict of the net (events sharing a preset place).
enum class ConflictMode { event_structure, net };

/// Branching-cell machinery over a finite PES (at most 64 events).
class BranchingCells {
 public:
  explicit BranchingCells(PES pes, ConflictMode mode = ConflictMode::event_structure)
      : pes_(std::move(pes)), mode_(mode) {
    n_ = pes_.size();
    if (n_ > 64) throw std::invalid_argument("event structures above 64 events are not supported");
    if (mode_ == ConflictMode::net && pes_.shared_preset.size() != n_)
      throw std::invalid_argument("net conflict mode needs an event structure built from a net");
    down_.assign(n_, 0);
    conf_.assign(n_, 0);
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b) {
        if (pes_.causality.get(b, a)) down_[a] |= bit(b);
        if (pes_.conflict.get(a, b)) conf_[a] |= bit(b);
      }
  }

  const PES& pes() const { return pes_; }
  ConflictMode mode() const { return mode_; }
  int size() const { return n_; }
  EventSet all() const { return n_ == 64 ? ~EventSet{0} : (EventSet{1} << n_) - 1; }
  static EventSet bit(int e) { return EventSet{1} << e; }

  EventSet mask(const NameSet& events) const {
    EventSet m = 0;
    for (const auto& e : events) m |= bit(pes_.index(e));
    return m;
  }
  NameSet names(EventSet m) const {
    NameSet s;
    for (int e = 0; e < n_; ++e)
      if (m & bit(e)) s.insert(pes_.events[e]);
    return s;
  }

  bool is_configuration(EventSet v) const {
    for (int e = 0; e < n_; ++e)
      if ((v & bit(e)) && (!subset(down_[e], v) || (conf_[e] & v))) return false;
    return true;
  }

  /// Events of E^v: outside v and not in conflict with it.
  EventSet future(EventSet v) const { return future_in(all(), v); }
  EventSet future_in(EventSet domain, EventSet v) const {
    EventSet out = 0;
    for (int e = 0; e < n_; ++e)
      if ((domain & bit(e)) && !(v & bit(e)) && !(conf_[e] & v)) out |= bit(e);
    return out;
  }

  /// Immediate conflict of the restriction to a domain.
  bool immediate_conflict(EventSet domain, int a, int b) const {
    if (mode_ == ConflictMode::net) return pes_.shared_preset.get(a, b);
    if (!(conf_[a] & bit(b))) return false;
    EventSet da = down_[a] & domain, db = down_[b] & domain;
    for (int x = 0; x < n_; ++x) {
      if (!(da & bit(x))) continue;
      for (int y = 0; y < n_; ++y)
        if ((db & bit(y)) && (conf_[x] & bit(y)) && !(x == a && y == b)) return false;
    }
    return true;
  }

  /// Least stopping prefix of the domain containing x.
  EventSet stopping_closure(EventSet domain, EventSet x) const {
    EventSet s = x;
    bool changed = true;
    while (changed) {
      changed = false;
      for (int e = 0; e < n_; ++e) {
        if (!(s & bit(e))) continue;
        EventSet add = down_[e] & domain;
        for (int f = 0; f < n_; ++f)
          if ((domain & bit(f)) && !(s & bit(f)) && immediate_conflict(domain, e, f)) add |= bit(f);
        if (add & ~s) {
          s |= add;
          changed = true;
        }
      }
    }
    return s;
  }

  bool is_stopping_prefix(EventSet domain, EventSet s) const {
    return subset(s, domain) && stopping_closure(domain, s) == s;
  }

  std::vector<EventSet> stopping_prefixes(EventSet domain) const {
    std::set<EventSet> seen{0};
    std::deque<EventSet> queue{0};
    while (!queue.empty()) {
      EventSet s = queue.front();
      queue.pop_front();
      for (int e = 0; e < n_; ++e) {
        if (!(domain & bit(e)) || (s & bit(e))) continue;
        EventSet t = stopping_closure(domain, s | bit(e));
        if (seen.insert(t).second) queue.push_back(t);
      }
    }
    return {seen.begin(), seen.end()};
  }

  std::vector<EventSet> initial_stopping_prefixes(EventSet domain) const {
    std::set<EventSet> cands;
    for (int e = 0; e < n_; ++e)
      if (domain & bit(e)) cands.insert(stopping_closure(domain, bit(e)));
    std::vector<EventSet> out;
    for (EventSet c : cands) {
      bool minimal = std::none_of(cands.begin(), cands.end(),
                                  [&](EventSet d) { return d != c && subset(d, c); });
      if (minimal) out.push_back(c);
    }
    return out;
  }

  /// Maximal configurations of the restriction to a downward-closed domain.
  std::vector<EventSet> maximal_configurations(EventSet domain) const {
    std::set<EventSet> seen, maximal;
    std::function<void(EventSet)> dfs = [&](EventSet v) {
      if (!seen.insert(v).second) return;
      bool grown = false;
      for (int e = 0; e < n_; ++e) {
        if (!(domain & bit(e)) || (v & bit(e))) continue;
        if (!subset(down_[e] & domain & ~bit(e), v) || (conf_[e] & v)) continue;
        grown = true;
        dfs(v | bit(e));
      }
      if (!grown) maximal.insert(v);
    };
    dfs(0);
    return {maximal.begin(), maximal.end()};
  }

  /// Increments allowed after v: maximal configurations of initial stopping prefixes of E^v.
  const std::vector<EventSet>& cell_steps(EventSet v) const {
    if (auto it = steps_.find(v); it != steps_.end()) return it->second;
    std::set<EventSet> out;
    EventSet fut = future(v);
    for (EventSet b : initial_stopping_prefixes(fut))
      for (EventSet w : maximal_configurations(b))
        if (w) out.insert(w);
    return steps_.emplace(v, std::vector<EventSet>(out.begin(), out.end())).first->second;
  }

  /// Increments allowed by the plain definition: stopped configurations of E^v.
  std::vector<EventSet> stopped_steps(EventSet v) const {
    std::set<EventSet> out;
    EventSet fut = future(v);
    for (EventSet s : stopping_prefixes(fut))
      for (EventSet w : maximal_configurations(s))
        if (w) out.insert(w);
    return {out.begin(), out.end()};
  }

  bool is_stopped(EventSet v) const {
    for (EventSet s : stopping_prefixes(all()))
      for (EventSet w : maximal_configurations(s))
        if (w == v) return true;
    return false;
  }

 private:
  PES pes_;
  ConflictMode mode_;
  int n_ = 0;
  std::vector<EventSet> down_, conf_;
  mutable std::map<EventSet, std::vector<EventSet>> steps_;
};

/// Restriction of the PES to E^v, as a PES of its own.
inline PES future(const PES& pes, const NameSet& v) {
  BranchingCells bc(pes);
  EventSet m = bc.mask(v);
  if (!bc.is_configuration(m)) throw std::invalid_argument("not a configuration: {" + join(v) + "}");
  EventSet f = bc.future(m);
  std::vector<int> keep;
  for (int e = 0; e < pes.size(); ++e)
    if (f & BranchingCells::bit(e)) keep.push_back(e);
  PES out;
  out.causality = BitMatrix(static_cast<int>(keep.size()));
  out.conflict = BitMatrix(static_cast<int>(keep.size()));
  bool from_net = pes.shared_preset.size() == pes.size();
  if (from_net) out.shared_preset = BitMatrix(static_cast<int>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.events.push_back(pes.events[keep[i]]);
    for (std::size_t j = 0; j < keep.size(); ++j) {
      out.causality.set(i, j, pes.causality.get(keep[i], keep[j]));
      out.conflict.set(i, j, pes.conflict.get(keep[i], keep[j]));
      if (from_net) out.shared_preset.set(i, j, pes.shared_preset.get(keep[i], keep[j]));
    }
  }
  return out;
}

inline std::vector<NameSet> stopping_prefixes(const PES& pes,
                                              ConflictMode mode = ConflictMode::event_structure) {
  BranchingCells bc(pes, mode);
  std::vector<NameSet> out;
  for (EventSet s : bc.stopping_prefixes(bc.all())) out.push_back(bc.names(s));
  return out;
}

inline std::vector<NameSet> initial_stopping_prefixes(
    const PES& pes, ConflictMode mode = ConflictMode::event_structure) {
  BranchingCells bc(pes, mode);
  std::vector<NameSet> out;
  for (EventSet s : bc.initial_stopping_prefixes(bc.all())) out.push_back(bc.names(s));
  return out;
}

struct RSConfiguration {
  NameSet events;
  bool stopped = false;
  bool recursively_stopped = false;
  bool maximal = false;  // maximal among recursively stopped configurations
  std::vector<std::vector<NameSet>> decompositions;  // increments, one chain per entry
};

inline constexpr std::size_t kDecompositionCap = 10000;

/// Recursively stopped configurations by fixpoint over futures, each with its
/// branching-cell decompositions.
inline std::vector<RSConfiguration> recursively_stopped(
    const PES& pes, ConflictMode mode = ConflictMode::event_structure) {
  BranchingCells bc(pes, mode);
  std::set<EventSet> rs{0};
  std::deque<EventSet> queue{0};
  while (!queue.empty()) {
    EventSet v = queue.front();
    queue.pop_front();
    for (EventSet w : bc.stopped_steps(v))
      if (rs.insert(v | w).second) queue.push_back(v | w);
  }
  std::map<EventSet, std::vector<std::vector<EventSet>>> chains;
  std::vector<EventSet> path;
  std::function<void(EventSet)> walk = [&](EventSet v) {
    auto& list = chains[v];
    if (list.size() < kDecompositionCap) list.push_back(path);
    for (EventSet w : bc.cell_steps(v)) {
      path.push_back(w);
      walk(v | w);
      path.pop_back();
    }
  };
  walk(0);
  std::set<EventSet> stopped;
  for (EventSet s : bc.stopping_prefixes(bc.all()))
    for (EventSet w : bc.maximal_configurations(s)) stopped.insert(w);
  std::vector<RSConfiguration> out;
  for (EventSet v : rs) {
    RSConfiguration c;
    c.events = bc.names(v);
    c.recursively_stopped = true;
    c.stopped = stopped.count(v) > 0;
    c.maximal = std::none_of(rs.begin(), rs.end(),
                             [&](EventSet u) { return u != v && subset(v, u); });
    for (const auto& ch : chains[v]) {
      std::vector<NameSet> named;
      for (EventSet w : ch) named.push_back(bc.names(w));
      c.decompositions.push_back(std::move(named));
    }
    out.push_back(std::move(c));
  }
  return out;
}

/// Events of the transaction for T_pos members, nothing for T_neg members.
inline NameSet dec(const Encoding& enc, const Name& t) {
  auto it = enc.origin.find(t);
  if (it == enc.origin.end()) throw std::invalid_argument("transition " + t + " is foreign to the compilation");
  if (!it->second.positive) return {};
  return NameSet(it->second.theta.begin(), it->second.theta.end());
}

/// Checks both directions of the correspondence between firing sequences of the
/// uniformed net (silent steps collapsed) and branching-cell decompositions, and the
/// bijection between maximal processes and maximal recursively stopped configurations.
inline CertReport check_correspondence(const OccurrenceNet& source,
                                       std::size_t budget = kDefaultBudget,
                                       ConflictMode mode = ConflictMode::net) {
  Stopwatch sw;
  CertReport r;
  r.check = "correspondence";
  r.pass = true;
  Encoding enc = encode(source);
  PNet flat = flatten(enc);
  BranchingCells bc(to_pes(source), mode);
  const int T = flat.num_transitions();
  std::vector<EventSet> decm(T, 0);
  for (int t = 0; t < T; ++t) decm[t] = bc.mask(dec(enc, flat.transition(t)));

  auto saturate = [&](PState s) {
    bool again = true;
    while (again) {
      again = false;
      for (int t : enabled(flat, s))
        if (decm[t] == 0) {
          s = fire(flat, s, t);
          again = true;
        }
    }
    return s;
  };

  std::set<std::pair<EventSet, PState>> seen;
  std::deque<std::pair<EventSet, PState>> queue;
  auto push = [&](EventSet v, PState s) {
    if (seen.emplace(v, s).second) {
      if (seen.size() > budget) throw BudgetExceeded(budget, queue.size());
      queue.emplace_back(v, std::move(s));
    }
  };
  push(0, initial_state(flat));
  while (!queue.empty() && r.pass) {
    auto [v, s] = queue.front();
    queue.pop_front();
    const auto& steps = bc.cell_steps(v);
    for (int t : enabled(flat, s)) {
      PState s2 = fire(flat, s, t);
      if (decm[t] == 0) {
        push(v, std::move(s2));
        continue;
      }
      if (std::find(steps.begin(), steps.end(), decm[t]) == steps.end()) {
        r.pass = false;
        r.witness = Json{{"direction", "net-to-decomposition"},
                         {"configuration", names_json(bc.names(v))},
                         {"transition", flat.transition(t)},
                         {"dec", names_json(bc.names(decm[t]))}};
        break;
      }
      push(v | decm[t], std::move(s2));
    }
    if (!r.pass) break;
    PState sat = saturate(s);
    auto en = enabled(flat, sat);
    for (EventSet w : steps) {
      bool realized = std::any_of(en.begin(), en.end(), [&](int t) { return decm[t] == w; });
      if (!realized) {
        r.pass = false;
        r.witness = Json{{"direction", "decomposition-to-net"},
                         {"configuration", names_json(bc.names(v))},
                         {"step", names_json(bc.names(w))}};
        break;
      }
    }
  }
  r.states_explored = seen.size();

  Json details;
  if (r.pass) {
    auto configs = recursively_stopped(bc.pes(), mode);
    std::map<NameSet, const RSConfiguration*> maximal;
    for (const auto& c : configs)
      if (c.maximal) maximal[c.events] = &c;
    auto procs = enumerate_maximal_processes(flat, budget);
    std::map<NameSet, std::vector<Name>> image;
    for (const auto& p : procs) {
      NameSet u;
      for (const auto& t : p.transitions()) {
        auto d = dec(enc, t);
        u.insert(d.begin(), d.end());
      }
      if (!image.emplace(u, p.transitions()).second) {
        r.pass = false;
        r.witness = Json{{"reason", "two maximal processes share a configuration"},
                         {"configuration", names_json(u)}};
        break;
      }
    }
    if (r.pass) {
      for (const auto& [u, ts] : image)
        if (!maximal.count(u)) {
          r.pass = false;
          r.witness = Json{{"reason", "process configuration is not maximal recursively stopped"},
                           {"configuration", names_json(u)}};
          break;
        }
    }
    if (r.pass) {
      for (const auto& [u, c] : maximal)
        if (!image.count(u)) {
          r.pass = false;
          r.witness = Json{{"reason", "maximal recursively stopped configuration without process"},
                           {"configuration", names_json(u)}};
          break;
        }
    }
    Json list = Json::array();
    for (const auto& [u, c] : maximal) {
      Json decs = Json::array();
      for (const auto& ch : c->decompositions) {
        Json chain = Json::array();
        for (const auto& w : ch) chain.push_back(names_json(w));
        decs.push_back(chain);
      }
      Json entry{{"configuration", names_json(u)}, {"decompositions", decs}};
      if (auto it = image.find(u); it != image.end()) entry["process"] = it->second;
      list.push_back(entry);
    }
    details["maximal_configurations"] = list;
  }
  r.details = details;
  r.elapsed_ms = sw.ms();
  return r;
}

}  // namespace confree
