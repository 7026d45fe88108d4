#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "confree/net_model.hpp"
#include "confree/report.hpp"
#include "confree/semantics.hpp"

namespace confree {

/// Negation-free formula over transitions in prime-implicant DNF.
/// {} is false, {{}} is true.
class CauseFormula {
 public:
  using Implicant = std::vector<Name>;  // sorted

  static CauseFormula truth() { return CauseFormula({Implicant{}}); }
  static CauseFormula falsity() { return CauseFormula(std::vector<Implicant>{}); }
  static CauseFormula atom(const Name& t) { return CauseFormula({Implicant{t}}); }

  CauseFormula() = default;
  explicit CauseFormula(std::vector<Implicant> implicants) : terms_(std::move(implicants)) {
    canonicalize();
  }

  const std::vector<Implicant>& implicants() const { return terms_; }
  bool is_true() const { return terms_.size() == 1 && terms_[0].empty(); }
  bool is_false() const { return terms_.empty(); }

  /// Some implicant is contained in the given set.
  bool satisfied_by(const NameSet& holds) const {
    return std::any_of(terms_.begin(), terms_.end(), [&](const Implicant& m) {
      return std::all_of(m.begin(), m.end(), [&](const Name& t) { return holds.count(t) > 0; });
    });
  }

  friend CauseFormula operator||(const CauseFormula& a, const CauseFormula& b) {
    std::vector<Implicant> all = a.terms_;
    all.insert(all.end(), b.terms_.begin(), b.terms_.end());
    return CauseFormula(std::move(all));
  }
  friend CauseFormula operator&&(const CauseFormula& a, const CauseFormula& b) {
    std::vector<Implicant> all;
    for (const auto& x : a.terms_)
      for (const auto& y : b.terms_) {
        Implicant m;
        std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(m));
        all.push_back(std::move(m));
      }
    return CauseFormula(std::move(all));
  }
  friend bool operator==(const CauseFormula&, const CauseFormula&) = default;

 private:
  void canonicalize() {
    for (auto& m : terms_) {
      std::sort(m.begin(), m.end());
      m.erase(std::unique(m.begin(), m.end()), m.end());
    }
    std::sort(terms_.begin(), terms_.end(), [](const Implicant& x, const Implicant& y) {
      return x.size() != y.size() ? x.size() < y.size() : x < y;
    });
    terms_.erase(std::unique(terms_.begin(), terms_.end()), terms_.end());
    std::vector<Implicant> kept;
    for (const auto& m : terms_) {
      bool absorbed = std::any_of(kept.begin(), kept.end(), [&](const Implicant& k) {
        return std::includes(m.begin(), m.end(), k.begin(), k.end());
      });
      if (!absorbed) kept.push_back(m);
    }
    std::sort(kept.begin(), kept.end());
    terms_ = std::move(kept);
  }

  std::vector<Implicant> terms_;
};

inline std::string to_string(const CauseFormula& f) {
  if (f.is_false()) return "false";
  if (f.is_true()) return "true";
  std::string out;
  for (std::size_t i = 0; i < f.implicants().size(); ++i) {
    if (i) out += " | ";
    const auto& m = f.implicants()[i];
    bool paren = f.implicants().size() > 1 && m.size() > 1;
    if (paren) out += "(";
    out += join(m, " & ");
    if (paren) out += ")";
  }
  return out;
}

/// Subnet of a host p-net spanned by a set of transitions, with the host's marking
/// restricted to it. Node names coincide with the host's.
struct PersistentProcess {
  PNet net;
  std::vector<Name> transitions() const { return net.transitions(); }
  std::size_t size() const { return static_cast<std::size_t>(net.num_transitions()); }
};

inline PersistentProcess make_process(const PNet& host, const NameSet& transitions) {
  std::map<Name, bool> places;
  std::map<Name, PNet::TransitionSpec> ts;
  for (const auto& t : transitions) {
    int ti = host.transition_index(t);
    if (ti < 0) throw std::invalid_argument("unknown transition " + t);
    PNet::TransitionSpec spec{host.names_of(host.pre(ti)), host.names_of(host.post(ti))};
    for (int p : host.pre(ti)) places[host.place(p)] = host.persistent(p);
    for (int p : host.post(ti)) places[host.place(p)] = host.persistent(p);
    ts[t] = spec;
  }
  Bag init;
  for (const auto& [p, pers] : places) init.set(p, host.initial_counts()[host.place_index(p)]);
  return PersistentProcess{PNet(places, ts, init)};
}

/// Regular places of a process have at most one producer and one consumer.
inline bool is_occurrence_pnet(const PersistentProcess& proc) {
  const auto& n = proc.net;
  for (int p = 0; p < n.num_places(); ++p)
    if (!n.persistent(p) && (n.producers(p).size() > 1 || n.consumers(p).size() > 1)) return false;
  return true;
}

/// One process per distinct set of transitions fired by a maximal non-stuttering run.
inline std::vector<PersistentProcess> enumerate_maximal_processes(
    const PNet& net, std::size_t budget = kDefaultBudget) {
  const int T = net.num_transitions();
  std::set<std::vector<bool>> seen;
  std::set<NameSet> found;
  std::vector<std::pair<PState, std::vector<bool>>> stack;
  stack.emplace_back(initial_state(net), std::vector<bool>(T, false));
  seen.insert(stack.back().second);
  while (!stack.empty()) {
    auto [s, fired] = std::move(stack.back());
    stack.pop_back();
    auto en = enabled(net, s);
    if (en.empty()) {
      NameSet ts;
      for (int t = 0; t < T; ++t)
        if (fired[t]) ts.insert(net.transition(t));
      found.insert(ts);
      continue;
    }
    for (int t : en) {
      if (fired[t])
        throw std::runtime_error("transition " + net.transition(t) +
                                 " can fire twice in one run; processes need an occurrence-like net");
      auto f2 = fired;
      f2[t] = true;
      if (!seen.insert(f2).second) continue;
      if (seen.size() > budget) throw BudgetExceeded(budget, stack.size());
      stack.emplace_back(fire(net, s, t), std::move(f2));
    }
  }
  std::vector<PersistentProcess> out;
  for (const auto& ts : found) out.push_back(make_process(net, ts));
  return out;
}

/// Φ for every node of the process.
class CauseTable {
 public:
  explicit CauseTable(const PersistentProcess& proc) : proc_(proc) {}

  const CauseFormula& of(const Name& x) {
    if (auto it = memo_.find(x); it != memo_.end()) return it->second;
    const auto& n = proc_.net;
    CauseFormula f;
    if (int t = n.transition_index(x); t >= 0) {
      f = CauseFormula::truth();
      for (int p : n.pre(t)) f = f && of(n.place(p));
    } else if (int p = n.place_index(x); p >= 0) {
      if (n.initial_counts()[p] > 0) {
        f = CauseFormula::truth();
      } else {
        f = CauseFormula::falsity();
        for (int t2 : n.producers(p)) {
          const auto& u = n.transition(t2);
          f = f || (CauseFormula::atom(u) && of(u));
        }
      }
    } else {
      throw std::invalid_argument("node " + x + " is not in the process");
    }
    return memo_.emplace(x, std::move(f)).first->second;
  }

 private:
  const PersistentProcess& proc_;
  std::map<Name, CauseFormula> memo_;
};

inline CauseFormula cause_formula(const PersistentProcess& proc, const Name& x) {
  CauseTable table(proc);
  return table.of(x);
}

inline bool is_legal(const PersistentProcess& proc, const std::vector<Name>& seq) {
  CauseTable table(proc);
  NameSet before;
  for (const auto& t : seq) {
    if (proc.net.transition_index(t) < 0)
      throw std::invalid_argument("transition " + t + " is not in the process");
    if (before.count(t)) throw std::invalid_argument("transition " + t + " occurs twice");
    if (!table.of(t).satisfied_by(before)) return false;
    before.insert(t);
  }
  return true;
}

/// Over every set of transitions reachable by firing within the process, a transition
/// is enabled exactly when some implicant of its Φ has already fired.
inline CertReport check_complete_concurrency(const PersistentProcess& proc,
                                             std::size_t budget = kDefaultBudget) {
  Stopwatch sw;
  CertReport r;
  r.check = "complete-concurrency";
  const auto& n = proc.net;
  const int T = n.num_transitions();
  CauseTable table(proc);
  std::map<std::vector<bool>, std::vector<Name>> seen;  // fired set -> a sequence reaching it
  std::vector<std::pair<PState, std::vector<bool>>> stack;
  stack.emplace_back(initial_state(n), std::vector<bool>(T, false));
  seen[stack.back().second] = {};
  r.pass = true;
  while (!stack.empty() && r.pass) {
    auto [s, fired] = std::move(stack.back());
    stack.pop_back();
    NameSet done;
    for (int t = 0; t < T; ++t)
      if (fired[t]) done.insert(n.transition(t));
    const auto seq = seen[fired];
    for (int t = 0; t < T && r.pass; ++t) {
      if (fired[t]) continue;
      bool en = is_enabled(n, s, t);
      bool legal = table.of(n.transition(t)).satisfied_by(done);
      if (en != legal) {
        r.pass = false;
        auto ext = seq;
        ext.push_back(n.transition(t));
        r.witness = Json{{"sequence", ext}, {"enabled", en}, {"legal", legal}};
        break;
      }
      if (!en) continue;
      auto f2 = fired;
      f2[t] = true;
      if (seen.count(f2)) continue;
      auto ext = seq;
      ext.push_back(n.transition(t));
      seen[f2] = ext;
      if (seen.size() > budget) throw BudgetExceeded(budget, stack.size());
      stack.emplace_back(fire(n, s, t), std::move(f2));
    }
  }
  r.states_explored = seen.size();
  r.elapsed_ms = sw.ms();
  return r;
}

/// All maximal legal sequences of the process.
inline std::vector<std::vector<Name>> linearizations(const PersistentProcess& proc,
                                                     std::size_t budget = kDefaultBudget) {
  CauseTable table(proc);
  const auto ts = proc.transitions();
  std::vector<std::vector<Name>> out;
  std::vector<Name> seq;
  NameSet done;
  std::function<void()> rec = [&]() {
    bool extended = false;
    for (const auto& t : ts) {
      if (done.count(t) || !table.of(t).satisfied_by(done)) continue;
      extended = true;
      seq.push_back(t);
      done.insert(t);
      rec();
      done.erase(t);
      seq.pop_back();
    }
    if (!extended) {
      if (out.size() >= budget) throw BudgetExceeded(budget, 0);
      out.push_back(seq);
    }
  };
  rec();
  return out;
}

inline Json process_json(const PersistentProcess& proc) {
  CauseTable table(proc);
  Json j;
  j["transitions"] = proc.transitions();
  Json phi = Json::object();
  for (const auto& t : proc.transitions()) {
    Json terms = Json::array();
    for (const auto& m : table.of(t).implicants()) terms.push_back(m);
    phi[t] = terms;
  }
  j["phi"] = phi;
  return j;
}

}  // namespace confree
