#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "confree/generator.hpp"
#include "confree/probability.hpp"
#include "confree/verify.hpp"
#include "support.hpp"

using namespace confree;
using namespace confree::testing;

namespace {

constexpr int kCorpusSeeds = 100;
constexpr GeneratorOptions kCorpusBounds{12, 3};
constexpr int kAbSeeds = 50;
constexpr GeneratorOptions kAbBounds{8, 3};
constexpr std::size_t kSequenceBudget = 20000;
constexpr int kMonteCarloRuns = 100000;
constexpr double kMonteCarloTolerance = 0.01;
constexpr std::uint64_t kMonteCarloSeed = 2024;

/// Exclusion clause 3 fails on these corpus seeds and on nothing else; see README.
const std::map<std::string, std::set<std::string>> kKnownExclusionFailures{
    {"seed 29", {"3"}}, {"seed 45", {"3"}}, {"seed 54", {"3"}}, {"seed 64", {"3"}}, {"seed 83", {"3"}}};

struct Named {
  std::string label;
  OccurrenceNet net;
};

std::vector<Named> corpus() {
  std::vector<Named> out;
  for (const char* f : {"net_a", "net_b", "net_c", "net_d"})
    out.push_back({f, load_net(std::string(f) + ".net")});
  for (int s = 0; s < kCorpusSeeds; ++s)
    out.push_back({"seed " + std::to_string(s), random_occurrence_net(s, kCorpusBounds)});
  return out;
}

struct Outcome {
  bool pass = true;
  std::string note;
  void fail(const std::string& why) {
    if (pass) note = why;
    pass = false;
  }
};

struct Criterion {
  int id;
  std::string title;
  double limit_ms;
  std::function<Outcome()> body;
  bool known_failure_allowed = false;
  std::function<bool(const Outcome&)> matches_known = nullptr;
};

std::string fmt_ms(double ms) {
  std::ostringstream s;
  s.precision(1);
  s << std::fixed << ms << " ms";
  return s.str();
}

std::map<std::string, std::set<std::string>> observed_exclusion;

Outcome golden_decomposition() {
  Outcome o;
  using Cells = std::set<std::vector<Name>>;
  auto cells = [](const OccurrenceNet& n) {
    Cells out;
    for (const auto& c : scell_decomposition(n)) out.insert(c.transitions);
    return out;
  };
  if (cells(load_net("net_a.net")) != Cells{{"a", "d"}, {"b", "c"}}) o.fail("NET-A cells");
  auto b = load_net("net_b.net");
  if (cells(b) != Cells{{"a", "d"}, {"b", "c", "g"}, {"e", "f"}}) o.fail("NET-B cells");
  for (const auto& c : scell_decomposition(b)) {
    if (c.transitions != std::vector<Name>{"b", "c", "g"}) continue;
    Cells ths;
    for (const auto& t : transactions(c)) ths.insert(t.transitions);
    if (ths != Cells{{"b", "g"}, {"c"}}) o.fail("transactions of {b,c,g}");
  }
  return o;
}

Outcome golden_encoding() {
  Outcome o;
  auto m = figure_mismatch(encode(load_net("net_b.net")));
  if (!m.empty()) o.fail(m);
  return o;
}

bool has_witness(const Json& ws, const std::string& kind, const Name& t, const Name& u, const Name& v,
                 const Json& marking) {
  for (const auto& w : ws)
    if (w["kind"] == kind && w["t"] == t && w["u"] == u && w["v"] == v &&
        (marking.is_null() || w["marking"] == marking))
      return true;
  return false;
}

Outcome confusion() {
  Outcome o;
  for (const auto& [label, net] : corpus()) {
    auto r = check_confusion_free(compile(net).net);
    if (!r.pass) o.fail("confusion in the uniformed " + label);
  }
  auto a = check_confusion_free(as_pnet(load_net("net_a.net")));
  if (a.pass || !has_witness(a.witness, "asymmetric", "a", "c", "b", Json()))
    o.fail("asymmetric confusion of raw NET-A not found");
  auto b = check_confusion_free(as_pnet(load_net("net_b.net")));
  if (b.pass || !has_witness(b.witness, "symmetric", "b", "c", "g", Json{{"2", 1}, {"3", 1}, {"8", 1}}))
    o.fail("symmetric confusion of raw NET-B at {2,3,8} not found");
  return o;
}

Outcome exclusion_and_safety() {
  Outcome o;
  observed_exclusion.clear();
  for (const auto& [label, net] : corpus()) {
    auto c = compile(net);
    if (!check_safety(c.net).pass) o.fail("unsafe: " + label);
    auto r = check_exclusion(c.net, &c.encoding);
    if (r.pass) continue;
    for (const auto& [clause, verdict] : r.details["clauses"].items())
      if (verdict == "fail") observed_exclusion[label].insert(clause);
  }
  if (!observed_exclusion.empty()) {
    std::ostringstream s;
    s << "exclusion fails on";
    for (const auto& [label, clauses] : observed_exclusion) {
      s << " " << label << " (clause";
      for (const auto& c : clauses) s << " " << c;
      s << ")";
    }
    o.fail(s.str());
  }
  return o;
}

Outcome bisimulation() {
  Outcome o;
  if (!check_dyn_flat_bisim(dynamic_figure(), kFigurePersistent, kFigureRegular).pass)
    o.fail("figure dynamic net");
  for (const auto& [label, net] : corpus())
    if (!check_dyn_flat_bisim(encode(net)).pass) o.fail(label);
  return o;
}

const PersistentProcess* process_with(const std::vector<PersistentProcess>& ps, const NameSet& ts) {
  for (const auto& p : ps) {
    auto mine = p.transitions();
    if (std::includes(mine.begin(), mine.end(), ts.begin(), ts.end())) return &p;
  }
  return nullptr;
}

Outcome process_shapes() {
  Outcome o;
  using Terms = std::vector<CauseFormula::Implicant>;
  auto a = enumerate_maximal_processes(compile(load_net("net_a.net")).net);
  if (a.size() != 3) o.fail("NET-A has " + std::to_string(a.size()) + " processes");
  const Name ta = "tx:1/a/a,d", td = "tx:1/d/a,d", tb = "tx:2,3/b/b,c", tc = "tx:2,3/c/b,c";
  const Name p3 = "prop:2,3/3/b,c", tb2 = "tx:2/b/b";
  auto check = [&](const NameSet& key, const Name& t, const Terms& want) {
    const auto* p = process_with(a, key);
    if (!p || cause_formula(*p, t).implicants() != want) o.fail("order in the process of {" + join(key) + "}");
  };
  check({ta, tb}, tb, {{ta}});
  check({ta, tc}, tc, {{ta}});
  check({td, tb2}, tb2, {{p3, td}});
  auto b = enumerate_maximal_processes(compile(load_net("net_b.net")).net);
  if (b.size() != 5) o.fail("NET-B has " + std::to_string(b.size()) + " processes");
  auto m = net_b_names();
  const auto* df = process_with(b, {m["t_d"], m["t_f"]});
  auto want = CauseFormula(Terms{{m["t_3"], m["t_d"]}, {m["t_8"], m["t_f"]}});
  if (!df || cause_formula(*df, m["t_b"]) != want) o.fail("Phi(t_b) in the d/f process");
  return o;
}

/// Maximal firing sequences of a process, by exhaustive firing.
std::set<std::vector<Name>> firing_sequences(const PersistentProcess& proc) {
  const auto& n = proc.net;
  std::set<std::vector<Name>> out;
  std::vector<Name> seq;
  std::function<void(const PState&)> go = [&](const PState& s) {
    bool any = false;
    for (int t : enabled(n, s)) {
      if (std::find(seq.begin(), seq.end(), n.transition(t)) != seq.end()) continue;
      any = true;
      seq.push_back(n.transition(t));
      go(fire(n, s, t));
      seq.pop_back();
    }
    if (!any) out.insert(seq);
  };
  go(initial_state(n));
  return out;
}

/// Every process gets the prefix-by-prefix check; sequence sets are also compared
/// whenever they stay below kSequenceBudget.
Outcome complete_concurrency() {
  Outcome o;
  std::size_t total = 0, enumerated = 0;
  for (const auto& [label, net] : corpus()) {
    for (const auto& p : enumerate_maximal_processes(compile(net).net)) {
      ++total;
      if (!check_complete_concurrency(p).pass) {
        o.fail("enabledness differs from legality in a process of " + label);
        break;
      }
      std::vector<std::vector<Name>> lin;
      try {
        lin = linearizations(p, kSequenceBudget);
      } catch (const BudgetExceeded&) {
        continue;
      }
      ++enumerated;
      if (std::set<std::vector<Name>>(lin.begin(), lin.end()) != firing_sequences(p)) {
        o.fail("legal and firing sequences differ in a process of " + label);
        break;
      }
    }
  }
  if (o.pass)
    o.note = std::to_string(total) + " processes, " + std::to_string(enumerated) +
             " with sequence sets enumerated";
  return o;
}

Outcome probability() {
  Outcome o;
  auto c = compile(load_net("net_c.net"));
  ArcWeights w{{{"1", "a"}, Rational(1, 3)}, {{"1", "b"}, Rational(2, 3)},
               {{"2", "a"}, Rational(1, 3)}, {{"2", "b"}, Rational(2, 3)}};
  auto d = local_distribution(c.encoding, w);
  const auto& cell = d.cells.at({"a", "b"});
  if (cell.at({"a"}) != Rational(1, 5) || cell.at({"b"}) != Rational(4, 5)) o.fail("NET-C distribution");
  auto b = compile(load_net("net_b.net"));
  auto db = local_distribution(b.encoding, uniform_weights(b.encoding.source));
  std::multiset<Rational> got;
  Rational sum = 0;
  for (const auto& p : enumerate_maximal_processes(b.net)) {
    got.insert(process_probability(p, db, b.encoding));
    sum += process_probability(p, db, b.encoding);
  }
  std::multiset<Rational> want{Rational(1, 4), Rational(1, 4), Rational(1, 4), Rational(1, 8), Rational(1, 8)};
  if (got != want || sum != 1) o.fail("NET-B process probabilities");
  std::mt19937_64 rng(17);
  for (const auto& [label, net] : corpus()) {
    ArcWeights rw;
    for (int p = 0; p < net.num_places(); ++p) {
      const auto& cons = net.consumers(p);
      if (cons.empty()) continue;
      std::vector<Rational> raw;
      Rational total = 0;
      for (std::size_t i = 0; i < cons.size(); ++i) {
        raw.emplace_back(static_cast<long>(1 + rng() % 9), static_cast<long>(1 + rng() % 7));
        total += raw.back();
      }
      for (std::size_t i = 0; i < cons.size(); ++i) rw[{net.place(p), net.transition(cons[i])}] = raw[i] / total;
    }
    auto cc = compile(net);
    if (!total_probability(cc.net, local_distribution(cc.encoding, rw), cc.encoding).pass)
      o.fail("total probability differs from 1 on " + label);
  }
  return o;
}

Outcome monte_carlo() {
  Outcome o;
  auto c = compile(load_net("net_b.net"));
  auto d = local_distribution(c.encoding, uniform_weights(c.encoding.source));
  std::map<NameSet, double> exact;
  for (const auto& p : enumerate_maximal_processes(c.net)) {
    auto ts = p.transitions();
    exact[NameSet(ts.begin(), ts.end())] = process_probability(p, d, c.encoding).convert_to<double>();
  }
  std::map<NameSet, int> hits;
  std::mt19937_64 rng(kMonteCarloSeed);
  for (int i = 0; i < kMonteCarloRuns; ++i) ++hits[sample_run(c.net, d, c.encoding, rng).process];
  double worst = 0;
  for (const auto& [ts, v] : hits)
    if (!exact.count(ts)) o.fail("sampled a run outside the maximal processes");
  for (const auto& [ts, p] : exact) worst = std::max(worst, std::abs(static_cast<double>(hits[ts]) / kMonteCarloRuns - p));
  if (worst > kMonteCarloTolerance) o.fail("deviation " + std::to_string(worst));
  if (o.pass) o.note = "max deviation " + std::to_string(worst);
  return o;
}

Outcome correspondence() {
  Outcome o;
  for (const char* f : {"net_a", "net_b", "net_d"})
    if (!check_correspondence(load_net(std::string(f) + ".net")).pass) o.fail(f);
  for (int s = 0; s < kAbSeeds; ++s)
    if (!check_correspondence(random_occurrence_net(s, kAbBounds)).pass) o.fail("seed " + std::to_string(s));
  auto r = check_correspondence(load_net("net_b.net"));
  auto m = net_b_names();
  bool found = false;
  for (const auto& e : r.details["maximal_configurations"]) {
    if (e["configuration"] != Json::parse(R"(["a","b","e","g"])")) continue;
    bool chain = false;
    for (const auto& dcp : e["decompositions"])
      chain = chain || dcp == Json::parse(R"([["a"],["e"],["b","g"]])");
    auto procs = e["process"].get<std::vector<Name>>();
    bool run = true;
    for (const char* l : {"t_a", "t_e", "t_bg"})
      run = run && std::find(procs.begin(), procs.end(), m[l]) != procs.end();
    found = chain && run;
  }
  if (!found) o.fail("{a};{e};{b,g} is not matched by t_a;t_e;t_bg");
  return o;
}

Outcome round_trips() {
  Outcome o;
  for (const char* f : {"net_a", "net_b", "net_c", "net_d", "leftover"}) {
    auto net = load_net(std::string(f) + ".net");
    auto native = write_native(net);
    if (std::get<OccurrenceNet>(parse_native(native)) != net || write_native(parse_native(native)) != native)
      o.fail(std::string(f) + " native");
    auto pnml = write_pnml(net);
    if (std::get<OccurrenceNet>(parse_pnml(pnml)) != net || write_pnml(parse_pnml(pnml)) != pnml)
      o.fail(std::string(f) + " pnml");
    if (std::get<OccurrenceNet>(parse_pnml(read_text(fixture(std::string(f) + ".pnml")))) != net)
      o.fail(std::string(f) + " pnml fixture");
    auto u1 = compile(net).net, u2 = compile(net).net;
    if (write_pnml(u1) != write_pnml(u2) || write_native(u1) != write_native(u2) || write_dot(u1) != write_dot(u2))
      o.fail(std::string(f) + " output differs between runs");
    auto up = write_pnml(u1);
    if (std::get<PNet>(parse_pnml(up)) != u1 || write_pnml(parse_pnml(up)) != up) o.fail(std::string(f) + " p-net pnml");
    auto un = write_native(u1);
    if (std::get<PNet>(parse_native(un)) != u1) o.fail(std::string(f) + " p-net native");
  }
  if (write_pnml(compile(load_net("net_b.net")).net) != read_text(fixture("uniformed_net_b.pnml")))
    o.fail("uniformed NET-B differs from its fixture");
  return o;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria{
      {1, "golden decomposition", 1000, golden_decomposition},
      {2, "golden encoding", 1000, golden_encoding},
      {3, "confusion-freeness", 30000, confusion},
      {4, "exclusion and safety", 30000, exclusion_and_safety, true,
       [](const Outcome&) { return observed_exclusion == kKnownExclusionFailures; }},
      {5, "flattening bisimulation", 60000, bisimulation},
      {6, "process count and shape", 5000, process_shapes},
      {7, "complete concurrency", 120000, complete_concurrency},
      {8, "probability", 30000, probability},
      {9, "Monte-Carlo consistency", 30000, monte_carlo},
      {10, "AB correspondence", 120000, correspondence},
      {11, "round-trips", 5000, round_trips},
  };
  bool ok = true;
  int passed = 0;
  for (const auto& c : criteria) {
    Stopwatch sw;
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    double ms = sw.ms();
    if (ms > c.limit_ms) o.fail("took " + fmt_ms(ms) + ", limit " + fmt_ms(c.limit_ms));
    std::string line = "[" + std::string(o.pass ? "PASS" : "FAIL") + "] " + std::to_string(c.id) + ". " +
                       c.title + " (" + fmt_ms(ms) + ")";
    if (!o.note.empty()) line += ": " + o.note;
    bool known = !o.pass && c.known_failure_allowed && ms <= c.limit_ms && c.matches_known(o);
    if (known) line += " [known failure, pinned]";
    std::cout << line << "\n";
    if (o.pass) ++passed;
    ok = ok && (o.pass || known);
  }
  std::cout << passed << "/" << criteria.size() << " criteria pass" << (ok ? "" : "; unexpected failures") << "\n";
  return ok ? 0 : 1;
}
