#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "confree/encoder.hpp"
#include "confree/processes.hpp"
#include "confree/report.hpp"
#include "confree/semantics.hpp"

namespace confree {

using Rational = boost::multiprecision::cpp_rational;

inline std::string to_string(const Rational& r) {
  return boost::multiprecision::numerator(r).str() + "/" +
         boost::multiprecision::denominator(r).str();
}

inline Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(boost::multiprecision::cpp_int(s));
    boost::multiprecision::cpp_int num(s.substr(0, slash)), den(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw std::invalid_argument("not a rational: '" + s + "'");
  }
}

using ArcWeights = std::map<Arc, Rational>;  // (place, transition) -> weight

/// Per cell (keyed by its sorted transitions): transaction -> probability.
struct Distribution {
  std::map<std::vector<Name>, std::map<std::vector<Name>, Rational>> cells;
};

inline ArcWeights uniform_weights(const OccurrenceNet& net) {
  ArcWeights w;
  for (int p = 0; p < net.num_places(); ++p) {
    const auto& cons = net.consumers(p);
    for (int t : cons)
      w[{net.place(p), net.transition(t)}] = Rational(1, static_cast<long>(cons.size()));
  }
  return w;
}

inline void check_weights(const OccurrenceNet& net, const ArcWeights& w) {
  for (const auto& [arc, v] : w) {
    int p = net.place_index(arc.first);
    int t = net.transition_index(arc.second);
    if (p < 0 || t < 0 ||
        std::find(net.consumers(p).begin(), net.consumers(p).end(), t) == net.consumers(p).end())
      throw std::invalid_argument("weight given for a non-arc " + arc.first + "->" + arc.second);
    if (v < 0) throw std::invalid_argument("negative weight on " + arc.first + "->" + arc.second);
  }
  for (int p = 0; p < net.num_places(); ++p) {
    if (net.consumers(p).empty()) continue;
    Rational sum = 0;
    for (int t : net.consumers(p)) {
      auto it = w.find({net.place(p), net.transition(t)});
      if (it == w.end())
        throw std::invalid_argument("missing weight for " + net.place(p) + "->" + net.transition(t));
      sum += it->second;
    }
    if (sum != 1)
      throw std::invalid_argument("weights leaving place " + net.place(p) + " sum to " +
                                  to_string(sum));
  }
}

/// Object of "place->transition": "num/den" entries.
inline ArcWeights parse_weights(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("weights must be a JSON object");
  ArcWeights w;
  for (const auto& [key, val] : j.items()) {
    auto arrow = key.find("->");
    if (arrow == std::string::npos) throw std::invalid_argument("weight key '" + key + "' lacks '->'");
    if (!val.is_string() && !val.is_number_integer())
      throw std::invalid_argument("weight of '" + key + "' must be a \"num/den\" string");
    w[{key.substr(0, arrow), key.substr(arrow + 2)}] =
        val.is_string() ? parse_rational(val.get<std::string>()) : Rational(val.get<long>());
  }
  return w;
}

inline Json weights_json(const ArcWeights& w) {
  Json j = Json::object();
  for (const auto& [arc, v] : w) j[arc.first + "->" + arc.second] = to_string(v);
  return j;
}

/// 𝒬(θ) = product of the weights entering θ's transitions; 𝒫 normalizes 𝒬 per cell.
inline Distribution local_distribution(const Encoding& enc, const ArcWeights& w) {
  check_weights(enc.source, w);
  Distribution d;
  for (const auto& [key, cell] : enc.cells) {
    std::map<std::vector<Name>, Rational> q;
    Rational total = 0;
    for (const auto& th : cell.transactions) {
      Rational v = 1;
      for (const auto& t : th.transitions)
        for (const auto& p : enc.source.preset(t)) v *= w.at({p, t});
      q[th.transitions] = v;
      total += v;
    }
    if (total == 0)
      throw std::domain_error("cell {" + join(key) + "} has no transaction with positive weight");
    for (auto& [th, v] : q) v /= total;
    d.cells[key] = std::move(q);
  }
  return d;
}

inline Rational transition_probability(const Distribution& d, const Encoding& enc, const Name& t) {
  auto it = enc.origin.find(t);
  if (it == enc.origin.end()) throw std::invalid_argument("unknown transition " + t);
  if (!it->second.positive) return 1;
  auto c = d.cells.find(it->second.cell);
  if (c == d.cells.end()) throw std::invalid_argument("no distribution for the cell of " + t);
  auto th = c->second.find(it->second.theta);
  if (th == c->second.end()) throw std::invalid_argument("no probability for " + t);
  return th->second;
}

inline Rational process_probability(const PersistentProcess& proc, const Distribution& d,
                                    const Encoding& enc) {
  Rational r = 1;
  for (const auto& t : proc.transitions()) r *= transition_probability(d, enc, t);
  return r;
}

inline CertReport total_probability(const PNet& net, const Distribution& d, const Encoding& enc,
                                    std::size_t budget = kDefaultBudget) {
  Stopwatch sw;
  CertReport r;
  r.check = "total-probability";
  auto procs = enumerate_maximal_processes(net, budget);
  Rational sum = 0;
  Json per = Json::array();
  for (const auto& p : procs) {
    auto v = process_probability(p, d, enc);
    sum += v;
    per.push_back(Json{{"transitions", p.transitions()}, {"probability", to_string(v)}});
  }
  r.pass = sum == 1;
  r.states_explored = procs.size();
  r.details = Json{{"sum", to_string(sum)}, {"processes", per}};
  if (!r.pass) r.witness = Json{{"sum", to_string(sum)}};
  r.elapsed_ms = sw.ms();
  return r;
}

struct SampledRun {
  std::vector<Name> run;
  NameSet process;  // transitions of the process the run collapses to
};

/// Draws one maximal run. Silent (regular-preset-free) transitions fire first; then one
/// choice group (enabled transitions with a common regular preset) is resolved at a time.
inline SampledRun sample_run(const PNet& net, const Distribution& d, const Encoding& enc,
                             std::mt19937_64& rng) {
  SampledRun out;
  PState s = initial_state(net);
  std::vector<double> prob(net.num_transitions(), 0.0);
  for (int t = 0; t < net.num_transitions(); ++t) {
    auto it = enc.origin.find(net.transition(t));
    prob[t] = it == enc.origin.end()
                  ? 1.0
                  : transition_probability(d, enc, net.transition(t)).convert_to<double>();
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (true) {
    auto en = enabled(net, s);
    if (en.empty()) break;
    int chosen = -1;
    for (int t : en)
      if (net.regular_pre(t).empty()) {
        chosen = t;
        break;
      }
    if (chosen < 0) {
      auto key = net.regular_pre(en.front());
      std::vector<int> group;
      double total = 0;
      for (int t : en)
        if (net.regular_pre(t) == key) {
          group.push_back(t);
          total += prob[t];
        }
      double x = unit(rng) * total;
      chosen = group.back();
      for (int t : group) {
        if (x < prob[t]) {
          chosen = t;
          break;
        }
        x -= prob[t];
      }
    }
    s = fire(net, s, chosen);
    out.run.push_back(net.transition(chosen));
    out.process.insert(net.transition(chosen));
  }
  return out;
}

inline SampledRun sample_run(const PNet& net, const Distribution& d, const Encoding& enc,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_run(net, d, enc, rng);
}

inline Json distribution_json(const Distribution& d) {
  Json j = Json::array();
  for (const auto& [cell, m] : d.cells) {
    Json ths = Json::array();
    for (const auto& [th, v] : m) ths.push_back(Json{{"transaction", th}, {"probability", to_string(v)}});
    j.push_back(Json{{"cell", cell}, {"transactions", ths}});
  }
  return j;
}

}  // namespace confree
