#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "confree/net_model.hpp"
#include "confree/structure.hpp"

namespace confree {

struct GeneratorOptions {
  int max_transitions = 12;
  int max_width = 3;
};

namespace detail {

// Raw engine output keeps the stream identical across standard libraries.
inline std::size_t draw(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

}  // namespace detail

/// Safe occurrence net built transition by transition. Every place has at most one
/// producer; a preset that would put a transition in conflict with itself is replaced by
/// a single place. The initial marking is the set of minimal places.
inline OccurrenceNet random_occurrence_net(std::uint64_t seed, const GeneratorOptions& opt = {}) {
  if (opt.max_transitions < 1 || opt.max_width < 1)
    throw std::invalid_argument("generator bounds must be positive");
  std::mt19937_64 rng(seed);
  auto width = [&]() { return 1 + static_cast<int>(detail::draw(rng, opt.max_width)); };
  const int n = 1 + static_cast<int>(detail::draw(rng, opt.max_transitions));

  std::vector<Name> places;
  std::vector<Name> transitions;
  std::vector<Arc> flow;
  auto fresh_place = [&]() {
    places.push_back("p" + std::to_string(places.size()));
    return places.back();
  };
  for (int i = width(); i > 0; --i) fresh_place();

  auto build = [&]() {
    NameSet ps(places.begin(), places.end()), ts(transitions.begin(), transitions.end()), marked;
    for (const auto& p : places) {
      bool produced = false;
      for (const auto& [a, b] : flow) produced = produced || b == p;
      if (!produced) marked.insert(p);
    }
    return OccurrenceNet(ps, ts, flow, marked);
  };

  for (int i = 0; i < n; ++i) {
    Name t = "t" + std::to_string(i);
    int k = std::min<int>(width(), static_cast<int>(places.size()));
    NameSet pre;
    while (static_cast<int>(pre.size()) < k) pre.insert(places[detail::draw(rng, places.size())]);
    std::vector<Name> post;
    for (int j = width(); j > 0; --j) post.push_back("p" + std::to_string(places.size() + post.size()));

    auto attempt = flow;
    for (const auto& p : pre) flow.emplace_back(p, t);
    transitions.push_back(t);
    if (pre.size() > 1) {
      if (validate_occurrence_net(build()).has("self-conflict")) {
        flow = attempt;
        flow.emplace_back(*pre.begin(), t);
      }
    }
    for (const auto& p : post) {
      places.push_back(p);
      flow.emplace_back(t, p);
    }
  }
  return build();
}

}  // namespace confree
