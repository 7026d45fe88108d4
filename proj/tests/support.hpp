#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "confree/encoder.hpp"
#include "confree/io.hpp"

namespace confree::testing {

inline std::string fixture(const std::string& file) { return std::string(CONFREE_FIXTURES) + "/" + file; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline OccurrenceNet load_net(const std::string& file) {
  return std::get<OccurrenceNet>(parse_any(read_text(fixture(file))));
}

inline PNet load_pnet(const std::string& file) {
  return std::get<PNet>(parse_any(read_text(fixture(file))));
}

/// Figure label -> generated name for the encoding of net_b.
inline std::map<std::string, Name> net_b_names() {
  std::map<std::string, Name> m;
  std::istringstream in(read_text(fixture("net_b_names.txt")));
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string label, name;
    ls >> label >> name;
    m[label] = name;
  }
  return m;
}

/// a:1→4, b:2→4 with 4 persistent, c:{3,4}→6, d:{4,5}→7; initially {1,2,3,5}.
inline PNet marked_pnet_figure() {
  std::map<Name, bool> places{{"1", false}, {"2", false}, {"3", false}, {"4", true},
                              {"5", false}, {"6", false}, {"7", false}};
  std::map<Name, PNet::TransitionSpec> ts{{"a", {{"1"}, {"4"}}},
                                          {"b", {{"2"}, {"4"}}},
                                          {"c", {{"3", "4"}, {"6"}}},
                                          {"d", {{"4", "5"}, {"7"}}}};
  return PNet(places, ts, Bag{{"1", 1}, {"2", 1}, {"3", 1}, {"5", 1}});
}

/// t_3 : neg:3 → ({t_b : 2 → (∅,{4})}, {neg:5}),  t_c : {2,3} → (∅, {5, neg:4});  bag {2, neg:3}.
inline DynamicPNet dynamic_figure() {
  auto tb = make_dyn_transition("t_b", {"2"}, DynamicPNet{{}, Bag{{"4", 1}}});
  auto t3 = make_dyn_transition("t_3", {"neg:3"}, DynamicPNet{{tb}, Bag{{"neg:5", kInf}}});
  auto tc = make_dyn_transition("t_c", {"2", "3"}, DynamicPNet{{}, Bag{{"5", 1}, {"neg:4", kInf}}});
  DynamicPNet n{{t3, tc}, Bag{{"2", 1}, {"neg:3", kInf}}};
  normalize_transitions(n.transitions);
  return n;
}

/// One rule of the encoding figure of net_b: preset, released rules (figure labels), bag.
struct FigureRule {
  NameSet preset;
  std::vector<std::string> nested;
  Bag bag;
};

inline std::map<std::string, FigureRule> net_b_figure() {
  const Count I = kInf;
  return {
      {"t_a", {{"1"}, {}, Bag{{"3", 1}, {"neg:6", I}}}},
      {"t_d", {{"1"}, {}, Bag{{"6", 1}, {"neg:3", I}}}},
      {"t_1", {{"neg:1"}, {}, Bag{{"neg:3", I}, {"neg:6", I}}}},
      {"t_e", {{"7"}, {}, Bag{{"8", 1}, {"neg:9", I}}}},
      {"t_f", {{"7"}, {}, Bag{{"9", 1}, {"neg:8", I}}}},
      {"t_7", {{"neg:7"}, {}, Bag{{"neg:8", I}, {"neg:9", I}}}},
      {"t_bg", {{"2", "3", "8"}, {}, Bag{{"4", 1}, {"10", 1}, {"neg:5", I}}}},
      {"t_c", {{"2", "3", "8"}, {}, Bag{{"5", 1}, {"neg:4", I}, {"neg:10", I}}}},
      {"t_2", {{"neg:2"}, {"t_g", "t'_8"}, Bag{{"neg:4", I}, {"neg:5", I}}}},
      {"t_3", {{"neg:3"}, {"t_b", "t'_2", "t_g", "t'_8"}, Bag{{"neg:5", I}}}},
      {"t_8", {{"neg:8"}, {"t_b", "t'_2"}, Bag{{"neg:5", I}, {"neg:10", I}}}},
      {"t_b", {{"2"}, {}, Bag{{"4", 1}}}},
      {"t'_2", {{"neg:2"}, {}, Bag{{"neg:4", I}}}},
      {"t_g", {{"8"}, {}, Bag{{"10", 1}}}},
      {"t'_8", {{"neg:8"}, {}, Bag{{"neg:10", I}}}},
  };
}

inline const std::vector<std::string> kFigureTopLevel{"t_a", "t_d", "t_1", "t_e", "t_f", "t_7",
                                                      "t_bg", "t_c", "t_2", "t_3", "t_8"};

/// Empty when the encoding of net_b equals the figure under the name map, else the first difference.
inline std::string figure_mismatch(const Encoding& enc) {
  auto names = net_b_names();
  auto fig = net_b_figure();
  auto all = all_transitions(enc.net);
  if (all.size() != fig.size()) return "expected " + std::to_string(fig.size()) + " rules, got " + std::to_string(all.size());
  for (const auto& [label, want] : fig) {
    auto it = all.find(names.at(label));
    if (it == all.end()) return label + " is missing";
    const auto& t = *it->second;
    if (t.preset != want.preset) return label + " has preset {" + join(t.preset) + "}";
    if (t.post.bag != want.bag) return label + " has bag " + to_string(t.post.bag);
    NameSet nested, want_nested;
    for (const auto& u : t.post.transitions) nested.insert(u->name);
    for (const auto& l : want.nested) want_nested.insert(names.at(l));
    if (nested != want_nested) return label + " releases {" + join(nested) + "}";
  }
  NameSet top, want_top;
  for (const auto& t : enc.net.transitions) top.insert(t->name);
  for (const auto& l : kFigureTopLevel) want_top.insert(names.at(l));
  if (top != want_top) return "top-level rules {" + join(top) + "}";
  if (enc.net.bag != (Bag{{"1", 1}, {"2", 1}, {"7", 1}})) return "initial bag " + to_string(enc.net.bag);
  return "";
}

inline const NameSet kFigureRegular{"2", "3", "4", "5"};
inline const NameSet kFigurePersistent{"neg:3", "neg:4", "neg:5"};

}  // namespace confree::testing
