#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "confree/net_model.hpp"
#include "confree/semantics.hpp"
#include "confree/structure.hpp"

namespace confree {

using AnyNet = std::variant<OccurrenceNet, PNet>;

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Native text format

inline std::string write_native(const OccurrenceNet& net) {
  std::ostringstream out;
  out << "occurrence-net\n";
  for (int p = 0; p < net.num_places(); ++p)
    out << "place " << net.place(p) << (net.marked(p) ? " marked" : "") << "\n";
  for (const auto& t : net.transitions()) out << "transition " << t << "\n";
  for (const auto& [a, b] : net.flow()) out << "arc " << a << " " << b << "\n";
  return out.str();
}

inline std::string write_native(const PNet& net) {
  std::ostringstream out;
  out << "p-net\n";
  for (int p = 0; p < net.num_places(); ++p)
    out << "place " << net.place(p) << (net.persistent(p) ? " persistent " : " regular ")
        << count_string(net.initial_counts()[p]) << "\n";
  for (const auto& t : net.transitions()) out << "transition " << t << "\n";
  for (int t = 0; t < net.num_transitions(); ++t) {
    for (int p : net.pre(t)) out << "arc " << net.place(p) << " " << net.transition(t) << "\n";
    for (int p : net.post(t)) out << "arc " << net.transition(t) << " " << net.place(p) << "\n";
  }
  return out.str();
}

inline std::string write_native(const AnyNet& n) {
  return std::visit([](const auto& x) { return write_native(x); }, n);
}

inline AnyNet parse_native(const std::string& text) {
  std::istringstream in(text);
  std::string line, kind;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ParseError("line " + std::to_string(lineno) + ": " + msg);
  };
  std::vector<std::vector<std::string>> rows;
  std::vector<int> rowlines;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::vector<std::string> words;
    for (std::string w; ls >> w;) words.push_back(w);
    if (words.empty()) continue;
    if (kind.empty()) {
      if (words.size() != 1 || (words[0] != "occurrence-net" && words[0] != "p-net"))
        fail("expected header 'occurrence-net' or 'p-net'");
      kind = words[0];
      continue;
    }
    rows.push_back(words);
    rowlines.push_back(lineno);
  }
  if (kind.empty()) throw ParseError("empty input: missing header");
  NameSet places, transitions, marked;
  std::map<Name, bool> pkinds;
  Bag init;
  std::vector<Arc> arcs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& w = rows[i];
    lineno = rowlines[i];
    if (w[0] == "place") {
      if (w.size() < 2) fail("place needs a name");
      if (places.count(w[1])) fail("duplicate place " + w[1]);
      places.insert(w[1]);
      if (kind == "occurrence-net") {
        if (w.size() == 2) continue;
        if (w.size() != 3) fail("malformed place line");
        if (w[2] == "marked" || w[2] == "1")
          marked.insert(w[1]);
        else if (w[2] != "0")
          fail("multiset initial markings are not allowed (place " + w[1] + ")");
      } else {
        if (w.size() != 4 || (w[2] != "regular" && w[2] != "persistent"))
          fail("expected: place <name> regular|persistent <tokens>");
        bool pers = w[2] == "persistent";
        pkinds[w[1]] = pers;
        Count c = 0;
        if (w[3] == "inf") {
          c = kInf;
        } else {
          try {
            c = static_cast<Count>(std::stoul(w[3]));
          } catch (const std::exception&) {
            fail("bad token count '" + w[3] + "'");
          }
        }
        if (pers && c != 0 && c != kInf) fail("persistent place " + w[1] + " must hold 0 or inf");
        init.set(w[1], c);
      }
    } else if (w[0] == "transition") {
      if (w.size() != 2) fail("expected: transition <name>");
      if (transitions.count(w[1])) fail("duplicate transition " + w[1]);
      transitions.insert(w[1]);
    } else if (w[0] == "arc") {
      if (w.size() != 3) fail("expected: arc <from> <to>");
      arcs.emplace_back(w[1], w[2]);
    } else {
      fail("unknown keyword '" + w[0] + "'");
    }
  }
  try {
    if (kind == "occurrence-net") return OccurrenceNet(places, transitions, arcs, marked);
    std::map<Name, PNet::TransitionSpec> ts;
    for (const auto& t : transitions) ts[t] = {};
    for (const auto& [a, b] : arcs) {
      if (pkinds.count(a) && ts.count(b))
        ts[b].preset.insert(a);
      else if (ts.count(a) && pkinds.count(b))
        ts[a].postset.insert(b);
      else
        throw std::invalid_argument("arc " + a + " -> " + b + " must join a place and a transition");
    }
    return PNet(pkinds, ts, init);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

// ---------------------------------------------------------------------------
// PNML

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline constexpr const char* kTool = "confree";

inline void pnml_header(std::ostringstream& out, bool pnet) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<pnml xmlns=\"http://www.pnml.org/version-2009/grammar/pnml\">\n"
      << "  <net id=\"net0\" type=\"http://www.pnml.org/version-2009/grammar/ptnet\">\n";
  if (pnet)
    out << "    <toolspecific tool=\"" << kTool << "\" version=\"1\"><kind>p-net</kind></toolspecific>\n";
  out << "    <page id=\"page0\">\n";
}

inline void pnml_footer(std::ostringstream& out) { out << "    </page>\n  </net>\n</pnml>\n"; }

inline void pnml_place(std::ostringstream& out, const std::string& id, const Name& name,
                       Count tokens, const std::string& annotation) {
  out << "      <place id=\"" << id << "\">\n"
      << "        <name><text>" << xml_escape(name) << "</text></name>\n";
  if (tokens > 0)
    out << "        <initialMarking><text>" << (tokens == kInf ? 1 : tokens)
        << "</text></initialMarking>\n";
  if (!annotation.empty())
    out << "        <toolspecific tool=\"" << kTool << "\" version=\"1\">" << annotation
        << "</toolspecific>\n";
  out << "      </place>\n";
}

inline void pnml_transition(std::ostringstream& out, const std::string& id, const Name& name) {
  out << "      <transition id=\"" << id << "\">\n"
      << "        <name><text>" << xml_escape(name) << "</text></name>\n"
      << "      </transition>\n";
}

inline void pnml_arc(std::ostringstream& out, int& counter, const std::string& src,
                     const std::string& dst) {
  out << "      <arc id=\"a" << counter++ << "\" source=\"" << src << "\" target=\"" << dst
      << "\"/>\n";
}

}  // namespace detail

inline std::string write_pnml(const OccurrenceNet& net) {
  std::ostringstream out;
  detail::pnml_header(out, false);
  for (int p = 0; p < net.num_places(); ++p)
    detail::pnml_place(out, "p" + std::to_string(p), net.place(p), net.marked(p) ? 1 : 0, "");
  for (int t = 0; t < net.num_transitions(); ++t)
    detail::pnml_transition(out, "t" + std::to_string(t), net.transition(t));
  int k = 0;
  for (int t = 0; t < net.num_transitions(); ++t) {
    for (int p : net.pre(t)) detail::pnml_arc(out, k, "p" + std::to_string(p), "t" + std::to_string(t));
    for (int p : net.post(t)) detail::pnml_arc(out, k, "t" + std::to_string(t), "p" + std::to_string(p));
  }
  detail::pnml_footer(out);
  return out.str();
}

/// Persistent places read as self-loops; each persistent transition gets a one-shot guard place.
inline std::string write_pnml(const PNet& net) {
  std::ostringstream out;
  detail::pnml_header(out, true);
  auto pid = [&](int p) { return (net.persistent(p) ? "ps" : "p") + std::to_string(p); };
  for (int p = 0; p < net.num_places(); ++p)
    detail::pnml_place(out, pid(p), net.place(p), net.initial_counts()[p],
                       net.persistent(p) ? "<persistent/>" : "");
  for (int t = 0; t < net.num_transitions(); ++t)
    if (net.persistent_transition(t))
      detail::pnml_place(out, "g" + std::to_string(t), "guard:" + net.transition(t), 1,
                         "<guard transition=\"t" + std::to_string(t) + "\"/>");
  for (int t = 0; t < net.num_transitions(); ++t)
    detail::pnml_transition(out, "t" + std::to_string(t), net.transition(t));
  int k = 0;
  for (int t = 0; t < net.num_transitions(); ++t) {
    std::string tid = "t" + std::to_string(t);
    if (net.persistent_transition(t)) detail::pnml_arc(out, k, "g" + std::to_string(t), tid);
    for (int p : net.pre(t)) {
      detail::pnml_arc(out, k, pid(p), tid);
      if (net.persistent(p)) detail::pnml_arc(out, k, tid, pid(p));
    }
    for (int p : net.post(t)) {
      bool loop = net.persistent(p) && std::binary_search(net.pre(t).begin(), net.pre(t).end(), p);
      if (!loop) detail::pnml_arc(out, k, tid, pid(p));
    }
  }
  detail::pnml_footer(out);
  return out.str();
}

inline std::string write_pnml(const AnyNet& n) {
  return std::visit([](const auto& x) { return write_pnml(x); }, n);
}

inline AnyNet parse_pnml(const std::string& bytes) {
  namespace pt = boost::property_tree;
  pt::ptree doc;
  try {
    std::istringstream in(bytes);
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("line " + std::to_string(e.line()) + ": " + e.message());
  }
  auto pnml = doc.get_child_optional("pnml");
  if (!pnml) throw ParseError("missing <pnml> root element");
  auto netnode = pnml->get_child_optional("net");
  if (!netnode) throw ParseError("missing <net> element");

  auto tool_child = [](const pt::ptree& node, const std::string& what) -> const pt::ptree* {
    for (const auto& [tag, child] : node) {
      if (tag != "toolspecific") continue;
      if (child.get<std::string>("<xmlattr>.tool", "") != detail::kTool) continue;
      if (auto c = child.get_child_optional(what)) return &*c;
    }
    return nullptr;
  };
  bool is_pnet = false;
  if (const auto* k = tool_child(*netnode, "kind")) is_pnet = k->get_value<std::string>() == "p-net";

  struct PlaceRec {
    Name name;
    Count tokens = 0;
    bool persistent = false;
    bool guard = false;
  };
  std::map<std::string, PlaceRec> places;
  std::map<std::string, Name> transitions;
  std::vector<std::pair<std::string, std::string>> arcs;

  std::function<void(const pt::ptree&)> collect = [&](const pt::ptree& node) {
    for (const auto& [tag, child] : node) {
      if (tag == "page") {
        collect(child);
        continue;
      }
      if (tag != "place" && tag != "transition" && tag != "arc") continue;
      auto id = child.get<std::string>("<xmlattr>.id", "");
      if (id.empty()) throw ParseError("<" + tag + "> without id");
      if (tag == "arc") {
        auto src = child.get<std::string>("<xmlattr>.source", "");
        auto dst = child.get<std::string>("<xmlattr>.target", "");
        if (src.empty() || dst.empty()) throw ParseError("arc " + id + " lacks source or target");
        if (auto w = child.get_optional<std::string>("inscription.text"); w && *w != "1")
          throw ParseError("arc " + id + " has weight " + *w + "; weighted arcs are not supported");
        arcs.emplace_back(src, dst);
        continue;
      }
      if (places.count(id) || transitions.count(id)) throw ParseError("duplicate id " + id);
      auto name = child.get<std::string>("name.text", id);
      if (tag == "transition") {
        transitions[id] = name;
        continue;
      }
      PlaceRec rec;
      rec.name = name;
      if (auto m = child.get_optional<std::string>("initialMarking.text")) {
        try {
          rec.tokens = static_cast<Count>(std::stoul(*m));
        } catch (const std::exception&) {
          throw ParseError("place " + id + " has a bad initial marking '" + *m + "'");
        }
      }
      rec.persistent = id.rfind("ps", 0) == 0 || tool_child(child, "persistent") != nullptr;
      rec.guard = tool_child(child, "guard") != nullptr;
      places[id] = rec;
    }
  };
  collect(*netnode);

  std::map<std::string, std::set<std::string>> pre, post;  // by transition id
  for (const auto& [src, dst] : arcs) {
    if (places.count(src) && transitions.count(dst)) {
      pre[dst].insert(src);
    } else if (transitions.count(src) && places.count(dst)) {
      post[src].insert(dst);
    } else {
      throw ParseError("arc " + src + " -> " + dst + " must join a place and a transition");
    }
  }
  bool any_persistent = false;
  for (const auto& [id, rec] : places) any_persistent = any_persistent || rec.persistent;
  is_pnet = is_pnet || any_persistent;

  try {
    if (!is_pnet) {
      NameSet ps, ts, marked;
      std::vector<Arc> flow;
      for (const auto& [id, rec] : places) {
        ps.insert(rec.name);
        if (rec.tokens > 1) throw ParseError("place " + id + ": multiset initial markings are not allowed");
        if (rec.tokens == 1) marked.insert(rec.name);
      }
      for (const auto& [id, name] : transitions) ts.insert(name);
      for (const auto& [src, dst] : arcs)
        flow.emplace_back(places.count(src) ? places[src].name : transitions[src],
                          places.count(dst) ? places[dst].name : transitions[dst]);
      return OccurrenceNet(ps, ts, flow, marked);
    }
    std::map<Name, bool> kinds;
    Bag init;
    for (const auto& [id, rec] : places) {
      if (rec.guard) continue;
      kinds[rec.name] = rec.persistent;
      if (rec.tokens > 0) init.set(rec.name, rec.persistent ? kInf : rec.tokens);
    }
    std::map<Name, PNet::TransitionSpec> ts;
    for (const auto& [tid, tname] : transitions) {
      PNet::TransitionSpec spec;
      for (const auto& pid : pre[tid]) {
        const auto& rec = places[pid];
        if (rec.guard) continue;
        if (rec.persistent && !post[tid].count(pid))
          throw ParseError("persistent place " + pid + " is read by " + tid + " without a back-arc");
        spec.preset.insert(rec.name);
      }
      for (const auto& pid : post[tid]) {
        const auto& rec = places[pid];
        if (rec.guard) throw ParseError("guard place " + pid + " must not be produced");
        if (rec.persistent && pre[tid].count(pid)) continue;
        spec.postset.insert(rec.name);
      }
      ts[tname] = spec;
    }
    return PNet(kinds, ts, init);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

/// PNML when the text starts with '<', native text otherwise.
inline AnyNet parse_any(const std::string& text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '<') return parse_pnml(text);
  return parse_native(text);
}

// ---------------------------------------------------------------------------
// DOT

namespace detail {

inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

inline std::string token_label(const Name& n, Count c) {
  if (c == 0) return n;
  return n + "\\n" + (c == kInf ? std::string("inf") : std::string(c <= 3 ? c : 0, '*') +
                                                            (c > 3 ? std::to_string(c) : ""));
}

}  // namespace detail

inline std::string write_dot(const PNet& net, const std::string& graph_name = "net") {
  std::ostringstream out;
  out << "digraph " << detail::dot_quote(graph_name) << " {\n";
  for (int p = 0; p < net.num_places(); ++p) {
    Count c = net.initial_counts()[p];
    out << "  " << detail::dot_quote("p:" + net.place(p)) << " [shape="
        << (net.persistent(p) ? "doublecircle" : "circle");
    if (c > 0) out << ", style=dotted";
    out << ", label=" << detail::dot_quote(detail::token_label(net.place(p), c)) << "];\n";
  }
  for (const auto& t : net.transitions())
    out << "  " << detail::dot_quote("t:" + t) << " [shape=box, label=" << detail::dot_quote(t)
        << "];\n";
  for (int t = 0; t < net.num_transitions(); ++t) {
    for (int p : net.pre(t))
      out << "  " << detail::dot_quote("p:" + net.place(p)) << " -> "
          << detail::dot_quote("t:" + net.transition(t)) << ";\n";
    for (int p : net.post(t))
      out << "  " << detail::dot_quote("t:" + net.transition(t)) << " -> "
          << detail::dot_quote("p:" + net.place(p)) << ";\n";
  }
  out << "}\n";
  return out.str();
}

inline std::string write_dot(const OccurrenceNet& net, const std::string& graph_name = "net") {
  return write_dot(as_pnet(net), graph_name);
}

inline std::string write_dot(const StateGraph& g, const PNet& net,
                             const std::string& graph_name = "states") {
  std::ostringstream out;
  out << "digraph " << detail::dot_quote(graph_name) << " {\n";
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    Bag b = net.to_bag(g.states[i].bag);
    out << "  s" << i << " [shape=" << (g.maximal[i] ? "doublecircle" : "circle")
        << ", label=" << detail::dot_quote(to_string(b)) << "];\n";
  }
  for (std::size_t i = 0; i < g.states.size(); ++i)
    for (auto [t, j] : g.edges[i])
      out << "  s" << i << " -> s" << j << " [label=" << detail::dot_quote(net.transition(t))
          << "];\n";
  out << "}\n";
  return out.str();
}

}  // namespace confree
