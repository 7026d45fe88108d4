#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "confree/generator.hpp"
#include "confree/io.hpp"
#include "confree/probability.hpp"
#include "confree/verify.hpp"

using namespace confree;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationFailure : std::runtime_error {
  ValidationReport report;
  explicit ValidationFailure(ValidationReport r)
      : std::runtime_error("input is not an occurrence net"), report(std::move(r)) {}
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw UsageError("cannot write " + out);
  f << text;
}

void emit(const Json& j, const std::string& out) { emit(j.dump(2) + "\n", out); }

OccurrenceNet load_occurrence(const std::string& path) {
  auto any = parse_any(read_file(path));
  if (!std::holds_alternative<OccurrenceNet>(any))
    throw UsageError(path + " holds a p-net; this command needs an occurrence net");
  auto net = std::get<OccurrenceNet>(any);
  auto rep = validate_occurrence_net(net);
  if (!rep.ok()) throw ValidationFailure(rep);
  return net;
}

std::string format_for(const std::string& requested, const std::string& out) {
  if (!requested.empty()) return requested;
  auto ends = [&](const std::string& suf) {
    return out.size() >= suf.size() && out.compare(out.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (ends(".net")) return "native";
  if (ends(".dot")) return "dot";
  return "pnml";
}

std::string render(const PNet& net, const std::string& format) {
  if (format == "native") return write_native(net);
  if (format == "dot") return write_dot(net);
  return write_pnml(net);
}

std::string render(const OccurrenceNet& net, const std::string& format) {
  if (format == "native") return write_native(net);
  if (format == "dot") return write_dot(net);
  return write_pnml(net);
}

Json cells_json(const OccurrenceNet& net) {
  Json cells = Json::array();
  for (const auto& c : scell_decomposition(net)) {
    Json ths = Json::array();
    for (const auto& th : transactions(c))
      ths.push_back(Json{{"transitions", th.transitions},
                         {"min", names_json(th.min_places)},
                         {"max", names_json(th.max_places)}});
    cells.push_back(Json{{"transitions", c.transitions},
                         {"places", names_json(c.places)},
                         {"min", names_json(c.min)},
                         {"max", names_json(c.max)},
                         {"transactions", ths}});
  }
  return Json{{"version", kVersion}, {"cells", cells}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compiler and analysis workbench for occurrence nets and persistent nets"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string input, output, format, weights = "uniform";
  bool no_prune = false, expand = false, no_timing = false;
  std::size_t budget = kDefaultBudget, samples = 0;
  std::uint64_t seed = 0;
  int max_t = 12, max_w = 3;

  auto* transform = app.add_subcommand("transform", "compile an occurrence net into its uniformed p-net");
  transform->add_option("input", input, "occurrence net (PNML or native text)")->required();
  transform->add_flag("--no-prune", no_prune, "keep transitions that can never fire");
  transform->add_flag("--expand", expand, "expand non-atomic transactions into their processes");
  transform->add_option("-o,--output", output, "output file (default stdout)");
  transform->add_option("--format", format, "pnml, native or dot (default from -o, else pnml)")
      ->check(CLI::IsMember({"pnml", "native", "dot"}));

  auto* cells = app.add_subcommand("cells", "s-cells and their transactions");
  cells->add_option("input", input)->required();
  cells->add_option("-o,--output", output);

  auto* verify = app.add_subcommand("verify", "run the certificate suite; exit 0 iff all pass");
  verify->add_option("input", input)->required();
  verify->add_option("-o,--output", output);
  verify->add_option("--budget", budget, "state budget per check");
  verify->add_flag("--no-timing", no_timing, "omit elapsed_ms for byte-stable output");

  auto* processes = app.add_subcommand("processes", "maximal processes of the uniformed net, with DOT");
  processes->add_option("input", input)->required();
  processes->add_option("-o,--output", output);
  processes->add_option("--budget", budget);

  auto* prob = app.add_subcommand("prob", "exact process probabilities");
  prob->add_option("input", input)->required();
  prob->add_option("--weights", weights, "JSON file of \"p->t\": \"num/den\", or 'uniform'");
  prob->add_option("--samples", samples, "Monte-Carlo runs to draw");
  prob->add_option("--seed", seed, "sampling seed");
  prob->add_option("-o,--output", output);

  auto* gen = app.add_subcommand("gen", "seeded random occurrence net");
  gen->add_option("--seed", seed)->required();
  gen->add_option("--max-transitions", max_t)->check(CLI::PositiveNumber);
  gen->add_option("--max-width", max_w)->check(CLI::PositiveNumber);
  gen->add_option("-o,--output", output);
  gen->add_option("--format", format)->check(CLI::IsMember({"pnml", "native", "dot"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    Json err{{"version", kVersion}, {"error", {{"kind", "usage"}, {"message", e.what()}}}};
    std::cout << err.dump(2) << "\n";
    return 2;
  }

  try {
    if (*transform) {
      auto net = load_occurrence(input);
      auto c = compile(net, !no_prune, expand);
      emit(render(c.net, format_for(format, output)), output);
      return 0;
    }
    if (*cells) {
      emit(cells_json(load_occurrence(input)), output);
      return 0;
    }
    if (*verify) {
      auto any = parse_any(read_file(input));
      std::vector<CertReport> reports;
      if (auto* on = std::get_if<OccurrenceNet>(&any)) {
        auto rep = validate_occurrence_net(*on);
        if (!rep.ok()) throw ValidationFailure(rep);
        reports = verify_all(*on, budget);
      } else {
        reports = verify_all(std::get<PNet>(any), budget);
      }
      bool all = true;
      Json checks = Json::array();
      for (const auto& r : reports) {
        all = all && r.pass;
        checks.push_back(to_json(r, !no_timing));
      }
      emit(Json{{"version", kVersion}, {"verdict", all ? "pass" : "fail"}, {"checks", checks}}, output);
      return all ? 0 : 1;
    }
    if (*processes) {
      auto c = compile(load_occurrence(input));
      Json list = Json::array();
      for (const auto& p : enumerate_maximal_processes(c.net, budget)) {
        Json j = process_json(p);
        j["dot"] = write_dot(p.net, "process");
        list.push_back(j);
      }
      emit(Json{{"version", kVersion}, {"processes", list}}, output);
      return 0;
    }
    if (*prob) {
      auto net = load_occurrence(input);
      auto c = compile(net);
      ArcWeights w = weights == "uniform" ? uniform_weights(net)
                                          : parse_weights(Json::parse(read_file(weights)));
      auto d = local_distribution(c.encoding, w);
      auto procs = enumerate_maximal_processes(c.net);
      Rational total = 0;
      Json list = Json::array();
      std::map<NameSet, std::size_t> hits;
      if (samples > 0) {
        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < samples; ++i) ++hits[sample_run(c.net, d, c.encoding, rng).process];
      }
      for (const auto& p : procs) {
        auto v = process_probability(p, d, c.encoding);
        total += v;
        Json j{{"transitions", p.transitions()}, {"probability", to_string(v)}};
        if (samples > 0) {
          auto ts = p.transitions();
          j["frequency"] = static_cast<double>(hits[NameSet(ts.begin(), ts.end())]) / samples;
        }
        list.push_back(j);
      }
      Json out{{"version", kVersion},
               {"distribution", distribution_json(d)},
               {"processes", list},
               {"total", to_string(total)}};
      if (samples > 0) out["sampling"] = Json{{"samples", samples}, {"seed", seed}};
      emit(out, output);
      return 0;
    }
    if (*gen) {
      auto net = random_occurrence_net(seed, {max_t, max_w});
      emit(render(net, format.empty() && output.empty() ? "native" : format_for(format, output)), output);
      return 0;
    }
  } catch (const ValidationFailure& e) {
    Json v = Json::array();
    for (const auto& x : e.report.violations) v.push_back(Json{{"kind", x.kind}, {"nodes", x.nodes}});
    std::cout << Json{{"version", kVersion},
                      {"error", {{"kind", "validation"}, {"message", e.what()}, {"violations", v}}}}
                     .dump(2)
              << "\n";
    return 3;
  } catch (const ParseError& e) {
    std::cout << Json{{"version", kVersion}, {"error", {{"kind", "parse"}, {"message", e.what()}}}}.dump(2)
              << "\n";
    return 3;
  } catch (const BudgetExceeded& e) {
    std::cout << Json{{"version", kVersion}, {"error", {{"kind", "budget"}, {"message", e.what()}}}}.dump(2)
              << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cout << Json{{"version", kVersion}, {"error", {{"kind", "error"}, {"message", e.what()}}}}.dump(2)
              << "\n";
    return 2;
  }
  return 2;
}
