#pragma once

#include <vector>

#include "confree/ab_oracle.hpp"
#include "confree/encoder.hpp"
#include "confree/processes.hpp"
#include "confree/report.hpp"
#include "confree/semantics.hpp"

namespace confree {

/// Complete concurrency over every maximal process of the net.
inline CertReport check_processes_concurrent(const PNet& net, std::size_t budget = kDefaultBudget) {
  Stopwatch sw;
  CertReport r;
  r.check = "complete-concurrency";
  r.pass = true;
  auto procs = enumerate_maximal_processes(net, budget);
  for (const auto& p : procs) {
    auto one = check_complete_concurrency(p, budget);
    r.states_explored += one.states_explored;
    if (!one.pass) {
      r.pass = false;
      r.witness = Json{{"process", p.transitions()}, {"detail", one.witness}};
      break;
    }
  }
  r.details = Json{{"processes", procs.size()}};
  r.elapsed_ms = sw.ms();
  return r;
}

/// The certificate suite for an occurrence net, run on its pruned uniformed net.
inline std::vector<CertReport> verify_all(const OccurrenceNet& source,
                                          std::size_t budget = kDefaultBudget) {
  auto c = compile(source, true);
  ExploreOptions opt{budget};
  return {check_safety(c.net, opt),
          check_confusion_free(c.net, opt),
          check_exclusion(c.net, &c.encoding, opt),
          check_dyn_flat_bisim(c.encoding, budget),
          check_correspondence(source, budget),
          check_processes_concurrent(c.net, budget)};
}

/// The subset that makes sense for a p-net given directly.
inline std::vector<CertReport> verify_all(const PNet& net, std::size_t budget = kDefaultBudget) {
  ExploreOptions opt{budget};
  return {check_safety(net, opt), check_confusion_free(net, opt), check_exclusion(net, nullptr, opt),
          check_processes_concurrent(net, budget)};
}

}  // namespace confree
