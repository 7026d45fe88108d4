#pragma once

#include <chrono>
#include <cstddef>
#include <string>

#include <json.hpp>

#include "confree/net_model.hpp"

namespace confree {

inline constexpr const char* kVersion = "confree 1.0.0";

using Json = nlohmann::ordered_json;

/// Outcome of one certificate check.
struct CertReport {
  std::string check;
  bool pass = false;
  Json witness;  // null when absent
  std::size_t states_explored = 0;
  double elapsed_ms = 0.0;
  Json details;  // optional extra payload
};

inline Json to_json(const CertReport& r, bool timing = true) {
  Json j;
  j["version"] = kVersion;
  j["check"] = r.check;
  j["verdict"] = r.pass ? "pass" : "fail";
  if (!r.witness.is_null()) j["witness"] = r.witness;
  j["states_explored"] = r.states_explored;
  if (timing) j["elapsed_ms"] = r.elapsed_ms;
  if (!r.details.is_null()) j["details"] = r.details;
  return j;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline Json bag_json(const Bag& b) {
  Json j = Json::object();
  for (const auto& [p, c] : b.entries()) {
    if (c == kInf)
      j[p] = "inf";
    else
      j[p] = c;
  }
  return j;
}

inline Json names_json(const NameSet& s) { return Json(std::vector<Name>(s.begin(), s.end())); }

}  // namespace confree
