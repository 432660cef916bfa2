#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace signspot::cli {

using nlohmann::json;

json round_reals(const json& j) {
  if (j.is_number_float()) {
    const double x = j.get<double>();
    if (!std::isfinite(x)) return nullptr;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    const double r = std::strtod(buf, nullptr);
    return r == 0 ? 0.0 : r;  // no negative zero
  }
  if (j.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : j.items()) out[k] = round_reals(v);
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& v : j) out.push_back(round_reals(v));
    return out;
  }
  return j;
}

std::string render_report(const json& j) { return round_reals(j).dump(2) + "\n"; }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string format_threshold(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

}  // namespace signspot::cli
