#pragma once

#include <optional>
#include <string>

#include <json.hpp>

namespace signspot::cli {

/// Rounds every floating-point value to 9 significant digits.
nlohmann::json round_reals(const nlohmann::json& j);

/// Canonical report text: sorted keys, 9 significant digits, trailing newline.
std::string render_report(const nlohmann::json& j);

/// Number or null.
nlohmann::json optional_number(const std::optional<double>& v);

/// Threshold as it appears in metric names ("0.1", "0", "0.25").
std::string format_threshold(double x);

}  // namespace signspot::cli
