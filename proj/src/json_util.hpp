#pragma once

#include <string>

#include <json.hpp>

namespace smlab::detail {

/// Serialises with every floating-point number printed to 17 significant digits.
std::string dump17(const nlohmann::json& j, int indent = 2);

std::string format17(double x);

}  // namespace smlab::detail
