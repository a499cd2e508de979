#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "benjctl/spectral.hpp"

namespace benjctl {

/// [[k, re, im], ...] for k = -n..n.
nlohmann::json coefficients_to_json(const Eigen::VectorXcd& coeffs);
nlohmann::json to_json(const TorusFunction& f);

/// Reads [[k, re, im], ...]; missing modes are zero, the order is max |k|
/// (at least min_order).  Throws ValidationError on malformed input.
Eigen::VectorXcd coefficients_from_json(const nlohmann::json& j, int min_order = 0);
TorusFunction torus_function_from_json(const nlohmann::json& j, bool real, int min_order = 0);

/// Writes a CSV file with a header row; values use 17 significant digits.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Writes pretty-printed JSON followed by a newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace benjctl
