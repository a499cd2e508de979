#include "benjctl/io.hpp"

#include <cmath>
#include <fstream>

#include "benjctl/errors.hpp"

namespace benjctl {

nlohmann::json coefficients_to_json(const Eigen::VectorXcd& coeffs) {
  const int n = static_cast<int>(coeffs.size() / 2);
  nlohmann::json out = nlohmann::json::array();
  for (int k = -n; k <= n; ++k) out.push_back({k, coeffs[k + n].real(), coeffs[k + n].imag()});
  return out;
}

nlohmann::json to_json(const TorusFunction& f) { return coefficients_to_json(f.coefficients()); }

Eigen::VectorXcd coefficients_from_json(const nlohmann::json& j, int min_order) {
  if (!j.is_array()) throw ValidationError("coefficient list must be a JSON array of [k, re, im]");
  int n = std::max(0, min_order);
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number() || !e[2].is_number()) {
      throw ValidationError("coefficient entries must be [k, re, im] with integer k");
    }
    n = std::max(n, std::abs(e[0].get<int>()));
  }
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(2 * n + 1);
  for (const auto& e : j) c[e[0].get<int>() + n] += Complex(e[1].get<double>(), e[2].get<double>());
  return c;
}

TorusFunction torus_function_from_json(const nlohmann::json& j, bool real, int min_order) {
  return TorusFunction::from_coefficients(coefficients_from_json(j, min_order), real);
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace benjctl
