#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "sglasso/matrix.hpp"

namespace sglasso {

/// Shortest-exact decimal is not required; 17 significant digits always
/// round-trips an IEEE double.
std::string format_double(double v);

/// Row-major, header-free CSV.
std::string matrix_to_csv(const Matrix& m);
Matrix matrix_from_csv(const std::string& text);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace sglasso
