#pragma once

#include <string>
#include <vector>

namespace sdml::detail {

// RFC-4180-style parse: quoted fields may hold commas, newlines and doubled
// quotes. A UTF-8 BOM and blank lines are dropped.
std::vector<std::vector<std::string>> parse_csv(const std::string& content);

std::string csv_escape(const std::string& field);

} // namespace sdml::detail
