#pragma once

#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace tamed::csv {

/// 17 significant digits; "inf", "-inf", "nan" for non-finite values.
std::string format_double(double value);

/// Quotes a field if it contains a comma, quote or newline.
std::string escape(std::string_view field);

/// `# seed=<seed>` metadata line.
void write_seed_comment(std::ostream& out, std::uint64_t seed);

void write_row(std::ostream& out, std::initializer_list<std::string> fields);

}  // namespace tamed::csv
