#include "tamed/csv.hpp"

#include <cmath>
#include <cstdio>

namespace tamed::csv {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

void write_seed_comment(std::ostream& out, std::uint64_t seed) {
    out << "# seed=" << seed << '\n';
}

void write_row(std::ostream& out, std::initializer_list<std::string> fields) {
    bool first = true;
    for (const auto& f : fields) {
        if (!first) out << ',';
        out << escape(f);
        first = false;
    }
    out << '\n';
}

}  // namespace tamed::csv
