#ifndef PSS_FIELD_IO_HPP
#define PSS_FIELD_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "pss/grid.hpp"

namespace pss {

class FieldFormatError : public std::runtime_error {
public:
    FieldFormatError(const std::string& what, std::size_t line)
        : std::runtime_error("pssfield line " + std::to_string(line) + ": " + what), line(line) {}
    std::size_t line;
};

// m per-node components on one chart, as stored in a `pssfield v1` file.
struct FieldBundle {
    GridChart chart;
    std::vector<std::vector<double>> components;

    std::size_t component_count() const { return components.size(); }
    ScalarField scalar(std::size_t c) const { return ScalarField(chart, components.at(c)); }
};

// Header line
//   pssfield v1; dim=<n>; counts=<c1,...>; origin=<...>; spacing=<...>; components=<m>
// followed by one line per node in row-major order (last axis fastest) with
// m space-separated values printed with 17 significant digits.
void write_pssfield(std::ostream& os, const FieldBundle& bundle);
FieldBundle read_pssfield(std::istream& is);

void save_pssfield(const std::filesystem::path& path, const FieldBundle& bundle);
FieldBundle load_pssfield(const std::filesystem::path& path);

FieldBundle bundle_of(const ScalarField& f);
FieldBundle bundle_of(const OneFormField& f);
OneFormField oneform_of(const FieldBundle& b, std::size_t first_component = 0);

// Locale-independent shortest-exact decimal formatting used by every text output.
std::string format_real(double v);

} // namespace pss

#endif // PSS_FIELD_IO_HPP
