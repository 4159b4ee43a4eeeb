#include "pss/field_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace pss {

std::string format_real(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_real(const std::string& tok, std::size_t line) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw FieldFormatError("bad number '" + tok + "'", line);
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        if constexpr (std::is_floating_point_v<T>) s += format_real(v[i]);
        else s += std::to_string(v[i]);
    }
    return s;
}

} // namespace

void write_pssfield(std::ostream& os, const FieldBundle& b) {
    const GridChart& c = b.chart;
    os << "pssfield v1; dim=" << c.dim() << "; counts=" << join(c.counts()) << "; origin=" << join(c.origin())
       << "; spacing=" << join(c.spacing()) << "; components=" << b.components.size() << '\n';
    for (std::size_t p = 0; p < c.size(); ++p) {
        for (std::size_t k = 0; k < b.components.size(); ++k) {
            if (k) os << ' ';
            os << format_real(b.components[k][p]);
        }
        os << '\n';
    }
}

FieldBundle read_pssfield(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw FieldFormatError("missing header", 1);
    const auto parts = split(header, ';');
    if (parts.empty() || parts[0] != "pssfield v1") throw FieldFormatError("expected 'pssfield v1' header", 1);

    std::size_t dim = 0, m = 0;
    std::vector<std::size_t> counts;
    std::vector<double> origin, spacing;
    bool seen[5] = {false, false, false, false, false};
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const auto eq = parts[i].find('=');
        if (eq == std::string::npos) throw FieldFormatError("malformed header field '" + parts[i] + "'", 1);
        const std::string key = trim(parts[i].substr(0, eq));
        const std::string val = trim(parts[i].substr(eq + 1));
        if (key == "dim") {
            dim = static_cast<std::size_t>(parse_real(val, 1));
            seen[0] = true;
        } else if (key == "counts") {
            for (const auto& t : split(val, ',')) counts.push_back(static_cast<std::size_t>(parse_real(t, 1)));
            seen[1] = true;
        } else if (key == "origin") {
            for (const auto& t : split(val, ',')) origin.push_back(parse_real(t, 1));
            seen[2] = true;
        } else if (key == "spacing") {
            for (const auto& t : split(val, ',')) spacing.push_back(parse_real(t, 1));
            seen[3] = true;
        } else if (key == "components") {
            m = static_cast<std::size_t>(parse_real(val, 1));
            seen[4] = true;
        } else {
            throw FieldFormatError("unknown header field '" + key + "'", 1);
        }
    }
    for (bool s : seen)
        if (!s) throw FieldFormatError("header must carry dim, counts, origin, spacing, components", 1);
    if (counts.size() != dim) throw FieldFormatError("counts length differs from dim", 1);

    FieldBundle b;
    try {
        b.chart = GridChart(origin, spacing, counts);
    } catch (const std::invalid_argument& e) {
        throw FieldFormatError(e.what(), 1);
    }
    b.components.assign(m, std::vector<double>(b.chart.size()));
    std::string line;
    for (std::size_t p = 0; p < b.chart.size(); ++p) {
        const std::size_t lineno = p + 2;
        if (!std::getline(is, line)) throw FieldFormatError("unexpected end of data", lineno);
        std::istringstream in(line);
        std::string tok;
        std::size_t k = 0;
        while (in >> tok) {
            if (k >= m) throw FieldFormatError("too many values", lineno);
            const double v = parse_real(tok, lineno);
            if (!std::isfinite(v)) throw FieldFormatError("non-finite value", lineno);
            b.components[k++][p] = v;
        }
        if (k != m) throw FieldFormatError("expected " + std::to_string(m) + " values", lineno);
    }
    return b;
}

void save_pssfield(const std::filesystem::path& path, const FieldBundle& bundle) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_pssfield(out, bundle);
}

FieldBundle load_pssfield(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return read_pssfield(in);
}

FieldBundle bundle_of(const ScalarField& f) { return FieldBundle{f.chart, {f.values}}; }

FieldBundle bundle_of(const OneFormField& f) {
    FieldBundle b{f.chart, {}};
    for (const auto& c : f.coeffs) b.components.push_back(c.values);
    return b;
}

OneFormField oneform_of(const FieldBundle& b, std::size_t first) {
    const std::size_t n = b.chart.dim();
    if (b.components.size() < first + n) throw std::invalid_argument("oneform_of: not enough components");
    std::vector<ScalarField> cs;
    for (std::size_t k = 0; k < n; ++k) cs.push_back(b.scalar(first + k));
    return OneFormField(std::move(cs));
}

} // namespace pss
